#include <gtest/gtest.h>

#include <algorithm>
#include <complex>
#include <random>

#include "sapd/numerics.hpp"

using namespace sapd;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0, 1);
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = n(rng);
    return m;
}

SymMatrix random_sym(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0, 1);
    SymMatrix s(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) s.set(i, j, g(rng));
    return s;
}

std::vector<double> sorted_real(const std::vector<std::complex<double>>& ev) {
    std::vector<double> out;
    for (auto& z : ev) out.push_back(z.real());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST(SymEigen, IdentityAndDiagonal) {
    SymMatrix id(5);
    for (std::size_t i = 0; i < 5; ++i) id.set(i, i, 1.0);
    for (double v : sym_eigen(id)) EXPECT_DOUBLE_EQ(v, 1.0);

    SymMatrix d(2);
    d.set(0, 0, 1.0);
    d.set(1, 1, -1.0);
    const Vec ev = sym_eigen(d);
    EXPECT_DOUBLE_EQ(ev[0], -1.0);
    EXPECT_DOUBLE_EQ(ev[1], 1.0);
}

TEST(SymEigen, ReconstructionAndTrace) {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const Matrix a = random_matrix(5, 5, rng);
        const Matrix m = a + a.transpose();
        const SymEigen e = sym_eigen_full(m, true);
        const Matrix rec = e.vectors * Matrix::diag(e.values) * e.vectors.transpose();
        EXPECT_LE((rec - m).frobenius(), 1e-10 * m.frobenius());
        double tr = 0, sum = 0;
        for (std::size_t i = 0; i < 5; ++i) tr += m(i, i);
        for (double v : e.values) sum += v;
        EXPECT_NEAR(sum, tr, 1e-12 * std::max(1.0, m.frobenius()));
        const Matrix qtq = e.vectors.transpose() * e.vectors;
        EXPECT_LE((qtq - Matrix::identity(5)).frobenius(), 1e-10);
        EXPECT_TRUE(std::is_sorted(e.values.begin(), e.values.end()));
    }
}

TEST(SymEigen, PackedSolverAgreesWithDense) {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 100; ++rep) {
        const SymMatrix s = random_sym(5, rng);
        const Vec a = sym_eigen(s);
        const Vec b = sym_eigen_full(s.dense(), false).values;
        for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(a[i], b[i], 1e-10);
    }
}

TEST(SymEigen, RejectsNonFinite) {
    SymMatrix s(2);
    s.set(0, 1, std::nan(""));
    EXPECT_ANY_THROW(sym_eigen(s));
}

TEST(PsdMargin, Examples) {
    SymMatrix id(3);
    for (std::size_t i = 0; i < 3; ++i) id.set(i, i, 1.0);
    EXPECT_NEAR(psd_margin(id), 1.0, 1e-15);

    SymMatrix d(2);
    d.set(1, 1, 3.0);
    EXPECT_NEAR(psd_margin(d), 0.0, 1e-15);

    const Vec v{1.0, -2.0, 0.5, 3.0};
    SymMatrix r1(4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i; j < 4; ++j) r1.set(i, j, v[i] * v[j]);
    EXPECT_NEAR(psd_margin(r1), 0.0, 1e-12);
    EXPECT_TRUE(is_psd(r1));
}

TEST(Eig4, Diagonal) {
    const Matrix m = Matrix::diag({4.0, -1.0, 2.5, 0.0});
    const auto ev = sorted_real(eig4(m));
    const std::vector<double> want{-1.0, 0.0, 2.5, 4.0};
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(ev[i], want[i], 1e-12);
}

TEST(Eig4, RotationBlock) {
    const double phi = 0.7;
    Matrix m(4, 4);
    m(0, 0) = std::cos(phi);
    m(0, 1) = -std::sin(phi);
    m(1, 0) = std::sin(phi);
    m(1, 1) = std::cos(phi);
    const auto ev = eig4(m);
    int unit = 0, zero = 0;
    for (const auto& z : ev) {
        if (std::abs(std::abs(z) - 1.0) < 1e-12) {
            ++unit;
            EXPECT_NEAR(std::abs(std::arg(z)), phi, 1e-12);
        }
        if (std::abs(z) < 1e-12) ++zero;
    }
    EXPECT_EQ(unit, 2);
    EXPECT_EQ(zero, 2);
}

TEST(Eig4, ProductEqualsDeterminantAndSimilarityInvariance) {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        const Matrix m = random_matrix(4, 4, rng);
        const auto ev = eig4(m);
        std::complex<double> prod = 1.0;
        for (auto& z : ev) prod *= z;
        // Determinant via elimination on a copy.
        Matrix a = m;
        double det = 1.0;
        for (std::size_t k = 0; k < 4; ++k) {
            std::size_t p = k;
            for (std::size_t i = k + 1; i < 4; ++i)
                if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
            if (p != k) {
                for (std::size_t j = 0; j < 4; ++j) std::swap(a(k, j), a(p, j));
                det = -det;
            }
            det *= a(k, k);
            for (std::size_t i = k + 1; i < 4; ++i) {
                const double f = a(i, k) / a(k, k);
                for (std::size_t j = k; j < 4; ++j) a(i, j) -= f * a(k, j);
            }
        }
        EXPECT_NEAR(prod.real(), det, 1e-8 * std::max(1.0, std::abs(det)));
        EXPECT_NEAR(prod.imag(), 0.0, 1e-8 * std::max(1.0, std::abs(det)));

        // Similarity by a well-conditioned matrix keeps the spectrum.
        Matrix s = Matrix::identity(4) + random_matrix(4, 4, rng) * 0.2;
        Matrix sinv(4, 4);
        for (std::size_t j = 0; j < 4; ++j) {
            Vec e(4, 0.0);
            e[j] = 1.0;
            const Vec col = solve_linear(s, e);
            for (std::size_t i = 0; i < 4; ++i) sinv(i, j) = col[i];
        }
        auto e1 = eig4(m), e2 = eig4(s * m * sinv);
        auto key = [](const std::complex<double>& a, const std::complex<double>& b) {
            return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        };
        std::sort(e1.begin(), e1.end(), key);
        std::sort(e2.begin(), e2.end(), key);
        for (std::size_t i = 0; i < 4; ++i) EXPECT_LE(std::abs(e1[i] - e2[i]), 1e-7 * std::max(1.0, std::abs(e1[i])));
    }
}

TEST(SolveLinear, SimpleSystems) {
    const Vec b{1.0, 2.0, 3.0};
    const Vec x = solve_linear(Matrix::identity(3), b);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(x[i], b[i]);
    const Vec y = solve_linear(Matrix::diag({2.0, 4.0, 8.0}), b);
    EXPECT_DOUBLE_EQ(y[0], 0.5);
    EXPECT_DOUBLE_EQ(y[1], 0.5);
    EXPECT_DOUBLE_EQ(y[2], 0.375);
}

TEST(SolveLinear, RandomResiduals) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0, 1);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 1 + rep % 16;
        Matrix a = random_matrix(n, n, rng);
        for (std::size_t i = 0; i < n; ++i) a(i, i) += 3.0 * std::sqrt(static_cast<double>(n));
        Vec b(n);
        for (double& e : b) e = g(rng);
        const Vec x = solve_linear(a, b);
        const Vec r = a * x;
        double res = 0, bn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            res += (r[i] - b[i]) * (r[i] - b[i]);
            bn += b[i] * b[i];
        }
        EXPECT_LE(std::sqrt(res), 1e-10 * std::max(1.0, std::sqrt(bn)));
    }
}

TEST(SolveLinear, Singular) {
    const Matrix a{{1.0, 2.0}, {2.0, 4.0}};
    EXPECT_THROW(solve_linear(a, {1.0, 1.0}), SingularMatrixError);
}

TEST(SpectralNorm, Examples) {
    EXPECT_NEAR(spectral_norm(Matrix::diag({3.0, 1.0})), 3.0, 1e-12);
    EXPECT_EQ(spectral_norm(Matrix(4, 3)), 0.0);
    std::mt19937_64 rng(23);
    const Matrix m = random_matrix(20, 5, rng);
    const Vec ev = sym_eigen_full(m.transpose() * m, false).values;
    EXPECT_NEAR(spectral_norm(m), std::sqrt(ev.back()), 1e-8);
}

TEST(Kron, Shape) {
    const Matrix a{{1, 2}, {3, 4}};
    const Matrix k = kron(a, Matrix::identity(2));
    EXPECT_EQ(k.rows(), 4u);
    EXPECT_DOUBLE_EQ(k(2, 0), 3.0);
    EXPECT_DOUBLE_EQ(k(3, 1), 3.0);
    EXPECT_DOUBLE_EQ(k(2, 1), 0.0);
}
