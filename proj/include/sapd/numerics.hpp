#pragma once
// Small dense linear algebra used by the certification and robustness code.
// Everything here works on matrices of at most a few hundred rows, so the
// routines favour clarity and predictable accuracy over blocking or SIMD.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sapd {

using Vec = std::vector<double>;

/// Thrown when a linear system is singular to working precision.
struct SingularMatrixError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense row-major real matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Matrix diag(const Vec& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    const std::vector<double>& data() const { return data_; }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix operator*(const Matrix& b) const {
        if (cols_ != b.rows_) throw std::invalid_argument("Matrix: shape mismatch in product");
        Matrix c(rows_, b.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const double a = (*this)(i, k);
                if (a == 0.0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += a * b(k, j);
            }
        return c;
    }
    Vec operator*(const Vec& v) const {
        if (cols_ != v.size()) throw std::invalid_argument("Matrix: shape mismatch in matvec");
        Vec r(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
            r[i] = s;
        }
        return r;
    }
    Matrix operator+(const Matrix& b) const {
        check_same(b);
        Matrix c(*this);
        for (std::size_t i = 0; i < data_.size(); ++i) c.data_[i] += b.data_[i];
        return c;
    }
    Matrix operator-(const Matrix& b) const {
        check_same(b);
        Matrix c(*this);
        for (std::size_t i = 0; i < data_.size(); ++i) c.data_[i] -= b.data_[i];
        return c;
    }
    Matrix operator*(double s) const {
        Matrix c(*this);
        for (double& v : c.data_) v *= s;
        return c;
    }

    /// Transposed matrix-vector product Mᵀv.
    Vec tmul(const Vec& v) const {
        if (rows_ != v.size()) throw std::invalid_argument("Matrix: shape mismatch in tmul");
        Vec r(cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            const double vi = v[i];
            if (vi == 0.0) continue;
            for (std::size_t j = 0; j < cols_; ++j) r[j] += (*this)(i, j) * vi;
        }
        return r;
    }

    double frobenius() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }
    /// Maximum absolute row sum.
    double norm_inf() const {
        double best = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
            best = std::max(best, s);
        }
        return best;
    }
    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

private:
    void check_same(const Matrix& b) const {
        if (rows_ != b.rows_ || cols_ != b.cols_)
            throw std::invalid_argument("Matrix: shape mismatch");
    }
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// Kronecker product a ⊗ b.
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            for (std::size_t p = 0; p < b.rows(); ++p)
                for (std::size_t q = 0; q < b.cols(); ++q)
                    k(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
    return k;
}

/// Symmetric matrix of order ≤ 8 holding only the upper triangle
/// (row-packed, fixed storage so certification loops never allocate).
class SymMatrix {
public:
    static constexpr std::size_t kMaxOrder = 8;

    explicit SymMatrix(std::size_t n = 0) : n_(n) {
        if (n > kMaxOrder) throw std::invalid_argument("SymMatrix: order exceeds 8");
        packed_.fill(0.0);
    }

    std::size_t order() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return packed_[index(i, j)]; }
    void set(std::size_t i, std::size_t j, double v) { packed_[index(i, j)] = v; }

    Matrix dense() const {
        Matrix m(n_, n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
        return m;
    }
    double norm_inf() const {
        double best = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n_; ++j) s += std::abs((*this)(i, j));
            best = std::max(best, s);
        }
        return best;
    }

private:
    std::size_t index(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        return i * n_ - i * (i - 1) / 2 + (j - i);
    }
    std::size_t n_;
    std::array<double, kMaxOrder*(kMaxOrder + 1) / 2> packed_{};
};

struct SymEigen {
    Vec values;      ///< ascending
    Matrix vectors;  ///< column k is the eigenvector of values[k]
};

/// Cyclic Jacobi eigensolver for a dense symmetric matrix of any order.
inline SymEigen sym_eigen_full(const Matrix& m_in, bool want_vectors = true) {
    const std::size_t n = m_in.rows();
    if (m_in.cols() != n) throw std::invalid_argument("sym_eigen: matrix not square");
    if (!m_in.all_finite()) throw std::domain_error("sym_eigen: non-finite entry");
    Matrix a = m_in;
    Matrix v = want_vectors ? Matrix::identity(n) : Matrix();
    const double scale = std::max(1.0, a.frobenius());

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-15 * scale) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                // Rotation angle that annihilates a(p,q) (Rutishauser's stable form).
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                if (want_vectors) {
                    for (std::size_t k = 0; k < n; ++k) {
                        const double vkp = v(k, p), vkq = v(k, q);
                        v(k, p) = c * vkp - s * vkq;
                        v(k, q) = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    SymEigen out;
    out.values.resize(n);
    if (want_vectors) out.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        if (want_vectors)
            for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

namespace detail {
// Cyclic Jacobi on a stack copy; eigenvalues only.
inline Vec jacobi_small(const SymMatrix& m) {
    const std::size_t n = m.order();
    std::array<double, SymMatrix::kMaxOrder * SymMatrix::kMaxOrder> a{};
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double v = m(i, j);
            if (!std::isfinite(v)) throw std::domain_error("sym_eigen: non-finite entry");
            a[i * n + j] = v;
            scale += v * v;
        }
    scale = std::max(1.0, std::sqrt(scale));
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (std::sqrt(off) <= 1e-15 * scale) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = a[q * n + p] = 0.0;
            }
    }
    Vec ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i * n + i];
    std::sort(ev.begin(), ev.end());
    return ev;
}
}  // namespace detail

/// Ascending eigenvalues of a packed symmetric matrix.
inline Vec sym_eigen(const SymMatrix& m) { return detail::jacobi_small(m); }

/// Smallest eigenvalue; the caller decides what tolerance counts as PSD.
inline double psd_margin(const SymMatrix& m) {
    if (m.order() == 0) return std::numeric_limits<double>::infinity();
    return sym_eigen(m).front();
}

/// Scale-aware PSD acceptance shared by every certificate in the library.
inline double psd_tolerance(const SymMatrix& m) { return 1e-9 * std::max(1.0, m.norm_inf()); }
inline bool is_psd(const SymMatrix& m) { return psd_margin(m) >= -psd_tolerance(m); }

namespace detail {

// Reduce to upper Hessenberg form by stabilised elementary similarity
// transformations, then clear the stored multipliers.
inline void to_hessenberg(Matrix& a) {
    const int n = static_cast<int>(a.rows());
    for (int m = 1; m < n - 1; ++m) {
        double x = 0.0;
        int i = m;
        for (int j = m; j < n; ++j)
            if (std::abs(a(j, m - 1)) > std::abs(x)) {
                x = a(j, m - 1);
                i = j;
            }
        if (i != m) {
            for (int j = m - 1; j < n; ++j) std::swap(a(i, j), a(m, j));
            for (int j = 0; j < n; ++j) std::swap(a(j, i), a(j, m));
        }
        if (x != 0.0) {
            for (i = m + 1; i < n; ++i) {
                double y = a(i, m - 1);
                if (y == 0.0) continue;
                y /= x;
                a(i, m - 1) = y;
                for (int j = m; j < n; ++j) a(i, j) -= y * a(m, j);
                for (int j = 0; j < n; ++j) a(j, m) += y * a(j, i);
            }
        }
    }
    for (int i = 2; i < n; ++i)
        for (int j = 0; j < i - 1; ++j) a(i, j) = 0.0;
}

// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
inline std::vector<std::complex<double>> hessenberg_qr(Matrix& a) {
    const int n = static_cast<int>(a.rows());
    std::vector<std::complex<double>> w(n);
    const double eps = std::numeric_limits<double>::epsilon();
    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));

    int nn = n - 1;
    double t = 0.0;
    double p = 0, q = 0, r = 0, s = 0, x = 0, y = 0, z = 0, u = 0, v = 0, ww = 0;
    while (nn >= 0) {
        int its = 0, l = 0;
        do {
            for (l = nn; l > 0; --l) {
                s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(a(l, l - 1)) <= eps * s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            x = a(nn, nn);
            if (l == nn) {
                w[nn--] = x + t;
            } else {
                y = a(nn - 1, nn - 1);
                ww = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {
                    p = 0.5 * (y - x);
                    q = p * p + ww;
                    z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + (p >= 0 ? std::abs(z) : -std::abs(z));
                        w[nn - 1] = w[nn] = x + z;
                        if (z != 0.0) w[nn] = x - ww / z;
                    } else {
                        w[nn] = std::complex<double>(x + p, -z);
                        w[nn - 1] = std::conj(w[nn]);
                    }
                    nn -= 2;
                } else {
                    if (its == 60) throw std::runtime_error("eigenvalues: QR iteration did not converge");
                    if (its == 10 || its == 20 || its == 40) {
                        // Exceptional shift to break cycles.
                        t += x;
                        for (int i = 0; i <= nn; ++i) a(i, i) -= x;
                        s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        ww = -0.4375 * s * s;
                    }
                    ++its;
                    int m = nn - 2;
                    for (; m >= l; --m) {
                        z = a(m, m);
                        r = x - z;
                        s = y - z;
                        p = (r * s - ww) / a(m + 1, m) + a(m, m + 1);
                        q = a(m + 1, m + 1) - z - r - s;
                        r = a(m + 2, m + 1);
                        s = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
                        v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
                        if (u <= eps * v) break;
                    }
                    for (int i = m; i < nn - 1; ++i) {
                        a(i + 2, i) = 0.0;
                        if (i != m) a(i + 2, i - 1) = 0.0;
                    }
                    for (int k = m; k < nn; ++k) {
                        if (k != m) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = 0.0;
                            if (k + 1 != nn) r = a(k + 2, k - 1);
                            if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        const double norm = std::sqrt(p * p + q * q + r * r);
                        s = p >= 0 ? norm : -norm;
                        if (s != 0.0) {
                            if (k == m) {
                                if (l != m) a(k, k - 1) = -a(k, k - 1);
                            } else {
                                a(k, k - 1) = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for (int j = k; j <= nn; ++j) {
                                p = a(k, j) + q * a(k + 1, j);
                                if (k + 1 != nn) {
                                    p += r * a(k + 2, j);
                                    a(k + 2, j) -= p * z;
                                }
                                a(k + 1, j) -= p * y;
                                a(k, j) -= p * x;
                            }
                            const int mmin = nn < k + 3 ? nn : k + 3;
                            for (int i = l; i <= mmin; ++i) {
                                p = x * a(i, k) + y * a(i, k + 1);
                                if (k + 1 != nn) {
                                    p += z * a(i, k + 2);
                                    a(i, k + 2) -= p * r;
                                }
                                a(i, k + 1) -= p * q;
                                a(i, k) -= p;
                            }
                        }
                    }
                }
            }
        } while (l + 1 < nn);
    }
    return w;
}

}  // namespace detail

/// Eigenvalues of a general real square matrix (Hessenberg reduction + shifted QR).
inline std::vector<std::complex<double>> eig_general(const Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("eig_general: matrix not square");
    if (!m.all_finite()) throw std::domain_error("eig_general: non-finite entry");
    if (m.rows() == 0) return {};
    Matrix a = m;
    detail::to_hessenberg(a);
    return detail::hessenberg_qr(a);
}

/// Eigenvalues of a 4×4 block.
inline std::vector<std::complex<double>> eig4(const Matrix& m) {
    if (m.rows() != 4 || m.cols() != 4) throw std::invalid_argument("eig4: expected a 4x4 matrix");
    return eig_general(m);
}

inline double spectral_radius(const Matrix& m) {
    double r = 0.0;
    for (const auto& l : eig_general(m)) r = std::max(r, std::abs(l));
    return r;
}

/// Solve Ax = b by Gaussian elimination with partial pivoting.
inline Vec solve_linear(Matrix a, Vec b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve_linear: shape mismatch");
    double anorm = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) anorm = std::max(anorm, std::abs(a(i, j)));
    const double pivot_tol = 1e-14 * anorm;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (std::abs(a(piv, k)) <= pivot_tol || a(piv, k) == 0.0)
            throw SingularMatrixError("solve_linear: matrix is singular to working precision");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    Vec x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
        x[ii] = s / a(ii, ii);
    }
    return x;
}

/// ‖M‖₂ via power iteration on MᵀM.
inline double spectral_norm(const Matrix& m) {
    const std::size_t n = m.cols();
    if (n == 0 || m.rows() == 0) return 0.0;
    // Deterministic, generically non-orthogonal start vector.
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::sin(1.0 + static_cast<double>(i));
    auto normalize = [](Vec& u) {
        double s = 0.0;
        for (double e : u) s += e * e;
        s = std::sqrt(s);
        if (s > 0)
            for (double& e : u) e /= s;
        return s;
    };
    normalize(v);
    double lambda = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Vec w = m.tmul(m * v);
        double rayleigh = 0.0;
        for (std::size_t i = 0; i < n; ++i) rayleigh += v[i] * w[i];
        const double nw = normalize(w);
        if (nw == 0.0) return 0.0;
        v = std::move(w);
        const double change = std::abs(rayleigh - lambda);
        lambda = rayleigh;
        if (it > 0 && change <= 1e-10 * std::abs(lambda)) break;
    }
    // One more Rayleigh quotient at the converged vector.
    const Vec mv = m * v;
    double s = 0.0;
    for (double e : mv) s += e * e;
    return std::sqrt(s);
}

// Vector helpers used across modules.
inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
inline double norm_sq(const Vec& a) { return dot(a, a); }
inline double dist_sq(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace sapd
