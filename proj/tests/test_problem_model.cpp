#include <gtest/gtest.h>

#include <random>

#include "sapd/problem_model.hpp"

using namespace sapd;

namespace {
SmoothnessProfile quad_example() { return {1, 1, 0, 10, 10, 0}; }
}  // namespace

TEST(ValidateProfile, AcceptsQuadraticExample) {
    const SmoothnessProfile p = validate_profile(quad_example());
    EXPECT_EQ(p.L_yx, 10);
}

TEST(ValidateProfile, RejectsZeroCouplingWithMessage) {
    SmoothnessProfile p = quad_example();
    p.L_yx = 0;
    try {
        validate_profile(p);
        FAIL() << "expected rejection";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("L_yx must be positive"), std::string::npos);
    }
}

TEST(ValidateProfile, RejectsNegativeModulusAndNonFinite) {
    SmoothnessProfile p = quad_example();
    p.mu_x = -1;
    EXPECT_THROW(validate_profile(p), std::invalid_argument);
    p = quad_example();
    p.L_xx = std::numeric_limits<double>::infinity();
    EXPECT_THROW(validate_profile(p), std::invalid_argument);
}

TEST(ImplicitLipschitz, Examples) {
    const ImplicitLipschitz a = implicit_lipschitz({1, 1, 0, 1, 1, 0});
    EXPECT_NEAR(a.L_xstar, std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(a.L_ystar, std::sqrt(3.0), 1e-15);
    const ImplicitLipschitz b = implicit_lipschitz({1, 1, 0, 2, 2, 0});
    EXPECT_NEAR(b.L_xstar, 3.0, 1e-15);
    EXPECT_NEAR(b.L_ystar, 3.0, 1e-15);
    const ImplicitLipschitz c = implicit_lipschitz({5, 1, 0, 10, 2, 0});
    EXPECT_NEAR(c.L_xstar, b.L_xstar, 1e-15);
    EXPECT_THROW(implicit_lipschitz({0, 1, 0, 1, 1, 0}), std::domain_error);
}

TEST(ImplicitLipschitz, MonotoneInCoupling) {
    double prev = 0;
    for (double l = 0.1; l < 20; l *= 1.5) {
        const ImplicitLipschitz v = implicit_lipschitz({1, 2, 0, l, l, 0});
        EXPECT_GT(v.L_xstar, prev);
        EXPECT_GE(v.L_xstar, 1.0);
        EXPECT_GE(v.L_ystar, 1.0);
        prev = v.L_xstar;
    }
}

TEST(Quadratic, GeneratorHitsSpectralNormAndSymmetry) {
    QuadraticSpec s;
    s.d = 30;
    s.spectral_norm = 10;
    const QuadraticBilinearProblem q = make_quadratic(s);
    EXPECT_NO_THROW(validate_quadratic(q));
    auto o = make_quadratic_oracles(q);
    EXPECT_NEAR(o->profile().L_yx, 10.0, 1e-8);
    EXPECT_NEAR(o->profile().L_xy, 10.0, 1e-8);
    EXPECT_EQ(o->profile().L_xx, 0.0);
    EXPECT_EQ(o->profile().L_yy, 0.0);
    // Same seed, same instance.
    const QuadraticBilinearProblem q2 = make_quadratic(s);
    EXPECT_EQ(q.K.data(), q2.K.data());
}

TEST(Quadratic, NonSymmetricRejected) {
    QuadraticBilinearProblem q{Matrix{{0, 1}, {2, 0}}, 1, 1, 0, 2};
    EXPECT_THROW(QuadraticOracles{q}, std::invalid_argument);
}

TEST(Quadratic, ZeroCouplingGivesZeroGradient) {
    QuadraticBilinearProblem q{Matrix(3, 3), 1, 1, 0, 3};
    QuadraticOracles o(q);
    Rng rng(1);
    for (double g : o.grad_x({1, 2, 3}, {4, 5, 6}, rng)) EXPECT_EQ(g, 0.0);
}

TEST(Quadratic, NoiseIsUnbiasedAndIsotropic) {
    QuadraticSpec s;
    s.d = 4;
    s.spectral_norm = 3;
    s.delta = 2;
    const QuadraticBilinearProblem q = make_quadratic(s);
    QuadraticOracles o(q);
    const Vec x{1, -1, 0.5, 2}, y{0.3, 0.2, -1, 1};
    const Vec exact = o.exact_grad_x(x, y);
    Rng rng(42);
    const std::size_t M = 100000;
    Vec mean(4, 0.0);
    Matrix cov(4, 4);
    for (std::size_t m = 0; m < M; ++m) {
        const Vec g = o.grad_x(x, y, rng);
        for (std::size_t i = 0; i < 4; ++i) {
            mean[i] += g[i];
            for (std::size_t j = 0; j < 4; ++j) cov(i, j) += (g[i] - exact[i]) * (g[j] - exact[j]);
        }
    }
    const double var = q.delta * q.delta / 4.0;
    const double se = std::sqrt(var / M);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(mean[i] / M, exact[i], 4 * se);
        for (std::size_t j = 0; j < 4; ++j) {
            // Var of a product of independent normals is var², of a square 2var².
            const double sd = (i == j ? std::sqrt(2.0) : 1.0) * var / std::sqrt(static_cast<double>(M));
            EXPECT_NEAR(cov(i, j) / M, i == j ? var : 0.0, 5 * sd);
        }
    }
}

TEST(Quadratic, SameSeedSameNoise) {
    QuadraticSpec s;
    s.d = 5;
    s.delta = 1;
    QuadraticOracles o(make_quadratic(s));
    Rng a(9), b(9);
    const Vec x(5, 1.0), y(5, -1.0);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(o.grad_y(x, y, a), o.grad_y(x, y, b));
}

TEST(Prox, ContractionOnQuadraticAndBall) {
    QuadraticSpec s;
    s.d = 6;
    const QuadraticBilinearProblem q = make_quadratic(s);
    QuadraticOracles free_(q), boxed(q, 1.5, 1.5);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0, 3);
    for (int rep = 0; rep < 1000; ++rep) {
        Vec v(6), w(6);
        for (auto& e : v) e = g(rng);
        for (auto& e : w) e = g(rng);
        const double tau = 0.01 + std::abs(g(rng));
        for (const SaddlePointProblem* p : {static_cast<const SaddlePointProblem*>(&free_),
                                            static_cast<const SaddlePointProblem*>(&boxed)}) {
            const double lhs = std::sqrt(dist_sq(p->prox_x(v, tau), p->prox_x(w, tau)));
            EXPECT_LE(lhs, std::sqrt(dist_sq(v, w)) / (1 + tau * q.mu_x) + 1e-12);
        }
    }
}

TEST(ProjectBall, Examples) {
    const Vec inside{0.1, 0.2};
    EXPECT_EQ(project_ball(inside, 1.0), inside);
    const Vec far{2.0, 0.0};
    const Vec p = project_ball(far, 1.0);
    EXPECT_NEAR(std::sqrt(norm_sq(p)), 1.0, 1e-15);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0, 4);
    for (int rep = 0; rep < 1000; ++rep) {
        Vec v(3), c(3);
        for (auto& e : v) e = g(rng);
        for (auto& e : c) e = g(rng);
        const Vec once = project_ball(v, c, 1.3);
        const Vec twice = project_ball(once, c, 1.3);
        for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(once[i], twice[i], 1e-14);
    }
    EXPECT_THROW(project_ball(far, 0.0), std::invalid_argument);
}
