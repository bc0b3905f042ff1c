#include <gtest/gtest.h>

#include <random>

#include "sapd/projection.hpp"

using namespace sapd;

namespace {

struct Instance {
    Vec pbar;
    SimplexBallSpec spec;
};

Instance random_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> dn(2, 12);
    std::normal_distribution<double> g(0, 1);
    std::uniform_real_distribution<double> r(0.01, 1.2);
    Instance in;
    in.spec.n = dn(rng);
    in.spec.R = r(rng);
    in.pbar.resize(in.spec.n);
    const double scale = std::exp(g(rng));
    for (double& e : in.pbar) e = scale * g(rng);
    return in;
}

// A random point of P: mix the uniform centre with a random simplex point,
// shrunk until it is inside the ball.
Vec random_feasible(const SimplexBallSpec& s, std::mt19937_64& rng) {
    std::exponential_distribution<double> ex(1.0);
    Vec p(s.n);
    double sum = 0;
    for (double& e : p) sum += (e = ex(rng));
    for (double& e : p) e /= sum;
    const double u = 1.0 / static_cast<double>(s.n);
    double dev = 0;
    for (double e : p) dev += (e - u) * (e - u);
    const double shrink = dev > s.R * s.R ? s.R / std::sqrt(dev) * 0.999 : 1.0;
    for (double& e : p) e = u + shrink * (e - u);
    return p;
}

}  // namespace

TEST(ProjectSimplex, Examples) {
    const Vec in{0.2, 0.3, 0.5};
    const Vec p = project_simplex(in);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p[i], in[i], 1e-15);
    const Vec q = project_simplex({2.0, 0.0});
    EXPECT_DOUBLE_EQ(q[0], 1.0);
    EXPECT_DOUBLE_EQ(q[1], 0.0);
    const Vec t = project_simplex({1.0, 1.0, 1.0});
    for (double e : t) EXPECT_NEAR(e, 1.0 / 3, 1e-15);
    EXPECT_THROW(project_simplex({1.0, std::nan("")}), std::invalid_argument);
}

TEST(ProjectSimplex, MatchesOracleWhenBallIsInactive) {
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 1000; ++rep) {
        Instance in = random_instance(rng);
        in.spec.R = 2.0;  // R̄² > 1 makes the ball redundant on the simplex
        const Vec a = project_simplex(in.pbar), b = qp_projection_oracle(in.pbar, in.spec);
        for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i], b[i], 1e-10) << rep;
    }
}

TEST(SimplexBall, HandSolvedCase) {
    const SimplexBallSpec spec{2, std::sqrt(0.02)};
    EXPECT_NEAR(spec.rbar_sq(), 0.52, 1e-15);
    ProjectionDiagnostics diag;
    const Vec p = project_simplex_ball({1.0, 0.0}, spec, &diag);
    EXPECT_NEAR(p[0], 0.6, 1e-12);
    EXPECT_NEAR(p[1], 0.4, 1e-12);
    EXPECT_TRUE(diag.ball_active);
    EXPECT_FALSE(diag.used_fallback);
    const Vec o = qp_projection_oracle({1.0, 0.0}, spec);
    EXPECT_NEAR(o[0], 0.6, 1e-12);
    EXPECT_NEAR(o[1], 0.4, 1e-12);
}

TEST(SimplexBall, UniformIsFixed) {
    for (std::size_t n : {1u, 3u, 10u}) {
        const Vec u(n, 1.0 / static_cast<double>(n));
        const Vec p = project_simplex_ball(u, {n, 0.05});
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(p[i], u[i], 1e-15);
    }
}

TEST(SimplexBall, AgreesWithOracleAndIsFeasible) {
    std::mt19937_64 rng(2);
    int active = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const Instance in = random_instance(rng);
        ProjectionDiagnostics diag;
        const Vec p = project_simplex_ball(in.pbar, in.spec, &diag);
        const Vec o = qp_projection_oracle(in.pbar, in.spec);
        EXPECT_FALSE(diag.used_fallback) << rep;
        active += diag.ball_active;
        for (std::size_t i = 0; i < p.size(); ++i) ASSERT_NEAR(p[i], o[i], 1e-8) << rep;
        EXPECT_TRUE(simplex_ball_feasibility(p, in.spec).ok(1e-10)) << rep;
        if (diag.ball_active) EXPECT_NEAR(norm_sq(p), in.spec.rbar_sq(), 1e-10);
        EXPECT_LE(projection_kkt_residual(in.pbar, p, in.spec), 1e-8) << rep;
    }
    EXPECT_GT(active, 200);
}

TEST(SimplexBall, VariationalInequality) {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        const Instance in = random_instance(rng);
        const Vec p = project_simplex_ball(in.pbar, in.spec);
        for (int k = 0; k < 100; ++k) {
            const Vec f = random_feasible(in.spec, rng);
            double ip = 0;
            for (std::size_t i = 0; i < p.size(); ++i) ip += (in.pbar[i] - p[i]) * (f[i] - p[i]);
            EXPECT_LE(ip, 1e-8);
        }
    }
}

TEST(SimplexBall, NonExpansive) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0, 1);
    for (int rep = 0; rep < 1000; ++rep) {
        const Instance in = random_instance(rng);
        Vec b = in.pbar;
        for (double& e : b) e += 0.3 * g(rng);
        const Vec pa = project_simplex_ball(in.pbar, in.spec), pb = project_simplex_ball(b, in.spec);
        EXPECT_LE(std::sqrt(dist_sq(pa, pb)), std::sqrt(dist_sq(in.pbar, b)) + 1e-12);
    }
}

TEST(SimplexBall, SupportIsSortedPrefix) {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 1000; ++rep) {
        const Instance in = random_instance(rng);
        const Vec p = project_simplex_ball(in.pbar, in.spec);
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = 0; j < p.size(); ++j)
                if (p[j] > 0 && in.pbar[i] > in.pbar[j]) EXPECT_GT(p[i], 0.0) << rep;
    }
}

TEST(SimplexBall, InputValidation) {
    EXPECT_THROW(project_simplex_ball({0.5, 0.5}, {2, 0.0}), std::invalid_argument);
    EXPECT_THROW(project_simplex_ball({0.5, 0.5, 0.0}, {2, 0.1}), std::invalid_argument);
    EXPECT_THROW(project_simplex_ball({0.5, INFINITY}, {2, 0.1}), std::invalid_argument);
    EXPECT_THROW(qp_projection_oracle(Vec(16, 0.1), {16, 0.1}), std::invalid_argument);
}
