#include <gtest/gtest.h>

#include "sapd/solvers.hpp"
#include "sapd/tuning.hpp"

using namespace sapd;

namespace {

QuadraticBilinearProblem example(double delta, std::size_t d = 30) {
    QuadraticSpec s;
    s.d = d;
    s.spectral_norm = 10;
    s.delta = delta;
    return make_quadratic(s);
}

// Plain stochastic GDA with the same sampling order as SAPD.
void sgda_step(Vec& x, Vec& y, const SapdParams& prm, const SaddlePointProblem& prob, Rng& rng) {
    const Vec gy = prob.grad_y(x, y, rng);
    Vec w(y);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += prm.sigma * gy[i];
    y = prob.prox_y(w, prm.sigma);
    const Vec gx = prob.grad_x(x, y, rng);
    Vec v(x);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= prm.tau * gx[i];
    x = prob.prox_x(v, prm.tau);
}

}  // namespace

TEST(KN, Examples) {
    EXPECT_DOUBLE_EQ(k_n(1.0, 7), 7.0);
    EXPECT_NEAR(k_n(0.5, 2), 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(k_n(0.8, 1), 1.0);
    EXPECT_THROW(k_n(0.0, 3), std::domain_error);
    EXPECT_THROW(k_n(1.1, 3), std::domain_error);
}

TEST(Ergodic, WeightIdentity) {
    for (double rho : {0.5, 0.9, 0.999, 1.0}) {
        ErgodicAverage avg(rho);
        const std::size_t N = 100000;
        for (std::size_t k = 1; k <= N; ++k) avg.add({1.0}, {1.0});
        // The stored weight is ρ^{N−1}K_N(ρ) = Σ_k ρ^{N−k}; for large N the
        // factor ρ^{N−1} underflows, so compare with the geometric sum.
        const double want = rho == 1.0 ? static_cast<double>(N) : (1 - std::pow(rho, static_cast<double>(N))) / (1 - rho);
        EXPECT_NEAR(avg.scaled_weight(), want, 1e-12 * want);
        ErgodicAverage small(rho);
        for (std::size_t k = 1; k <= 60; ++k) small.add({1.0}, {1.0});
        EXPECT_NEAR(small.scaled_weight() / std::pow(rho, 59.0), k_n(rho, 60), 1e-12 * k_n(rho, 60));
    }
}

TEST(Ergodic, PlainAverageAndSingleStep) {
    auto o = make_quadratic_oracles(example(3.0, 5));
    const SapdParams prm{0.05, 0.05, 0.5};
    const Vec x0(5, 1.0), y0(5, -1.0);
    // ρ = 1: plain mean of z_1..z_N, reconstructed by replaying the same stream.
    const RunResult r = run_sapd(*o, prm, 25, 1.0, 77, x0, y0);
    Rng rng(77);
    IterateState s = initial_state(x0, y0);
    Vec sum(5, 0.0);
    for (int k = 0; k < 25; ++k) {
        sapd_step(s, prm, *o, rng);
        for (std::size_t i = 0; i < 5; ++i) sum[i] += s.x[i];
    }
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(r.x_bar[i], sum[i] / 25, 1e-13);
    const RunResult one = run_sapd(*o, prm, 1, 0.7, 5, x0, y0);
    EXPECT_EQ(one.x_bar.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(one.x_bar[i], one.final_state.x[i], 1e-15);
    EXPECT_THROW(run_sapd(*o, prm, 0, 0.7, 5, x0, y0), std::invalid_argument);
    EXPECT_THROW(run_sapd(*o, prm, 5, 0.0, 5, x0, y0), std::domain_error);
}

TEST(SapdStep, ThetaZeroIsSgda) {
    auto o = make_quadratic_oracles(example(5.0, 8));
    const SapdParams prm{0.03, 0.04, 0.0};
    Rng a(123), b(123);
    IterateState s = initial_state(Vec(8, 1.0), Vec(8, 0.5));
    Vec x(8, 1.0), y(8, 0.5);
    for (int k = 0; k < 200; ++k) {
        sapd_step(s, prm, *o, a);
        sgda_step(x, y, prm, *o, b);
        ASSERT_EQ(s.x, x);
        ASSERT_EQ(s.y, y);
    }
}

TEST(SapdStep, MatchesAffineRecursion) {
    const QuadraticBilinearProblem q = example(0.0, 6);
    auto o = make_quadratic_oracles(q);
    const SapdParams prm{0.07, 0.09, 0.6};
    Rng rng(1);
    IterateState s = initial_state(Vec(6, 1.0), Vec(6, -0.5));
    Vec x = s.x, y = s.y, xp = x;
    for (int k = 0; k < 50; ++k) {
        sapd_step(s, prm, *o, rng);
        const Vec kx = q.K * x, kxp = q.K * xp;
        Vec yn(6), xn(6);
        for (std::size_t i = 0; i < 6; ++i)
            yn[i] = (y[i] + prm.sigma * (1 + prm.theta) * kx[i] - prm.sigma * prm.theta * kxp[i]) / (1 + prm.sigma * q.mu_y);
        const Vec kty = q.K.tmul(yn);
        for (std::size_t i = 0; i < 6; ++i) xn[i] = (x[i] - prm.tau * kty[i]) / (1 + prm.tau * q.mu_x);
        xp = x;
        x = xn;
        y = yn;
        for (std::size_t i = 0; i < 6; ++i) {
            EXPECT_NEAR(s.x[i], x[i], 1e-12);
            EXPECT_NEAR(s.y[i], y[i], 1e-12);
        }
    }
}

TEST(SapdStep, FixedPointAtOrigin) {
    QuadraticBilinearProblem q{Matrix(3, 3), 1, 1, 0, 3};
    QuadraticOracles o(q);
    Rng rng(2);
    IterateState s = initial_state(Vec(3, 0.0), Vec(3, 0.0));
    sapd_step(s, {0.1, 0.1, 0.5}, o, rng);
    for (double e : s.x) EXPECT_EQ(e, 0.0);
    for (double e : s.y) EXPECT_EQ(e, 0.0);
}

TEST(RunSapd, DeterministicRateWithinCertificate) {
    auto o = make_quadratic_oracles(example(0.0));
    const ScscResult t = scsc_explicit_params(o->profile());
    RunOptions opt;
    opt.reference = std::make_pair(Vec(30, 0.0), Vec(30, 0.0));
    opt.record_every = 1;
    const RunResult r = run_sapd(*o, t.params, 200, t.cert.rho, 1, Vec(30, 1.0), Vec(30, 1.0), opt);
    const double d0 = r.trace.front().dist_sq, dN = r.trace.back().dist_sq;
    const double rate = std::pow(dN / d0, 1.0 / 200.0);
    EXPECT_LE(rate, t.cert.rho + 0.01);
}

TEST(RunSapd, BitIdenticalRepeats) {
    auto o = make_quadratic_oracles(example(5.0, 10));
    const SapdParams prm{0.01, 0.01, 0.7};
    const RunResult a = run_sapd(*o, prm, 300, 0.99, 42, Vec(10, 1.0), Vec(10, 1.0));
    const RunResult b = run_sapd(*o, prm, 300, 0.99, 42, Vec(10, 1.0), Vec(10, 1.0));
    EXPECT_EQ(a.x_bar, b.x_bar);
    EXPECT_EQ(a.final_state.y, b.final_state.y);
}

TEST(Baselines, StepRules) {
    EXPECT_DOUBLE_EQ(sogda_step(10), 0.0125);
    EXPECT_NEAR(smd_step(100, 10000), 2 / std::sqrt(5e6), 1e-18);
    EXPECT_NEAR(smd_step(100, 10000), 8.94e-4, 1e-6);
    EXPECT_NEAR(smp_step(10), 1 / (std::sqrt(3.0) * 10), 1e-16);
    EXPECT_DOUBLE_EQ(baseline_lipschitz({1, 1, 0, 10, 10, 0}), 10);
    EXPECT_DOUBLE_EQ(baseline_lipschitz({1, 2, 12, 5, 5, 0}), 13);
}

TEST(Baselines, NoiselessConvergence) {
    auto o = make_quadratic_oracles(example(0.0, 10));
    RunOptions opt;
    opt.reference = std::make_pair(Vec(10, 0.0), Vec(10, 0.0));
    opt.record_every = 1000;
    for (BaselineKind k : {BaselineKind::SOGDA, BaselineKind::SMP}) {
        BaselineConfig c;
        c.kind = k;
        c.N = 20000;
        const BaselineResult r = run_baseline(*o, c, Vec(10, 1.0), Vec(10, 1.0), opt);
        EXPECT_LT(r.trace.back().dist_sq, 1e-6) << to_string(k);
    }
}

TEST(Baselines, SmdNeedsBoundedDomain) {
    auto o = make_quadratic_oracles(example(1.0, 4));
    BaselineConfig c;
    c.kind = BaselineKind::SMD;
    c.N = 10;
    EXPECT_THROW(run_baseline(*o, c, Vec(4, 0.0), Vec(4, 0.0)), std::invalid_argument);
    auto boxed = make_quadratic_oracles(example(1.0, 4), 2.0, 2.0);
    const BaselineResult r = run_baseline(*boxed, c, Vec(4, 0.0), Vec(4, 0.0));
    EXPECT_LE(norm_sq(r.x), 4.0 + 1e-12);
    EXPECT_LE(norm_sq(r.y), 4.0 + 1e-12);
    EXPECT_GT(r.step, 0);
}

// Expected Δ_N(x*, y*) against the theorem's bound, with a CLT allowance.
TEST(RunSapd, MonteCarloDistanceBound) {
    const QuadraticBilinearProblem q = example(10.0);
    auto o = make_quadratic_oracles(q);
    const ScscResult t = scsc_explicit_params(o->profile());
    const double rho = t.cert.rho, alpha = t.cert.alpha;
    const Majorants m = variance_majorants(o->profile(), t.params, o->noise());
    const Vec x0(30, 1.0), y0(30, 1.0);
    const double delta0 = delta_tst(m, norm_sq(x0), norm_sq(y0));
    for (std::size_t N : {10u, 100u}) {
        const int paths = 200;
        double sum = 0, sum2 = 0;
        for (int p = 0; p < paths; ++p) {
            const RunResult r = run_sapd(*o, t.params, N, rho, 1000 + p, x0, y0);
            const double v = delta_N(t.params, rho, alpha, norm_sq(r.final_state.x), norm_sq(r.final_state.y));
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / paths;
        const double se = std::sqrt(std::max(0.0, sum2 / paths - mean * mean) / paths);
        EXPECT_LE(mean, distance_bound(rho, N, delta0, m.xi) + 4 * se) << "N=" << N;
    }
}
