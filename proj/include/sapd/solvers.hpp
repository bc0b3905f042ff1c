#pragma once
// SAPD (with SGDA as θ = 0) and the benchmark baselines S-OGDA, SMP, SMD.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sapd/numerics.hpp"
#include "sapd/problem_model.hpp"

namespace sapd {

struct SapdParams {
    double tau = 0, sigma = 0, theta = 0;
};

inline void validate_params(const SapdParams& p) {
    if (!(p.tau > 0) || !std::isfinite(p.tau)) throw std::invalid_argument("tau must be positive and finite");
    if (!(p.sigma > 0) || !std::isfinite(p.sigma)) throw std::invalid_argument("sigma must be positive and finite");
    if (!std::isfinite(p.theta) || p.theta < 0) throw std::invalid_argument("theta must be finite and >= 0");
}

struct IterateState {
    Vec x, y;            ///< x_k, y_k
    Vec x_prev, y_prev;  ///< x_{k-1}, y_{k-1}
    Vec gy_prev;         ///< cached dual sample from the previous step
    bool has_cache = false;
    std::size_t k = 0;
};

/// Start state with (x_{-1}, y_{-1}) = (x_0, y_0), so the first momentum term is zero.
inline IterateState initial_state(const Vec& x0, const Vec& y0) {
    IterateState s;
    s.x = s.x_prev = x0;
    s.y = s.y_prev = y0;
    return s;
}

/// Weight total K_N(ρ) of the ergodic average.
inline double k_n(double rho, std::size_t N) {
    if (!(rho > 0) || rho > 1) throw std::domain_error("k_n: rho must lie in (0,1]");
    if (N < 1) throw std::domain_error("k_n: N must be >= 1");
    if (rho == 1.0) return static_cast<double>(N);
    const double n = static_cast<double>(N);
    return (1 - std::pow(rho, n)) / ((1 - rho) * std::pow(rho, n - 1));
}

/// Streaming form of z̄_N = K_N(ρ)⁻¹ Σ_k ρ^{−k+1} z_k. The sums are kept
/// rescaled by ρ^{N−1} (S_k = ρ S_{k−1} + z_k) so long runs cannot overflow.
class ErgodicAverage {
public:
    explicit ErgodicAverage(double rho = 1.0) : rho_(rho) {
        if (!(rho > 0) || rho > 1) throw std::domain_error("ergodic average: rho must lie in (0,1]");
    }
    void add(const Vec& x, const Vec& y) {
        if (sx_.empty()) {
            sx_.assign(x.size(), 0.0);
            sy_.assign(y.size(), 0.0);
        }
        for (std::size_t i = 0; i < x.size(); ++i) sx_[i] = rho_ * sx_[i] + x[i];
        for (std::size_t i = 0; i < y.size(); ++i) sy_[i] = rho_ * sy_[i] + y[i];
        weight_ = rho_ * weight_ + 1.0;
        ++count_;
    }
    Vec x() const { return scaled(sx_); }
    Vec y() const { return scaled(sy_); }
    /// Σ_k ρ^{N−k} = ρ^{N−1} K_N(ρ).
    double scaled_weight() const { return weight_; }
    std::size_t count() const { return count_; }
    double rho() const { return rho_; }

private:
    Vec scaled(const Vec& s) const {
        Vec out(s);
        for (double& e : out) e /= weight_;
        return out;
    }
    double rho_;
    Vec sx_, sy_;
    double weight_ = 0.0;
    std::size_t count_ = 0;
};

/// One SAPD iteration. Exactly one fresh dual sample and one fresh primal
/// sample are drawn, in that order.
inline void sapd_step(IterateState& s, const SapdParams& prm, const SaddlePointProblem& prob, Rng& rng) {
    Vec gy = prob.grad_y(s.x, s.y, rng);
    Vec w(s.y);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double q = s.has_cache ? gy[i] - s.gy_prev[i] : 0.0;
        w[i] += prm.sigma * (gy[i] + prm.theta * q);
    }
    Vec y_next = prob.prox_y(w, prm.sigma);
    const Vec gx = prob.grad_x(s.x, y_next, rng);
    Vec v(s.x);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= prm.tau * gx[i];
    Vec x_next = prob.prox_x(v, prm.tau);

    s.x_prev = std::move(s.x);
    s.y_prev = std::move(s.y);
    s.x = std::move(x_next);
    s.y = std::move(y_next);
    s.gy_prev = std::move(gy);
    s.has_cache = true;
    ++s.k;
}

struct RunRecord {
    std::size_t k = 0;
    double dist_sq = 0;
    double gap = std::numeric_limits<double>::quiet_NaN();
    double elapsed_s = 0;
    std::uint64_t seed = 0;
};

struct RunOptions {
    std::optional<std::pair<Vec, Vec>> reference;  ///< point for D, usually the saddle
    std::size_t record_every = 1;
    bool record_initial = true;
    /// Optional gap evaluator G(x, y), called at recorded iterations.
    std::function<double(const Vec&, const Vec&)> gap;
    /// Record D of the ergodic average instead of the last iterate.
    bool record_average = false;
};

struct RunResult {
    Vec x_bar, y_bar;
    IterateState final_state;
    std::vector<RunRecord> trace;
};

namespace detail {
struct Recorder {
    const RunOptions& opt;
    std::uint64_t seed;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    std::vector<RunRecord> trace;

    void maybe(std::size_t k, std::size_t N, const Vec& x, const Vec& y) {
        const bool due = (k == 0 && opt.record_initial) ||
                         (k > 0 && (k % std::max<std::size_t>(1, opt.record_every) == 0 || k == N));
        if (!due || (!opt.reference && !opt.gap)) return;
        RunRecord r;
        r.k = k;
        r.seed = seed;
        if (opt.reference) r.dist_sq = dist_sq(x, opt.reference->first) + dist_sq(y, opt.reference->second);
        if (opt.gap) r.gap = opt.gap(x, y);
        r.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        trace.push_back(r);
    }
};
}  // namespace detail

/// Run N SAPD iterations from (x0, y0) and return the ρ-weighted ergodic point.
inline RunResult run_sapd(const SaddlePointProblem& prob, const SapdParams& prm, std::size_t N,
                          double weighting_rho, std::uint64_t seed, const Vec& x0, const Vec& y0,
                          const RunOptions& opt = {}) {
    if (N < 1) throw std::invalid_argument("run_sapd: N must be >= 1");
    validate_params(prm);
    ErgodicAverage avg(weighting_rho);
    Rng rng(seed);
    IterateState s = initial_state(x0, y0);
    detail::Recorder rec{opt, seed, std::chrono::steady_clock::now(), {}};
    rec.maybe(0, N, s.x, s.y);
    for (std::size_t k = 1; k <= N; ++k) {
        sapd_step(s, prm, prob, rng);
        avg.add(s.x, s.y);
        if (opt.record_average)
            rec.maybe(k, N, avg.x(), avg.y());
        else
            rec.maybe(k, N, s.x, s.y);
    }
    return {avg.x(), avg.y(), std::move(s), std::move(rec.trace)};
}

enum class BaselineKind { SOGDA, SMP, SMD };

inline std::string to_string(BaselineKind k) {
    switch (k) {
        case BaselineKind::SOGDA: return "sogda";
        case BaselineKind::SMP: return "smp";
        case BaselineKind::SMD: return "smd";
    }
    return "?";
}

/// Lipschitz constant of the full monotone operator used by the baselines.
inline double baseline_lipschitz(const SmoothnessProfile& p) {
    return std::max({p.mu_x, p.mu_y, p.L_xy, p.L_yx, p.L_xx + p.mu_x, p.L_yy + p.mu_y});
}

inline double sogda_step(double L) { return 1.0 / (8.0 * L); }
inline double smp_step(double L) { return 1.0 / (std::sqrt(3.0) * L); }
inline double smd_step(double G, std::size_t N) { return 2.0 / std::sqrt(5.0 * G * static_cast<double>(N)); }

namespace detail {
// Stochastic monotone-operator field F(z) = (∇x L, −∇y L), full gradients of
// the smooth parts of f and g included.
inline void operator_field(const SaddlePointProblem& prob, const Vec& x, const Vec& y, Rng& rng, Vec& fx,
                           Vec& fy) {
    fx = prob.grad_x(x, y, rng);
    fy = prob.grad_y(x, y, rng);
    const double mf = prob.mu_f(), mg = prob.mu_g();
    for (std::size_t i = 0; i < fx.size(); ++i) fx[i] += mf * x[i];
    for (std::size_t i = 0; i < fy.size(); ++i) fy[i] = -(fy[i] - mg * y[i]);
}

inline Vec uniform_in_ball(std::size_t n, double r, Rng& rng) {
    Vec v(n);
    for (double& e : v) e = standard_normal(rng);
    const double nv = std::sqrt(norm_sq(v));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double rad = r * std::pow(u(rng), 1.0 / static_cast<double>(n));
    for (double& e : v) e *= rad / nv;
    return v;
}
}  // namespace detail

/// SMD's G: twice the largest observed squared operator norm over 10³
/// samples at uniform points of the ball domain.
inline double estimate_smd_G(const SaddlePointProblem& prob, double radius_x, double radius_y, std::uint64_t seed,
                             std::size_t samples = 1000) {
    if (!(radius_x > 0) || !(radius_y > 0)) throw std::invalid_argument("SMD requires a bounded domain");
    Rng rng(seed);
    double best = 0.0;
    Vec fx, fy;
    for (std::size_t s = 0; s < samples; ++s) {
        const Vec x = detail::uniform_in_ball(prob.nx(), radius_x, rng);
        const Vec y = detail::uniform_in_ball(prob.ny(), radius_y, rng);
        detail::operator_field(prob, x, y, rng, fx, fy);
        best = std::max(best, norm_sq(fx) + norm_sq(fy));
    }
    return 2.0 * best;
}

struct BaselineConfig {
    BaselineKind kind = BaselineKind::SOGDA;
    std::size_t N = 1000;
    std::uint64_t seed = 1;
    double L = 0;                 ///< 0 ⇒ derived from the problem profile
    double smd_G = 0;             ///< 0 ⇒ estimated (SMD only)
    std::size_t smd_horizon = 0;  ///< 0 ⇒ N
};

struct BaselineResult {
    Vec x, y;          ///< last iterate
    Vec x_bar, y_bar;  ///< uniform average of the iterates
    double step = 0;
    std::vector<RunRecord> trace;
};

/// Run one of the baseline solvers. SMD uses the problem's projections, so the
/// problem must carry bounded domains (QuadraticOracles with radii).
inline BaselineResult run_baseline(const SaddlePointProblem& prob, const BaselineConfig& cfg, const Vec& x0,
                                   const Vec& y0, const RunOptions& opt = {}) {
    if (cfg.N < 1) throw std::invalid_argument("run_baseline: N must be >= 1");
    const double L = cfg.L > 0 ? cfg.L : baseline_lipschitz(prob.profile());
    BaselineResult out;
    switch (cfg.kind) {
        case BaselineKind::SOGDA: out.step = sogda_step(L); break;
        case BaselineKind::SMP: out.step = smp_step(L); break;
        case BaselineKind::SMD: {
            if (!std::isfinite(prob.omega_f()) || !std::isfinite(prob.omega_g()))
                throw std::invalid_argument("SMD requires a bounded domain");
            double G = cfg.smd_G;
            if (G <= 0)
                G = estimate_smd_G(prob, 0.5 * std::sqrt(prob.omega_f()), 0.5 * std::sqrt(prob.omega_g()),
                                   cfg.seed ^ 0x5eedULL);
            out.step = smd_step(G, cfg.smd_horizon ? cfg.smd_horizon : cfg.N);
            break;
        }
    }
    const double eta = out.step;
    Rng rng(cfg.seed);
    Vec x = x0, y = y0, fx, fy, fx_prev, fy_prev;
    ErgodicAverage avg(1.0);
    detail::Recorder rec{opt, cfg.seed, std::chrono::steady_clock::now(), {}};
    rec.maybe(0, cfg.N, x, y);

    auto move = [&](const Vec& bx, const Vec& by, const Vec& gx, const Vec& gy, double scale, Vec& ox, Vec& oy) {
        Vec vx(bx), vy(by);
        for (std::size_t i = 0; i < vx.size(); ++i) vx[i] -= scale * gx[i];
        for (std::size_t i = 0; i < vy.size(); ++i) vy[i] -= scale * gy[i];
        ox = prob.project_x(vx);
        oy = prob.project_y(vy);
    };

    for (std::size_t k = 1; k <= cfg.N; ++k) {
        Vec nx, ny;
        if (cfg.kind == BaselineKind::SOGDA) {
            // Past-gradient optimistic step: z⁺ = Π(z − η(2F(z_k) − F(z_{k−1}))).
            detail::operator_field(prob, x, y, rng, fx, fy);
            if (fx_prev.empty()) {
                fx_prev = fx;
                fy_prev = fy;
            }
            Vec gx(fx), gy(fy);
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = 2 * fx[i] - fx_prev[i];
            for (std::size_t i = 0; i < gy.size(); ++i) gy[i] = 2 * fy[i] - fy_prev[i];
            move(x, y, gx, gy, eta, nx, ny);
            fx_prev = fx;
            fy_prev = fy;
        } else if (cfg.kind == BaselineKind::SMP) {
            detail::operator_field(prob, x, y, rng, fx, fy);
            Vec hx, hy;
            move(x, y, fx, fy, eta, hx, hy);
            detail::operator_field(prob, hx, hy, rng, fx, fy);
            move(x, y, fx, fy, eta, nx, ny);
        } else {
            detail::operator_field(prob, x, y, rng, fx, fy);
            move(x, y, fx, fy, eta, nx, ny);
        }
        x = std::move(nx);
        y = std::move(ny);
        avg.add(x, y);
        if (opt.record_average)
            rec.maybe(k, cfg.N, avg.x(), avg.y());
        else
            rec.maybe(k, cfg.N, x, y);
    }
    out.x = x;
    out.y = y;
    out.x_bar = avg.x();
    out.y_bar = avg.y();
    out.trace = std::move(rec.trace);
    return out;
}

}  // namespace sapd
