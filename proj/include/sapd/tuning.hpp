#pragma once
// Parameter certification for SAPD: the 5×5 rate matrix inequality, the
// simplified 3×3 system, explicit parameter rules (SCSC, noise-aware, merely
// convex, SGDA, Chambolle–Pock) and bisection for the best certified rate.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "sapd/numerics.hpp"
#include "sapd/problem_model.hpp"
#include "sapd/search.hpp"
#include "sapd/solvers.hpp"

namespace sapd {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Certificate {
    double rho = 1;
    double alpha = 0;
    double psd_margin = -kInf;
    bool feasible = false;
    std::string source;  ///< "explicit", "bisection", "search", "user", ...
};

/// Variables of the rate feasibility problem in inverse-step form.
struct FeasiblePoint {
    double t = 0, s = 0, theta = 0, alpha = 0;
};

/// G_ρ(t, s, θ, α) with t = 1/τ and s = 1/σ.
inline SymMatrix assemble_G_rho(const SmoothnessProfile& p, double rho, double t, double s, double theta,
                                double alpha) {
    SymMatrix g(5);
    const double r = theta / rho;
    g.set(0, 0, t + p.mu_x - t / rho);
    g.set(1, 1, s + p.mu_y - s / rho);
    g.set(1, 2, (r - 1) * p.L_yx);
    g.set(1, 3, (r - 1) * p.L_yy);
    g.set(2, 2, t - p.L_xx);
    g.set(2, 4, -r * p.L_yx);
    g.set(3, 3, s - alpha);
    g.set(3, 4, -r * p.L_yy);
    g.set(4, 4, alpha / rho);
    return g;
}

inline SymMatrix assemble_G(const SmoothnessProfile& p, double tau, double sigma, double theta, double rho,
                            double alpha) {
    if (!(tau > 0) || !(sigma > 0)) throw std::domain_error("assemble_G: tau and sigma must be positive");
    if (!(rho > 0) || rho > 1) throw std::domain_error("assemble_G: rho must lie in (0,1]");
    if (theta < 0 || alpha < 0) throw std::domain_error("assemble_G: theta and alpha must be non-negative");
    return assemble_G_rho(p, rho, 1.0 / tau, 1.0 / sigma, theta, alpha);
}

/// Full certificate for (τ, σ, θ) at rate ρ with multiplier α.
inline Certificate certify(const SmoothnessProfile& p, const SapdParams& prm, double rho, double alpha,
                           std::string source = "user") {
    const SymMatrix g = assemble_G(p, prm.tau, prm.sigma, prm.theta, rho, alpha);
    Certificate c;
    c.rho = rho;
    c.alpha = alpha;
    c.psd_margin = psd_margin(g);
    const bool alpha_ok = alpha >= 0 && alpha * prm.sigma <= 1.0 + 1e-12;
    c.feasible = alpha_ok && c.psd_margin >= -psd_tolerance(g);
    c.source = std::move(source);
    return c;
}

namespace detail {
inline bool geq_rel(double a, double b) { return a >= b - 1e-12 * std::max(1.0, std::abs(b)); }
}  // namespace detail

/// The simplified system: min{τμx, σμy} ≥ (1−θ)/θ and a 3×3 PSD block, which
/// certifies rate ρ = θ.
inline Certificate check_simple_system(const SmoothnessProfile& p, double tau, double sigma, double theta,
                                       double alpha) {
    if (!(theta > 0) || theta > 1) throw std::domain_error("check_simple_system: theta must lie in (0,1]");
    if (!(tau > 0) || !(sigma > 0)) throw std::domain_error("check_simple_system: tau, sigma must be positive");
    SymMatrix m(3);
    m.set(0, 0, 1 / tau - p.L_xx);
    m.set(0, 2, -p.L_yx);
    m.set(1, 1, 1 / sigma - alpha);
    m.set(1, 2, -p.L_yy);
    m.set(2, 2, alpha / theta);
    Certificate c;
    c.rho = theta;
    c.alpha = alpha;
    c.psd_margin = psd_margin(m);
    const bool scalar_ok = detail::geq_rel(std::min(tau * p.mu_x, sigma * p.mu_y), (1 - theta) / theta);
    c.feasible = scalar_ok && alpha >= 0 && c.psd_margin >= -psd_tolerance(m);
    c.source = "simple-system";
    return c;
}

// ---------------------------------------------------------------------------
// Explicit strongly-convex–strongly-concave parameters
// ---------------------------------------------------------------------------

inline double theta_bar_1(const SmoothnessProfile& p, double beta) {
    const double m = p.L_xx + p.mu_x;
    const double a = beta * m * p.mu_y / (2 * p.L_yx * p.L_yx);
    const double c = 4 * p.mu_x * p.L_yx * p.L_yx / (beta * p.mu_y * m * m);
    return 1 - a * c / (std::sqrt(1 + c) + 1);
}

/// Zero when L_yy = 0. Written as a·c/(√(1+c)+1) to avoid cancellation.
inline double theta_bar_2(const SmoothnessProfile& p, double beta) {
    if (p.L_yy == 0) return 0.0;
    const double omb = 1 - beta;
    if (omb <= 0) return 1.0;
    const double a = omb * omb * p.mu_y * p.mu_y / (8 * p.L_yy * p.L_yy);
    const double c = 16 * p.L_yy * p.L_yy / (omb * omb * p.mu_y * p.mu_y);
    return 1 - a * c / (std::sqrt(1 + c) + 1);
}

struct OptimalBeta {
    double beta = 1;
    bool flagged = false;  ///< true when L_yy = 0 and β* = 1 by convention
};

/// Root of θ̄₁(β) = θ̄₂(β) on (0,1); θ̄₁ decreases and θ̄₂ increases in β.
inline OptimalBeta optimal_beta(const SmoothnessProfile& p) {
    if (p.mu_x <= 0 || p.mu_y <= 0) throw std::domain_error("optimal_beta: moduli must be positive");
    if (p.L_yy == 0) return {1.0, true};
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (theta_bar_1(p, mid) > theta_bar_2(p, mid))
            lo = mid;
        else
            hi = mid;
    }
    return {0.5 * (lo + hi), false};
}

struct ScscResult {
    SapdParams params;
    Certificate cert;
    double beta = 1;
    double theta_bar_1 = 0, theta_bar_2 = 0;
    double theta_bar = 0;        ///< max{θ̄₁, θ̄₂}
    double theta_bar_bar = 0;    ///< noise-aware floor (0 for the deterministic rule)
};

namespace detail {
inline double resolve_beta(const SmoothnessProfile& p, std::optional<double> beta) {
    if (p.L_yy == 0) return 1.0;
    if (!beta) return optimal_beta(p).beta;
    if (!(*beta > 0) || *beta >= 1) throw std::domain_error("beta must lie in (0,1) when L_yy > 0");
    return *beta;
}

// τ, σ, α for the explicit construction at a given θ ≥ θ̄.
inline ScscResult scsc_at_theta(const SmoothnessProfile& p, double theta) {
    ScscResult r;
    r.params = {(1 - theta) / (p.mu_x * theta), (1 - theta) / (p.mu_y * theta), theta};
    const double alpha = 1 / r.params.sigma - std::sqrt(theta) * p.L_yy;
    r.cert = check_simple_system(p, r.params.tau, r.params.sigma, theta, alpha);
    // Report the margin of the full rate matrix, which is what certifies ρ.
    const Certificate full = certify(p, r.params, theta, alpha);
    r.cert.psd_margin = full.psd_margin;
    r.cert.feasible = r.cert.feasible && full.feasible;
    r.cert.source = "explicit";
    return r;
}
}  // namespace detail

inline ScscResult scsc_explicit_params(const SmoothnessProfile& p, std::optional<double> beta = std::nullopt) {
    if (p.mu_x <= 0 || p.mu_y <= 0) throw std::domain_error("scsc_explicit_params: moduli must be positive");
    if (beta && p.L_yy > 0 && !(*beta > 0 && *beta < 1))
        throw std::domain_error("beta must lie in (0,1) when L_yy > 0");
    if (beta && !(*beta > 0 && *beta <= 1)) throw std::domain_error("beta must lie in (0,1]");
    const double b = detail::resolve_beta(p, beta);
    const double t1 = theta_bar_1(p, b), t2 = theta_bar_2(p, b);
    ScscResult r = detail::scsc_at_theta(p, std::max(t1, t2));
    r.beta = b;
    r.theta_bar_1 = t1;
    r.theta_bar_2 = t2;
    r.theta_bar = std::max(t1, t2);
    return r;
}

struct NoiseAwareTerms {
    double psi = 0, xi_bar_x = 0, xi_bar_y = 0, theta_bb_1 = 0, theta_bb_2 = 0;
};

inline NoiseAwareTerms noise_aware_terms(const SmoothnessProfile& p, const NoiseProfile& n, double eps,
                                         double beta) {
    NoiseAwareTerms t;
    const double second = p.L_yy > 0 ? (1 - beta) * p.L_yx / (2 * p.L_yy) : kInf;
    t.psi = std::min(std::sqrt(beta * p.mu_x / p.mu_y), second);
    t.xi_bar_x = 3 + 2 * t.psi;
    t.xi_bar_y = 33 + 6 * beta * (2 * p.L_xy / p.L_yx - 1) + 2 * (p.mu_y / p.mu_x) * t.psi;
    t.theta_bb_1 = n.delta_x_sq == 0
                       ? 0.0
                       : std::max(0.0, 1 - (2 / (3 * t.xi_bar_x)) * (p.mu_x / n.delta_x_sq) * eps);
    t.theta_bb_2 = n.delta_y_sq == 0
                       ? 0.0
                       : std::max(0.0, 1 - (2 / (3 * t.xi_bar_y)) * (p.mu_y / n.delta_y_sq) * eps);
    return t;
}

/// Noise-aware SCSC rule: θ = max{θ̄, θ̿} with θ̿ targeting accuracy ε.
inline ScscResult epsilon_params_scsc(const SmoothnessProfile& p, const NoiseProfile& n, double eps,
                                      std::optional<double> beta = std::nullopt) {
    if (!(eps > 0)) throw std::domain_error("epsilon_params_scsc: eps must be positive");
    ScscResult base = scsc_explicit_params(p, beta);
    const NoiseAwareTerms t = noise_aware_terms(p, n, eps, base.beta);
    const double tbb = std::max(t.theta_bb_1, t.theta_bb_2);
    if (tbb <= base.theta_bar) {
        base.theta_bar_bar = tbb;
        return base;
    }
    ScscResult r = detail::scsc_at_theta(p, tbb);
    r.beta = base.beta;
    r.theta_bar_1 = base.theta_bar_1;
    r.theta_bar_2 = base.theta_bar_2;
    r.theta_bar = base.theta_bar;
    r.theta_bar_bar = tbb;
    return r;
}

struct McResult {
    SapdParams params;
    Certificate cert;
};

/// Merely convex–merely concave rule (θ = 1, α = L_yx + L_yy).
inline McResult epsilon_params_mc(const SmoothnessProfile& p, const NoiseProfile& n, double eps) {
    if (p.mu_x != 0 || p.mu_y != 0) throw std::domain_error("epsilon_params_mc: requires mu_x = mu_y = 0");
    if (!(eps > 0)) throw std::domain_error("epsilon_params_mc: eps must be positive");
    auto inv = [](double v) { return v == 0 ? kInf : 1.0 / v; };
    McResult r;
    r.params.tau = std::min(inv(p.L_yx + p.L_xx), n.delta_x_sq == 0 ? kInf : (2.0 / 15.0) * eps / n.delta_x_sq);
    r.params.sigma = std::min({inv(p.L_yx + 2 * p.L_yy), inv(p.L_xy),
                               n.delta_y_sq == 0 ? kInf : (1.0 / 72.0) * eps / n.delta_y_sq});
    r.params.theta = 1.0;
    const double alpha = p.L_yx + p.L_yy;
    r.cert = check_simple_system(p, r.params.tau, r.params.sigma, 1.0, alpha);
    const Certificate full = certify(p, r.params, 1.0, alpha);
    r.cert.psd_margin = full.psd_margin;
    r.cert.feasible = r.cert.feasible && full.feasible;
    r.cert.source = "mc";
    return r;
}

// ---------------------------------------------------------------------------
// Best certifiable rate ρ*
// ---------------------------------------------------------------------------

struct FeasibilityOptions {
    int starts = 20;
    long budget = 10000;
    std::uint64_t seed = 0x51a9d;
};

struct FeasibilityResult {
    bool feasible = false;
    FeasiblePoint witness;
    double margin = -kInf;  ///< λ_min of G_ρ at the witness
    std::string method;     ///< "explicit", "search" or "bound"
    long evaluations = 0;
};

/// Largest admissible t = 1/τ, from the (1,1) entry t(1 − 1/ρ) + μx ≥ 0.
inline double t_max(const SmoothnessProfile& p, double rho) { return p.mu_x * rho / (1 - rho); }
inline double s_max(const SmoothnessProfile& p, double rho) { return p.mu_y * rho / (1 - rho); }

/// Necessary upper bound on θ from the 2×2 minors coupling rows 2 and 3.
inline double theta_upper(const SmoothnessProfile& p, double rho) {
    const double gap = t_max(p, rho) - p.L_xx;
    return rho * (1 + std::sqrt(std::max(0.0, p.mu_y * gap)) / p.L_yx);
}

/// λ_min of the lower-right 4×4 block of G_ρ. With t at its maximum the
/// (1,1) entry vanishes and G_ρ ⪰ 0 reduces to this block being PSD; the
/// block only improves as t grows, so t = t_max is optimal.
inline double block_margin(const SmoothnessProfile& p, double rho, double t, double s, double theta,
                           double alpha) {
    const double r = theta / rho;
    SymMatrix g(4);
    g.set(0, 0, s + p.mu_y - s / rho);
    g.set(0, 1, (r - 1) * p.L_yx);
    g.set(0, 2, (r - 1) * p.L_yy);
    g.set(1, 1, t - p.L_xx);
    g.set(1, 3, -r * p.L_yx);
    g.set(2, 2, s - alpha);
    g.set(2, 3, -r * p.L_yy);
    g.set(3, 3, alpha / rho);
    return psd_margin(g);
}

inline double block_tolerance(const SmoothnessProfile& p, double rho, double t, double s) {
    const double scale = std::max({t, s / rho, p.L_yx, p.L_yy, p.L_xx, p.mu_x, p.mu_y});
    return 1e-9 * std::max(1.0, 2 * scale);
}

/// Decide whether P_ρ is non-empty: explicit witness first, then a
/// multi-start pattern search maximizing λ_min over (s, θ, α) at t = t_max.
inline FeasibilityResult feasibility_P_rho(const SmoothnessProfile& p, double rho,
                                           const FeasibilityOptions& opt = {}) {
    if (!(rho > 0) || !(rho < 1)) throw std::domain_error("feasibility_P_rho: rho must lie in (0,1)");
    FeasibilityResult res;
    auto margin_full = [&](const FeasiblePoint& w) {
        return psd_margin(assemble_G_rho(p, rho, w.t, w.s, w.theta, w.alpha));
    };
    auto full_ok = [&](const FeasiblePoint& w) {
        const SymMatrix g = assemble_G_rho(p, rho, w.t, w.s, w.theta, w.alpha);
        return w.alpha >= 0 && w.alpha <= w.s * (1 + 1e-12) && psd_margin(g) >= -psd_tolerance(g);
    };

    if (p.mu_x > 0 && p.mu_y > 0) {
        const ScscResult ex = scsc_explicit_params(p);
        if (rho >= ex.theta_bar) {
            const ScscResult at = detail::scsc_at_theta(p, rho);
            FeasiblePoint w{1 / at.params.tau, 1 / at.params.sigma, rho, at.cert.alpha};
            if (full_ok(w)) {
                res.feasible = true;
                res.witness = w;
                res.margin = margin_full(w);
                res.method = "explicit";
                return res;
            }
        }
    }

    const double t = t_max(p, rho);
    const double smax = s_max(p, rho);
    const double thmax = theta_upper(p, rho);
    if (t < p.L_xx || smax <= 0) {
        res.method = "bound";
        return res;
    }
    const double tol = block_tolerance(p, rho, t, smax);
    auto objective = [&](const std::array<double, 3>& z) {
        const double s = z[0], th = z[1], a = std::min(z[2], z[0]);
        return block_margin(p, rho, t, s, th, a);
    };
    PatternSearchOptions po;
    po.starts = opt.starts;
    po.budget = opt.budget;
    po.seed = opt.seed;
    po.target = -tol;
    std::vector<std::array<double, 3>> seeds;
    seeds.push_back({smax, rho, smax});
    seeds.push_back({smax, std::min(rho, thmax), 0.5 * smax});
    const auto best = pattern_search_max<3>(objective, {0.0, 0.0, 0.0}, {smax, thmax, smax}, po, seeds);
    res.evaluations = best.evaluations;
    FeasiblePoint w{t, best.x[0], best.x[1], std::min(best.x[2], best.x[0])};
    res.witness = w;
    res.margin = margin_full(w);
    res.method = "search";
    res.feasible = best.f >= -tol && full_ok(w);
    return res;
}

struct RhoStarResult {
    double rho = 1;
    FeasibilityResult witness;
    int iterations = 0;
};

/// Smallest certifiable ρ, by bisection on feasibility of P_ρ.
inline RhoStarResult rho_star(const SmoothnessProfile& p, double tol = 1e-3, const FeasibilityOptions& opt = {}) {
    if (p.mu_x <= 0 || p.mu_y <= 0) throw std::domain_error("rho_star: moduli must be positive");
    RhoStarResult out;
    double hi = std::min(scsc_explicit_params(p).theta_bar, 1 - 1e-12);
    FeasibilityResult fh = feasibility_P_rho(p, hi, opt);
    while (!fh.feasible && hi < 1 - 1e-12) {
        hi = 1 - 0.5 * (1 - hi);
        fh = feasibility_P_rho(p, hi, opt);
    }
    double lo = 0.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        FeasibilityResult fm = feasibility_P_rho(p, mid, opt);
        ++out.iterations;
        if (fm.feasible) {
            hi = mid;
            fh = fm;
        } else {
            lo = mid;
        }
    }
    out.rho = hi;
    out.witness = fh;
    return out;
}

// ---------------------------------------------------------------------------
// SGDA (θ = 0)
// ---------------------------------------------------------------------------

namespace detail {
inline SymMatrix sgda_matrix(const SmoothnessProfile& p, double t, double s, double rho) {
    SymMatrix m(3);
    m.set(0, 0, s + p.mu_y - s / rho);
    m.set(0, 1, -p.L_yx);
    m.set(0, 2, -p.L_yy);
    m.set(1, 1, t - p.L_xx);
    m.set(2, 2, s);
    return m;
}
}  // namespace detail

inline Certificate sgda_certificate(const SmoothnessProfile& p, double tau, double sigma, double rho) {
    if (p.mu_x <= 0 || p.mu_y <= 0)
        throw std::domain_error("sgda_certificate: SGDA has no admissible step sizes when a modulus is zero");
    if (!(rho > 0) || !(rho < 1)) throw std::domain_error("sgda_certificate: rho must lie in (0,1)");
    if (!(tau > 0) || !(sigma > 0)) throw std::domain_error("sgda_certificate: tau, sigma must be positive");
    const SymMatrix m = detail::sgda_matrix(p, 1 / tau, 1 / sigma, rho);
    Certificate c;
    c.rho = rho;
    c.alpha = 0;
    c.psd_margin = psd_margin(m);
    c.feasible = detail::geq_rel(tau * p.mu_x, (1 - rho) / rho) && c.psd_margin >= -psd_tolerance(m);
    c.source = "sgda";
    return c;
}

struct SgdaResult {
    SapdParams params;  ///< θ = 0
    double rho = 1;
    double rho_bar = 1;
    double L = 0;
    Certificate cert;
};

inline double sgda_L(const SmoothnessProfile& p, double b1, double b2) {
    const double first = p.L_xx / p.mu_x + p.L_yx * p.L_yx / (b1 * p.mu_x * p.mu_y);
    const double second = p.L_yy * p.L_yy / (b2 * (1 - b1 - b2) * p.mu_y * p.mu_y);
    return std::max(first, second);
}

namespace detail {
inline void check_betas(double b1, double b2) {
    if (!(b1 > 0 && b1 < 1 && b2 > 0 && b2 < 1 && b1 + b2 < 1))
        throw std::domain_error("beta1, beta2 must lie in (0,1) with beta1 + beta2 < 1");
}
inline SgdaResult sgda_at_rho(const SmoothnessProfile& p, double rho, double b1, double b2) {
    SgdaResult r;
    r.rho = rho;
    r.params = {(1 - rho) / (rho * p.mu_x), (1 - rho) / ((1 - b1 - b2) * rho * p.mu_y), 0.0};
    r.cert = sgda_certificate(p, r.params.tau, r.params.sigma, rho);
    r.cert.source = "explicit";
    return r;
}
}  // namespace detail

inline SgdaResult sgda_explicit_params(const SmoothnessProfile& p, double b1, double b2) {
    if (p.mu_x <= 0 || p.mu_y <= 0) throw std::domain_error("sgda_explicit_params: moduli must be positive");
    detail::check_betas(b1, b2);
    const double L = sgda_L(p, b1, b2);
    const double rho_bar = 1 / (1 + 1 / L);
    SgdaResult r = detail::sgda_at_rho(p, rho_bar, b1, b2);
    r.rho_bar = rho_bar;
    r.L = L;
    return r;
}

inline SgdaResult sgda_epsilon_params(const SmoothnessProfile& p, const NoiseProfile& n, double eps, double b1,
                                      double b2) {
    if (!(eps > 0)) throw std::domain_error("sgda_epsilon_params: eps must be positive");
    const SgdaResult base = sgda_explicit_params(p, b1, b2);
    const double r1 = n.delta_x_sq == 0 ? 0.0 : std::max(0.0, 1 - p.mu_x * eps / (6 * n.delta_x_sq));
    const double r2 = n.delta_y_sq == 0
                          ? 0.0
                          : std::max(0.0, (6 * n.delta_y_sq - eps * p.mu_y) /
                                              (6 * n.delta_y_sq - eps * p.mu_y * (b1 + b2)));
    const double rho = std::max({base.rho_bar, r1, r2});
    SgdaResult r = detail::sgda_at_rho(p, rho, b1, b2);
    r.rho_bar = base.rho_bar;
    r.L = base.L;
    return r;
}

/// 2-variable SGDA feasibility at rate ρ: t = t_max is optimal, and λ_min is
/// concave in s, so a golden-section search settles it.
inline std::optional<std::pair<double, double>> sgda_feasible(const SmoothnessProfile& p, double rho) {
    const double t = t_max(p, rho);
    const double smax = s_max(p, rho);
    auto f = [&](double s) { return psd_margin(detail::sgda_matrix(p, t, s, rho)); };
    const Max1D best = golden_max(f, 0.0, smax, 80);
    const SymMatrix m = detail::sgda_matrix(p, t, best.x, rho);
    if (best.x > 0 && best.f >= -psd_tolerance(m)) return std::make_pair(t, best.x);
    return std::nullopt;
}

inline SgdaResult sgda_rho_star(const SmoothnessProfile& p, double tol = 1e-3) {
    if (p.mu_x <= 0 || p.mu_y <= 0) throw std::domain_error("sgda_rho_star: moduli must be positive");
    double lo = 0.0, hi = 1.0;
    std::optional<std::pair<double, double>> best;
    // Start from the explicit SGDA step rule so a feasible hi is known.
    const SgdaResult ex = sgda_explicit_params(p, 1.0 / 3.0, 1.0 / 3.0);
    if (ex.cert.feasible) {
        hi = ex.rho;
        best = std::make_pair(1 / ex.params.tau, 1 / ex.params.sigma);
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        auto f = sgda_feasible(p, mid);
        if (f) {
            hi = mid;
            best = f;
        } else {
            lo = mid;
        }
    }
    SgdaResult r;
    r.rho = hi;
    if (best) {
        r.params = {1 / best->first, 1 / best->second, 0.0};
        r.cert = sgda_certificate(p, r.params.tau, r.params.sigma, hi);
        r.cert.source = "bisection";
    }
    return r;
}

// ---------------------------------------------------------------------------
// Chambolle–Pock step-size family
// ---------------------------------------------------------------------------

struct CpResult {
    SapdParams params;
    double theta_lo = 0, theta_hi = 1;
};

inline std::pair<double, double> cp_theta_interval(const SmoothnessProfile& p) {
    if (p.L_xx != 0 || p.L_yy != 0) throw std::domain_error("cp_params: requires a bilinear profile");
    if (p.mu_x <= 0 || p.mu_y <= 0) throw std::domain_error("cp_params: moduli must be positive");
    const double a = 1 + p.mu_x * p.mu_y / (2 * p.L_yx * p.L_yx);
    // a − √(a² − 1) = 1/(a + √(a² − 1)), the cancellation-free form.
    return {1.0 / (a + std::sqrt(a * a - 1)), 1.0};
}

inline CpResult cp_params(const SmoothnessProfile& p, double theta) {
    const auto [lo, hi] = cp_theta_interval(p);
    if (theta >= hi) throw std::domain_error("cp_params: theta = 1 gives zero step sizes");
    if (theta < lo * (1 - 1e-12)) throw std::domain_error("cp_params: theta below the admissible interval");
    CpResult r;
    r.params = {(1 / theta - 1) / p.mu_x, (1 / theta - 1) / p.mu_y, theta};
    r.theta_lo = lo;
    r.theta_hi = hi;
    return r;
}

// ---------------------------------------------------------------------------
// Variance majorants and bound constants of the main convergence theorem
// ---------------------------------------------------------------------------

struct Majorants {
    double xi_x = 0, xi_y = 0, xi = 0;
    double eta_x = 0, eta_y = 0;
    /// Ω = omega_x·Ω_X + omega_y·Ω_Y, and the same pair weights the initial
    /// squared distances in Δ_{τ,σ,θ}.
    double omega_x = 0, omega_y = 0;
};

inline Majorants variance_majorants(const SmoothnessProfile& p, const SapdParams& prm, const NoiseProfile& n,
                                    std::optional<double> eta_x = std::nullopt,
                                    std::optional<double> eta_y = std::nullopt) {
    const double tau = prm.tau, sig = prm.sigma, th = prm.theta;
    Majorants m;
    m.eta_x = eta_x.value_or(1 / tau + p.mu_x);
    m.eta_y = eta_y.value_or(1 / sig + p.mu_y);
    const double bx = 1 + tau * p.mu_x, by = 1 + sig * p.mu_y;
    m.xi_x = 1 + sig * th * (1 + th) * p.L_yx / (2 * by);
    m.xi_y = (1 + 2 * th + (th + sig * th * (1 + th) * p.L_yy) / by +
              tau * sig * th * (1 + th) * p.L_yx * p.L_xy / (bx * by)) *
                 (1 + 2 * th) +
             tau * th * (1 + th) * p.L_yx / (2 * bx);
    m.xi = (tau / bx * m.xi_x + 1 / (2 * m.eta_x)) * n.delta_x_sq +
           (sig / by * m.xi_y + (1 + 2 * th) / (2 * m.eta_y)) * n.delta_y_sq;
    m.omega_x = 0.5 * (1 / tau + m.eta_x);
    m.omega_y = 0.5 * (1 / sig + (1 + 2 * th) * m.eta_y);
    return m;
}

/// Δ_{τ,σ,θ} for given initial squared distances to the saddle point.
inline double delta_tst(const Majorants& m, double dx0_sq, double dy0_sq) {
    return m.omega_x * dx0_sq + m.omega_y * dy0_sq;
}

/// Δ_N(x, y) of the theorem, evaluated at the last iterate.
inline double delta_N(const SapdParams& prm, double rho, double alpha, double dx_sq, double dy_sq) {
    return dx_sq / (2 * rho * prm.tau) + (1 - alpha * prm.sigma) * dy_sq / (2 * rho * prm.sigma);
}

/// Right-hand side ρ^{N−1}Δ + Ξ(1−ρ^N)/(1−ρ) of the expected-distance bound.
inline double distance_bound(double rho, std::size_t N, double delta0, double xi) {
    const double n = static_cast<double>(N);
    const double geom = rho == 1 ? n : (1 - std::pow(rho, n)) / (1 - rho);
    return std::pow(rho, n - 1) * delta0 + xi * geom;
}

}  // namespace sapd
