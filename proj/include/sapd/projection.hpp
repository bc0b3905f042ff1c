#pragma once
// Euclidean projections onto the probability simplex and onto the simplex
// intersected with a Euclidean ball centred at the uniform distribution.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "sapd/numerics.hpp"

namespace sapd {

/// P = {p ≥ 0, 1ᵀp = 1, ‖p − 1/n‖² ≤ R²}. On the simplex the ball
/// constraint is equivalent to ‖p‖² ≤ R̄² = R² + 1/n.
struct SimplexBallSpec {
    std::size_t n = 0;
    double R = 0;
    double rbar_sq() const { return R * R + 1.0 / static_cast<double>(n); }
};

inline void validate_spec(const SimplexBallSpec& s) {
    if (s.n == 0) throw std::invalid_argument("SimplexBallSpec: n must be positive");
    if (!(s.R > 0) || !std::isfinite(s.R)) throw std::invalid_argument("SimplexBallSpec: R must be positive");
}

namespace detail {
inline void require_finite(const Vec& v, const char* who) {
    for (double e : v)
        if (!std::isfinite(e)) throw std::invalid_argument(std::string(who) + ": input must be finite");
}
/// Indices sorting v descending; stable so ties keep their original order.
inline std::vector<std::size_t> descending_order(const Vec& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    return idx;
}
}  // namespace detail

inline Vec project_simplex(const Vec& v) {
    detail::require_finite(v, "project_simplex");
    if (v.empty()) throw std::invalid_argument("project_simplex: empty vector");
    const auto idx = detail::descending_order(v);
    double cum = 0.0, q = 0.0;
    for (std::size_t k = 1; k <= v.size(); ++k) {
        const double u = v[idx[k - 1]];
        cum += u;
        const double cand = (cum - 1.0) / static_cast<double>(k);
        if (cand < u) q = cand;
    }
    Vec p(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) p[i] = std::max(v[i] - q, 0.0);
    return p;
}

struct ProjectionDiagnostics {
    bool ball_active = false;
    bool used_fallback = false;
    std::size_t support = 0;
    double gamma = 1.0;
};

inline Vec qp_projection_oracle(const Vec& pbar, const SimplexBallSpec& spec);

/// Projection onto the simplex–ball intersection. When the plain simplex
/// projection violates the ball, the solution has the form p_i = (γu_i − q)₊
/// on a prefix of the descending sort; γ and q follow from the two active
/// constraints once the support size k is fixed.
inline Vec project_simplex_ball(const Vec& pbar, const SimplexBallSpec& spec, ProjectionDiagnostics* diag = nullptr) {
    validate_spec(spec);
    if (pbar.size() != spec.n) throw std::invalid_argument("project_simplex_ball: dimension mismatch");
    detail::require_finite(pbar, "project_simplex_ball");
    const double rb2 = spec.rbar_sq();
    Vec ps = project_simplex(pbar);
    if (norm_sq(ps) <= rb2) {
        if (diag) *diag = {false, false, static_cast<std::size_t>(std::count_if(ps.begin(), ps.end(), [](double e) { return e > 0; })), 1.0};
        return ps;
    }
    const std::size_t n = spec.n;
    const auto idx = detail::descending_order(pbar);
    constexpr double tol = 1e-12;
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double uk = pbar[idx[k - 1]];
        s1 += uk;
        s2 += uk * uk;
        const double kk = static_cast<double>(k);
        const double num = rb2 - 1.0 / kk;
        const double den = s2 - s1 * s1 / kk;
        if (num < 0 || !(den > 0)) continue;
        const double g = std::sqrt(num / den);
        if (!(g > 0) || !(g < 1)) continue;
        const double q = (g * s1 - 1.0) / kk;
        // Beyond the last coordinate nothing can be cut off.
        const double next = k < n ? g * pbar[idx[k]] : -std::numeric_limits<double>::infinity();
        const double scale = tol * std::max(1.0, std::abs(q));
        if (next <= q + scale && q < g * uk + scale) {
            Vec p(n, 0.0);
            for (std::size_t j = 0; j < k; ++j) p[idx[j]] = std::max(0.0, g * pbar[idx[j]] - q);
            if (diag) *diag = {true, false, k, g};
            return p;
        }
    }
    std::fprintf(stderr, "project_simplex_ball: no support size satisfied the threshold test (n=%zu); using QP oracle\n", n);
    if (diag) *diag = {true, true, 0, std::numeric_limits<double>::quiet_NaN()};
    return qp_projection_oracle(pbar, spec);
}

/// Brute-force projection: for every support set S and each state of the
/// ball constraint, solve the KKT equations in closed form and keep the
/// feasible candidate nearest to p̄. Exponential in n, so n ≤ 15.
inline Vec qp_projection_oracle(const Vec& pbar, const SimplexBallSpec& spec) {
    validate_spec(spec);
    const std::size_t n = spec.n;
    if (pbar.size() != n) throw std::invalid_argument("qp_projection_oracle: dimension mismatch");
    if (n > 15) throw std::invalid_argument("qp_projection_oracle: n must be <= 15");
    detail::require_finite(pbar, "qp_projection_oracle");
    const double rb2 = spec.rbar_sq();
    const double ftol = 1e-12;
    Vec best;
    double best_d = std::numeric_limits<double>::infinity();
    auto consider = [&](const Vec& p) {
        double sum = 0.0;
        for (double e : p) {
            if (e < -ftol) return;
            sum += e;
        }
        if (std::abs(sum - 1.0) > 1e-10 || norm_sq(p) > rb2 * (1 + 1e-10)) return;
        const double d = dist_sq(p, pbar);
        if (d < best_d) {
            best_d = d;
            best = p;
        }
    };
    std::vector<std::size_t> S;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        S.clear();
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                S.push_back(i);
                s1 += pbar[i];
                s2 += pbar[i] * pbar[i];
            }
        const double k = static_cast<double>(S.size());
        {  // ball inactive: p_S = p̄_S − ν
            const double nu = (s1 - 1.0) / k;
            Vec p(n, 0.0);
            for (std::size_t i : S) p[i] = pbar[i] - nu;
            consider(p);
        }
        {  // ball active: p_S = γ p̄_S − q with ‖p‖² = R̄²
            const double num = rb2 - 1.0 / k, den = s2 - s1 * s1 / k;
            if (num >= 0 && den > 0) {
                const double g = std::sqrt(num / den);
                const double q = (g * s1 - 1.0) / k;
                Vec p(n, 0.0);
                for (std::size_t i : S) p[i] = g * pbar[i] - q;
                consider(p);
            }
        }
    }
    if (best.empty()) throw std::logic_error("qp_projection_oracle: no feasible KKT candidate");
    for (double& e : best) e = std::max(e, 0.0);
    return best;
}

struct FeasibilityReport {
    double min_entry, sum_residual, ball_excess;
    bool ok(double tol = 1e-10) const { return min_entry >= -tol && sum_residual <= tol && ball_excess <= tol; }
};

inline FeasibilityReport simplex_ball_feasibility(const Vec& p, const SimplexBallSpec& spec) {
    double mn = std::numeric_limits<double>::infinity(), sum = 0.0;
    for (double e : p) {
        mn = std::min(mn, e);
        sum += e;
    }
    return {mn, std::abs(sum - 1.0), std::max(0.0, norm_sq(p) - spec.rbar_sq())};
}

/// KKT residual of p* as the projection of p̄: the distance between p̄ − p*
/// and the closest normal-cone element λ p* + ν1 − ζ with ζ ≥ 0, ζ_i p*_i = 0,
/// λ ≥ 0 (λ > 0 only if the ball is tight). The multipliers are fitted by
/// least squares on the support.
inline double projection_kkt_residual(const Vec& pbar, const Vec& p, const SimplexBallSpec& spec) {
    const std::size_t n = p.size();
    const double eps = 1e-12;
    std::vector<std::size_t> S;
    for (std::size_t i = 0; i < n; ++i)
        if (p[i] > eps) S.push_back(i);
    const bool tight = std::abs(norm_sq(p) - spec.rbar_sq()) <= 1e-9 * std::max(1.0, spec.rbar_sq());
    // On the support: pbar_i − p_i = λ p_i + ν. Fit (λ, ν) by least squares.
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
    for (std::size_t i : S) {
        const double r = pbar[i] - p[i];
        a11 += p[i] * p[i];
        a12 += p[i];
        a22 += 1;
        b1 += p[i] * r;
        b2 += r;
    }
    double lam = 0, nu = 0;
    if (tight) {
        const double det = a11 * a22 - a12 * a12;
        if (std::abs(det) > 1e-300) {
            lam = (b1 * a22 - a12 * b2) / det;
            nu = (a11 * b2 - a12 * b1) / det;
        }
        if (lam < 0) lam = 0;
        if (lam == 0 && a22 > 0) nu = b2 / a22;
    } else if (a22 > 0) {
        nu = b2 / a22;
    }
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = pbar[i] - p[i] - lam * p[i] - nu;
        if (p[i] > eps)
            res += r * r;
        else
            res += std::pow(std::max(0.0, r), 2);  // need r = −ζ_i ≤ 0
    }
    return std::sqrt(res);
}

}  // namespace sapd
