#pragma once
// Saddle-point problem abstraction:  min_x max_y  f(x) + Φ(x,y) − g(y).
//
// f and g are modelled as (μ/2)‖·‖² plus the indicator of a closed convex
// set, which covers every problem in this library and makes the prox maps,
// projections and smooth-part gradients available generically.

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>

#include "sapd/numerics.hpp"

namespace sapd {

using Rng = std::mt19937_64;

/// Standard normal draws. The distribution object is rebuilt per call so the
/// stream depends only on the engine state.
inline double standard_normal(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return n(rng);
}

struct SmoothnessProfile {
    double mu_x = 0, mu_y = 0;
    double L_xx = 0, L_xy = 0, L_yx = 0, L_yy = 0;
};

struct NoiseProfile {
    double delta_x_sq = 0, delta_y_sq = 0;
};

struct ImplicitLipschitz {
    double L_xstar = 1, L_ystar = 1;
};

inline SmoothnessProfile validate_profile(const SmoothnessProfile& p) {
    auto check = [](double v, const char* name) {
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be finite");
        if (v < 0) throw std::invalid_argument(std::string(name) + " must be non-negative");
    };
    check(p.mu_x, "mu_x");
    check(p.mu_y, "mu_y");
    check(p.L_xx, "L_xx");
    check(p.L_xy, "L_xy");
    check(p.L_yx, "L_yx");
    check(p.L_yy, "L_yy");
    if (p.L_yx <= 0) throw std::invalid_argument("L_yx must be positive");
    if (p.L_xy <= 0) throw std::invalid_argument("L_xy must be positive");
    return p;
}

inline NoiseProfile validate_noise(const NoiseProfile& n) {
    if (!std::isfinite(n.delta_x_sq) || n.delta_x_sq < 0)
        throw std::invalid_argument("delta_x_sq must be finite and non-negative");
    if (!std::isfinite(n.delta_y_sq) || n.delta_y_sq < 0)
        throw std::invalid_argument("delta_y_sq must be finite and non-negative");
    return n;
}

/// Lipschitz constants of the best-response maps x*(y) and y*(x).
inline ImplicitLipschitz implicit_lipschitz(const SmoothnessProfile& p) {
    if (p.mu_x <= 0 || p.mu_y <= 0) throw std::domain_error("implicit_lipschitz: moduli must be positive");
    const double kxy = p.L_xy / p.mu_x;
    const double kyx = p.L_yx / p.mu_y;
    return {std::sqrt(2 * kxy * kxy + 1), std::sqrt(2 * kyx * kyx + 1)};
}

/// Oracle interface. Implementations are immutable; all randomness flows
/// through the caller-owned engine.
class SaddlePointProblem {
public:
    virtual ~SaddlePointProblem() = default;

    virtual std::size_t nx() const = 0;
    virtual std::size_t ny() const = 0;

    /// Unbiased stochastic estimates of ∇xΦ and ∇yΦ.
    virtual Vec grad_x(const Vec& x, const Vec& y, Rng& rng) const = 0;
    virtual Vec grad_y(const Vec& x, const Vec& y, Rng& rng) const = 0;

    virtual bool has_exact_gradients() const { return false; }
    virtual Vec exact_grad_x(const Vec&, const Vec&) const {
        throw std::logic_error("exact gradient oracle not available");
    }
    virtual Vec exact_grad_y(const Vec&, const Vec&) const {
        throw std::logic_error("exact gradient oracle not available");
    }

    /// Quadratic moduli of f and g (f = (mu_f/2)‖x‖² + ι_X, likewise g).
    virtual double mu_f() const = 0;
    virtual double mu_g() const = 0;
    /// Euclidean projections onto dom f and dom g.
    virtual Vec project_x(const Vec& v) const = 0;
    virtual Vec project_y(const Vec& w) const = 0;

    /// argmin_u f(u) + ‖u − v‖²/(2τ).
    virtual Vec prox_x(const Vec& v, double tau) const {
        Vec u(v);
        const double s = 1.0 / (1.0 + tau * mu_f());
        for (double& e : u) e *= s;
        return project_x(u);
    }
    /// argmin_u g(u) + ‖u − w‖²/(2σ).
    virtual Vec prox_y(const Vec& w, double sigma) const {
        Vec u(w);
        const double s = 1.0 / (1.0 + sigma * mu_g());
        for (double& e : u) e *= s;
        return project_y(u);
    }

    /// Squared diameters of dom f and dom g (infinite when unbounded).
    virtual double omega_f() const { return std::numeric_limits<double>::infinity(); }
    virtual double omega_g() const { return std::numeric_limits<double>::infinity(); }

    virtual SmoothnessProfile profile() const = 0;
    virtual NoiseProfile noise() const = 0;
};

/// Radial clipping onto {‖v − c‖ ≤ r}.
inline Vec project_ball(const Vec& v, const Vec& center, double r) {
    if (!(r > 0)) throw std::invalid_argument("project_ball: radius must be positive");
    if (center.size() != v.size()) throw std::invalid_argument("project_ball: dimension mismatch");
    const double d = std::sqrt(dist_sq(v, center));
    if (d <= r) return v;
    Vec out(v.size());
    const double s = r / d;
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = center[i] + s * (v[i] - center[i]);
    return out;
}
inline Vec project_ball(const Vec& v, double r) { return project_ball(v, Vec(v.size(), 0.0), r); }

/// Φ(x,y) = ⟨Kx, y⟩ with f = (μx/2)‖x‖², g = (μy/2)‖y‖² and isotropic
/// Gaussian oracle noise of per-call covariance (δ²/d)·I.
struct QuadraticBilinearProblem {
    Matrix K;
    double mu_x = 1, mu_y = 1;
    double delta = 0;
    std::size_t d = 0;
};

/// JSON-shaped construction spec for a random instance.
struct QuadraticSpec {
    std::size_t d = 30;
    double spectral_norm = 10;
    double mu_x = 1, mu_y = 1;
    double delta = 0;
    std::uint64_t seed = 1;
};

/// Haar-distributed orthogonal matrix (Gram–Schmidt on a Gaussian matrix
/// with the usual sign fix).
inline Matrix random_orthogonal(std::size_t d, Rng& rng) {
    Matrix g(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) g(i, j) = standard_normal(rng);
    Matrix q(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        Vec col(d);
        for (std::size_t i = 0; i < d; ++i) col[i] = g(i, j);
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t k = 0; k < j; ++k) {
                double proj = 0.0;
                for (std::size_t i = 0; i < d; ++i) proj += q(i, k) * col[i];
                for (std::size_t i = 0; i < d; ++i) col[i] -= proj * q(i, k);
            }
        const double nrm = std::sqrt(norm_sq(col));
        for (std::size_t i = 0; i < d; ++i) q(i, j) = col[i] / nrm;
    }
    return q;
}

/// K = QΛQᵀ with |Λ| evenly spaced on [0, ‖K‖₂] and random signs, so both
/// the decoupled direction (λ = 0) and the stiffest one (|λ| = ‖K‖₂) occur.
inline QuadraticBilinearProblem make_quadratic(const QuadraticSpec& spec) {
    if (spec.d == 0) throw std::invalid_argument("quadratic spec: d must be positive");
    if (!(spec.spectral_norm >= 0)) throw std::invalid_argument("quadratic spec: spectral_norm must be >= 0");
    if (!(spec.mu_x > 0) || !(spec.mu_y > 0)) throw std::invalid_argument("quadratic spec: moduli must be positive");
    if (!(spec.delta >= 0)) throw std::invalid_argument("quadratic spec: delta must be >= 0");
    Rng rng(spec.seed);
    const std::size_t d = spec.d;
    Vec lam(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double mag = d == 1 ? spec.spectral_norm
                                  : spec.spectral_norm * static_cast<double>(i) / static_cast<double>(d - 1);
        const bool neg = (rng() >> 63) != 0;
        lam[i] = neg ? -mag : mag;
    }
    const Matrix q = random_orthogonal(d, rng);
    Matrix k = q * Matrix::diag(lam) * q.transpose();
    for (std::size_t i = 0; i < d; ++i)  // exact symmetry
        for (std::size_t j = i + 1; j < d; ++j) k(j, i) = k(i, j) = 0.5 * (k(i, j) + k(j, i));
    return {k, spec.mu_x, spec.mu_y, spec.delta, d};
}

inline void validate_quadratic(const QuadraticBilinearProblem& q) {
    if (q.K.rows() != q.d || q.K.cols() != q.d) throw std::invalid_argument("quadratic: K must be d x d");
    for (std::size_t i = 0; i < q.d; ++i)
        for (std::size_t j = i + 1; j < q.d; ++j)
            if (q.K(i, j) != q.K(j, i)) throw std::invalid_argument("quadratic: K must be symmetric");
    if (!(q.mu_x >= 0) || !(q.mu_y >= 0) || !(q.delta >= 0))
        throw std::invalid_argument("quadratic: moduli and delta must be non-negative");
}

/// Oracles for the bilinear quadratic. Optional ball radii turn f and g
/// into regularizer + indicator, which the SMD baseline and the merely
/// convex experiments need.
class QuadraticOracles final : public SaddlePointProblem {
public:
    explicit QuadraticOracles(QuadraticBilinearProblem q, double radius_x = 0, double radius_y = 0)
        : q_(std::move(q)), rx_(radius_x), ry_(radius_y) {
        validate_quadratic(q_);
        kt_ = q_.K.transpose();
        knorm_ = spectral_norm(q_.K);
    }

    std::size_t nx() const override { return q_.d; }
    std::size_t ny() const override { return q_.d; }

    Vec grad_x(const Vec& x, const Vec& y, Rng& rng) const override {
        return add_noise(exact_grad_x(x, y), rng);
    }
    Vec grad_y(const Vec& x, const Vec& y, Rng& rng) const override {
        return add_noise(exact_grad_y(x, y), rng);
    }
    bool has_exact_gradients() const override { return true; }
    Vec exact_grad_x(const Vec&, const Vec& y) const override { return kt_ * y; }
    Vec exact_grad_y(const Vec& x, const Vec&) const override { return q_.K * x; }

    double mu_f() const override { return q_.mu_x; }
    double mu_g() const override { return q_.mu_y; }
    Vec project_x(const Vec& v) const override { return rx_ > 0 ? project_ball(v, rx_) : v; }
    Vec project_y(const Vec& w) const override { return ry_ > 0 ? project_ball(w, ry_) : w; }
    double omega_f() const override {
        return rx_ > 0 ? 4 * rx_ * rx_ : std::numeric_limits<double>::infinity();
    }
    double omega_g() const override {
        return ry_ > 0 ? 4 * ry_ * ry_ : std::numeric_limits<double>::infinity();
    }

    SmoothnessProfile profile() const override {
        return {q_.mu_x, q_.mu_y, 0.0, knorm_, knorm_, 0.0};
    }
    NoiseProfile noise() const override { return {q_.delta * q_.delta, q_.delta * q_.delta}; }

    const QuadraticBilinearProblem& problem() const { return q_; }
    double radius_x() const { return rx_; }
    double radius_y() const { return ry_; }

private:
    Vec add_noise(Vec g, Rng& rng) const {
        if (q_.delta == 0.0) return g;
        const double s = q_.delta / std::sqrt(static_cast<double>(q_.d));
        for (double& e : g) e += s * standard_normal(rng);
        return g;
    }

    QuadraticBilinearProblem q_;
    Matrix kt_;
    double knorm_ = 0;
    double rx_, ry_;
};

inline std::shared_ptr<SaddlePointProblem> make_quadratic_oracles(const QuadraticBilinearProblem& q,
                                                                   double radius_x = 0, double radius_y = 0) {
    return std::make_shared<QuadraticOracles>(q, radius_x, radius_y);
}

}  // namespace sapd
