#pragma once
// Distributionally robust logistic regression posed as a smoothed
// strongly-convex–strongly-concave saddle problem:
//
//   min_{‖x‖² ≤ D_x} max_{y ∈ P_r}  (μx/2)‖x‖² + Σ_i y_i φ_i(x) − (μy/2)‖y‖²,
//
// with φ_i(x) = log(1 + exp(−b_i a_iᵀx)) and P_r the simplex intersected with
// the ball ‖y − 1/n‖² ≤ r/n².

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sapd/numerics.hpp"
#include "sapd/problem_model.hpp"
#include "sapd/projection.hpp"
#include "sapd/robustness.hpp"
#include "sapd/solvers.hpp"
#include "sapd/tuning.hpp"

namespace sapd {

enum class Normalization { ColumnMinMax, GlobalScale, None };

inline Normalization parse_normalization(const std::string& s) {
    if (s == "minmax" || s == "column-minmax") return Normalization::ColumnMinMax;
    if (s == "global" || s == "global-scale") return Normalization::GlobalScale;
    if (s == "none") return Normalization::None;
    throw std::invalid_argument("unknown normalization '" + s + "' (expected minmax, global or none)");
}
inline std::string to_string(Normalization n) {
    switch (n) {
        case Normalization::ColumnMinMax: return "column-minmax";
        case Normalization::GlobalScale: return "global-scale";
        case Normalization::None: return "none";
    }
    return "?";
}

struct DroDataset {
    Matrix A;  ///< n×d, rows are samples
    Vec b;     ///< labels in {−1, +1}
    Normalization normalization = Normalization::None;
    std::string path, format;
    std::vector<std::size_t> constant_columns;  ///< flagged by min-max scaling

    std::size_t n() const { return A.rows(); }
    std::size_t d() const { return A.cols(); }
};

struct DatasetFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Scales the dataset in place.
inline void normalize_dataset(DroDataset& ds, Normalization mode) {
    const std::size_t n = ds.n(), d = ds.d();
    ds.normalization = mode;
    ds.constant_columns.clear();
    if (mode == Normalization::ColumnMinMax) {
        for (std::size_t j = 0; j < d; ++j) {
            double lo = kInf, hi = -kInf;
            for (std::size_t i = 0; i < n; ++i) {
                lo = std::min(lo, ds.A(i, j));
                hi = std::max(hi, ds.A(i, j));
            }
            const double w = hi - lo;
            if (!(w > 0)) ds.constant_columns.push_back(j);
            for (std::size_t i = 0; i < n; ++i) ds.A(i, j) = w > 0 ? (ds.A(i, j) - lo) / w : 0.0;
        }
    } else if (mode == Normalization::GlobalScale) {
        const double s = std::min(std::sqrt(static_cast<double>(d)), std::sqrt(static_cast<double>(n)));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) ds.A(i, j) /= s;
    }
}

struct LoadOptions {
    /// Label to treat as +1. Needed for non-numeric or multiclass labels;
    /// every other class becomes −1 (one-vs-rest).
    std::optional<std::string> positive_label;
    /// CSV label column; negative counts from the end (−1 = last).
    int label_column = -1;
};

namespace detail {
inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\"");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\"");
    return s.substr(a, b - a + 1);
}
inline std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size() || !std::isfinite(v)) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

inline Vec map_labels(const std::vector<std::string>& raw, const LoadOptions& opt) {
    std::set<std::string> classes(raw.begin(), raw.end());
    if (classes.empty()) throw DatasetFormatError("dataset has no labelled rows");
    std::string positive;
    if (opt.positive_label) {
        positive = *opt.positive_label;
        if (!classes.count(positive)) throw DatasetFormatError("positive label '" + positive + "' not present in data");
    } else {
        if (classes.size() != 2)
            throw DatasetFormatError("labels are not binary (" + std::to_string(classes.size()) +
                                     " classes); name the positive class for one-vs-rest");
        auto it = classes.begin();
        const auto a = parse_double(*it), b = parse_double(*std::next(it));
        if (!a || !b) throw DatasetFormatError("non-numeric binary labels; name the positive class");
        positive = *a > *b ? *it : *std::next(it);
    }
    Vec y(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) y[i] = raw[i] == positive ? 1.0 : -1.0;
    return y;
}
}  // namespace detail

inline DroDataset parse_csv(std::istream& in, const LoadOptions& opt = {}) {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    std::string line;
    std::size_t lineno = 0, width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) fields.push_back(detail::trim(f));
        if (!line.empty() && line.back() == ',') fields.push_back("");
        if (fields.size() < 2) throw DatasetFormatError("line " + std::to_string(lineno) + ": need features and a label");
        const int lc = opt.label_column < 0 ? static_cast<int>(fields.size()) + opt.label_column : opt.label_column;
        if (lc < 0 || lc >= static_cast<int>(fields.size()))
            throw DatasetFormatError("line " + std::to_string(lineno) + ": label column out of range");
        std::vector<double> feats;
        bool numeric = true;
        for (int j = 0; j < static_cast<int>(fields.size()); ++j) {
            if (j == lc) continue;
            const auto v = detail::parse_double(fields[j]);
            if (!v) {
                numeric = false;
                break;
            }
            feats.push_back(*v);
        }
        if (!numeric) {
            if (rows.empty() && labels.empty()) continue;  // header row
            throw DatasetFormatError("line " + std::to_string(lineno) + ": malformed numeric field");
        }
        if (fields[lc].empty()) throw DatasetFormatError("line " + std::to_string(lineno) + ": missing label");
        if (width == 0) width = feats.size();
        if (feats.size() != width)
            throw DatasetFormatError("line " + std::to_string(lineno) + ": expected " + std::to_string(width) +
                                     " features, got " + std::to_string(feats.size()));
        rows.push_back(std::move(feats));
        labels.push_back(fields[lc]);
    }
    DroDataset ds;
    ds.A = Matrix(rows.size(), width);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j) ds.A(i, j) = rows[i][j];
    ds.b = detail::map_labels(labels, opt);
    ds.format = "csv";
    return ds;
}

/// Sparse "label idx:val ..." lines with 1-based feature indices.
inline DroDataset parse_libsvm(std::istream& in, const LoadOptions& opt = {}) {
    std::vector<std::vector<std::pair<std::size_t, double>>> rows;
    std::vector<std::string> labels;
    std::size_t d = 0, lineno = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::stringstream ss(line);
        std::string tok;
        if (!(ss >> tok)) continue;
        if (tok.find(':') != std::string::npos) throw DatasetFormatError("line " + std::to_string(lineno) + ": missing label");
        labels.push_back(tok);
        std::vector<std::pair<std::size_t, double>> feats;
        while (ss >> tok) {
            const auto c = tok.find(':');
            if (c == std::string::npos) throw DatasetFormatError("line " + std::to_string(lineno) + ": malformed entry '" + tok + "'");
            const auto idx = detail::parse_double(tok.substr(0, c));
            const auto val = detail::parse_double(tok.substr(c + 1));
            if (!idx || !val || *idx < 1 || *idx != std::floor(*idx))
                throw DatasetFormatError("line " + std::to_string(lineno) + ": malformed entry '" + tok + "'");
            const auto j = static_cast<std::size_t>(*idx);
            d = std::max(d, j);
            feats.push_back({j - 1, *val});
        }
        rows.push_back(std::move(feats));
    }
    DroDataset ds;
    ds.A = Matrix(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (auto [j, v] : rows[i]) ds.A(i, j) = v;
    ds.b = detail::map_labels(labels, opt);
    ds.format = "libsvm";
    return ds;
}

inline DroDataset load_dataset(const std::string& path, const std::string& format, Normalization norm,
                               const LoadOptions& opt = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
    DroDataset ds;
    if (format == "csv")
        ds = parse_csv(in, opt);
    else if (format == "libsvm")
        ds = parse_libsvm(in, opt);
    else
        throw std::invalid_argument("unknown dataset format '" + format + "' (expected csv or libsvm)");
    if (ds.n() == 0 || ds.d() == 0) throw DatasetFormatError("dataset '" + path + "' is empty");
    ds.path = path;
    normalize_dataset(ds, norm);
    return ds;
}

/// Gaussian features with labels from a random linear separator, a fraction
/// of which are flipped. Returns (train, test) drawn from the same model.
inline std::pair<DroDataset, DroDataset> synthetic_logistic(std::size_t n_train, std::size_t n_test, std::size_t d,
                                                            std::uint64_t seed, double flip = 0.05) {
    Rng rng(seed);
    Vec w(d);
    for (double& e : w) e = standard_normal(rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw = [&](std::size_t n) {
        DroDataset ds;
        ds.A = Matrix(n, d);
        ds.b.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double m = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                ds.A(i, j) = standard_normal(rng);
                m += ds.A(i, j) * w[j];
            }
            ds.b[i] = m >= 0 ? 1.0 : -1.0;
            if (unif(rng) < flip) ds.b[i] = -ds.b[i];
        }
        ds.format = "synthetic";
        return ds;
    };
    DroDataset tr = draw(n_train), te = draw(n_test);
    return {std::move(tr), std::move(te)};
}

struct DroConfig {
    double mu_x = 0.1;
    double mu_y = 0.5;
    double r = 0;         ///< 0 ⇒ 2√n
    double D_x = 0;       ///< 0 ⇒ 100·d
    std::size_t batch = 1;
    double eps = 1.0;     ///< target accuracy that produced μy (reporting)
};

inline double smoothing_mu_y(double eps, double D_y = 1.0) {
    if (!(eps > 0)) throw std::invalid_argument("smoothing_mu_y: eps must be positive");
    if (!(D_y > 0)) throw std::invalid_argument("smoothing_mu_y: D_y must be positive");
    return eps / (2 * D_y);
}

/// Fill defaults and check the configuration against a dataset.
inline DroConfig resolve_config(const DroDataset& ds, DroConfig cfg) {
    if (cfg.r == 0) cfg.r = 2 * std::sqrt(static_cast<double>(ds.n()));
    if (cfg.D_x == 0) cfg.D_x = 100.0 * static_cast<double>(ds.d());
    if (!(cfg.mu_x > 0)) throw std::invalid_argument("dro: mu_x must be positive");
    if (!(cfg.mu_y > 0)) throw std::invalid_argument("dro: mu_y must be positive");
    if (!(cfg.r > 0)) throw std::invalid_argument("dro: r must be positive");
    if (!(cfg.D_x > 0)) throw std::invalid_argument("dro: D_x must be positive");
    if (cfg.batch == 0 || cfg.batch > ds.n()) throw std::invalid_argument("dro: batch must lie in [1, n]");
    return cfg;
}

inline SimplexBallSpec dro_dual_set(const DroDataset& ds, const DroConfig& cfg) {
    const double n = static_cast<double>(ds.n());
    return {ds.n(), std::sqrt(cfg.r) / n};
}

inline SmoothnessProfile dro_profile(const DroDataset& ds, const DroConfig& cfg) {
    double row_max = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < ds.d(); ++j) s += ds.A(i, j) * ds.A(i, j);
        row_max = std::max(row_max, s);
    }
    const double nrm = spectral_norm(ds.A);
    return {cfg.mu_x, cfg.mu_y, row_max / 4, nrm, nrm, 0.0};
}

/// sup ‖y‖² over P_r: the largest norm is reached at a simplex vertex when
/// the ball allows one, otherwise somewhere on the ball boundary.
inline double dro_dual_diameter(const SimplexBallSpec& s) {
    Vec e(s.n, 0.0);
    e[0] = 1.0;
    return norm_sq(project_simplex_ball(e, s));
}

namespace detail {
inline double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
inline double sigmoid(double t) {
    if (t >= 0) return 1 / (1 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1 + e);
}
}  // namespace detail

class DroProblem final : public SaddlePointProblem {
public:
    DroProblem(std::shared_ptr<const DroDataset> ds, const DroConfig& cfg)
        : ds_(std::move(ds)), cfg_(resolve_config(*ds_, cfg)), dual_(dro_dual_set(*ds_, cfg_)),
          profile_(dro_profile(*ds_, cfg_)), radius_x_(std::sqrt(cfg_.D_x)) {}

    const DroDataset& dataset() const { return *ds_; }
    const DroConfig& config() const { return cfg_; }
    const SimplexBallSpec& dual_set() const { return dual_; }

    std::size_t nx() const override { return ds_->d(); }
    std::size_t ny() const override { return ds_->n(); }

    double margin(std::size_t i, const Vec& x) const {
        double m = 0.0;
        for (std::size_t j = 0; j < ds_->d(); ++j) m += ds_->A(i, j) * x[j];
        return ds_->b[i] * m;
    }
    double loss(std::size_t i, const Vec& x) const { return detail::softplus(-margin(i, x)); }
    Vec losses(const Vec& x) const {
        Vec out(ds_->n());
        for (std::size_t i = 0; i < ds_->n(); ++i) out[i] = loss(i, x);
        return out;
    }
    /// Adds w·∇φ_i(x) to g.
    void add_loss_grad(std::size_t i, const Vec& x, double w, Vec& g) const {
        const double c = -w * ds_->b[i] * detail::sigmoid(-margin(i, x));
        for (std::size_t j = 0; j < ds_->d(); ++j) g[j] += c * ds_->A(i, j);
    }

    bool has_exact_gradients() const override { return true; }
    Vec exact_grad_x(const Vec& x, const Vec& y) const override {
        Vec g(ds_->d(), 0.0);
        for (std::size_t i = 0; i < ds_->n(); ++i)
            if (y[i] != 0.0) add_loss_grad(i, x, y[i], g);
        return g;
    }
    Vec exact_grad_y(const Vec& x, const Vec&) const override { return losses(x); }

    Vec grad_x(const Vec& x, const Vec& y, Rng& rng) const override {
        if (cfg_.batch == ds_->n()) return exact_grad_x(x, y);
        const double scale = static_cast<double>(ds_->n()) / static_cast<double>(cfg_.batch);
        Vec g(ds_->d(), 0.0);
        for (std::size_t i : sample(rng)) add_loss_grad(i, x, scale * y[i], g);
        return g;
    }
    Vec grad_y(const Vec& x, const Vec& y, Rng& rng) const override {
        if (cfg_.batch == ds_->n()) return exact_grad_y(x, y);
        const double scale = static_cast<double>(ds_->n()) / static_cast<double>(cfg_.batch);
        Vec g(ds_->n(), 0.0);
        for (std::size_t i : sample(rng)) g[i] += scale * loss(i, x);
        return g;
    }

    double mu_f() const override { return cfg_.mu_x; }
    double mu_g() const override { return cfg_.mu_y; }
    Vec project_x(const Vec& v) const override { return project_ball(v, radius_x_); }
    Vec project_y(const Vec& w) const override { return project_simplex_ball(w, dual_); }
    double omega_f() const override { return 4 * cfg_.D_x; }
    double omega_g() const override { return 4 * dual_.R * dual_.R; }

    SmoothnessProfile profile() const override { return profile_; }
    NoiseProfile noise() const override { return noise_; }
    void set_noise(const NoiseProfile& n) { noise_ = n; }

    /// L(x, y) = (μx/2)‖x‖² + Σ y_i φ_i(x) − (μy/2)‖y‖².
    double lagrangian(const Vec& x, const Vec& y) const {
        return cfg_.mu_x / 2 * norm_sq(x) + dot(y, losses(x)) - cfg_.mu_y / 2 * norm_sq(y);
    }

    Vec uniform_y() const { return Vec(ds_->n(), 1.0 / static_cast<double>(ds_->n())); }

private:
    /// Uniform minibatch without replacement (Floyd's algorithm).
    std::vector<std::size_t> sample(Rng& rng) const {
        const std::size_t n = ds_->n(), k = cfg_.batch;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t j = n - k; j < n; ++j) {
            std::uniform_int_distribution<std::size_t> pick(0, j);
            const std::size_t t = pick(rng);
            if (std::find(out.begin(), out.end(), t) == out.end())
                out.push_back(t);
            else
                out.push_back(j);
        }
        return out;
    }

    std::shared_ptr<const DroDataset> ds_;
    DroConfig cfg_;
    SimplexBallSpec dual_;
    SmoothnessProfile profile_;
    double radius_x_;
    NoiseProfile noise_{0, 0};
};

inline std::shared_ptr<DroProblem> build_dro_problem(const DroDataset& ds, const DroConfig& cfg) {
    return std::make_shared<DroProblem>(std::make_shared<const DroDataset>(ds), cfg);
}

/// Per-coordinate-summed sample variance of the stochastic oracles at (x, y).
inline NoiseProfile estimate_dro_noise(const DroProblem& p, const Vec& x, const Vec& y, std::size_t samples,
                                       std::uint64_t seed) {
    if (samples < 2) throw std::invalid_argument("estimate_dro_noise: need at least 2 samples");
    Rng rng(seed);
    const Vec ex = p.exact_grad_x(x, y), ey = p.exact_grad_y(x, y);
    double vx = 0, vy = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        vx += dist_sq(p.grad_x(x, y, rng), ex);
        vy += dist_sq(p.grad_y(x, y, rng), ey);
    }
    return {vx / static_cast<double>(samples), vy / static_cast<double>(samples)};
}

/// Deterministic view of a problem: both oracles return exact gradients.
class ExactOracleView final : public SaddlePointProblem {
public:
    explicit ExactOracleView(const SaddlePointProblem& base) : b_(base) {
        if (!base.has_exact_gradients()) throw std::invalid_argument("problem has no exact gradient oracle");
    }
    std::size_t nx() const override { return b_.nx(); }
    std::size_t ny() const override { return b_.ny(); }
    Vec grad_x(const Vec& x, const Vec& y, Rng&) const override { return b_.exact_grad_x(x, y); }
    Vec grad_y(const Vec& x, const Vec& y, Rng&) const override { return b_.exact_grad_y(x, y); }
    bool has_exact_gradients() const override { return true; }
    Vec exact_grad_x(const Vec& x, const Vec& y) const override { return b_.exact_grad_x(x, y); }
    Vec exact_grad_y(const Vec& x, const Vec& y) const override { return b_.exact_grad_y(x, y); }
    double mu_f() const override { return b_.mu_f(); }
    double mu_g() const override { return b_.mu_g(); }
    Vec project_x(const Vec& v) const override { return b_.project_x(v); }
    Vec project_y(const Vec& w) const override { return b_.project_y(w); }
    Vec prox_x(const Vec& v, double t) const override { return b_.prox_x(v, t); }
    Vec prox_y(const Vec& w, double s) const override { return b_.prox_y(w, s); }
    double omega_f() const override { return b_.omega_f(); }
    double omega_g() const override { return b_.omega_g(); }
    SmoothnessProfile profile() const override { return b_.profile(); }
    NoiseProfile noise() const override { return {0, 0}; }

private:
    const SaddlePointProblem& b_;
};

struct InnerSolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// min over the model ball of (μx/2)‖x‖² + Σ ȳ_i φ_i(x) by accelerated
/// projected gradient, stopped when the gradient mapping has norm ≤ tol.
inline std::pair<Vec, double> dro_inner_min(const DroProblem& p, const Vec& ybar, double tol,
                                            std::size_t max_iter = 2000000, const Vec* warm = nullptr) {
    const double mu = p.config().mu_x;
    double ysum = 0.0;
    for (double e : ybar) ysum += std::abs(e);
    const double L = mu + p.profile().L_xx * ysum;
    const double q = mu / L;
    const double mom = (1 - std::sqrt(q)) / (1 + std::sqrt(q));
    auto grad = [&](const Vec& x) {
        Vec g = p.exact_grad_x(x, ybar);
        for (std::size_t j = 0; j < x.size(); ++j) g[j] += mu * x[j];
        return g;
    };
    Vec x = warm ? *warm : Vec(p.nx(), 0.0), xp = x;
    for (std::size_t it = 0; it < max_iter; ++it) {
        Vec v(x);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += mom * (x[j] - xp[j]);
        const Vec g = grad(v);
        Vec xn(v);
        for (std::size_t j = 0; j < v.size(); ++j) xn[j] -= g[j] / L;
        xn = p.project_x(xn);
        xp = std::move(x);
        x = std::move(xn);
        // Gradient mapping at x itself (not the extrapolated point).
        if (it % 10 == 0 || it + 1 == max_iter) {
            const Vec gx = grad(x);
            Vec t(x);
            for (std::size_t j = 0; j < t.size(); ++j) t[j] -= gx[j] / L;
            t = p.project_x(t);
            if (L * std::sqrt(dist_sq(t, x)) <= tol) return {x, p.lagrangian(x, ybar)};
        }
    }
    throw InnerSolveError("dro_gap: inner minimization did not reach the tolerance");
}

struct DroGap {
    double gap, upper, lower;
    Vec y_plus, x_minus;
};

/// G(x̄, ȳ) = max_y L(x̄, y) − min_x L(x, ȳ). The dual maximizer is the
/// projection of φ(x̄)/μy onto P_r.
inline DroGap dro_gap_details(const DroProblem& p, const Vec& xbar, const Vec& ybar, double inner_tol = 1e-10) {
    Vec phi = p.losses(xbar);
    for (double& e : phi) e /= p.config().mu_y;
    DroGap g;
    g.y_plus = p.project_y(phi);
    g.upper = p.lagrangian(xbar, g.y_plus);
    auto [xm, lo] = dro_inner_min(p, ybar, inner_tol, 2000000, &xbar);
    g.x_minus = std::move(xm);
    g.lower = lo;
    g.gap = g.upper - g.lower;
    return g;
}
inline double dro_gap(const DroProblem& p, const Vec& xbar, const Vec& ybar, double inner_tol = 1e-10) {
    return dro_gap_details(p, xbar, ybar, inner_tol).gap;
}

inline double test_error(const Vec& x, const DroDataset& holdout) {
    if (holdout.n() == 0) throw std::invalid_argument("test_error: empty holdout");
    if (holdout.d() != x.size()) throw std::invalid_argument("test_error: dimension mismatch");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < holdout.n(); ++i) {
        double m = 0.0;
        for (std::size_t j = 0; j < holdout.d(); ++j) m += holdout.A(i, j) * x[j];
        const double pred = m >= 0 ? 1.0 : -1.0;
        if (pred != holdout.b[i]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(holdout.n());
}

struct ReferenceSolution {
    Vec x, y;
    std::size_t iterations = 0;
    double step_residual = 0;
    SapdParams params;
    double rho = 0;
};

/// High-accuracy deterministic solve: SAPD with exact gradients at the
/// explicit certified parameters, run until successive iterates differ by
/// less than tol·(1 − √ρ) (so the distance to the saddle is about tol).
inline ReferenceSolution dro_reference(const DroProblem& p, double tol = 1e-10, std::size_t max_iter = 5000000) {
    const ScscResult t = scsc_explicit_params(p.profile());
    ExactOracleView exact(p);
    Rng rng(0);
    IterateState s = initial_state(Vec(p.nx(), 0.0), p.uniform_y());
    const double stop = tol * (1 - std::sqrt(t.cert.rho));
    ReferenceSolution out;
    out.params = t.params;
    out.rho = t.cert.rho;
    for (std::size_t k = 1; k <= max_iter; ++k) {
        sapd_step(s, t.params, exact, rng);
        const double step = std::sqrt(dist_sq(s.x, s.x_prev) + dist_sq(s.y, s.y_prev));
        if (step <= stop) {
            out.iterations = k;
            out.step_residual = step;
            out.x = s.x;
            out.y = s.y;
            return out;
        }
    }
    throw std::runtime_error("dro_reference: no convergence within the iteration budget");
}

}  // namespace sapd
