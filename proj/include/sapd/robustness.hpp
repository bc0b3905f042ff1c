#pragma once
// Exact rate and noise amplification of SAPD on bilinear quadratics, the
// certified robustness bound, and the rate–robustness Pareto tuner.
//
// On Φ(x,y) = ⟨Kx,y⟩ with K = UΛUᵀ the iteration decouples into one 4-state
// linear system per eigenvalue λ of K (state x, y, x_prev, y_prev in the
// eigenbasis), which is what every routine below works with.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "sapd/numerics.hpp"
#include "sapd/problem_model.hpp"
#include "sapd/search.hpp"
#include "sapd/solvers.hpp"
#include "sapd/tuning.hpp"

namespace sapd {

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 ⇒ hardware).
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, n)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

struct BlockDynamics {
    Vec lambdas;  ///< eigenvalues of K, ascending
    std::vector<Matrix> A, B;
    SapdParams params;
    double mu_x = 1, mu_y = 1;
    std::size_t d = 0;
};

/// The 4×4 pair (Ã, B̃) for a single eigenvalue λ.
inline std::pair<Matrix, Matrix> block_matrices(const SapdParams& prm, double mu_x, double mu_y, double lam) {
    const double tau = prm.tau, sig = prm.sigma, th = prm.theta;
    const double a = 1 / (1 + tau * mu_x), b = 1 / (1 + sig * mu_y);
    const double l2 = lam * lam;
    Matrix A{{a - tau * sig * (1 + th) * a * b * l2, -tau * a * b * lam, tau * sig * th * a * b * l2, 0},
             {sig * (1 + th) * b * lam, b, -sig * th * b * lam, 0},
             {1, 0, 0, 0},
             {0, 1, 0, 0}};
    Matrix B{{-tau * a, -tau * sig * (1 + th) * a * b * lam, 0, tau * sig * th * a * b * lam},
             {0, sig * (1 + th) * b, 0, -sig * th * b},
             {0, 0, 0, 0},
             {0, 0, 0, 0}};
    return {std::move(A), std::move(B)};
}

inline BlockDynamics build_block_dynamics_from_eigs(const Vec& lambdas, const SapdParams& prm, double mu_x,
                                                    double mu_y) {
    BlockDynamics bd;
    bd.lambdas = lambdas;
    std::sort(bd.lambdas.begin(), bd.lambdas.end());
    bd.params = prm;
    bd.mu_x = mu_x;
    bd.mu_y = mu_y;
    bd.d = lambdas.size();
    for (double l : bd.lambdas) {
        auto [a, b] = block_matrices(prm, mu_x, mu_y, l);
        bd.A.push_back(std::move(a));
        bd.B.push_back(std::move(b));
    }
    return bd;
}

inline Vec quadratic_eigenvalues(const QuadraticBilinearProblem& q) {
    validate_quadratic(q);
    return sym_eigen_full(q.K, false).values;
}

inline BlockDynamics build_block_dynamics(const QuadraticBilinearProblem& q, const SapdParams& prm) {
    return build_block_dynamics_from_eigs(quadratic_eigenvalues(q), prm, q.mu_x, q.mu_y);
}

/// Dense recursion z_{k+1} = A z_k + B w_k in the original coordinates
/// (z = (x, y, x_prev, y_prev), w = (ωx_k, ωy_k, ωx_{k−1}, ωy_{k−1})).
inline std::pair<Matrix, Matrix> dense_dynamics(const QuadraticBilinearProblem& q, const SapdParams& prm) {
    const std::size_t d = q.d;
    const double tau = prm.tau, sig = prm.sigma, th = prm.theta;
    const double a = 1 / (1 + tau * q.mu_x), b = 1 / (1 + sig * q.mu_y);
    const Matrix& K = q.K;
    const Matrix KtK = K.transpose() * K;
    Matrix A(4 * d, 4 * d), B(4 * d, 4 * d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double kij = K(i, j), kji = K(j, i), ktk = KtK(i, j);
            const double id = i == j ? 1.0 : 0.0;
            // y⁺ = b(y + σ(1+θ)Kx − σθK x_prev + σ(1+θ)ωy − σθ ωy_prev)
            A(d + i, j) = b * sig * (1 + th) * kij;
            A(d + i, d + j) = b * id;
            A(d + i, 2 * d + j) = -b * sig * th * kij;
            B(d + i, d + j) = b * sig * (1 + th) * id;
            B(d + i, 3 * d + j) = -b * sig * th * id;
            // x⁺ = a(x − τKᵀy⁺ − τωx)
            A(i, j) = a * id - a * tau * b * sig * (1 + th) * ktk;
            A(i, d + j) = -a * tau * b * kji;
            A(i, 2 * d + j) = a * tau * b * sig * th * ktk;
            B(i, j) = -a * tau * id;
            B(i, d + j) = -a * tau * b * sig * (1 + th) * kji;
            B(i, 3 * d + j) = a * tau * b * sig * th * kji;
        }
        A(2 * d + i, i) = 1;
        A(3 * d + i, d + i) = 1;
    }
    return {A, B};
}

/// ρ_true = (max_i ρ(Ã_i))², the exact asymptotic rate on squared distances.
inline double exact_rho_true(const BlockDynamics& bd) {
    double r = 0.0;
    for (const Matrix& a : bd.A) r = std::max(r, spectral_radius(a));
    return r * r;
}

struct UnstableDynamicsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Solve S = A S Aᵀ + Q through the vectorized system (I − A⊗A) vec S = vec Q.
inline Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
    const std::size_t n = A.rows();
    Matrix M = Matrix::identity(n * n) - kron(A, A);
    Vec rhs(Q.data());
    Vec s;
    try {
        s = solve_linear(M, rhs);
    } catch (const SingularMatrixError&) {
        throw UnstableDynamicsError("Lyapunov system is singular (spectral radius reaches 1)");
    }
    Matrix S(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) S(i, j) = 0.5 * (s[i * n + j] + s[j * n + i]);
    return S;
}

struct JDetails {
    double J = 0;
    double max_rel_residual = 0;  ///< max_i ‖S̃ − ÃS̃Ãᵀ − Q‖_F / ‖S̃‖_F
    std::vector<Matrix> S;
};

/// Exact robustness J from the block Lyapunov solves. The noise entering
/// each block is modelled as white with covariance (δ²/d)B̃B̃ᵀ.
inline JDetails exact_J_details(const BlockDynamics& bd, double delta = 1.0, bool keep = false) {
    for (const Matrix& a : bd.A)
        if (spectral_radius(a) >= 1.0) throw UnstableDynamicsError("exact_J: unstable dynamics (rho(A) >= 1)");
    const double dsq = delta > 0 ? delta * delta : 1.0;
    const double scale = dsq / static_cast<double>(bd.d);
    JDetails out;
    double total = 0.0;
    for (std::size_t i = 0; i < bd.A.size(); ++i) {
        const Matrix Q = bd.B[i] * bd.B[i].transpose() * scale;
        const Matrix S = solve_lyapunov(bd.A[i], Q);
        const Matrix R = S - bd.A[i] * S * bd.A[i].transpose() - Q;
        const double sn = S.frobenius();
        out.max_rel_residual = std::max(out.max_rel_residual, sn > 0 ? R.frobenius() / sn : R.frobenius());
        for (std::size_t k = 0; k < 4; ++k) total += S(k, k);
        if (keep) out.S.push_back(S);
    }
    out.J = total / (2 * dsq);
    return out;
}

inline double exact_J(const BlockDynamics& bd, double delta = 1.0) { return exact_J_details(bd, delta).J; }

/// Stationary (1/δ²)E[‖x‖² + ‖y‖²] of the actual iteration. SAPD reuses the
/// previous dual sample, so the input to each block is a moving average of
/// the white samples; carrying ω^y_{k−1} in the state makes it Markov again.
inline double exact_J_correlated(const BlockDynamics& bd) {
    const double tau = bd.params.tau, sig = bd.params.sigma, th = bd.params.theta;
    const double a = 1 / (1 + tau * bd.mu_x), b = 1 / (1 + sig * bd.mu_y);
    double total = 0.0;
    for (double lam : bd.lambdas) {
        // y⁺ row then x⁺ row (x⁺ uses y⁺), state (x, y, x_prev, y_prev, ω^y_prev).
        const double ay[5] = {b * sig * (1 + th) * lam, b, -b * sig * th * lam, 0, -b * sig * th};
        const double by[2] = {0, b * sig * (1 + th)};
        double ax[5], bx[2];
        for (int j = 0; j < 5; ++j) ax[j] = a * ((j == 0 ? 1.0 : 0.0) - tau * lam * ay[j]);
        bx[0] = a * (-tau - tau * lam * by[0]);
        bx[1] = a * (-tau * lam * by[1]);
        Matrix A(5, 5), B(5, 2);
        for (int j = 0; j < 5; ++j) {
            A(0, j) = ax[j];
            A(1, j) = ay[j];
        }
        A(2, 0) = 1;
        A(3, 1) = 1;
        B(0, 0) = bx[0];
        B(0, 1) = bx[1];
        B(1, 0) = by[0];
        B(1, 1) = by[1];
        B(4, 1) = 1;
        if (spectral_radius(A) >= 1.0) throw UnstableDynamicsError("exact_J_correlated: unstable dynamics");
        const Matrix S = solve_lyapunov(A, B * B.transpose());
        total += S(0, 0) + S(1, 1);
    }
    return total / static_cast<double>(bd.d);
}

/// Certified robustness bound R = Ξ/((1−ρ)δ²C), C = min{1/(2ρτ), (1−ασ)/(2ρσ)}.
/// Zero noise is treated as unit noise since R does not depend on δ.
inline double robustness_bound(const SmoothnessProfile& p, const SapdParams& prm, double rho, double alpha,
                               const NoiseProfile& noise = {1, 1}) {
    if (!(rho < 1)) throw std::domain_error("robustness_bound: rho must be < 1");
    const Certificate c = certify(p, prm, rho, alpha);
    if (!c.feasible) throw std::domain_error("robustness_bound: parameters are not certified at this rate");
    NoiseProfile n = noise;
    if (n.delta_x_sq == 0 && n.delta_y_sq == 0) n = {1, 1};
    const double dsq = std::min(n.delta_x_sq, n.delta_y_sq);
    const double xi = variance_majorants(p, prm, n).xi;
    const double C = std::min(1 / (2 * rho * prm.tau), (1 - alpha * prm.sigma) / (2 * rho * prm.sigma));
    if (C <= 0) return kInf;
    return xi / ((1 - rho) * dsq * C);
}

/// R̄_c(ρ,θ) = max{2/μx, 2ρσ/((1−c)(1−ρ))}·Ξ/δ² at τ = (1−ρ)/(μxρ).
inline double rbar_value(const SmoothnessProfile& p, double rho, double c, const SapdParams& prm) {
    if (c >= 1) return kInf;
    const double xi = variance_majorants(p, prm, {1, 1}).xi;
    return std::max(2 / p.mu_x, 2 * rho * prm.sigma / ((1 - c) * (1 - rho))) * xi;
}

struct ParetoPoint {
    double rho = 0;
    SapdParams params;
    double alpha = 0, c = 0;
    double Rbar = kInf;
    double J = std::numeric_limits<double>::quiet_NaN();
    double rho_true = std::numeric_limits<double>::quiet_NaN();
    double psd_margin = -kInf;
    double c_lo = 0, c_hi = 0;
};

struct ParetoOptions {
    int Kc = 20;         ///< c-grid size inside C_ρ
    int Ktheta = 30;     ///< θ-grid size per c
    int c_probes = 40;   ///< probes used to locate C_ρ before bisection
    unsigned threads = 0;
};

namespace detail {
struct ParetoSlice {
    const SmoothnessProfile& p;
    double rho, t, smax, thmax, tol;

    double margin(double s, double th, double c) const { return block_margin(p, rho, t, s, th, c * s); }
    Max1D best_s(double th, double c) const {
        return golden_max([&](double s) { return margin(s, th, c); }, 0.0, smax, 60);
    }
    Max1D best_theta(double c) const {
        return golden_max([&](double th) { return best_s(th, c).f; }, 0.0, thmax, 50);
    }
    bool c_feasible(double c) const { return best_theta(c).f >= -tol; }
};
}  // namespace detail

/// Minimize R̄ at a single target rate ρ (requires ρ ≥ ρ*).
inline ParetoPoint pareto_point(const SmoothnessProfile& p, double rho, const ParetoOptions& opt = {},
                                const std::optional<Vec>& quad_eigs = std::nullopt) {
    if (!(rho > 0) || !(rho < 1)) throw std::domain_error("pareto: rho must lie in (0,1)");
    if (p.mu_x <= 0 || p.mu_y <= 0) throw std::domain_error("pareto: moduli must be positive");
    const double t = t_max(p, rho);
    detail::ParetoSlice sl{p, rho, t, s_max(p, rho), theta_upper(p, rho), 0};
    sl.tol = block_tolerance(p, rho, t, sl.smax);
    if (t < p.L_xx) throw std::domain_error("pareto: rho is below the certifiable rate (empty C_rho)");

    // Locate C_ρ = [c_lo, c_hi] from a probe grid, then refine both ends.
    std::vector<double> probes;
    for (int j = 0; j < opt.c_probes; ++j) probes.push_back((j + 0.5) / opt.c_probes);
    probes.push_back(1.0);
    std::vector<char> ok(probes.size());
    for (std::size_t j = 0; j < probes.size(); ++j) ok[j] = sl.c_feasible(probes[j]);
    std::size_t first = probes.size(), last = probes.size();
    for (std::size_t j = 0; j < probes.size(); ++j)
        if (ok[j]) {
            if (first == probes.size()) first = j;
            last = j;
        }
    if (first == probes.size()) {
        // Fall back on the feasibility witness, whose α/s lies in C_ρ.
        const FeasibilityResult fr = feasibility_P_rho(p, rho);
        if (!fr.feasible || fr.witness.s <= 0)
            throw std::domain_error("pareto: rho is below the certifiable rate (empty C_rho)");
        const double cw = fr.witness.alpha / fr.witness.s;
        if (!sl.c_feasible(cw)) throw std::domain_error("pareto: C_rho could not be located");
        probes = {cw};
        ok = {1};
        first = last = 0;
    }
    auto feas = [&](double c) { return sl.c_feasible(c); };
    const double c_lo = (probes.size() > 1 && first > 0) ? bisect_boundary(feas, probes[first], probes[first - 1], 1e-6)
                                                         : (probes.size() > 1 ? bisect_boundary(feas, probes[first], 0.0, 1e-6)
                                                                              : probes[first]);
    const double c_hi = (probes.size() > 1 && last + 1 < probes.size())
                            ? bisect_boundary(feas, probes[last], probes[last + 1], 1e-6)
                            : probes[last];

    ParetoPoint best;
    best.rho = rho;
    best.c_lo = c_lo;
    best.c_hi = c_hi;
    const int Kc = std::max(1, opt.Kc);
    // A degenerate C_ρ (typically at ρ = ρ*, where only c = 1 survives) still
    // yields a certified point; its bound is then infinite.
    const bool degenerate = c_hi - c_lo < 1e-9;
    const int ncs = degenerate ? 1 : Kc;
    for (int ic = 0; ic < ncs; ++ic) {
        const double c = degenerate ? c_lo : c_lo + (c_hi - c_lo) * ic / Kc;
        const Max1D peak = sl.best_theta(c);
        if (peak.f < -sl.tol) continue;
        auto th_ok = [&](double th) { return sl.best_s(th, c).f >= -sl.tol; };
        const double th_lo = bisect_boundary(th_ok, peak.x, 0.0, 1e-9);
        const double th_hi = bisect_boundary(th_ok, peak.x, sl.thmax, 1e-9);
        const int Kt = std::max(1, opt.Ktheta);
        for (int it = 0; it < Kt; ++it) {
            const double th = Kt == 1 ? peak.x : th_lo + (th_hi - th_lo) * it / (Kt - 1);
            const Max1D sb = sl.best_s(th, c);
            if (sb.f < -sl.tol) continue;
            // Keep the strictly PSD side when there is one, so the reported
            // certificate is not eroded by the feasibility tolerance.
            const double floor = sb.f >= 0 ? 0.0 : -sl.tol;
            auto s_ok = [&](double s) { return sl.margin(s, th, c) >= floor; };
            const double s_top = s_ok(sl.smax) ? sl.smax : bisect_boundary(s_ok, sb.x, sl.smax, 1e-12 * sl.smax);
            if (!(s_top > 0)) continue;
            const SapdParams prm{1 / t, 1 / s_top, th};
            const double rb = rbar_value(p, rho, c, prm);
            if (rb < best.Rbar || best.params.tau == 0) {
                best.Rbar = rb;
                best.params = prm;
                best.c = c;
                best.alpha = c * s_top;
            }
        }
    }
    if (best.params.tau == 0) throw std::domain_error("pareto: no certified parameters found at this rate");
    best.psd_margin = psd_margin(assemble_G(p, best.params.tau, best.params.sigma, best.params.theta, rho, best.alpha));
    if (quad_eigs) {
        const BlockDynamics bd = build_block_dynamics_from_eigs(*quad_eigs, best.params, p.mu_x, p.mu_y);
        best.rho_true = exact_rho_true(bd);
        if (best.rho_true < 1) best.J = exact_J(bd);
    }
    return best;
}

/// Pareto frontier over a grid of target rates, solved in parallel.
inline std::vector<ParetoPoint> pareto_frontier(const SmoothnessProfile& p, const Vec& rho_grid,
                                                const ParetoOptions& opt = {},
                                                const std::optional<Vec>& quad_eigs = std::nullopt) {
    std::vector<ParetoPoint> out(rho_grid.size());
    parallel_for(rho_grid.size(), opt.threads, [&](std::size_t i) { out[i] = pareto_point(p, rho_grid[i], opt, quad_eigs); });
    return out;
}

// ---------------------------------------------------------------------------
// Grid scan of (τ, σ, θ)
// ---------------------------------------------------------------------------

struct ScanRange {
    double lo = 0, hi = 0;
    int count = 1;
    /// Grid nodes; a zero lower end is skipped for step sizes, which must be positive.
    Vec nodes(bool positive) const {
        Vec v;
        if (count <= 1) {
            v.push_back(positive && lo <= 0 ? hi : lo);
            return v;
        }
        if (positive && lo <= 0) {
            for (int i = 1; i <= count; ++i) v.push_back(lo + (hi - lo) * i / count);
        } else {
            for (int i = 0; i < count; ++i) v.push_back(lo + (hi - lo) * i / (count - 1));
        }
        return v;
    }
};

struct CloudPoint {
    double tau, sigma, theta, rho_true, J;
};

struct EnvelopeBin {
    double rho_lo, rho_hi;
    double J_min;  ///< NaN when empty
    std::size_t count;
};

struct TauSigmaOptimum {
    double tau, sigma;
    double rho_best, theta_at_rho_best, J_at_rho_best;
};

struct ScanResult {
    std::vector<CloudPoint> cloud;
    std::size_t unstable = 0;
    double rho_min = kInf;
    CloudPoint best{};
    std::vector<EnvelopeBin> envelope;
    std::vector<TauSigmaOptimum> per_tau_sigma;

    /// Envelope value J*(ρ) for the bin containing ρ (NaN if out of range/empty).
    double envelope_at(double rho) const {
        if (envelope.empty() || rho < envelope.front().rho_lo || rho >= envelope.back().rho_hi)
            return std::numeric_limits<double>::quiet_NaN();
        const double w = envelope.front().rho_hi - envelope.front().rho_lo;
        std::size_t b = static_cast<std::size_t>((rho - envelope.front().rho_lo) / w);
        b = std::min(b, envelope.size() - 1);
        return envelope[b].J_min;
    }
};

struct ScanOptions {
    std::size_t bins = 200;
    bool compute_J = true;
    unsigned threads = 0;
};

inline ScanResult grid_scan(const Vec& lambdas, double mu_x, double mu_y, const ScanRange& tau_r,
                            const ScanRange& sig_r, const ScanRange& th_r, const ScanOptions& opt = {}) {
    const Vec taus = tau_r.nodes(true), sigs = sig_r.nodes(true), ths = th_r.nodes(false);
    // Only |λ| matters (a diagonal sign flip maps one block onto the other),
    // so duplicate magnitudes are solved once.
    std::vector<std::pair<double, int>> mags;
    {
        Vec m;
        for (double l : lambdas) m.push_back(std::abs(l));
        std::sort(m.begin(), m.end());
        for (double v : m) {
            if (!mags.empty() && std::abs(mags.back().first - v) <= 1e-14 * std::max(1.0, v))
                ++mags.back().second;
            else
                mags.push_back({v, 1});
        }
    }
    const double d = static_cast<double>(lambdas.size());
    const std::size_t nts = taus.size() * sigs.size();
    std::vector<std::vector<CloudPoint>> per(nts);
    std::vector<std::size_t> unstable(nts, 0);
    std::vector<TauSigmaOptimum> opt_ts(nts);

    parallel_for(nts, opt.threads, [&](std::size_t idx) {
        const double tau = taus[idx / sigs.size()], sig = sigs[idx % sigs.size()];
        TauSigmaOptimum o{tau, sig, kInf, 0, std::numeric_limits<double>::quiet_NaN()};
        for (double th : ths) {
            const SapdParams prm{tau, sig, th};
            double r = 0.0;
            std::vector<std::pair<Matrix, Matrix>> blocks;
            for (const auto& [lam, mult] : mags) {
                blocks.push_back(block_matrices(prm, mu_x, mu_y, lam));
                r = std::max(r, spectral_radius(blocks.back().first));
            }
            if (r >= 1.0) {
                ++unstable[idx];
                continue;
            }
            double J = std::numeric_limits<double>::quiet_NaN();
            if (opt.compute_J) {
                double total = 0.0;
                for (std::size_t b = 0; b < mags.size(); ++b) {
                    const Matrix& B = blocks[b].second;
                    const Matrix S = solve_lyapunov(blocks[b].first, B * B.transpose());
                    total += mags[b].second * (S(0, 0) + S(1, 1) + S(2, 2) + S(3, 3));
                }
                J = total / (2 * d);
            }
            const double rt = r * r;
            per[idx].push_back({tau, sig, th, rt, J});
            if (rt < o.rho_best) {
                o.rho_best = rt;
                o.theta_at_rho_best = th;
                o.J_at_rho_best = J;
            }
        }
        opt_ts[idx] = o;
    });

    ScanResult res;
    for (std::size_t i = 0; i < nts; ++i) {
        res.unstable += unstable[i];
        for (const auto& c : per[i]) {
            res.cloud.push_back(c);
            if (c.rho_true < res.rho_min) {
                res.rho_min = c.rho_true;
                res.best = c;
            }
        }
    }
    res.per_tau_sigma = std::move(opt_ts);
    if (!res.cloud.empty() && opt.bins > 0) {
        const double lo = res.rho_min, w = (1.0 - lo) / static_cast<double>(opt.bins);
        res.envelope.resize(opt.bins);
        for (std::size_t b = 0; b < opt.bins; ++b)
            res.envelope[b] = {lo + w * b, lo + w * (b + 1), std::numeric_limits<double>::quiet_NaN(), 0};
        for (const auto& c : res.cloud) {
            std::size_t b = static_cast<std::size_t>((c.rho_true - lo) / w);
            b = std::min(b, opt.bins - 1);
            auto& bin = res.envelope[b];
            ++bin.count;
            if (std::isnan(bin.J_min) || c.J < bin.J_min) bin.J_min = c.J;
        }
    }
    return res;
}

inline ScanResult grid_scan(const QuadraticBilinearProblem& q, const ScanRange& tau_r, const ScanRange& sig_r,
                            const ScanRange& th_r, const ScanOptions& opt = {}) {
    return grid_scan(quadratic_eigenvalues(q), q.mu_x, q.mu_y, tau_r, sig_r, th_r, opt);
}

// ---------------------------------------------------------------------------
// Expected primal-dual gap on the quadratic
// ---------------------------------------------------------------------------

/// E[G(x_k, y_k)] from the block recursion: the mean evolves as Ã^k z̃₀ and
/// the covariance as Σ_{j<k} Ã^j Q Ã^jᵀ with Q = (δ²/d)B̃B̃ᵀ.
inline double expected_gap_quadratic(const QuadraticBilinearProblem& q, const SapdParams& prm, const Vec& x0,
                                     const Vec& y0, std::size_t k) {
    validate_quadratic(q);
    const SymEigen eg = sym_eigen_full(q.K, true);
    const std::size_t d = q.d;
    const Vec xe = eg.vectors.tmul(x0), ye = eg.vectors.tmul(y0);
    const double qscale = q.delta * q.delta / static_cast<double>(d);
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double lam = eg.values[i];
        auto [A, B] = block_matrices(prm, q.mu_x, q.mu_y, lam);
        if (q.delta > 0 && spectral_radius(A) >= 1.0)
            throw UnstableDynamicsError("expected_gap_quadratic: unstable dynamics with noise");
        Vec m{xe[i], ye[i], xe[i], ye[i]};
        Matrix S(4, 4);
        const Matrix Q = B * B.transpose() * qscale;
        for (std::size_t j = 0; j < k; ++j) {
            m = A * m;
            if (qscale > 0) S = A * S * A.transpose() + Q;
        }
        const double wx = q.mu_x / 2 + lam * lam / (2 * q.mu_y);
        const double wy = q.mu_y / 2 + lam * lam / (2 * q.mu_x);
        total += wx * (m[0] * m[0] + S(0, 0)) + wy * (m[1] * m[1] + S(1, 1));
    }
    return total;
}

/// Deterministic gap of the quadratic at a point.
inline double quadratic_gap(const QuadraticBilinearProblem& q, const Vec& x, const Vec& y) {
    const Vec kx = q.K * x, kty = q.K.tmul(y);
    return q.mu_x / 2 * norm_sq(x) + q.mu_y / 2 * norm_sq(y) + norm_sq(kx) / (2 * q.mu_y) +
           norm_sq(kty) / (2 * q.mu_x);
}

}  // namespace sapd
