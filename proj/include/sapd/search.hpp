#pragma once
// Derivative-free 1-D and box-constrained searches for the (concave)
// smallest-eigenvalue objectives that appear in certification.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace sapd {

struct Max1D {
    double x = 0, f = -INFINITY;
};

/// Golden-section maximization on [a, b]; endpoints are compared at the end
/// so a boundary maximizer of a concave function is never missed.
template <class F>
Max1D golden_max(F&& f, double a, double b, int iters = 60) {
    if (b <= a) return {a, f(a)};
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    Max1D best = fc >= fd ? Max1D{c, fc} : Max1D{d, fd};
    const double fa = f(a), fb = f(b);
    if (fa > best.f) best = {a, fa};
    if (fb > best.f) best = {b, fb};
    return best;
}

/// Bisection for the boundary of {x : ok(x)} on [good, bad] where ok(good)
/// holds and ok(bad) fails. Returns the last known-good point.
template <class P>
double bisect_boundary(P&& ok, double good, double bad, double tol, int max_iter = 200) {
    for (int i = 0; i < max_iter && std::abs(bad - good) > tol; ++i) {
        const double mid = 0.5 * (good + bad);
        if (ok(mid))
            good = mid;
        else
            bad = mid;
    }
    return good;
}

struct PatternSearchOptions {
    int starts = 20;
    long budget = 10000;  ///< objective evaluations across all starts
    double min_step = 1e-10;
    std::uint64_t seed = 0x9a77e5ULL;
    /// Stop as soon as the objective reaches this level.
    double target = INFINITY;
};

template <std::size_t N>
struct PatternSearchResult {
    std::array<double, N> x{};
    double f = -INFINITY;
    long evaluations = 0;
};

/// Multi-start compass search on a box with two extra random directions per
/// poll, which keeps it moving along kinks of nonsmooth concave objectives.
template <std::size_t N, class F>
PatternSearchResult<N> pattern_search_max(F&& f, const std::array<double, N>& lo, const std::array<double, N>& hi,
                                          const PatternSearchOptions& opt,
                                          const std::vector<std::array<double, N>>& seeds = {}) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    PatternSearchResult<N> best;
    auto clip = [&](std::array<double, N> z) {
        for (std::size_t i = 0; i < N; ++i) z[i] = std::clamp(z[i], lo[i], hi[i]);
        return z;
    };
    long used = 0;
    const long per_start = std::max<long>(1, opt.budget / std::max(1, opt.starts));
    for (int s = 0; s < opt.starts && used < opt.budget; ++s) {
        std::array<double, N> x{};
        if (static_cast<std::size_t>(s) < seeds.size()) {
            x = clip(seeds[s]);
        } else if (s == static_cast<int>(seeds.size())) {
            for (std::size_t i = 0; i < N; ++i) x[i] = 0.5 * (lo[i] + hi[i]);
        } else {
            for (std::size_t i = 0; i < N; ++i) x[i] = lo[i] + unif(rng) * (hi[i] - lo[i]);
        }
        double fx = f(x);
        ++used;
        std::array<double, N> step{};
        for (std::size_t i = 0; i < N; ++i) step[i] = 0.25 * (hi[i] - lo[i]);
        long local = 1;
        while (local < per_start && used < opt.budget && fx < opt.target) {
            bool improved = false;
            std::vector<std::array<double, N>> dirs;
            for (std::size_t i = 0; i < N; ++i) {
                std::array<double, N> e{};
                e[i] = 1;
                dirs.push_back(e);
                e[i] = -1;
                dirs.push_back(e);
            }
            for (int r = 0; r < 2; ++r) {
                std::array<double, N> e{};
                double nrm = 0;
                for (std::size_t i = 0; i < N; ++i) {
                    e[i] = gauss(rng);
                    nrm += e[i] * e[i];
                }
                nrm = std::sqrt(nrm);
                for (std::size_t i = 0; i < N; ++i) e[i] /= nrm;
                dirs.push_back(e);
                for (std::size_t i = 0; i < N; ++i) e[i] = -e[i];
                dirs.push_back(e);
            }
            for (const auto& dvec : dirs) {
                std::array<double, N> y{};
                for (std::size_t i = 0; i < N; ++i) y[i] = x[i] + step[i] * dvec[i];
                y = clip(y);
                const double fy = f(y);
                ++used;
                ++local;
                if (fy > fx) {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
                if (local >= per_start || used >= opt.budget) break;
            }
            if (!improved) {
                bool all_small = true;
                for (std::size_t i = 0; i < N; ++i) {
                    step[i] *= 0.5;
                    if (step[i] > opt.min_step * std::max(1.0, hi[i] - lo[i])) all_small = false;
                }
                if (all_small) break;
            }
        }
        if (fx > best.f) {
            best.f = fx;
            best.x = x;
        }
        if (best.f >= opt.target) break;
    }
    best.evaluations = used;
    return best;
}

}  // namespace sapd
