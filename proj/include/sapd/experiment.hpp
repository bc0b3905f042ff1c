#pragma once
// Experiment configuration (versioned JSON, unknown keys rejected) and the
// multi-path benchmark runner behind the `solve` and `bench` commands.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sapd/dro.hpp"
#include "sapd/problem_model.hpp"
#include "sapd/robustness.hpp"
#include "sapd/solvers.hpp"
#include "sapd/tuning.hpp"

namespace sapd {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Throws when `j` holds a key outside `allowed`.
inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("key '") + key + "': " + e.what());
    }
}

inline SmoothnessProfile parse_profile(const json& j) {
    reject_unknown_keys(j, {"mu_x", "mu_y", "L_xx", "L_xy", "L_yx", "L_yy"}, "profile");
    for (const char* k : {"mu_x", "mu_y", "L_xy", "L_yx"})
        if (!j.contains(k)) throw ConfigError(std::string("profile: missing '") + k + "'");
    SmoothnessProfile p{get_or(j, "mu_x", 0.0), get_or(j, "mu_y", 0.0), get_or(j, "L_xx", 0.0),
                        get_or(j, "L_xy", 0.0), get_or(j, "L_yx", 0.0), get_or(j, "L_yy", 0.0)};
    try {
        return validate_profile(p);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("profile: ") + e.what());
    }
}

inline json profile_json(const SmoothnessProfile& p) {
    return {{"mu_x", p.mu_x}, {"mu_y", p.mu_y}, {"L_xx", p.L_xx}, {"L_xy", p.L_xy}, {"L_yx", p.L_yx}, {"L_yy", p.L_yy}};
}

inline NoiseProfile parse_noise(const json& j) {
    reject_unknown_keys(j, {"delta_x_sq", "delta_y_sq"}, "noise");
    try {
        return validate_noise({get_or(j, "delta_x_sq", 0.0), get_or(j, "delta_y_sq", 0.0)});
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("noise: ") + e.what());
    }
}

struct DroSetup {
    std::string data, format = "csv", norm = "minmax";
    std::optional<std::string> positive_label;
    std::string test_data;
    DroConfig cfg;
    // Synthetic data (used when `data` is empty).
    std::size_t synth_n = 200, synth_n_test = 200, synth_d = 10;
    std::uint64_t synth_seed = 7;
};

struct ProblemConfig {
    std::string type = "quadratic";  ///< quadratic | dro | custom
    QuadraticSpec quad;
    double smd_radius = 0;  ///< 0 ⇒ √d (SMD runs on the ball-constrained copy)
    SmoothnessProfile profile{};
    NoiseProfile noise{};
    DroSetup dro;
};

struct SolverConfig {
    std::string name = "sapd";   ///< sapd | sogda | smp | smd
    std::string label;
    std::string tuning = "pareto";  ///< pareto | scsc | eps-scsc | rho-star | cp | sgda | manual
    double rho = 0;      ///< target rate for pareto
    double eps = 0;      ///< accuracy for eps-scsc
    double theta = 0;    ///< cp
    std::optional<SapdParams> params;  ///< manual
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    ProblemConfig problem;
    std::vector<SolverConfig> solvers;
    std::size_t N = 1000, paths = 10;
    std::uint64_t seed = 1;
    std::size_t record_every = 10;
    bool record_gap = true;
    std::string init = "ones";  ///< ones | zeros: starting point for quadratics
    std::string output_dir;
    json raw;  ///< as parsed, echoed into the manifest
};

inline ProblemConfig parse_problem(const json& j) {
    ProblemConfig pc;
    pc.type = get_or<std::string>(j, "type", "quadratic");
    if (pc.type == "quadratic") {
        reject_unknown_keys(j, {"type", "d", "spectral_norm", "mu_x", "mu_y", "delta", "seed", "smd_radius"}, "problem");
        pc.quad.d = get_or<std::size_t>(j, "d", 30);
        pc.quad.spectral_norm = get_or(j, "spectral_norm", 10.0);
        pc.quad.mu_x = get_or(j, "mu_x", 1.0);
        pc.quad.mu_y = get_or(j, "mu_y", 1.0);
        pc.quad.delta = get_or(j, "delta", 0.0);
        pc.quad.seed = get_or<std::uint64_t>(j, "seed", 1);
        pc.smd_radius = get_or(j, "smd_radius", 0.0);
        if (pc.quad.d < 1) throw ConfigError("problem: d must be >= 1");
        if (!(pc.quad.spectral_norm > 0)) throw ConfigError("problem: spectral_norm must be positive");
        if (pc.quad.mu_x < 0 || pc.quad.mu_y < 0 || pc.quad.delta < 0)
            throw ConfigError("problem: mu_x, mu_y, delta must be non-negative");
        if (pc.smd_radius < 0) throw ConfigError("problem: smd_radius must be non-negative");
    } else if (pc.type == "custom") {
        reject_unknown_keys(j, {"type", "profile", "noise"}, "problem");
        if (!j.contains("profile")) throw ConfigError("problem: custom problems need a profile");
        pc.profile = parse_profile(j.at("profile"));
        if (j.contains("noise")) pc.noise = parse_noise(j.at("noise"));
    } else if (pc.type == "dro") {
        reject_unknown_keys(j, {"type", "data", "test_data", "format", "norm", "positive_label", "mu_x", "mu_y", "eps",
                                "r", "D_x", "batch", "synthetic"},
                            "problem");
        DroSetup& d = pc.dro;
        d.data = get_or<std::string>(j, "data", "");
        d.test_data = get_or<std::string>(j, "test_data", "");
        d.format = get_or<std::string>(j, "format", "csv");
        d.norm = get_or<std::string>(j, "norm", d.data.empty() ? "global" : "minmax");
        if (j.contains("positive_label")) d.positive_label = j.at("positive_label").get<std::string>();
        d.cfg.mu_x = get_or(j, "mu_x", 0.1);
        d.cfg.eps = get_or(j, "eps", 1.0);
        d.cfg.mu_y = j.contains("mu_y") ? get_or(j, "mu_y", 0.0) : smoothing_mu_y(d.cfg.eps);
        d.cfg.r = get_or(j, "r", 0.0);
        d.cfg.D_x = get_or(j, "D_x", 0.0);
        d.cfg.batch = get_or<std::size_t>(j, "batch", 1);
        if (j.contains("synthetic")) {
            const json& s = j.at("synthetic");
            reject_unknown_keys(s, {"n", "n_test", "d", "seed"}, "problem.synthetic");
            d.synth_n = get_or<std::size_t>(s, "n", 200);
            d.synth_n_test = get_or<std::size_t>(s, "n_test", 200);
            d.synth_d = get_or<std::size_t>(s, "d", 10);
            d.synth_seed = get_or<std::uint64_t>(s, "seed", 7);
        }
        parse_normalization(d.norm);
    } else {
        throw ConfigError("problem: unknown type '" + pc.type + "' (expected quadratic, dro or custom)");
    }
    return pc;
}

inline SolverConfig parse_solver(const json& j) {
    SolverConfig s;
    if (j.is_string()) {
        s.name = j.get<std::string>();
    } else {
        reject_unknown_keys(j, {"name", "label", "tuning", "rho", "eps", "theta", "params"}, "solver");
        s.name = get_or<std::string>(j, "name", "sapd");
        s.tuning = get_or<std::string>(j, "tuning", "pareto");
        s.rho = get_or(j, "rho", 0.0);
        s.eps = get_or(j, "eps", 0.0);
        s.theta = get_or(j, "theta", 0.0);
        s.label = get_or<std::string>(j, "label", "");
        if (j.contains("params")) {
            const json& p = j.at("params");
            reject_unknown_keys(p, {"tau", "sigma", "theta"}, "solver.params");
            s.params = SapdParams{get_or(p, "tau", 0.0), get_or(p, "sigma", 0.0), get_or(p, "theta", 0.0)};
            try {
                validate_params(*s.params);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("solver.params: ") + e.what());
            }
            if (!j.contains("tuning")) s.tuning = "manual";
        }
    }
    static const std::set<std::string> names{"sapd", "sogda", "smp", "smd"};
    static const std::set<std::string> tunings{"pareto", "scsc", "eps-scsc", "rho-star", "cp", "sgda", "manual"};
    if (!names.count(s.name)) throw ConfigError("solver: unknown name '" + s.name + "'");
    if (s.name == "sapd" && !tunings.count(s.tuning)) throw ConfigError("solver: unknown tuning '" + s.tuning + "'");
    if (s.name == "sapd" && s.tuning == "manual" && !s.params) throw ConfigError("solver: manual tuning needs params");
    if (s.name == "sapd" && s.tuning == "pareto" && !(s.rho > 0 && s.rho < 1))
        throw ConfigError("solver: pareto tuning needs rho in (0,1)");
    if (s.name == "sapd" && s.tuning == "eps-scsc" && !(s.eps > 0)) throw ConfigError("solver: eps-scsc needs eps > 0");
    if (s.label.empty()) {
        s.label = s.name;
        if (s.name == "sapd") {
            s.label += "-" + s.tuning;
            if (s.tuning == "pareto") {
                char buf[32];
                std::snprintf(buf, sizeof buf, "-%g", s.rho);
                s.label += buf;
            }
        }
    }
    return s;
}

inline ExperimentConfig parse_experiment_config(const json& j) {
    reject_unknown_keys(j, {"schema_version", "problem", "solvers", "N", "paths", "seed", "record_every", "record_gap",
                            "init", "output_dir"},
                        "config");
    ExperimentConfig c;
    c.raw = j;
    c.schema_version = get_or(j, "schema_version", kSchemaVersion);
    if (c.schema_version != kSchemaVersion)
        throw ConfigError("config: unsupported schema_version " + std::to_string(c.schema_version));
    if (!j.contains("problem")) throw ConfigError("config: missing 'problem'");
    c.problem = parse_problem(j.at("problem"));
    if (!j.contains("solvers") || !j.at("solvers").is_array() || j.at("solvers").empty())
        throw ConfigError("config: 'solvers' must be a non-empty array");
    for (const json& s : j.at("solvers")) c.solvers.push_back(parse_solver(s));
    std::set<std::string> labels;
    for (const auto& s : c.solvers)
        if (!labels.insert(s.label).second) throw ConfigError("config: duplicate solver label '" + s.label + "'");
    const long long N = get_or<long long>(j, "N", 1000), paths = get_or<long long>(j, "paths", 10);
    if (N < 1) throw ConfigError("config: N must be >= 1");
    if (paths < 1) throw ConfigError("config: paths must be >= 1");
    c.N = static_cast<std::size_t>(N);
    c.paths = static_cast<std::size_t>(paths);
    c.seed = get_or<std::uint64_t>(j, "seed", 1);
    const long long re = get_or<long long>(j, "record_every", 10);
    if (re < 1) throw ConfigError("config: record_every must be >= 1");
    c.record_every = static_cast<std::size_t>(re);
    c.record_gap = get_or(j, "record_gap", true);
    c.init = get_or<std::string>(j, "init", "ones");
    if (c.init != "ones" && c.init != "zeros") throw ConfigError("config: init must be 'ones' or 'zeros'");
    c.output_dir = get_or<std::string>(j, "output_dir", "");
    if (c.problem.type == "custom") throw ConfigError("config: custom-constant problems have no oracles to run");
    return c;
}

// ---------------------------------------------------------------------------
// Runtime problem instance
// ---------------------------------------------------------------------------

struct ProblemInstance {
    std::shared_ptr<SaddlePointProblem> prob;
    std::shared_ptr<SaddlePointProblem> smd_prob;  ///< bounded-domain copy for SMD
    std::optional<QuadraticBilinearProblem> quad;
    std::shared_ptr<DroProblem> dro;
    std::optional<DroDataset> dro_test;
    Vec x0, y0, x_star, y_star;
    double smd_rx = 0, smd_ry = 0;
    std::function<double(const Vec&, const Vec&)> gap;  ///< empty when unavailable
};

inline std::pair<DroDataset, std::optional<DroDataset>> load_dro_data(const DroSetup& d) {
    if (d.data.empty()) {
        auto [tr, te] = synthetic_logistic(d.synth_n, d.synth_n_test, d.synth_d, d.synth_seed);
        const Normalization m = parse_normalization(d.norm);
        normalize_dataset(tr, m);
        normalize_dataset(te, m);
        return {tr, te};
    }
    LoadOptions lo;
    lo.positive_label = d.positive_label;
    DroDataset tr = load_dataset(d.data, d.format, parse_normalization(d.norm), lo);
    std::optional<DroDataset> te;
    if (!d.test_data.empty()) te = load_dataset(d.test_data, d.format, parse_normalization(d.norm), lo);
    return {tr, te};
}

inline ProblemInstance make_instance(const ProblemConfig& pc, const std::string& init = "ones") {
    ProblemInstance inst;
    if (pc.type == "quadratic") {
        inst.quad = make_quadratic(pc.quad);
        const std::size_t d = pc.quad.d;
        const double r = pc.smd_radius > 0 ? pc.smd_radius : std::sqrt(static_cast<double>(d));
        inst.prob = make_quadratic_oracles(*inst.quad);
        inst.smd_prob = make_quadratic_oracles(*inst.quad, r, r);
        inst.smd_rx = inst.smd_ry = r;
        const double v = init == "ones" ? 1.0 : 0.0;
        inst.x0 = Vec(d, v);
        inst.y0 = Vec(d, v);
        inst.x_star = Vec(d, 0.0);
        inst.y_star = Vec(d, 0.0);
        const QuadraticBilinearProblem q = *inst.quad;
        inst.gap = [q](const Vec& x, const Vec& y) { return quadratic_gap(q, x, y); };
    } else if (pc.type == "dro") {
        auto [tr, te] = load_dro_data(pc.dro);
        inst.dro = build_dro_problem(tr, pc.dro.cfg);
        inst.dro_test = te;
        const NoiseProfile nz = estimate_dro_noise(*inst.dro, Vec(inst.dro->nx(), 0.0), inst.dro->uniform_y(), 1000, 99);
        inst.dro->set_noise(nz);
        inst.prob = inst.dro;
        inst.smd_prob = inst.dro;
        inst.smd_rx = std::sqrt(inst.dro->config().D_x);
        inst.smd_ry = inst.dro->dual_set().R + 1.0 / std::sqrt(static_cast<double>(inst.dro->ny()));
        inst.x0 = Vec(inst.dro->nx(), 0.0);
        inst.y0 = inst.dro->uniform_y();
        const ReferenceSolution ref = dro_reference(*inst.dro);
        inst.x_star = ref.x;
        inst.y_star = ref.y;
        auto dp = inst.dro;
        inst.gap = [dp](const Vec& x, const Vec& y) { return dro_gap(*dp, x, y, 1e-8); };
    } else {
        throw ConfigError("problem type '" + pc.type + "' cannot be instantiated");
    }
    return inst;
}

// ---------------------------------------------------------------------------
// Solver resolution and the benchmark loop
// ---------------------------------------------------------------------------

struct ResolvedSolver {
    SolverConfig cfg;
    SapdParams params{};
    double weighting_rho = 1.0;  ///< ergodic weights for SAPD
    double baseline_step = 0;
    double smd_G = 0;
    json info;
};

inline ResolvedSolver resolve_solver(const SolverConfig& s, const ProblemInstance& inst, std::size_t N,
                                     std::uint64_t seed) {
    ResolvedSolver r;
    r.cfg = s;
    const SmoothnessProfile p = inst.prob->profile();
    if (s.name == "sapd") {
        double rho = 1, alpha = 0;
        std::string source = s.tuning;
        if (s.tuning == "pareto") {
            const ParetoPoint pt = pareto_point(p, s.rho);
            r.params = pt.params;
            rho = s.rho;
            alpha = pt.alpha;
            r.info["Rbar"] = pt.Rbar;
            r.info["c"] = pt.c;
        } else if (s.tuning == "scsc" || s.tuning == "eps-scsc") {
            const ScscResult t = s.tuning == "scsc" ? scsc_explicit_params(p) : epsilon_params_scsc(p, inst.prob->noise(), s.eps);
            r.params = t.params;
            rho = t.cert.rho;
            alpha = t.cert.alpha;
        } else if (s.tuning == "rho-star") {
            const RhoStarResult rs = rho_star(p);
            r.params = {1 / rs.witness.witness.t, 1 / rs.witness.witness.s, rs.witness.witness.theta};
            rho = rs.rho;
            alpha = rs.witness.witness.alpha;
        } else if (s.tuning == "cp") {
            r.params = cp_params(p, s.theta).params;
            rho = s.theta;
        } else if (s.tuning == "sgda") {
            const SgdaResult g = sgda_rho_star(p);
            r.params = g.params;
            rho = g.rho;
        } else {
            r.params = *s.params;
            rho = s.rho > 0 && s.rho < 1 ? s.rho : 1.0;
        }
        validate_params(r.params);
        r.weighting_rho = rho > 0 && rho <= 1 ? rho : 1.0;
        r.info["tau"] = r.params.tau;
        r.info["sigma"] = r.params.sigma;
        r.info["theta"] = r.params.theta;
        r.info["rho"] = rho;
        r.info["alpha"] = alpha;
        r.info["source"] = source;
    } else {
        const double L = baseline_lipschitz(p);
        if (s.name == "sogda") r.baseline_step = sogda_step(L);
        if (s.name == "smp") r.baseline_step = smp_step(L);
        if (s.name == "smd") {
            r.smd_G = estimate_smd_G(*inst.smd_prob, inst.smd_rx, inst.smd_ry, seed ^ 0x5eedULL);
            r.baseline_step = smd_step(r.smd_G, N);
            r.info["G"] = r.smd_G;
        }
        r.info["L"] = L;
        r.info["step"] = r.baseline_step;
    }
    return r;
}

struct TraceRow {
    std::string solver;
    std::size_t path;
    std::uint64_t seed;
    std::size_t k;
    double dist_sq, gap;
};

struct SolverSummary {
    std::string solver;
    std::size_t paths = 0, failures = 0;
    double mean_final_dist = 0, median_final_dist = 0;
    double mean_final_gap = std::numeric_limits<double>::quiet_NaN();
};

struct BenchmarkResult {
    std::vector<ResolvedSolver> solvers;
    std::vector<TraceRow> rows;
    std::vector<SolverSummary> summary;
    std::vector<std::string> errors;
};

inline std::uint64_t path_seed(std::uint64_t base, std::size_t path) {
    // SplitMix64 step keeps per-path seeds distinct and decorrelated.
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (path + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double median(Vec v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Summary statistics from raw trace rows (final record of each path).
inline std::vector<SolverSummary> summarize(const std::vector<TraceRow>& rows, const std::vector<std::string>& order) {
    std::map<std::string, std::map<std::size_t, const TraceRow*>> last;
    for (const auto& r : rows) {
        auto& slot = last[r.solver][r.path];
        if (!slot || r.k >= slot->k) slot = &r;
    }
    std::vector<SolverSummary> out;
    for (const auto& name : order) {
        SolverSummary s;
        s.solver = name;
        Vec d, g;
        for (const auto& [path, row] : last[name]) {
            d.push_back(row->dist_sq);
            if (std::isfinite(row->gap)) g.push_back(row->gap);
        }
        s.paths = d.size();
        if (!d.empty()) {
            double sum = 0;
            for (double v : d) sum += v;
            s.mean_final_dist = sum / static_cast<double>(d.size());
            s.median_final_dist = median(d);
        }
        if (!g.empty()) {
            double sum = 0;
            for (double v : g) sum += v;
            s.mean_final_gap = sum / static_cast<double>(g.size());
        }
        out.push_back(s);
    }
    return out;
}

inline BenchmarkResult run_benchmark(const ExperimentConfig& cfg, const ProblemInstance& inst, unsigned threads = 1) {
    BenchmarkResult res;
    for (const auto& s : cfg.solvers) res.solvers.push_back(resolve_solver(s, inst, cfg.N, cfg.seed));
    const std::size_t jobs = res.solvers.size() * cfg.paths;
    std::vector<std::vector<TraceRow>> per(jobs);
    std::vector<std::string> errs(jobs);
    parallel_for(jobs, threads, [&](std::size_t job) {
        const ResolvedSolver& rs = res.solvers[job / cfg.paths];
        const std::size_t path = job % cfg.paths;
        const std::uint64_t seed = path_seed(cfg.seed, path);
        RunOptions opt;
        opt.reference = std::make_pair(inst.x_star, inst.y_star);
        opt.record_every = cfg.record_every;
        if (cfg.record_gap && inst.gap) opt.gap = inst.gap;
        try {
            std::vector<RunRecord> trace;
            if (rs.cfg.name == "sapd") {
                trace = run_sapd(*inst.prob, rs.params, cfg.N, rs.weighting_rho, seed, inst.x0, inst.y0, opt).trace;
            } else {
                BaselineConfig bc;
                bc.kind = rs.cfg.name == "sogda" ? BaselineKind::SOGDA
                                                 : (rs.cfg.name == "smp" ? BaselineKind::SMP : BaselineKind::SMD);
                bc.N = cfg.N;
                bc.seed = seed;
                bc.L = baseline_lipschitz(inst.prob->profile());
                bc.smd_G = rs.smd_G;
                bc.smd_horizon = cfg.N;
                const SaddlePointProblem& pr = bc.kind == BaselineKind::SMD ? *inst.smd_prob : *inst.prob;
                // SMD's output is its running average, so that is what gets traced.
                opt.record_average = bc.kind == BaselineKind::SMD;
                Vec x0 = inst.x0, y0 = inst.y0;
                if (bc.kind == BaselineKind::SMD) {
                    x0 = pr.project_x(x0);
                    y0 = pr.project_y(y0);
                }
                trace = run_baseline(pr, bc, x0, y0, opt).trace;
            }
            for (const auto& r : trace)
                per[job].push_back({rs.cfg.label, path, seed, r.k, r.dist_sq, r.gap});
        } catch (const std::exception& e) {
            errs[job] = rs.cfg.label + " path " + std::to_string(path) + ": " + e.what();
        }
    });
    for (std::size_t j = 0; j < jobs; ++j) {
        res.rows.insert(res.rows.end(), per[j].begin(), per[j].end());
        if (!errs[j].empty()) res.errors.push_back(errs[j]);
    }
    std::vector<std::string> order;
    for (const auto& s : res.solvers) order.push_back(s.cfg.label);
    res.summary = summarize(res.rows, order);
    for (auto& s : res.summary) s.failures = cfg.paths - s.paths;
    return res;
}

/// Mean of dist_sq over paths at iteration k for one solver (NaN if absent).
inline double mean_dist_at(const BenchmarkResult& r, const std::string& solver, std::size_t k) {
    double sum = 0;
    std::size_t cnt = 0;
    for (const auto& row : r.rows)
        if (row.solver == solver && row.k == k) {
            sum += row.dist_sq;
            ++cnt;
        }
    return cnt ? sum / static_cast<double>(cnt) : std::numeric_limits<double>::quiet_NaN();
}


// ---------------------------------------------------------------------------
// DRO pipeline: tune at a target rate, run stochastic paths, track errors
// ---------------------------------------------------------------------------

struct DroRunOptions {
    std::size_t iters = 20000, paths = 20;
    std::uint64_t seed = 1;
    std::size_t record_every = 100;
    double rho = 0.9995;  ///< target rate for the R̄-optimized parameters
    unsigned threads = 1;
};

struct DroTraceRow {
    std::size_t path;
    std::uint64_t seed;
    std::size_t k;
    double dist_sq, train_err, test_err;
};

struct DroRunResult {
    ParetoPoint tuned;
    std::vector<DroTraceRow> rows;
    double initial_dist = 0;  ///< D at the common starting point
    std::vector<std::string> errors;
    /// Mean of dist_sq over paths at iteration k (NaN if not recorded).
    double mean_dist_at(std::size_t k) const {
        double sum = 0;
        std::size_t cnt = 0;
        for (const auto& r : rows)
            if (r.k == k) {
                sum += r.dist_sq;
                ++cnt;
            }
        return cnt ? sum / static_cast<double>(cnt) : std::numeric_limits<double>::quiet_NaN();
    }
};

/// Runs SAPD on a DRO instance built by make_instance. Traces report the last
/// iterate, whose distance to the reference is what the decay check uses.
inline DroRunResult run_dro(const ProblemInstance& inst, const DroRunOptions& opt) {
    if (!inst.dro) throw ConfigError("run_dro: instance is not a DRO problem");
    if (opt.paths < 1) throw ConfigError("dro: paths must be >= 1");
    if (opt.iters < 1) throw ConfigError("dro: iters must be >= 1");
    if (opt.record_every < 1) throw ConfigError("dro: record_every must be >= 1");
    if (!(opt.rho > 0 && opt.rho < 1)) throw ConfigError("dro: rho must lie in (0,1)");
    const DroProblem& p = *inst.dro;
    DroRunResult res;
    res.tuned = pareto_point(p.profile(), opt.rho);
    res.initial_dist = dist_sq(inst.x0, inst.x_star) + dist_sq(inst.y0, inst.y_star);
    std::vector<std::vector<DroTraceRow>> per(opt.paths);
    std::vector<std::string> errs(opt.paths);
    const DroDataset& train = p.dataset();
    parallel_for(opt.paths, opt.threads, [&](std::size_t path) {
        const std::uint64_t seed = path_seed(opt.seed, path);
        try {
            Rng rng(seed);
            IterateState s = initial_state(inst.x0, inst.y0);
            auto record = [&](std::size_t k) {
                const double d = dist_sq(s.x, inst.x_star) + dist_sq(s.y, inst.y_star);
                const double te = inst.dro_test ? test_error(s.x, *inst.dro_test)
                                                : std::numeric_limits<double>::quiet_NaN();
                per[path].push_back({path, seed, k, d, test_error(s.x, train), te});
            };
            record(0);
            for (std::size_t k = 1; k <= opt.iters; ++k) {
                sapd_step(s, res.tuned.params, p, rng);
                if (k % opt.record_every == 0 || k == opt.iters) record(k);
            }
        } catch (const std::exception& e) {
            errs[path] = "path " + std::to_string(path) + ": " + e.what();
        }
    });
    for (std::size_t i = 0; i < opt.paths; ++i) {
        res.rows.insert(res.rows.end(), per[i].begin(), per[i].end());
        if (!errs[i].empty()) res.errors.push_back(errs[i]);
    }
    return res;
}

}  // namespace sapd
