// Command-line front end: certified tuning, benchmarks, robustness scans,
// projections and the DRO pipeline.
//
// Exit codes: 0 success, 1 infeasible request or failed run, 2 usage error.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sapd/experiment.hpp"
#include "sapd/projection.hpp"

#ifndef SAPD_VERSION
#define SAPD_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace sapd;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kExitOk = 0, kExitFail = 1, kExitUsage = 2;

/// Inline JSON when the argument looks like JSON, otherwise a file path.
json load_json_arg(const std::string& arg, const std::string& what) {
    std::string text = arg;
    const auto first = arg.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || (arg[first] != '{' && arg[first] != '[')) {
        std::ifstream in(arg);
        if (!in) throw UsageError(what + ": cannot open '" + arg + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError(what + ": malformed JSON: " + e.what());
    }
}

unsigned default_threads() {
    if (const char* env = std::getenv("SAPD_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
        std::fprintf(stderr, "warning: ignoring invalid SAPD_THREADS='%s'\n", env);
    }
    return 0;  // all hardware threads
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// JSON has no infinity or NaN; emit those as null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

/// Everything needed to re-run: the command, its full configuration and seeds.
void write_manifest(const std::string& dir, const std::string& command, const json& config, double wall_s,
                    unsigned threads, const json& extra = json::object()) {
    json m;
    m["schema_version"] = kSchemaVersion;
    m["tool"] = "sapd";
    m["version"] = SAPD_VERSION;
    m["command"] = command;
    m["config"] = config;
    m["config_hash"] = hex64(fnv1a(config.dump()));
    m["threads"] = threads;
    m["wall_time_s"] = wall_s;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    write_text(fs::path(dir) / "manifest.json", m.dump(2) + "\n");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json cert_json(const SapdParams& prm, double rho, double alpha, double margin, bool feasible, const std::string& src) {
    return {{"tau", num(prm.tau)},   {"sigma", num(prm.sigma)},   {"theta", prm.theta},
            {"rho", num(rho)},       {"alpha", num(alpha)},       {"psd_margin", num(margin)},
            {"feasible", feasible},  {"source", src}};
}

SmoothnessProfile profile_arg(const std::string& s) {
    try {
        return parse_profile(load_json_arg(s, "--profile"));
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
}

NoiseProfile noise_arg(const std::string& s) {
    if (s.empty()) return {};
    try {
        return parse_noise(load_json_arg(s, "--noise"));
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
}

// ---------------------------------------------------------------------------
// tune / certify / rho-star
// ---------------------------------------------------------------------------

struct TuneArgs {
    std::string profile, mode = "scsc", noise;
    double beta = 0, eps = 0, theta = 0, rho = 0, tol = 1e-3;
};

int cmd_tune(const TuneArgs& a) {
    const SmoothnessProfile p = profile_arg(a.profile);
    const NoiseProfile n = noise_arg(a.noise);
    const std::optional<double> beta = a.beta > 0 ? std::optional<double>(a.beta) : std::nullopt;
    json out;
    bool feasible = false;
    if (a.mode == "scsc" || a.mode == "eps-scsc") {
        if (a.mode == "eps-scsc" && !(a.eps > 0)) throw UsageError("--mode eps-scsc needs --eps > 0");
        const ScscResult r = a.mode == "scsc" ? scsc_explicit_params(p, beta) : epsilon_params_scsc(p, n, a.eps, beta);
        out = cert_json(r.params, r.cert.rho, r.cert.alpha, r.cert.psd_margin, r.cert.feasible, a.mode);
        out["beta"] = r.beta;
        out["theta_bar_1"] = r.theta_bar_1;
        out["theta_bar_2"] = r.theta_bar_2;
        out["theta_bar_bar"] = r.theta_bar_bar;
        feasible = r.cert.feasible;
    } else if (a.mode == "mc") {
        if (!(a.eps > 0)) throw UsageError("--mode mc needs --eps > 0");
        const McResult r = epsilon_params_mc(p, n, a.eps);
        out = cert_json(r.params, 1.0, r.cert.alpha, r.cert.psd_margin, r.cert.feasible, "mc");
        feasible = r.cert.feasible;
    } else if (a.mode == "sgda") {
        const SgdaResult r = sgda_rho_star(p, a.tol);
        out = cert_json(r.params, r.rho, 0.0, r.cert.psd_margin, r.cert.feasible, "sgda");
        feasible = r.cert.feasible;
    } else if (a.mode == "cp") {
        const CpResult r = cp_params(p, a.theta);
        out = {{"tau", r.params.tau}, {"sigma", r.params.sigma}, {"theta", r.params.theta},
               {"theta_lo", r.theta_lo}, {"theta_hi", r.theta_hi}, {"source", "cp"}};
        // CP parameters carry no matrix certificate; report it when one exists.
        const Certificate c = certify(p, r.params, a.theta, 0.0, "cp");
        out["psd_margin"] = num(c.psd_margin);
        out["feasible"] = true;
        feasible = true;
    } else if (a.mode == "rho-star") {
        const RhoStarResult r = rho_star(p, a.tol);
        const FeasiblePoint& w = r.witness.witness;
        const SapdParams prm{1 / w.t, 1 / w.s, w.theta};
        out = cert_json(prm, r.rho, w.alpha, r.witness.margin, r.witness.feasible, "rho-star");
        out["iterations"] = r.iterations;
        feasible = r.witness.feasible;
    } else if (a.mode == "pareto") {
        if (!(a.rho > 0 && a.rho < 1)) throw UsageError("--mode pareto needs --rho in (0,1)");
        const ParetoPoint pt = pareto_point(p, a.rho);
        out = cert_json(pt.params, pt.rho, pt.alpha, pt.psd_margin, pt.psd_margin > -1e-9, "pareto");
        out["c"] = pt.c;
        out["Rbar"] = num(pt.Rbar);
        feasible = true;
    } else {
        throw UsageError("unknown --mode '" + a.mode + "'");
    }
    std::cout << out.dump(2) << "\n";
    if (!feasible) {
        std::fprintf(stderr, "infeasible: PSD margin %.6g\n", out.value("psd_margin", json(nullptr)).is_number()
                                                                   ? out["psd_margin"].get<double>()
                                                                   : -INFINITY);
        return kExitFail;
    }
    return kExitOk;
}

struct CertifyArgs {
    std::string profile;
    double tau = 0, sigma = 0, theta = 0, rho = 0, alpha = 0;
};

int cmd_certify(const CertifyArgs& a) {
    const SmoothnessProfile p = profile_arg(a.profile);
    const SapdParams prm{a.tau, a.sigma, a.theta};
    try {
        validate_params(prm);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const Certificate c = certify(p, prm, a.rho, a.alpha);
    json out = cert_json(prm, a.rho, a.alpha, c.psd_margin, c.feasible, "user");
    if (c.feasible) {
        const double R = robustness_bound(p, prm, a.rho, a.alpha);
        out["robustness_bound"] = num(R);
    }
    std::cout << out.dump(2) << "\n";
    if (!c.feasible) {
        std::fprintf(stderr, "infeasible: PSD margin %.6g\n", c.psd_margin);
        return kExitFail;
    }
    return kExitOk;
}

int cmd_rho_star(const std::string& profile, double tol) {
    TuneArgs a;
    a.profile = profile;
    a.mode = "rho-star";
    a.tol = tol;
    return cmd_tune(a);
}

// ---------------------------------------------------------------------------
// solve / bench
// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string config, out, solver;
    long long paths = -1, N = -1;
};

std::string traces_csv(const BenchmarkResult& r) {
    std::string s = "solver,path,seed,k,dist_sq,gap\n";
    for (const auto& row : r.rows) {
        s += row.solver + "," + std::to_string(row.path) + "," + std::to_string(row.seed) + "," +
             std::to_string(row.k) + "," + fmt(row.dist_sq) + "," + (std::isfinite(row.gap) ? fmt(row.gap) : "") + "\n";
    }
    return s;
}

std::string summary_csv(const std::vector<SolverSummary>& sum) {
    std::string s = "solver,paths,failures,mean_final_dist,median_final_dist,mean_final_gap\n";
    for (const auto& x : sum)
        s += x.solver + "," + std::to_string(x.paths) + "," + std::to_string(x.failures) + "," +
             fmt(x.mean_final_dist) + "," + fmt(x.median_final_dist) + "," +
             (std::isfinite(x.mean_final_gap) ? fmt(x.mean_final_gap) : "") + "\n";
    return s;
}

int cmd_bench(const BenchArgs& a, unsigned threads, bool single) {
    const auto t0 = std::chrono::steady_clock::now();
    json j = load_json_arg(a.config, "--config");
    if (a.paths >= 0) j["paths"] = a.paths;
    if (a.N >= 0) j["N"] = a.N;
    ExperimentConfig cfg;
    try {
        cfg = parse_experiment_config(j);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    if (single) {
        // `solve` runs one solver: the one named by --solver, else the first.
        std::vector<SolverConfig> keep;
        for (const auto& s : cfg.solvers)
            if (a.solver.empty() ? keep.empty() : s.label == a.solver) keep.push_back(s);
        if (keep.empty()) throw UsageError("solve: no solver labelled '" + a.solver + "'");
        cfg.solvers = keep;
    }
    const std::string out = a.out.empty() ? cfg.output_dir : a.out;
    ProblemInstance inst = make_instance(cfg.problem, cfg.init);
    const BenchmarkResult r = run_benchmark(cfg, inst, threads);

    json summary = json::array();
    for (std::size_t i = 0; i < r.summary.size(); ++i) {
        const auto& s = r.summary[i];
        summary.push_back({{"solver", s.solver},
                           {"paths", s.paths},
                           {"failures", s.failures},
                           {"mean_final_dist", num(s.mean_final_dist)},
                           {"median_final_dist", num(s.median_final_dist)},
                           {"mean_final_gap", num(s.mean_final_gap)},
                           {"parameters", r.solvers[i].info}});
    }
    json report = {{"summary", summary}, {"errors", r.errors}};
    if (!out.empty()) {
        ensure_dir(out);
        write_text(fs::path(out) / "traces.csv", traces_csv(r));
        write_text(fs::path(out) / "summary.csv", summary_csv(r.summary));
        write_text(fs::path(out) / "summary.json", report.dump(2) + "\n");
        json seeds = json::array();
        for (std::size_t p = 0; p < cfg.paths; ++p) seeds.push_back(path_seed(cfg.seed, p));
        write_manifest(out, single ? "solve" : "bench", j, seconds_since(t0), threads, {{"path_seeds", seeds}});
    }
    std::cout << report.dump(2) << "\n";
    for (const auto& e : r.errors) std::fprintf(stderr, "solver failure: %s\n", e.c_str());
    return r.errors.empty() ? kExitOk : kExitFail;
}

// ---------------------------------------------------------------------------
// scan / pareto
// ---------------------------------------------------------------------------

struct QuadArgs {
    std::size_t d = 30;
    double norm = 10, mu = 1, delta = 0;
    std::uint64_t seed = 1;
    QuadraticSpec spec() const {
        QuadraticSpec s;
        s.d = d;
        s.spectral_norm = norm;
        s.mu_x = s.mu_y = mu;
        s.delta = delta;
        s.seed = seed;
        return s;
    }
    json to_json() const { return {{"d", d}, {"spectral_norm", norm}, {"mu", mu}, {"seed", seed}}; }
};

void add_quad_flags(CLI::App* c, QuadArgs& q) {
    c->add_option("--d", q.d, "dimension of the quadratic instance")->check(CLI::PositiveNumber);
    c->add_option("--norm", q.norm, "spectral norm of K")->check(CLI::PositiveNumber);
    c->add_option("--mu", q.mu, "strong convexity/concavity modulus (mu_x = mu_y)")->check(CLI::PositiveNumber);
    c->add_option("--instance-seed", q.seed, "seed of the random K");
}

struct ScanArgs {
    QuadArgs q;
    int grid = 60, grid_tau = 0, grid_sigma = 0, grid_theta = 0;
    double tau_max = 0.5, sigma_max = 0.5, theta_max = 2.0;
    bool theta_zero = false, no_j = false;
    std::size_t bins = 200;
    std::string out;
};

int cmd_scan(const ScanArgs& a, unsigned threads) {
    const auto t0 = std::chrono::steady_clock::now();
    const QuadraticBilinearProblem q = make_quadratic(a.q.spec());
    const int gt = a.grid_tau > 0 ? a.grid_tau : a.grid, gs = a.grid_sigma > 0 ? a.grid_sigma : a.grid;
    const int gth = a.theta_zero ? 1 : (a.grid_theta > 0 ? a.grid_theta : a.grid);
    ScanOptions opt;
    opt.bins = a.bins;
    opt.compute_J = !a.no_j;
    opt.threads = threads;
    const ScanResult r = grid_scan(q, {0, a.tau_max, gt}, {0, a.sigma_max, gs},
                                   {0, a.theta_zero ? 0.0 : a.theta_max, gth}, opt);
    json summary = {{"rho_min", num(r.rho_min)},
                    {"best", {{"tau", r.best.tau}, {"sigma", r.best.sigma}, {"theta", r.best.theta},
                              {"rho_true", num(r.best.rho_true)}, {"J", num(r.best.J)}}},
                    {"stable_points", r.cloud.size()},
                    {"unstable_points", r.unstable}};
    if (!a.out.empty()) {
        ensure_dir(a.out);
        std::string cloud = "tau,sigma,theta,rho_true,J\n";
        for (const auto& c : r.cloud)
            cloud += fmt(c.tau) + "," + fmt(c.sigma) + "," + fmt(c.theta) + "," + fmt(c.rho_true) + "," +
                     (std::isfinite(c.J) ? fmt(c.J) : "") + "\n";
        write_text(fs::path(a.out) / "cloud.csv", cloud);
        std::string env = "rho_lo,rho_hi,J_min,count\n";
        for (const auto& b : r.envelope)
            env += fmt(b.rho_lo) + "," + fmt(b.rho_hi) + "," + (std::isfinite(b.J_min) ? fmt(b.J_min) : "") + "," +
                   std::to_string(b.count) + "\n";
        write_text(fs::path(a.out) / "envelope.csv", env);
        write_text(fs::path(a.out) / "scan.json", summary.dump(2) + "\n");
        json cfg = {{"instance", a.q.to_json()}, {"grid", {gt, gs, gth}},
                    {"tau_max", a.tau_max}, {"sigma_max", a.sigma_max},
                    {"theta_max", a.theta_zero ? 0.0 : a.theta_max}, {"bins", a.bins}, {"compute_J", !a.no_j}};
        write_manifest(a.out, "scan", cfg, seconds_since(t0), threads);
    } else {
        std::cout << "rho_true,J\n";
        for (const auto& c : r.cloud) std::cout << fmt(c.rho_true) << "," << (std::isfinite(c.J) ? fmt(c.J) : "") << "\n";
    }
    std::cerr << summary.dump() << "\n";
    return kExitOk;
}

struct ParetoArgs {
    QuadArgs q;
    std::string profile, out;
    double rho_min = 0, rho_max = 0.999;
    int points = 20;
};

int cmd_pareto(const ParetoArgs& a, unsigned threads) {
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<QuadraticBilinearProblem> q;
    SmoothnessProfile p;
    if (!a.profile.empty()) {
        p = profile_arg(a.profile);
    } else {
        q = make_quadratic(a.q.spec());
        p = make_quadratic_oracles(*q)->profile();
    }
    double lo = a.rho_min > 0 ? a.rho_min : rho_star(p).rho;
    if (!(lo < 1) || !(a.rho_max < 1) || a.rho_max < lo) throw UsageError("pareto: need rho_min <= rho_max < 1");
    if (a.points < 1) throw UsageError("pareto: --points must be >= 1");
    Vec grid;
    for (int i = 0; i < a.points; ++i)
        grid.push_back(a.points == 1 ? lo : lo + (a.rho_max - lo) * i / (a.points - 1));
    ParetoOptions opt;
    opt.threads = threads;
    const auto pts = pareto_frontier(p, grid, opt, q ? std::optional<Vec>(quadratic_eigenvalues(*q)) : std::nullopt);
    std::string csv = "rho,tau,sigma,theta,alpha,c,Rbar,J,rho_true\n";
    for (const auto& pt : pts)
        csv += fmt(pt.rho) + "," + fmt(pt.params.tau) + "," + fmt(pt.params.sigma) + "," + fmt(pt.params.theta) + "," +
               fmt(pt.alpha) + "," + fmt(pt.c) + "," + (std::isfinite(pt.Rbar) ? fmt(pt.Rbar) : "inf") + "," +
               (std::isfinite(pt.J) ? fmt(pt.J) : "") + "," + (std::isfinite(pt.rho_true) ? fmt(pt.rho_true) : "") +
               "\n";
    if (!a.out.empty()) {
        ensure_dir(a.out);
        write_text(fs::path(a.out) / "pareto.csv", csv);
        json cfg = {{"rho_min", lo}, {"rho_max", a.rho_max}, {"points", a.points}, {"profile", profile_json(p)}};
        if (q) cfg["instance"] = a.q.to_json();
        write_manifest(a.out, "pareto", cfg, seconds_since(t0), threads);
    }
    std::cout << csv;
    return kExitOk;
}

// ---------------------------------------------------------------------------
// project
// ---------------------------------------------------------------------------

struct ProjectArgs {
    std::string point;
    double R = 0, rbar_sq = 0;
};

int cmd_project(const ProjectArgs& a) {
    const json j = load_json_arg(a.point, "--point");
    Vec v;
    try {
        v = j.get<Vec>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("--point must be a JSON array of numbers: ") + e.what());
    }
    if (v.empty()) throw UsageError("--point must not be empty");
    if ((a.R > 0) == (a.rbar_sq > 0)) throw UsageError("give exactly one of --R or --rbar-sq");
    SimplexBallSpec spec{v.size(), a.R};
    if (a.rbar_sq > 0) {
        const double r2 = a.rbar_sq - 1.0 / static_cast<double>(v.size());
        if (!(r2 > 0)) throw UsageError("--rbar-sq must exceed 1/n");
        spec.R = std::sqrt(r2);
    }
    ProjectionDiagnostics diag;
    Vec p;
    try {
        p = project_simplex_ball(v, spec, &diag);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const json out = {{"p", p},
                      {"norm_sq", norm_sq(p)},
                      {"rbar_sq", spec.rbar_sq()},
                      {"ball_active", diag.ball_active},
                      {"support", diag.support},
                      {"kkt_residual", projection_kkt_residual(v, p, spec)}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// dro
// ---------------------------------------------------------------------------

struct DroArgs {
    std::string data, test_data, format = "csv", norm, positive_label, out;
    double mu_x = 0.1, eps = 2000, r = 0, D_x = 0, rho = 0.9995;
    std::size_t batch = 1, iters = 20000, paths = 20, record_every = 100;
    std::uint64_t seed = 1;
    std::size_t synth_n = 200, synth_d = 10;
    std::uint64_t synth_seed = 7;
};

int cmd_dro(const DroArgs& a, unsigned threads) {
    const auto t0 = std::chrono::steady_clock::now();
    json pj = {{"type", "dro"}, {"mu_x", a.mu_x}, {"eps", a.eps}, {"batch", a.batch}};
    if (a.r > 0) pj["r"] = a.r;
    if (a.D_x > 0) pj["D_x"] = a.D_x;
    if (!a.data.empty()) {
        pj["data"] = a.data;
        pj["format"] = a.format;
        if (!a.test_data.empty()) pj["test_data"] = a.test_data;
        if (!a.positive_label.empty()) pj["positive_label"] = a.positive_label;
    } else {
        pj["synthetic"] = {{"n", a.synth_n}, {"n_test", a.synth_n}, {"d", a.synth_d}, {"seed", a.synth_seed}};
    }
    if (!a.norm.empty()) pj["norm"] = a.norm;
    ProblemConfig pc;
    try {
        pc = parse_problem(pj);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    ProblemInstance inst;
    try {
        inst = make_instance(pc);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    DroRunOptions opt;
    opt.iters = a.iters;
    opt.paths = a.paths;
    opt.seed = a.seed;
    opt.record_every = a.record_every;
    opt.rho = a.rho;
    opt.threads = threads;
    DroRunResult r;
    try {
        r = run_dro(inst, opt);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    const DroProblem& p = *inst.dro;
    const double final_mean = r.mean_dist_at(a.iters);
    json summary = {{"n", p.ny()},
                    {"d", p.nx()},
                    {"mu_x", p.config().mu_x},
                    {"mu_y", p.config().mu_y},
                    {"r", p.config().r},
                    {"D_x", p.config().D_x},
                    {"batch", p.config().batch},
                    {"noise", {{"delta_x_sq", p.noise().delta_x_sq}, {"delta_y_sq", p.noise().delta_y_sq}}},
                    {"profile", profile_json(p.profile())},
                    {"parameters", cert_json(r.tuned.params, r.tuned.rho, r.tuned.alpha, r.tuned.psd_margin, true,
                                             "pareto")},
                    {"Rbar", num(r.tuned.Rbar)},
                    {"initial_dist", r.initial_dist},
                    {"final_mean_dist", num(final_mean)},
                    {"decrease_factor", num(r.initial_dist / final_mean)},
                    {"reference_gap", dro_gap(p, inst.x_star, inst.y_star)},
                    {"errors", r.errors}};
    if (!a.out.empty()) {
        ensure_dir(a.out);
        std::string csv = "path,seed,k,dist_sq,train_err,test_err\n";
        for (const auto& row : r.rows)
            csv += std::to_string(row.path) + "," + std::to_string(row.seed) + "," + std::to_string(row.k) + "," +
                   fmt(row.dist_sq) + "," + fmt(row.train_err) + "," +
                   (std::isfinite(row.test_err) ? fmt(row.test_err) : "") + "\n";
        write_text(fs::path(a.out) / "traces.csv", csv);
        write_text(fs::path(a.out) / "summary.json", summary.dump(2) + "\n");
        json cfg = {{"problem", pj}, {"iters", a.iters}, {"paths", a.paths}, {"seed", a.seed},
                    {"record_every", a.record_every}, {"rho", a.rho}};
        json seeds = json::array();
        for (std::size_t i = 0; i < a.paths; ++i) seeds.push_back(path_seed(a.seed, i));
        write_manifest(a.out, "dro", cfg, seconds_since(t0), threads, {{"path_seeds", seeds}});
    }
    std::cout << summary.dump(2) << "\n";
    return r.errors.empty() ? kExitOk : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified tuning and benchmarking for stochastic accelerated primal-dual methods"};
    app.set_version_flag("--version", SAPD_VERSION);
    app.require_subcommand(1);
    app.fallthrough();  // --threads may follow the subcommand name
    unsigned threads = default_threads();
    app.add_option("--threads", threads, "worker threads for path/grid parallelism (0 = all; env SAPD_THREADS)");

    TuneArgs tune;
    auto* c_tune = app.add_subcommand("tune", "compute certified step sizes for a smoothness profile");
    c_tune->add_option("--profile", tune.profile, "profile JSON (inline or file)")->required();
    c_tune->add_option("--mode", tune.mode, "scsc | eps-scsc | mc | sgda | cp | rho-star | pareto")
        ->check(CLI::IsMember({"scsc", "eps-scsc", "mc", "sgda", "cp", "rho-star", "pareto"}));
    c_tune->add_option("--beta", tune.beta, "beta in (0,1) for scsc modes (default: optimal)");
    c_tune->add_option("--eps", tune.eps, "target accuracy for eps-scsc and mc");
    c_tune->add_option("--noise", tune.noise, "noise JSON {delta_x_sq, delta_y_sq}");
    c_tune->add_option("--theta", tune.theta, "momentum for cp");
    c_tune->add_option("--rho", tune.rho, "target rate for pareto");
    c_tune->add_option("--tol", tune.tol, "bisection tolerance on rho");

    CertifyArgs cert;
    auto* c_cert = app.add_subcommand("certify", "check a rate certificate for given parameters");
    c_cert->add_option("--profile", cert.profile, "profile JSON (inline or file)")->required();
    c_cert->add_option("--tau", cert.tau)->required();
    c_cert->add_option("--sigma", cert.sigma)->required();
    c_cert->add_option("--theta", cert.theta)->required();
    c_cert->add_option("--rho", cert.rho)->required();
    c_cert->add_option("--alpha", cert.alpha)->required();

    std::string rs_profile;
    double rs_tol = 1e-3;
    auto* c_rs = app.add_subcommand("rho-star", "best certifiable rate");
    c_rs->add_option("--profile", rs_profile, "profile JSON (inline or file)")->required();
    c_rs->add_option("--tol", rs_tol, "bisection tolerance on rho");

    BenchArgs solve, bench;
    auto* c_solve = app.add_subcommand("solve", "run one solver of an experiment config");
    auto* c_bench = app.add_subcommand("bench", "run every solver of an experiment config");
    for (auto [c, b] : {std::pair{c_solve, &solve}, std::pair{c_bench, &bench}}) {
        c->add_option("--config", b->config, "experiment JSON (inline or file)")->required();
        c->add_option("--out", b->out, "output directory (overrides output_dir)");
        c->add_option("--paths", b->paths, "override the number of sample paths");
        c->add_option("--iters", b->N, "override the iteration budget N");
    }
    c_solve->add_option("--solver", solve.solver, "label of the solver to run (default: first)");

    ScanArgs scan;
    auto* c_scan = app.add_subcommand("scan", "grid scan of (tau, sigma, theta) on a quadratic instance");
    add_quad_flags(c_scan, scan.q);
    c_scan->add_option("--grid", scan.grid, "nodes per axis")->check(CLI::PositiveNumber);
    c_scan->add_option("--grid-tau", scan.grid_tau);
    c_scan->add_option("--grid-sigma", scan.grid_sigma);
    c_scan->add_option("--grid-theta", scan.grid_theta);
    c_scan->add_option("--tau-max", scan.tau_max)->check(CLI::PositiveNumber);
    c_scan->add_option("--sigma-max", scan.sigma_max)->check(CLI::PositiveNumber);
    c_scan->add_option("--theta-max", scan.theta_max)->check(CLI::NonNegativeNumber);
    c_scan->add_flag("--theta-zero", scan.theta_zero, "restrict to theta = 0");
    c_scan->add_flag("--no-j", scan.no_j, "skip the Lyapunov solves");
    c_scan->add_option("--bins", scan.bins, "envelope bins")->check(CLI::PositiveNumber);
    c_scan->add_option("--out", scan.out, "output directory");

    ParetoArgs par;
    auto* c_par = app.add_subcommand("pareto", "R-bar optimized parameters over a grid of rates");
    add_quad_flags(c_par, par.q);
    c_par->add_option("--profile", par.profile, "profile JSON instead of a quadratic instance");
    c_par->add_option("--rho-min", par.rho_min, "lowest rate (default: best certifiable)");
    c_par->add_option("--rho-max", par.rho_max);
    c_par->add_option("--points", par.points);
    c_par->add_option("--out", par.out, "output directory");

    ProjectArgs proj;
    auto* c_proj = app.add_subcommand("project", "projection onto the simplex-ball intersection");
    c_proj->add_option("--point", proj.point, "JSON array (inline or file)")->required();
    c_proj->add_option("--R", proj.R, "ball radius around the uniform distribution");
    c_proj->add_option("--rbar-sq", proj.rbar_sq, "bound on the squared norm of p");

    DroArgs dro;
    auto* c_dro = app.add_subcommand("dro", "distributionally robust logistic regression");
    c_dro->add_option("--data", dro.data, "training data (default: synthetic)");
    c_dro->add_option("--test-data", dro.test_data, "holdout data");
    c_dro->add_option("--format", dro.format)->check(CLI::IsMember({"csv", "libsvm"}));
    c_dro->add_option("--norm", dro.norm, "minmax | global | none");
    c_dro->add_option("--positive-label", dro.positive_label);
    c_dro->add_option("--mu-x", dro.mu_x);
    c_dro->add_option("--eps", dro.eps, "smoothing accuracy; mu_y = eps/2");
    c_dro->add_option("--r", dro.r, "uncertainty radius parameter (default 2 sqrt(n))");
    c_dro->add_option("--D-x", dro.D_x, "squared radius of the model ball (default 100 d)");
    c_dro->add_option("--batch", dro.batch)->check(CLI::PositiveNumber);
    c_dro->add_option("--iters", dro.iters)->check(CLI::PositiveNumber);
    c_dro->add_option("--paths", dro.paths)->check(CLI::PositiveNumber);
    c_dro->add_option("--seed", dro.seed);
    c_dro->add_option("--rho", dro.rho, "target rate for the R-bar optimized parameters");
    c_dro->add_option("--record-every", dro.record_every)->check(CLI::PositiveNumber);
    c_dro->add_option("--synthetic-n", dro.synth_n);
    c_dro->add_option("--synthetic-d", dro.synth_d);
    c_dro->add_option("--synthetic-seed", dro.synth_seed);
    c_dro->add_option("--out", dro.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*c_tune) return cmd_tune(tune);
        if (*c_cert) return cmd_certify(cert);
        if (*c_rs) return cmd_rho_star(rs_profile, rs_tol);
        if (*c_solve) return cmd_bench(solve, threads, true);
        if (*c_bench) return cmd_bench(bench, threads, false);
        if (*c_scan) return cmd_scan(scan, threads);
        if (*c_par) return cmd_pareto(par, threads);
        if (*c_proj) return cmd_project(proj);
        if (*c_dro) return cmd_dro(dro, threads);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const DatasetFormatError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFail;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFail;
    }
    return kExitUsage;
}
