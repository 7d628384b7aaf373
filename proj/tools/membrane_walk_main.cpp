// membrane-walk: analysis, simulation, and verification front end.
//
// Exit codes: 0 success (all checks pass), 1 failed checks or an aborted
// run, 2 usage or invalid input.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mwalk/chain.hpp"
#include "mwalk/ensemble.hpp"
#include "mwalk/errors.hpp"
#include "mwalk/hitting.hpp"
#include "mwalk/limits.hpp"
#include "mwalk/membrane.hpp"
#include "mwalk/stats.hpp"
#include "mwalk/verify.hpp"
#include "mwalk/walk.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mwalk;

namespace {

constexpr const char* kTool = "membrane-walk";
constexpr const char* kVersion = "1.0.0";

// Canonical float formatting: round through 15 significant digits so that
// serialized artifacts are byte-stable and diffable.
double canon(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return std::strtod(buf, nullptr);
}

json jnum(double v) {
    if (std::isnan(v)) return nullptr;
    return canon(v);
}

json jvec(const std::vector<double>& v) {
    json arr = json::array();
    for (double x : v) arr.push_back(jnum(x));
    return arr;
}

json jmatrix(const std::vector<double>& flat, size_t rows, size_t cols) {
    json mat = json::array();
    for (size_t r = 0; r < rows; ++r) {
        json row = json::array();
        for (size_t c = 0; c < cols; ++c) row.push_back(jnum(flat[r * cols + c]));
        mat.push_back(row);
    }
    return mat;
}

uint64_t resolve_seed(uint64_t cli_seed, bool cli_given) {
    if (cli_given) return cli_seed;
    const char* env = std::getenv("MEMBRANE_WALK_SEED");
    if (!env || !*env) return cli_seed;
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
        throw ParseError(std::string("MEMBRANE_WALK_SEED is not an integer: ") + env);
    return v;
}

MembraneSpec resolve_spec(const std::string& s) {
    if (fs::exists(s)) {
        try {
            return load_membrane_file(s);
        } catch (const Error& e) {
            throw ParseError(s + ": " + e.what());
        }
    }
    if (s.find('/') != std::string::npos || s.ends_with(".json"))
        throw ParseError("spec file not found: " + s);
    return builtin_membrane(s); // "fig1a:0.5", "transparent", ...
}

OneSidedEnvironment resolve_env(const std::string& s) {
    if (fs::exists(s)) {
        try {
            return load_environment_file(s);
        } catch (const Error& e) {
            throw ParseError(s + ": " + e.what());
        }
    }
    if (!s.empty() && s.front() == '{') return environment_from_json_text(s);
    throw ParseError("environment file not found: " + s);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open output file: " + path);
    out << text;
}

json artifact_head(const char* command, uint64_t seed, const json& config) {
    json doc;
    doc["tool"] = kTool;
    doc["version"] = kVersion;
    doc["command"] = command;
    doc["seed"] = seed;
    doc["config"] = config;
    return doc;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
    std::string spec;
    std::string out;
    bool hitting_only = false;
    double compare_p = 0.0;
    bool compare_given = false;
    uint64_t seed = 0;
    bool seed_given = false;
};

int run_analyze(const AnalyzeArgs& a) {
    uint64_t seed = resolve_seed(a.seed, a.seed_given);
    MembraneSpec spec = resolve_spec(a.spec);
    ValidatedMembrane mem(spec);
    HittingKernel H = hitting_kernel(mem.m(), spec.periods);

    if (a.hitting_only && !a.out.empty() && a.out.ends_with(".csv")) {
        std::string text;
        for (size_t j = 0; j < H.u; ++j) {
            for (size_t k = 0; k < H.u; ++k) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.15g", H.at(j, k));
                if (k) text += ",";
                text += buf;
            }
            text += "\n";
        }
        write_text(a.out, text);
        return 0;
    }

    json config;
    config["spec"] = a.spec;
    config["hitting_kernel"] = a.hitting_only;
    if (a.compare_given) config["compare_paper_example"] = jnum(a.compare_p);
    if (!a.out.empty()) config["out"] = a.out;

    json doc = artifact_head("analyze", seed, config);
    doc["m"] = mem.m();
    doc["periods"] = spec.periods;
    json classes = json::array();
    for (size_t j = 0; j < H.u; ++j) classes.push_back(H.lattice.class_name(j));
    doc["classes"] = classes;
    doc["hitting_kernel"] = jmatrix(H.h, H.u, H.u);

    if (!a.hitting_only) {
        EmbeddedChain chain = analyze_membrane(mem, H);
        doc["states"] = chain.states;
        doc["transition_matrix"] = jmatrix(chain.P, 2 * chain.u, 2 * chain.u);
        doc["pi"] = jvec(chain.pi);
        doc["gamma"] = jnum(chain.gamma);
        doc["c"] = jvec(chain.c);
        if (a.compare_given) {
            Fig1aClosedForm cf = fig1a_closed_form(a.compare_p);
            json closed;
            closed["p"] = jnum(a.compare_p);
            closed["alpha"] = jnum(cf.alpha);
            closed["pi"] = jvec({cf.pi[0], cf.pi[1], cf.pi[2], cf.pi[3]});
            closed["gamma"] = jnum(cf.gamma);
            closed["c"] = jnum(cf.c);
            closed["gamma_delta"] = jnum(chain.gamma - cf.gamma);
            closed["c_delta"] = jnum(chain.c.empty() ? std::nan("") : chain.c[0] - cf.c);
            doc["closed_form"] = closed;
        }
    }

    std::string text = doc.dump(2) + "\n";
    if (a.out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        write_text(a.out, text);
    }
    return 0;
}

// --------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string spec;
    std::string env;
    uint64_t steps = 10000;
    uint64_t paths = 1;
    uint64_t seed = 1;
    bool seed_given = false;
    uint64_t stride = 0;
    std::vector<double> grid;
    std::string out;
};

int run_simulate(const SimulateArgs& a) {
    uint64_t seed = resolve_seed(a.seed, a.seed_given);
    if (a.spec.empty() == a.env.empty())
        throw ParseError("simulate needs exactly one of --spec or --env");
    for (double t : a.grid)
        if (!(t >= 0.0) || t > 1.0)
            throw ParseError("grid times must lie in [0, 1]");

    std::optional<MembraneSpec> spec;
    std::optional<ValidatedMembrane> mem;
    std::optional<OneSidedEnvironment> env;
    WalkModel model;
    if (!a.spec.empty()) {
        spec = resolve_spec(a.spec);
        mem.emplace(*spec);
        model = WalkModel::two_sided(*mem);
    } else {
        env = resolve_env(a.env);
        model = WalkModel::one_sided(*env);
    }

    fs::create_directories(a.out);

    RecordOptions opts;
    opts.stride = a.stride;
    for (double t : a.grid)
        opts.extra_indices.push_back(uint64_t(double(a.steps) * t));

    json config;
    if (!a.spec.empty()) config["spec"] = a.spec;
    if (!a.env.empty()) config["env"] = a.env;
    config["steps"] = a.steps;
    config["paths"] = a.paths;
    config["stride"] = a.stride;
    if (!a.grid.empty()) config["grid"] = jvec(a.grid);
    config["out"] = a.out;

    json doc = artifact_head("simulate", seed, config);
    doc["m"] = model.m();
    json jpaths = json::array();

    int tang = model.m() - 1;
    for (uint64_t i = 0; i < a.paths; ++i) {
        opts.stream_index = i;
        Trajectory traj = simulate(model, a.steps, seed, opts);

        char name[32];
        std::snprintf(name, sizeof name, "path_%05" PRIu64 ".csv", i);
        std::string csv = "step,x,side";
        for (int l = 0; l < tang; ++l) csv += ",y" + std::to_string(l);
        csv += "\n";
        for (const auto& [step, state] : traj.samples) {
            csv += std::to_string(step) + "," + std::to_string(state.x) + ",";
            if (state.membrane_side) csv += side_name(*state.membrane_side);
            for (int l = 0; l < tang; ++l) csv += "," + std::to_string(state.y[l]);
            csv += "\n";
        }
        write_text((fs::path(a.out) / name).string(), csv);

        json p;
        p["stream"] = i;
        p["file"] = name;
        p["x_final"] = traj.final_state.x;
        p["y_final"] = traj.final_state.y;
        p["visits_seen"] = traj.visits_seen;
        p["departures"] = traj.departures;
        p["visit_counts"] = traj.visit_counts;
        p["l_type"] = traj.l_type;
        p["m_type"] = traj.m_type;
        p["occ_type"] = traj.occ_type;
        if (!a.grid.empty()) {
            json sc = json::array();
            for (const ScaledPoint& pt : scaled(traj, a.steps, a.grid)) {
                json one;
                one["t"] = jnum(pt.t);
                one["x"] = jnum(pt.x);
                one["y"] = jvec(pt.y);
                sc.push_back(one);
            }
            p["scaled"] = sc;
        }
        jpaths.push_back(p);
    }
    doc["paths"] = jpaths;
    write_text((fs::path(a.out) / "summary.json").string(), doc.dump(2) + "\n");
    return 0;
}

// ----------------------------------------------------------------- verify

struct VerifyArgs {
    std::string spec;
    std::string env;
    std::string suite = "all";
    uint64_t steps = 10000;
    uint64_t paths = 20000;
    uint64_t visits = 1000000;
    uint64_t seed = 1;
    bool seed_given = false;
    int workers = 0;
    std::string out;
    bool negative_control = false;
};

void print_report(const VerificationReport& rep) {
    for (const auto& ch : rep.checks) {
        std::printf("[%s] %s/%s statistic=%.6g", ch.pass ? "PASS" : "FAIL",
                    rep.suite.c_str(), ch.name.c_str(), ch.statistic);
        if (!std::isnan(ch.p_value)) {
            std::printf(" p=%.4g level=%.2g", ch.p_value, ch.level);
        } else {
            std::printf(" target=%.6g threshold=%.3g", ch.target, ch.threshold);
        }
        if (!ch.detail.empty()) std::printf("  (%s)", ch.detail.c_str());
        std::printf("\n");
    }
}

json report_to_json(const VerificationReport& rep) {
    json r;
    r["suite"] = rep.suite;
    r["seed"] = rep.seed;
    r["steps"] = rep.steps;
    r["paths"] = rep.paths;
    r["m"] = rep.m;
    r["workers"] = rep.workers;
    r["gamma"] = jnum(rep.gamma);
    r["c"] = jvec(rep.c);
    r["pi"] = jvec(rep.pi);
    json checks = json::array();
    for (const auto& ch : rep.checks) {
        json c;
        c["name"] = ch.name;
        c["statistic"] = jnum(ch.statistic);
        c["target"] = jnum(ch.target);
        c["threshold"] = jnum(ch.threshold);
        c["p_value"] = jnum(ch.p_value);
        c["level"] = jnum(ch.level);
        c["pass"] = ch.pass;
        c["detail"] = ch.detail;
        checks.push_back(c);
    }
    r["checks"] = checks;
    r["all_pass"] = rep.all_pass();
    return r;
}

int run_verify(const VerifyArgs& a) {
    uint64_t seed = resolve_seed(a.seed, a.seed_given);
    if (a.spec.empty() == a.env.empty())
        throw ParseError("verify needs exactly one of --spec or --env");
    int workers = a.workers > 0
                      ? a.workers
                      : std::max(1u, std::thread::hardware_concurrency());

    std::optional<MembraneSpec> spec;
    std::optional<ValidatedMembrane> mem;
    std::optional<OneSidedEnvironment> env;
    WalkModel model;
    if (!a.spec.empty()) {
        spec = resolve_spec(a.spec);
        mem.emplace(*spec);
        model = WalkModel::two_sided(*mem);
    } else {
        env = resolve_env(a.env);
        model = WalkModel::one_sided(*env);
    }

    const std::vector<std::string> known{"invariance", "slide", "stationarity",
                                         "stable", "martingale", "one_sided"};
    std::vector<std::string> suites;
    if (a.suite == "all") {
        if (mem) suites = {"invariance", "slide", "stationarity", "stable", "martingale"};
        else suites = {"one_sided", "martingale", "stable"};
    } else {
        bool ok = false;
        for (const auto& s : known) ok = ok || s == a.suite;
        if (!ok) throw ParseError("unknown suite: " + a.suite);
        suites = {a.suite};
    }
    if (a.negative_control) {
        bool has = false;
        for (const auto& s : suites) has = has || s == "martingale";
        if (!has) suites.push_back("martingale");
    }

    // fixed per-suite seed offsets keep replays independent of the selection
    auto suite_seed = [&](const std::string& s) -> uint64_t {
        if (s == "invariance") return seed;
        if (s == "slide") return seed + 1;
        if (s == "stationarity") return seed + 2;
        if (s == "stable") return seed + 3;
        if (s == "martingale") return seed + 4;
        return seed + 5; // one_sided
    };

    std::vector<VerificationReport> reports;
    for (const auto& s : suites) {
        VerificationReport rep;
        if (s == "invariance") {
            rep = verify_invariance(model, a.steps, a.paths, suite_seed(s), workers);
        } else if (s == "slide") {
            rep = verify_slide(model, a.steps, a.paths, suite_seed(s), workers);
        } else if (s == "stationarity") {
            rep = verify_visit_stationarity(model, a.visits, suite_seed(s), workers);
        } else if (s == "stable") {
            rep = verify_stable_hitting(model.m(), 200, a.paths, suite_seed(s));
        } else if (s == "martingale") {
            double bias = a.negative_control ? 0.05 : 0.0;
            rep = verify_martingales(model, a.steps, a.paths, suite_seed(s), workers, bias);
        } else if (s == "one_sided") {
            rep = verify_one_sided(*env, a.steps, a.paths, suite_seed(s), workers);
        }
        print_report(rep);
        reports.push_back(std::move(rep));
    }

    size_t passed = 0, total = 0;
    bool all_pass = true;
    for (const auto& rep : reports) {
        for (const auto& ch : rep.checks) {
            ++total;
            if (ch.pass) ++passed;
        }
        all_pass = all_pass && rep.all_pass();
    }
    std::printf("%zu/%zu checks passed\nRESULT: %s\n", passed, total,
                all_pass ? "PASS" : "FAIL");

    if (!a.out.empty()) {
        json config;
        if (!a.spec.empty()) config["spec"] = a.spec;
        if (!a.env.empty()) config["env"] = a.env;
        config["suite"] = a.suite;
        config["steps"] = a.steps;
        config["paths"] = a.paths;
        config["visits"] = a.visits;
        config["workers"] = workers;
        config["negative_control"] = a.negative_control;
        config["out"] = a.out;
        json doc = artifact_head("verify", seed, config);
        json arr = json::array();
        for (const auto& rep : reports) arr.push_back(report_to_json(rep));
        doc["suites"] = arr;
        doc["all_pass"] = all_pass;
        write_text(a.out, doc.dump(2) + "\n");
    }
    return all_pass ? 0 : 1;
}

// -------------------------------------------------------------- reference

struct ReferenceArgs {
    double gamma = 0.0;
    uint64_t steps = 10000;
    uint64_t paths = 1000;
    uint64_t seed = 1;
    bool seed_given = false;
    std::string out = ".";
};

int run_reference(const ReferenceArgs& a) {
    uint64_t seed = resolve_seed(a.seed, a.seed_given);
    if (a.gamma < -1.0 || a.gamma > 1.0)
        throw ParseError("--gamma must lie in [-1, 1]");
    fs::create_directories(a.out);

    const int grid_points = 21;
    std::vector<double> lt_sum(grid_points, 0.0), lt_sq(grid_points, 0.0);

    std::string endpoints = "path,endpoint,local_time\n";
    for (uint64_t i = 0; i < a.paths; ++i) {
        Rng rng = Rng::stream(seed, i);
        ReferencePath path = skew_path_sample(a.gamma, a.steps, rng);
        char buf[96];
        std::snprintf(buf, sizeof buf, "%" PRIu64 ",%.15g,%.15g\n", i, path.x.back(),
                      path.local_time.back());
        endpoints += buf;
        for (int g = 0; g < grid_points; ++g) {
            size_t idx = size_t(double(a.steps) * double(g) / (grid_points - 1));
            double v = path.local_time[idx];
            lt_sum[g] += v;
            lt_sq[g] += v * v;
        }
    }
    write_text((fs::path(a.out) / "endpoints.csv").string(), endpoints);

    std::string grid_csv = "t,mean_local_time,stderr_local_time\n";
    for (int g = 0; g < grid_points; ++g) {
        double t = double(g) / (grid_points - 1);
        double mean_lt = lt_sum[g] / double(a.paths);
        double var = a.paths > 1
                         ? (lt_sq[g] - lt_sum[g] * lt_sum[g] / double(a.paths)) /
                               double(a.paths - 1)
                         : 0.0;
        double se = std::sqrt(std::max(var, 0.0) / double(a.paths));
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g\n", t, mean_lt, se);
        grid_csv += buf;
    }
    write_text((fs::path(a.out) / "local_time_grid.csv").string(), grid_csv);

    json config;
    config["gamma"] = jnum(a.gamma);
    config["steps"] = a.steps;
    config["paths"] = a.paths;
    config["out"] = a.out;
    json doc = artifact_head("reference", seed, config);
    doc["files"] = {"endpoints.csv", "local_time_grid.csv"};
    write_text((fs::path(a.out) / "summary.json").string(), doc.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"effective membrane analysis, walk simulation, and limit-law "
                 "verification"};
    app.set_version_flag("--version", std::string(kTool) + " " + kVersion);
    app.require_subcommand(1);

    AnalyzeArgs aa;
    CLI::App* analyze = app.add_subcommand(
        "analyze", "compute hitting kernel, embedded chain, pi, gamma, and c");
    analyze->add_option("--spec", aa.spec, "membrane spec file or builtin id")
        ->required();
    analyze->add_flag("--hitting-kernel", aa.hitting_only,
                      "emit only the hitting kernel (CSV when --out ends in .csv)");
    CLI::Option* cmp = analyze->add_option(
        "--compare-paper-example", aa.compare_p,
        "evaluate the worked-example closed forms at p and print the deltas");
    analyze->add_option("--out", aa.out, "output file (default: stdout)");
    CLI::Option* aseed = analyze->add_option("--seed", aa.seed, "master seed echo");

    SimulateArgs sa;
    CLI::App* simulate = app.add_subcommand("simulate", "run walks and store artifacts");
    simulate->add_option("--spec", sa.spec, "membrane spec file or builtin id");
    simulate->add_option("--env", sa.env, "one-sided environment file");
    simulate->add_option("--steps", sa.steps, "steps per path")
        ->check(CLI::Range(uint64_t(1), uint64_t(1) << 62));
    simulate->add_option("--paths", sa.paths, "number of independent paths")
        ->check(CLI::Range(uint64_t(1), uint64_t(1) << 32));
    CLI::Option* sseed = simulate->add_option("--seed", sa.seed, "master seed");
    simulate->add_option("--stride", sa.stride, "store every stride-th state (0: endpoints)");
    simulate->add_option("--grid", sa.grid, "comma-separated times in [0,1] for scaled output")
        ->delimiter(',');
    simulate->add_option("--out", sa.out, "output directory")->required();

    VerifyArgs va;
    CLI::App* verify = app.add_subcommand("verify", "run statistical check suites");
    verify->add_option("--spec", va.spec, "membrane spec file or builtin id");
    verify->add_option("--env,--one-sided", va.env, "one-sided environment file");
    verify->add_option(
        "--suite", va.suite,
        "invariance|slide|stationarity|stable|martingale|one_sided|all");
    verify->add_option("--steps,--n", va.steps, "steps per path")
        ->check(CLI::Range(uint64_t(1), uint64_t(1) << 62));
    verify->add_option("--paths", va.paths, "paths per ensemble")
        ->check(CLI::Range(uint64_t(1), uint64_t(1) << 32));
    verify->add_option("--visits", va.visits, "pooled membrane visits (stationarity)")
        ->check(CLI::Range(uint64_t(1), uint64_t(1) << 62));
    CLI::Option* vseed = verify->add_option("--seed", va.seed, "master seed");
    verify->add_option("--workers", va.workers, "worker threads (0: hardware)");
    verify->add_option("--out", va.out, "write the JSON report here");
    verify->add_flag("--negative-control", va.negative_control,
                     "inject an off-membrane drift so the martingale suite fails");

    ReferenceArgs ra;
    CLI::App* reference = app.add_subcommand(
        "reference", "sample the limiting skew path law directly");
    reference->add_option("--gamma", ra.gamma, "skewness in [-1, 1]")->required();
    reference->add_option("--steps", ra.steps, "steps per path")
        ->check(CLI::Range(uint64_t(1), uint64_t(1) << 62));
    reference->add_option("--paths", ra.paths, "number of paths")
        ->check(CLI::Range(uint64_t(1), uint64_t(1) << 32));
    CLI::Option* rseed = reference->add_option("--seed", ra.seed, "master seed");
    reference->add_option("--out", ra.out, "output directory (default: .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    aa.seed_given = aseed->count() > 0;
    aa.compare_given = cmp->count() > 0;
    sa.seed_given = sseed->count() > 0;
    va.seed_given = vseed->count() > 0;
    ra.seed_given = rseed->count() > 0;

    try {
        if (*analyze) return run_analyze(aa);
        if (*simulate) return run_simulate(sa);
        if (*verify) return run_verify(va);
        if (*reference) return run_reference(ra);
    } catch (const OverflowGuard& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const BudgetTooSmall& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const NoVisits& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
