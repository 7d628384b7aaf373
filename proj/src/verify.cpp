#include "mwalk/verify.hpp"

#include <algorithm>
#include <cmath>

#include "mwalk/errors.hpp"
#include "mwalk/excursion.hpp"
#include "mwalk/limits.hpp"
#include "mwalk/stats.hpp"

namespace mwalk {

double ks_critical(size_t n, double level) {
    double lo = 0.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (kolmogorov_sf(mid) > level) lo = mid;
        else hi = mid;
    }
    double root = std::sqrt(double(n));
    return 0.5 * (lo + hi) / (root + 0.12 + 0.11 / root);
}

namespace {

CheckResult ci_check(std::string name, double statistic, double target, double threshold,
                     std::string detail = {}) {
    CheckResult ch;
    ch.name = std::move(name);
    ch.statistic = statistic;
    ch.target = target;
    ch.threshold = threshold;
    ch.pass = threshold == 0.0 ? statistic == target
                               : std::fabs(statistic - target) <= threshold;
    ch.detail = std::move(detail);
    return ch;
}

CheckResult ks_check(std::string name, const KsResult& ks, double level,
                     std::string detail = {}) {
    CheckResult ch;
    ch.name = std::move(name);
    ch.statistic = ks.statistic;
    ch.target = 0.0;
    ch.threshold = ks_critical(ks.n, level);
    ch.p_value = ks.p_value;
    ch.level = level;
    ch.pass = ks.p_value >= level;
    ch.detail = std::move(detail);
    return ch;
}

struct PipelineContext {
    EmbeddedChain chain;
    bool present = false;
};

PipelineContext pipeline_for(const WalkModel& model) {
    PipelineContext ctx;
    if (model.is_two_sided()) {
        ctx.chain = analyze_membrane(*model.membrane);
        ctx.present = true;
    }
    return ctx;
}

void echo_pipeline(VerificationReport& rep, const PipelineContext& ctx) {
    if (!ctx.present) return;
    rep.gamma = ctx.chain.gamma;
    rep.c = ctx.chain.c;
    rep.pi = ctx.chain.pi;
}

VerificationReport base_report(std::string suite, const WalkModel& model, uint64_t n,
                               uint64_t paths, uint64_t seed, int workers) {
    VerificationReport rep;
    rep.suite = std::move(suite);
    rep.seed = seed;
    rep.steps = n;
    rep.paths = paths;
    rep.m = model.m();
    rep.workers = workers;
    return rep;
}

EnsembleResult stationary_ensemble(const WalkModel& model, const PipelineContext& ctx,
                                   uint64_t n, uint64_t paths, uint64_t seed, int workers,
                                   double bias_x = 0.0) {
    EnsembleConfig cfg;
    cfg.steps = n;
    cfg.paths = paths;
    cfg.seed = seed;
    cfg.workers = workers;
    cfg.bias_x = bias_x;
    if (ctx.present) {
        cfg.start = RecordOptions::Start::Stationary;
        cfg.chain = &ctx.chain;
    }
    if (model.env && model.env->is_iid()) cfg.fork_env = true;
    return run_ensemble(model, cfg);
}

double reflected_normal_cdf(double x) {
    if (x <= 0.0) return 0.0;
    return 2.0 * normal_cdf(x) - 1.0;
}

void sign_and_shape_checks(VerificationReport& rep, const EnsembleResult& res,
                           double gamma, uint64_t n, uint64_t seed,
                           const std::string& prefix) {
    double root = std::sqrt(double(n));
    double sqm = std::sqrt(double(res.m));
    size_t paths = res.paths.size();

    // scaled endpoints live on a lattice of cell sqm/root; uniform jitter
    // within one cell removes the point masses that would otherwise bias the
    // one-sample KS statistic while moving the cdf by only O(cell^2)
    Rng jitter(seed ^ 0x6a09e667f3bcc908ULL);
    double cell = sqm / root;

    size_t pos = 0, nonzero = 0;
    std::vector<double> endpoint, radial;
    endpoint.reserve(paths);
    radial.reserve(paths);
    for (const auto& p : res.paths) {
        if (p.x_final != 0) {
            ++nonzero;
            if (p.x_final > 0) ++pos;
        }
        double v = sqm * double(p.x_final) / root +
                   (jitter.next_double() - 0.5) * cell;
        endpoint.push_back(v);
        radial.push_back(std::fabs(v));
    }

    // conditioning on a nonzero endpoint removes the membrane atom; the sign
    // law of a mid-excursion walk is exactly the stationary inflow
    double denom = double(std::max<size_t>(nonzero, 1));
    double phat = double(pos) / denom;
    double target = (1.0 + gamma) / 2.0;
    double se = std::sqrt(target * (1.0 - target) / denom);
    rep.checks.push_back(ci_check(prefix + "sign_frequency", phat, target, 3.0 * se,
                                  "P(X>0 | X!=0) vs (1+gamma)/2"));

    rep.checks.push_back(ks_check(
        prefix + "endpoint_shape",
        ks_test(endpoint, [gamma](double x) { return skew_marginal_cdf(gamma, 1.0, x); }),
        0.01, "KS of scaled endpoint vs skew marginal"));

    rep.checks.push_back(ks_check(prefix + "radial_shape",
                                  ks_test(radial, reflected_normal_cdf), 0.01,
                                  "KS of scaled |endpoint| vs reflected normal"));
}

} // namespace

VerificationReport verify_invariance(const WalkModel& model, uint64_t n, uint64_t paths,
                                     uint64_t seed, int workers) {
    if (!model.is_two_sided())
        throw PipelineMissing("invariance suite needs the two-sided pipeline");
    PipelineContext ctx = pipeline_for(model);
    VerificationReport rep = base_report("invariance", model, n, paths, seed, workers);
    echo_pipeline(rep, ctx);

    EnsembleResult res = stationary_ensemble(model, ctx, n, paths, seed, workers);
    sign_and_shape_checks(rep, res, ctx.chain.gamma, n, seed, "");
    return rep;
}

VerificationReport verify_slide(const WalkModel& model, uint64_t n, uint64_t paths,
                                uint64_t seed, int workers) {
    if (!model.is_two_sided())
        throw PipelineMissing("slide suite needs the two-sided pipeline");
    PipelineContext ctx = pipeline_for(model);
    VerificationReport rep = base_report("slide", model, n, paths, seed, workers);
    echo_pipeline(rep, ctx);

    EnsembleResult res = stationary_ensemble(model, ctx, n, paths, seed, workers);
    double root = std::sqrt(double(n));
    double sqm = std::sqrt(double(res.m));
    size_t tang = size_t(res.m - 1);
    const std::vector<double>& c = ctx.chain.c;

    // mean displacement per coordinate vs c sqrt(2/pi)/sqrt(m)
    double loc = std::sqrt(2.0 / M_PI) / sqm;
    for (size_t l = 0; l < tang; ++l) {
        std::vector<double> disp;
        disp.reserve(res.paths.size());
        for (const auto& p : res.paths)
            disp.push_back(double(p.m_y[l] + p.d_y[l]) / root);
        rep.checks.push_back(ci_check("mean_displacement[" + std::to_string(l) + "]",
                                      mean(disp), c[l] * loc, 3.0 * stderr_of_mean(disp),
                                      "mean of scaled tangential endpoint"));
    }

    // exact stationary identity: slides accumulate c per departure
    for (size_t l = 0; l < tang; ++l) {
        std::vector<double> diff;
        diff.reserve(res.paths.size());
        for (const auto& p : res.paths)
            diff.push_back((double(p.d_y[l]) - c[l] * double(p.departures)) / root);
        rep.checks.push_back(ci_check("slide_identity[" + std::to_string(l) + "]",
                                      mean(diff), 0.0, 3.0 * stderr_of_mean(diff),
                                      "slide total minus c times visit count"));
    }

    // residual after removing the slide part is a plain scaled martingale;
    // jitter within one lattice cell as in the endpoint checks
    Rng jitter(seed ^ 0xbb67ae8584caa73bULL);
    std::vector<double> residual;
    residual.reserve(res.paths.size());
    for (const auto& p : res.paths)
        residual.push_back(sqm * double(p.m_y[0]) / root +
                           (jitter.next_double() - 0.5) * sqm / root);
    rep.checks.push_back(ks_check("residual_shape", ks_test(residual, normal_cdf), 0.01,
                                  "KS of scaled free tangential part vs normal"));

    // the vertical sign carries no information about the tangential residual
    std::vector<double> signs;
    signs.reserve(res.paths.size());
    for (const auto& p : res.paths)
        signs.push_back(p.x_final > 0 ? 1.0 : (p.x_final < 0 ? -1.0 : 0.0));
    double p_indep = permutation_independence_pvalue(signs, residual, 400, seed ^ 0x9e37);
    CheckResult indep;
    indep.name = "sign_residual_independence";
    indep.statistic = p_indep;
    indep.p_value = p_indep;
    indep.level = 0.01;
    indep.pass = p_indep >= 0.01;
    indep.detail = "permutation rank-correlation test";
    rep.checks.push_back(indep);
    return rep;
}

VerificationReport verify_visit_stationarity(const WalkModel& model,
                                             uint64_t target_visits, uint64_t seed,
                                             int workers, double linf_tol) {
    if (!model.is_two_sided())
        throw PipelineMissing("stationarity suite needs the two-sided pipeline");
    if (target_visits == 0) throw NoVisits("target visit count must be positive");
    PipelineContext ctx = pipeline_for(model);

    const uint64_t n = 10000;
    // visits per path concentrate near 0.5642 sqrt(n) plus the start visit
    double per_path = 0.5642 * std::sqrt(double(n)) + 1.0;
    uint64_t paths = uint64_t(1.05 * double(target_visits) / per_path) + 1;

    VerificationReport rep = base_report("stationarity", model, n, paths, seed, workers);
    echo_pipeline(rep, ctx);

    size_t u = model.num_classes();
    std::vector<double> counts(2 * u, 0.0), type_counts(2 * u, 0.0);
    double total = 0.0, total_types = 0.0;
    uint64_t batch_paths = paths, batch = 0;
    while (total < double(target_visits)) {
        EnsembleConfig cfg;
        cfg.steps = n;
        cfg.paths = batch_paths;
        cfg.seed = seed + batch; // fresh master seed per top-up batch
        cfg.workers = workers;
        cfg.start = RecordOptions::Start::Stationary;
        cfg.chain = &ctx.chain;
        EnsembleResult res = run_ensemble(model, cfg);
        for (const auto& p : res.paths) {
            for (size_t s = 0; s < 2 * u; ++s) {
                counts[s] += double(p.visit_counts[s]);
                total += double(p.visit_counts[s]);
                type_counts[s] += double(p.l_type[s]);
                total_types += double(p.l_type[s]);
            }
        }
        batch_paths = batch_paths / 4 + 1;
        if (++batch > 64) throw NoVisits("visit pooling failed to reach the target");
    }
    if (total_types == 0.0) throw NoVisits("no membrane departures were pooled");

    double linf = 0.0;
    for (size_t s = 0; s < 2 * u; ++s)
        linf = std::max(linf, std::fabs(counts[s] / total - ctx.chain.pi[s]));
    rep.checks.push_back(ci_check("visit_frequency_linf", linf, 0.0, linf_tol,
                                  "pooled " + std::to_string(uint64_t(total)) + " visits"));

    // departure types follow the pi-weighted exit law
    double linf_types = 0.0;
    for (size_t j = 0; j < u; ++j) {
        double w_minus = 0.0, w_plus = 0.0;
        for (int side = 0; side < 2; ++side) {
            size_t s = size_t(side) * u + j;
            w_plus += ctx.chain.pi[s] * ctx.chain.exit_right[s];
            w_minus += ctx.chain.pi[s] * (1.0 - ctx.chain.exit_right[s]);
        }
        linf_types = std::max(linf_types,
                              std::fabs(type_counts[j] / total_types - w_minus));
        linf_types = std::max(linf_types,
                              std::fabs(type_counts[u + j] / total_types - w_plus));
    }
    rep.checks.push_back(ci_check("departure_type_linf", linf_types, 0.0, linf_tol,
                                  "type fractions vs pi-weighted exits"));
    return rep;
}

VerificationReport verify_one_sided(const OneSidedEnvironment& env, uint64_t n,
                                    uint64_t paths, uint64_t seed, int workers) {
    WalkModel model = WalkModel::one_sided(env);
    PipelineContext ctx; // no two-sided pipeline; gamma comes from p_bar
    VerificationReport rep = base_report("one_sided", model, n, paths, seed, workers);
    double p_bar = env.p_bar();
    double gamma = 2.0 * p_bar - 1.0;
    rep.gamma = gamma;
    rep.c.assign(size_t(env.m() - 1), 0.0);

    EnsembleResult res = stationary_ensemble(model, ctx, n, paths, seed, workers);
    sign_and_shape_checks(rep, res, gamma, n, seed, "");

    double root = std::sqrt(double(n));
    for (size_t l = 0; l + 1 < size_t(env.m()); ++l) {
        std::vector<double> disp;
        disp.reserve(res.paths.size());
        for (const auto& p : res.paths) disp.push_back(double(p.m_y[l] + p.d_y[l]) / root);
        rep.checks.push_back(ci_check("mean_displacement[" + std::to_string(l) + "]",
                                      mean(disp), 0.0, 3.0 * stderr_of_mean(disp),
                                      "one-sided slide must vanish"));
    }
    return rep;
}

VerificationReport verify_stable_hitting(int m, uint64_t n_visits, uint64_t reps,
                                         uint64_t seed) {
    if (n_visits == 0 || reps < 10) throw TooFewSamples("need visits and >= 10 replications");
    WalkModel dummy;
    ValidatedMembrane trans(builtin_transparent(m));
    dummy.membrane = &trans;
    VerificationReport rep = base_report("stable", dummy, n_visits, reps, seed, 1);
    rep.gamma = 0.0;

    ExcursionSampler sampler(m, seed, 0);
    std::vector<double> sample;
    sample.reserve(reps);
    size_t pos = 0, nonzero = 0;
    for (uint64_t r = 0; r < reps; ++r) {
        double acc = 0.0;
        for (uint64_t k = 0; k < n_visits; ++k) acc += double(sampler.next().dy[0]);
        double v = acc / double(n_visits);
        sample.push_back(v);
        if (v != 0.0) {
            ++nonzero;
            if (v > 0.0) ++pos;
        }
    }

    double stated = 1.0 / std::sqrt(double(m));
    rep.checks.push_back(ks_check(
        "shape_stated_scale",
        ks_test(sample, [m](double x) { return stable_hit_cdf(m, x); }), 0.01,
        "KS vs heavy-tailed law at the stated scale 1/sqrt(m)"));
    rep.checks.push_back(ks_check(
        "shape_consistent_scale",
        ks_test(sample, [](double x) { return 0.5 + std::atan(x) / M_PI; }), 0.01,
        "KS vs the same law at scale 1 (matches the per-step move fractions)"));

    double phat = nonzero ? double(pos) / double(nonzero) : 0.5;
    rep.checks.push_back(ci_check("sign_symmetry", phat, 0.5,
                                  3.0 * 0.5 / std::sqrt(double(std::max<size_t>(nonzero, 1))),
                                  "sign balance of the scaled displacement"));

    std::vector<double> sorted(sample);
    std::sort(sorted.begin(), sorted.end());
    double q1 = sorted[size_t(0.25 * double(reps))];
    double q3 = sorted[size_t(0.75 * double(reps))];
    double iqr = q3 - q1;
    // quartile standard error under the scale-1 law: density 1/(2 pi) at +-1
    double se_iqr = M_PI / std::sqrt(double(reps));
    rep.checks.push_back(ci_check("iqr_stated_scale", iqr, 2.0 * stated, 3.0 * se_iqr,
                                  "interquartile range vs stated quartiles"));
    rep.checks.push_back(ci_check("iqr_consistent_scale", iqr, 2.0, 3.0 * se_iqr,
                                  "interquartile range vs scale-1 quartiles"));
    return rep;
}

VerificationReport verify_martingales(const WalkModel& model, uint64_t n, uint64_t paths,
                                      uint64_t seed, int workers, double bias_x) {
    PipelineContext ctx = pipeline_for(model);
    VerificationReport rep = base_report("martingale", model, n, paths, seed, workers);
    echo_pipeline(rep, ctx);

    EnsembleResult res = stationary_ensemble(model, ctx, n, paths, seed, workers, bias_x);
    size_t u = res.u;
    double inv_m = 1.0 / double(res.m);

    for (size_t t = 0; t < 2 * u; ++t) {
        std::string label = (t < u ? "-" : "+") + std::string("|") +
                            std::to_string(t % u);
        std::vector<double> mart, bracket;
        mart.reserve(res.paths.size());
        bracket.reserve(res.paths.size());
        for (const auto& p : res.paths) {
            double mv = double(p.m_type[t]);
            mart.push_back(mv);
            bracket.push_back(mv * mv - inv_m * double(p.occ_type[t]));
        }
        double se_m = stderr_of_mean(mart);
        rep.checks.push_back(ci_check("mean[" + label + "]", mean(mart), 0.0,
                                      3.0 * se_m, "per-type martingale mean"));
        double se_b = stderr_of_mean(bracket);
        rep.checks.push_back(ci_check("bracket[" + label + "]", mean(bracket), 0.0,
                                      3.0 * se_b,
                                      "square minus occupation/m residual"));
    }
    return rep;
}

} // namespace mwalk
