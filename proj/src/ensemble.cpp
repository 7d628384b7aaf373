#include "mwalk/ensemble.hpp"

#include <atomic>
#include <exception>
#include <thread>

#include "mwalk/errors.hpp"

namespace mwalk {

namespace {

PathSummary summarize(Trajectory&& t) {
    PathSummary s;
    s.x_final = t.final_state.x;
    s.y_final = std::move(t.final_state.y);
    s.m_y = std::move(t.m_y);
    s.d_y = std::move(t.d_y);
    s.departures = t.departures;
    s.visit_counts = std::move(t.visit_counts);
    s.l_type = std::move(t.l_type);
    s.m_type = std::move(t.m_type);
    s.occ_type = std::move(t.occ_type);
    return s;
}

} // namespace

EnsembleResult run_ensemble(const WalkModel& model, const EnsembleConfig& cfg) {
    if (cfg.paths == 0) throw Error("ensemble needs at least one path");
    if (cfg.workers < 1) throw Error("worker count must be positive");
    if (cfg.start == RecordOptions::Start::Stationary && cfg.chain == nullptr)
        throw PipelineMissing("stationary starts require the embedded chain");
    if (cfg.fork_env && (!model.env || !model.env->is_iid()))
        throw Error("environment forking needs an iid one-sided model");

    EnsembleResult res;
    res.m = model.m();
    res.u = model.num_classes();
    res.steps = cfg.steps;
    res.seed = cfg.seed;
    res.paths.resize(cfg.paths);

    auto run_path = [&](uint64_t i) {
        RecordOptions opts;
        opts.start = cfg.start;
        opts.chain = cfg.chain;
        opts.skip_first_visits = cfg.skip_first_visits;
        opts.bias_x = cfg.bias_x;
        opts.stream_index = i;
        if (cfg.fork_env) {
            OneSidedEnvironment env = model.env->fork(i);
            WalkModel forked = WalkModel::one_sided(env);
            res.paths[i] = summarize(simulate(forked, cfg.steps, cfg.seed, opts));
        } else {
            res.paths[i] = summarize(simulate(model, cfg.steps, cfg.seed, opts));
        }
    };

    int workers = cfg.workers;
    if (uint64_t(workers) > cfg.paths) workers = int(cfg.paths);
    if (workers == 1) {
        for (uint64_t i = 0; i < cfg.paths; ++i) run_path(i);
        return res;
    }

    std::atomic<uint64_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(size_t(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (;;) {
                    uint64_t i = next.fetch_add(1);
                    if (i >= cfg.paths) break;
                    run_path(i);
                }
            } catch (...) {
                errors[size_t(w)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return res;
}

} // namespace mwalk
