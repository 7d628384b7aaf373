#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mwalk/chain.hpp"
#include "mwalk/membrane.hpp"
#include "mwalk/rng.hpp"

namespace mwalk {

// Model being simulated: a two-sided membrane kernel or a one-sided
// pass-through environment. Both perturb the same free symmetric walk.
struct WalkModel {
    const ValidatedMembrane* membrane = nullptr;
    const OneSidedEnvironment* env = nullptr;

    static WalkModel two_sided(const ValidatedMembrane& m) { return {&m, nullptr}; }
    static WalkModel one_sided(const OneSidedEnvironment& e) { return {nullptr, &e}; }

    bool is_two_sided() const { return membrane != nullptr; }
    int m() const { return membrane ? membrane->m() : env->m(); }
    // classes used for per-type bookkeeping: membrane classes, or the
    // environment cell for periodic one-sided models, or one class
    size_t num_classes() const;
    const PeriodLattice* lattice() const;
};

struct WalkState {
    int64_t x = 0;
    std::optional<Side> membrane_side; // present exactly when x == 0
    Coords y;
};

struct RecordOptions {
    uint64_t stride = 0;                    // 0: keep only endpoints
    std::vector<uint64_t> extra_indices;    // exact step indices to keep
    bool visit_log = false;
    uint64_t skip_first_visits = 0;         // burn-in for visit counting
    int64_t y_bound = int64_t(1) << 62;
    double bias_x = 0.0;                    // debug drift injection off-membrane
    uint64_t stream_index = 0;

    enum class Start { MembraneLeft, MembraneRight, Stationary, Custom };
    Start start = Start::MembraneLeft;
    WalkState custom_start;
    const EmbeddedChain* chain = nullptr;   // stationary start draws from chain->pi
};

struct VisitRecord {
    uint64_t step;
    Side side;
    uint32_t cls;
};

// Simulation result. Counters are exact at every step; sampled states are
// thinned by the record options. Visit counters index types in chain order,
// left block first: t = j for (j,-) and t = U + j for (j,+).
//
// departures counts membrane departures in [1,n], equivalently visits in
// [0,n-1]; a visit at step n itself has no departure yet. The local-time
// split satisfies departures = sum_t l_type[t].
struct Trajectory {
    uint64_t n = 0;
    int m = 2;
    size_t u = 1;
    uint64_t master_seed = 0;
    uint64_t stream_index = 0;

    WalkState start;
    WalkState final_state;
    std::vector<std::pair<uint64_t, WalkState>> samples;
    std::vector<VisitRecord> visit_log;

    uint64_t visits_seen = 0;            // arrivals in [0,n], including the start
    uint64_t departures = 0;             // L(n)
    std::vector<int64_t> visit_counts;   // per (side,class), after burn-in
    std::vector<int64_t> l_type;         // L^{j,+-}(n)
    std::vector<int64_t> m_type;         // M^{j,+-}(n)
    std::vector<int64_t> occ_type;       // steps with X^{j,+-}(k-1) > 0
    std::vector<int64_t> m_y;            // off-membrane tangential increments
    std::vector<int64_t> d_y;            // in-membrane slide increments

    // index of the excursion type holding the start state when the walk
    // begins off the membrane; -1 for membrane starts
    int64_t start_type = -1;
};

// One transition of the enlarged chain.
WalkState step(const WalkState& state, const WalkModel& model, Rng& rng);

Trajectory simulate(const WalkModel& model, uint64_t steps, uint64_t seed,
                    const RecordOptions& opts = {});

// Exact evaluation of the diffusive scaling at grid points:
// (X(floor(n t))/sqrt(n), Y(floor(n t))/sqrt(n)). All requested indices must
// have been recorded.
struct ScaledPoint {
    double t;
    double x;
    std::vector<double> y;
};
std::vector<ScaledPoint> scaled(const Trajectory& traj, uint64_t n,
                                const std::vector<double>& t_grid);

// Normalized arrival frequencies over (side, class).
std::vector<double> visit_frequencies(const Trajectory& traj);

// Mean of p_y over the cube of side A centered at o.
double cube_average(const OneSidedEnvironment& env, int64_t A, const Coords& center);

// Durations and tangential displacements between successive membrane visits,
// simulated step by step. Requires a slide-free model so the increments are
// iid in law. step_cap = 0 means no cap; a nonzero cap aborts with an error
// rather than biasing the sample.
struct HittingRecord {
    uint64_t duration;
    Coords dy;
};
std::vector<HittingRecord> hitting_records(const WalkModel& model, uint64_t n_records,
                                           uint64_t seed, uint64_t step_cap = 0);

} // namespace mwalk
