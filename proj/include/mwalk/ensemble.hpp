#pragma once

#include <cstdint>
#include <vector>

#include "mwalk/walk.hpp"

namespace mwalk {

// Per-path endpoint and counter data, the raw material of the verification
// suites. Vectors indexed as in Trajectory.
struct PathSummary {
    int64_t x_final = 0;
    std::vector<int64_t> y_final;
    std::vector<int64_t> m_y, d_y;
    uint64_t departures = 0;
    std::vector<int64_t> visit_counts;
    std::vector<int64_t> l_type, m_type, occ_type;
};

struct EnsembleConfig {
    uint64_t steps = 0;
    uint64_t paths = 0;
    uint64_t seed = 0;
    int workers = 1;
    RecordOptions::Start start = RecordOptions::Start::MembraneLeft;
    const EmbeddedChain* chain = nullptr; // for stationary starts
    uint64_t skip_first_visits = 0;
    double bias_x = 0.0;
    bool fork_env = false; // draw a fresh iid environment per path
};

struct EnsembleResult {
    int m = 2;
    size_t u = 1;
    uint64_t steps = 0;
    uint64_t seed = 0;
    std::vector<PathSummary> paths;
};

// Runs cfg.paths independent walks. Path i always uses random stream i of
// cfg.seed (and environment fork i when fork_env is set), so the result is
// identical for any worker count.
EnsembleResult run_ensemble(const WalkModel& model, const EnsembleConfig& cfg);

} // namespace mwalk
