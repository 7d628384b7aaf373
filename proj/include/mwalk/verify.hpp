#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mwalk/chain.hpp"
#include "mwalk/ensemble.hpp"
#include "mwalk/walk.hpp"

namespace mwalk {

// One named check: CI-style (|statistic - target| vs threshold) or KS-style
// (p_value vs level). Every field needed to replay and audit is kept.
struct CheckResult {
    std::string name;
    double statistic = 0.0;
    double target = 0.0;
    double threshold = 0.0; // allowed |statistic - target|
    double p_value = std::numeric_limits<double>::quiet_NaN(); // KS checks
    double level = 0.0;     // rejection level for p-value checks
    bool pass = false;
    std::string detail;
};

struct VerificationReport {
    std::string suite;
    uint64_t seed = 0;
    uint64_t steps = 0;
    uint64_t paths = 0;
    int m = 2;
    int workers = 1;
    // pipeline echo, when a two-sided membrane is analyzed
    double gamma = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> c;
    std::vector<double> pi;
    std::vector<CheckResult> checks;

    bool all_pass() const {
        for (const auto& ch : checks)
            if (!ch.pass) return false;
        return true;
    }
};

// Weak-limit law of the vertical coordinate: sign frequency against the
// permeability, endpoint shape against the skew marginal, radial part against
// the reflected normal. Two-sided models only.
VerificationReport verify_invariance(const WalkModel& model, uint64_t n, uint64_t paths,
                                     uint64_t seed, int workers = 1);

// Tangential drift: mean endpoint against c sqrt(2/pi)/sqrt(m), the exact
// per-path slide/local-time identity, residual normality, and independence of
// the residual from the vertical sign.
VerificationReport verify_slide(const WalkModel& model, uint64_t n, uint64_t paths,
                                uint64_t seed, int workers = 1);

// Pools membrane visits from stationary-start paths until target_visits are
// recorded; compares (side, class) frequencies with pi and departure-type
// fractions with the pi-weighted exit law.
VerificationReport verify_visit_stationarity(const WalkModel& model,
                                             uint64_t target_visits, uint64_t seed,
                                             int workers = 1, double linf_tol = 0.005);

// One-sided membranes: permeability equals 2 p_bar - 1 and the slide
// vanishes. iid environments are redrawn per path.
VerificationReport verify_one_sided(const OneSidedEnvironment& env, uint64_t n,
                                    uint64_t paths, uint64_t seed, int workers = 1);

// Law of the tangential position at the n-th membrane visit, scaled by the
// visit count, against the heavy-tailed reference: the stated scale 1/sqrt(m)
// and the self-consistent scale 1 variant side by side, plus symmetry and
// interquartile range.
VerificationReport verify_stable_hitting(int m, uint64_t n_visits, uint64_t reps,
                                         uint64_t seed);

// Per-type martingale means and quadratic brackets at 3 sigma. bias_x injects
// a deliberate drift for the negative control.
VerificationReport verify_martingales(const WalkModel& model, uint64_t n, uint64_t paths,
                                      uint64_t seed, int workers = 1, double bias_x = 0.0);

// Critical one-sample KS statistic at the given level for n samples.
double ks_critical(size_t n, double level);

} // namespace mwalk
