#pragma once

#include <cstdint>
#include <vector>

#include "mwalk/lattice.hpp"

namespace mwalk {

// Class-to-class first-hitting distribution of the free symmetric walk
// launched one unit step off the membrane: H[j,j'] is the probability that
// the walk started at height 1 (equivalently -1) with tangential class j
// first returns to height 0 with tangential class j'. Circulant in the class
// difference and symmetric under difference negation.
struct HittingKernel {
    std::vector<int> periods;
    PeriodLattice lattice;
    size_t u = 0;
    std::vector<double> h; // row-major u x u

    // set by the truncated-solve oracle
    double absorbed_mass = 0.0;        // probability mass absorbed at the far wall
    double truncation_error_bound = 0.0;

    double at(size_t j, size_t jprime) const { return h[j * u + jprime]; }
};

// Decay root of the one-dimensional harmonic recursion in the Fourier
// variable: the root in (0,1] of lambda + 1/lambda = 2s with
// s = m - sum_l cos(theta_l). Equals 1 exactly at theta = 0.
double decay_root(const std::vector<double>& theta, int m);

// Exact kernel via characters of the periodic cell (plain double-loop DFT).
HittingKernel hitting_kernel(int m, const std::vector<int>& periods);

enum class OracleMethod { TruncatedSolve, MonteCarlo };

// Independent brute-force routes to H used for cross-checking.
//
// TruncatedSolve: real-space linear solve on the strip 1 <= x < X_max with
// absorbing walls at x = 0 and x = X_max (budget = X_max). Mass absorbed at
// the far wall is redistributed uniformly over classes; the reported error
// bound is that mass times the observed non-uniformity of the hitting
// distribution launched from the top interior row, and BudgetTooSmall is
// raised if the bound exceeds 1e-3.
//
// MonteCarlo: simulates free-walk excursions (budget = excursion count) and
// tallies return classes; excursions longer than step_cap are tallied
// uniformly (their conditional class law is uniform to within the same
// spread estimate).
HittingKernel hitting_kernel_oracle(int m, const std::vector<int>& periods, OracleMethod method,
                                    uint64_t budget, uint64_t seed = 1,
                                    uint64_t step_cap = 250000);

} // namespace mwalk
