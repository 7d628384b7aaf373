#pragma once

#include <array>
#include <string>
#include <vector>

#include "mwalk/hitting.hpp"
#include "mwalk/membrane.hpp"

namespace mwalk {

// Finite Markov chain of (arrival side, class) observed at successive
// membrane visits. States are ordered left block first:
// (L,0), ..., (L,U-1), (R,0), ..., (R,U-1).
struct EmbeddedChain {
    int m = 2;
    std::vector<int> periods;
    PeriodLattice lattice;
    size_t u = 0;                  // classes per side
    std::vector<std::string> states;
    std::vector<double> P;         // row-major 2u x 2u
    std::vector<double> pi;
    double gamma = 0.0;            // stationary right-minus-left visit mass
    std::vector<double> c;         // stationary mean slide per visit, length m-1
    std::vector<std::vector<double>> state_mean_slide; // per state, length m-1
    std::vector<double> exit_right; // per state, probability of exiting right

    size_t index(Side side, size_t j) const { return static_cast<size_t>(side) * u + j; }
    double at(size_t from, size_t to) const { return P[from * 2 * u + to]; }
};

std::vector<double> build_transition_matrix(const ValidatedMembrane& membrane,
                                            const HittingKernel& H);

// Stationary distribution by dense LU with one equation replaced by the
// normalization. Requires a unique closed communicating class; transient
// states are allowed and receive zero mass. Optional state names label the
// offending states when the chain is rejected.
std::vector<double> stationary(const std::vector<double>& P, size_t n,
                               const std::vector<std::string>* names = nullptr);

// Power-iteration cross-check on the half-lazy chain (I+P)/2, which kills
// periodicity without changing the stationary law.
std::vector<double> stationary_power(const std::vector<double>& P, size_t n,
                                     double tol = 1e-13, size_t max_iter = 2000000);

double effective_permeability(const EmbeddedChain& chain);
std::vector<double> effective_slide(const EmbeddedChain& chain);

// Full pipeline: hitting kernel, embedded transition matrix, stationary law,
// gamma and c.
EmbeddedChain analyze_membrane(const ValidatedMembrane& membrane);
EmbeddedChain analyze_membrane(const ValidatedMembrane& membrane, const HittingKernel& H);

// Closed-form values for the fig1a family as printed in the worked example:
// alpha = 2 - sqrt(2), the stationary law, gamma, and the published slide
// constant. The gamma line matches the pipeline; the published c line does
// not follow from the same stationary law (see README) and is reported for
// comparison only.
struct Fig1aClosedForm {
    double alpha;
    std::array<double, 4> pi;
    double gamma;
    double c;
};
Fig1aClosedForm fig1a_closed_form(double p);

} // namespace mwalk
