#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mwalk/lattice.hpp"
#include "mwalk/rng.hpp"

namespace mwalk {

// Arrival side of a membrane state. Left is the -0 state (arrival from
// x = -1), Right is the +0 state (arrival from x = +1).
enum class Side : int { Left = 0, Right = 1 };

inline const char* side_name(Side s) { return s == Side::Left ? "L" : "R"; }
inline int side_sign(Side s) { return s == Side::Left ? -1 : +1; }

struct Move {
    Side exit;       // side of the unit step off the membrane
    Coords slide;    // tangential displacement applied during the step
    double prob;
};

struct MembraneSpec {
    int m = 2;                 // lattice dimension, x plus (m-1) tangential coordinates
    std::vector<int> periods;  // (k_2, ..., k_m)
    // kernel[side][class linear index] -> list of moves
    std::array<std::vector<std::vector<Move>>, 2> kernel;
};

// Immutable validated membrane with precomputed per-entry tables used by the
// analysis pipeline and the simulator.
class ValidatedMembrane {
  public:
    explicit ValidatedMembrane(MembraneSpec spec);

    int m() const { return spec_.m; }
    const PeriodLattice& lattice() const { return lattice_; }
    size_t num_classes() const { return lattice_.size(); }
    const MembraneSpec& spec() const { return spec_; }

    const std::vector<Move>& entry(Side side, size_t j) const {
        return spec_.kernel[static_cast<int>(side)][j];
    }
    // probability-weighted mean slide of entry (side, j)
    const std::vector<double>& mean_slide(Side side, size_t j) const {
        return mean_slide_[static_cast<int>(side)][j];
    }
    // total probability of exiting to the right from (side, j)
    double exit_right_prob(Side side, size_t j) const {
        return exit_right_[static_cast<int>(side)][j];
    }
    // class after applying move k of entry (side, j), precomputed
    size_t exit_class(Side side, size_t j, size_t move_index) const {
        return exit_class_[static_cast<int>(side)][j][move_index];
    }
    // cumulative move probabilities for inverse-cdf sampling
    const std::vector<double>& cumulative(Side side, size_t j) const {
        return cumulative_[static_cast<int>(side)][j];
    }

    bool has_slides() const { return has_slides_; }

  private:
    MembraneSpec spec_;
    PeriodLattice lattice_;
    std::array<std::vector<std::vector<double>>, 2> mean_slide_;
    std::array<std::vector<double>, 2> exit_right_;
    std::array<std::vector<std::vector<size_t>>, 2> exit_class_;
    std::array<std::vector<std::vector<double>>, 2> cumulative_;
    bool has_slides_ = false;
};

ValidatedMembrane validate(const MembraneSpec& spec);

// mean slide vector of one kernel entry (probability-weighted)
std::vector<double> mean_slide(const MembraneSpec& spec, Side side, size_t class_index);

// Built-in membranes. fig1a(p) and fig1b(p) are the 2-periodic two-sided
// membranes of the worked example family (fig1b swaps p and 1-p);
// homogeneous(pL,pR) is the class-free side-dependent pass-through membrane;
// transparent always crosses with no slide.
MembraneSpec builtin_fig1a(double p);
MembraneSpec builtin_fig1b(double p);
MembraneSpec builtin_homogeneous(double p_left, double p_right);
MembraneSpec builtin_transparent(int m = 2);

// Parses "fig1a:0.5", "fig1b:0.25", "homogeneous:0.3,0.7", "transparent".
MembraneSpec builtin_membrane(const std::string& name);

// JSON (de)serialization of membrane specs; unknown keys are an error.
MembraneSpec membrane_from_json_text(const std::string& text);
MembraneSpec load_membrane_file(const std::string& path);
std::string membrane_to_json_text(const MembraneSpec& spec);

// One-sided membrane environment: pass-through probability p_y depending on
// the tangential position only, no sliding. Either a periodic table over the
// cell U or an iid field drawn deterministically from (seed, y).
class OneSidedEnvironment {
  public:
    static OneSidedEnvironment periodic(int m, std::vector<int> periods,
                                        std::vector<double> table);
    static OneSidedEnvironment iid(int m, std::vector<double> values,
                                   std::vector<double> weights, uint64_t seed);

    int m() const { return m_; }
    bool is_iid() const { return iid_; }

    double p(const Coords& y) const;
    double p_by_class(size_t j) const { return table_[j]; } // periodic only
    const PeriodLattice& lattice() const { return lattice_; }

    // exact mean for periodic tables, law mean for iid fields
    double p_bar() const;

    // same law, fresh independent field; used for path ensembles that
    // average over environments
    OneSidedEnvironment fork(uint64_t stream_index) const;

    uint64_t seed() const { return seed_; }

  private:
    OneSidedEnvironment() = default;

    int m_ = 2;
    bool iid_ = false;
    // periodic variant
    PeriodLattice lattice_;
    std::vector<double> table_;
    // iid variant
    std::vector<double> values_;
    std::vector<double> weights_;
    std::vector<double> weight_cum_;
    uint64_t seed_ = 0;
};

OneSidedEnvironment environment_from_json_text(const std::string& text);
OneSidedEnvironment load_environment_file(const std::string& path);

} // namespace mwalk
