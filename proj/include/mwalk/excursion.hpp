#pragma once

#include <cstdint>
#include <vector>

#include "mwalk/rng.hpp"

namespace mwalk {

// One membrane-to-membrane leg of the free walk: the departure step plus the
// excursion until the next return to the membrane. duration is kept as a
// double because first-passage times of the vertical walk have infinite mean
// and individual draws can exceed the 64-bit range.
struct ExcursionDraw {
    double duration;          // steps from one visit to the next
    std::vector<int64_t> dy;  // tangential displacement over the leg
};

// Samples (duration, dy) jointly and exactly in law without stepping through
// the excursion, by composing three exact stages:
//   1. the number N of vertical moves, via inverse-cdf sampling of the
//      first-passage law of the simple walk on Z,
//   2. the number M of tangential moves, a negative binomial with N trials
//      and success rate 1/m, drawn as a gamma-Poisson mixture,
//   3. the displacement, M independent unit steps split uniformly over the
//      tangential directions.
// Draws in the extreme tail (beyond about 1e12 moves) switch to a
// parity-preserving normal approximation whose total-variation error is
// negligible at that size. Cost is O(1) per draw at any scale.
class ExcursionSampler {
  public:
    ExcursionSampler(int m, uint64_t seed, uint64_t stream_index = 0);

    ExcursionDraw next();

    // number of vertical moves in one excursion (odd, first passage from 1)
    double sample_vertical_moves();

    // P(first passage from 1 takes more than 2k-1 vertical moves)
    static double survival(double k);

  private:
    int m_;
    int tang_;
    Rng rng_;
};

} // namespace mwalk
