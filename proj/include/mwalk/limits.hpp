#pragma once

#include <cstdint>
#include <vector>

#include "mwalk/rng.hpp"

namespace mwalk {

// Limit-law reference objects: marginal densities, reference path samplers,
// and the heavy-tailed law of tangential displacements at membrane hits.

// Density and cdf at time t of the skew diffusion started at 0: a centered
// normal reweighted by (1 +- gamma) on the two half-lines.
double skew_marginal_density(double gamma, double t, double x);
double skew_marginal_cdf(double gamma, double t, double x);

struct ReferencePath {
    std::vector<double> t;          // grid on [0,1]
    std::vector<double> x;          // scaled walk values
    std::vector<double> local_time; // scaled visit counts, nondecreasing
};

// Skew-walk path: at 0 step right with probability (1+gamma)/2, fair
// elsewhere; scaled by 1/sqrt(N). The discrete local time counts visits to 0
// before each grid time.
ReferencePath skew_path_sample(double gamma, uint64_t steps, Rng& rng);

// y(t) = c_l L(t) + independent Brownian coordinates on the reference grid.
// freeze_noise drops the Brownian part (exact local-time ramp, for tests).
std::vector<std::vector<double>> slide_path(const std::vector<double>& c,
                                            const ReferencePath& ref, Rng& rng,
                                            bool freeze_noise = false);

// Density of one tangential coordinate at the hitting time, from the
// characteristic function exp(-|u|/sqrt(m)): closed form for m = 2, numerical
// inversion above. max_panels bounds the quadrature refinement.
double stable_hit_density(int m, double x, int max_panels = 1 << 16);
double stable_hit_cdf(int m, double x);

// One-dimensional law of the d-ray Brownian motion from the origin: ray index
// by weight, radius a reflected normal, independent.
struct WalshDraw {
    size_t ray;
    double radius;
};
WalshDraw walsh_marginal_sample(const std::vector<double>& weights, double t, Rng& rng);

} // namespace mwalk
