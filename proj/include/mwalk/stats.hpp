#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mwalk/rng.hpp"

namespace mwalk {

double normal_cdf(double x);

// Survival function of the Kolmogorov statistic, accurate in both tails.
double kolmogorov_sf(double lambda);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    size_t n = 0;
};

// One-sample Kolmogorov-Smirnov test against a continuous cdf. Uses the
// finite-sample effective statistic of Stephens, good to a few percent in the
// p-value down to n around 20. Throws TooFewSamples below 10 points.
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

// Two-sample variant; ties are handled by advancing both samples through the
// tied block before measuring the gap.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v); // unbiased
double stderr_of_mean(const std::vector<double>& v);

// Two-sided permutation test of independence using the rank correlation as
// the statistic. Returns the p-value (1 + hits) / (reps + 1).
double permutation_independence_pvalue(const std::vector<double>& x,
                                       const std::vector<double>& y, int reps,
                                       uint64_t seed);

std::vector<double> ranks(const std::vector<double>& v); // average ranks for ties

} // namespace mwalk
