#include "mwalk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mwalk/errors.hpp"

namespace mwalk {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // theta-function form, fast convergence for small lambda
        double f = std::exp(-M_PI * M_PI / (8.0 * lambda * lambda));
        double cdf = std::sqrt(2.0 * M_PI) / lambda *
                     (f + std::pow(f, 9.0) + std::pow(f, 25.0) + std::pow(f, 49.0));
        return 1.0 - cdf;
    }
    double f = std::exp(-2.0 * lambda * lambda);
    return 2.0 * (f - std::pow(f, 4.0) + std::pow(f, 9.0) - std::pow(f, 16.0));
}

namespace {
double stephens_pvalue(double d, double n_eff) {
    double root = std::sqrt(n_eff);
    double lambda = d * (root + 0.12 + 0.11 / root);
    return kolmogorov_sf(lambda);
}
} // namespace

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.size() < 10)
        throw TooFewSamples("Kolmogorov-Smirnov test needs at least 10 points");
    std::sort(sample.begin(), sample.end());
    size_t n = sample.size();
    double d = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double f = cdf(sample[i]);
        d = std::max(d, double(i + 1) / double(n) - f);
        d = std::max(d, f - double(i) / double(n));
    }
    KsResult res;
    res.statistic = d;
    res.n = n;
    res.p_value = stephens_pvalue(d, double(n));
    return res;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.size() < 10 || b.size() < 10)
        throw TooFewSamples("two-sample test needs at least 10 points per sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    size_t i = 0, j = 0;
    double d = 0.0;
    double na = double(a.size()), nb = double(b.size());
    while (i < a.size() && j < b.size()) {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::fabs(double(i) / na - double(j) / nb));
    }
    KsResult res;
    res.statistic = d;
    res.n = a.size() + b.size();
    double n_eff = na * nb / (na + nb);
    res.p_value = stephens_pvalue(d, n_eff);
    return res;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) throw TooFewSamples("mean of an empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double variance(const std::vector<double>& v) {
    if (v.size() < 2) throw TooFewSamples("variance needs at least two points");
    double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / double(v.size() - 1);
}

double stderr_of_mean(const std::vector<double>& v) {
    return std::sqrt(variance(v) / double(v.size()));
}

std::vector<double> ranks(const std::vector<double>& v) {
    size_t n = v.size();
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t(0));
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        double avg = 0.5 * double(i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

namespace {
double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    size_t n = x.size();
    double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}
} // namespace

double permutation_independence_pvalue(const std::vector<double>& x,
                                       const std::vector<double>& y, int reps,
                                       uint64_t seed) {
    if (x.size() != y.size()) throw DimensionMismatch("paired samples differ in length");
    if (x.size() < 10) throw TooFewSamples("permutation test needs at least 10 pairs");
    std::vector<double> rx = ranks(x), ry = ranks(y);
    double observed = std::fabs(pearson(rx, ry));
    Rng rng = Rng::stream(seed, 0);
    int hits = 0;
    std::vector<double> perm(ry);
    for (int r = 0; r < reps; ++r) {
        for (size_t i = perm.size(); i > 1; --i)
            std::swap(perm[i - 1], perm[rng.next_below(i)]);
        if (std::fabs(pearson(rx, perm)) >= observed) ++hits;
    }
    return double(1 + hits) / double(reps + 1);
}

} // namespace mwalk
