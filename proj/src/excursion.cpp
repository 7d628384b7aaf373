#include "mwalk/excursion.hpp"

#include <cmath>
#include <random>

#include "mwalk/errors.hpp"

namespace mwalk {

namespace {
constexpr double kExact = 1e12; // exact discrete sampling below, normal tail above
}

ExcursionSampler::ExcursionSampler(int m, uint64_t seed, uint64_t stream_index)
    : m_(m), tang_(m - 1), rng_(Rng::stream(seed, stream_index)) {
    if (m < 2) throw BadDimension("need at least one tangential coordinate");
}

double ExcursionSampler::survival(double k) {
    if (k <= 0.0) return 1.0;
    if (k <= 1e4) {
        // C(2k,k) 4^-k via log-gamma
        return std::exp(std::lgamma(2.0 * k + 1.0) - 2.0 * std::lgamma(k + 1.0) -
                        2.0 * k * std::log(2.0));
    }
    // asymptotic series; the log-gamma difference loses all precision up here
    double inv = 1.0 / k;
    double corr = 1.0 + inv * (-0.125 + inv * (1.0 / 128.0 + inv * (5.0 / 1024.0)));
    return corr / std::sqrt(M_PI * k);
}

double ExcursionSampler::sample_vertical_moves() {
    double u = rng_.next_double();
    if (u <= 0.0) u = 0x1p-53;
    // largest k with survival(k) >= u; survival decreases like 1/sqrt(pi k)
    if (u >= 1.0) return 1.0;
    double hi = 1.0;
    while (survival(hi) >= u) hi *= 2.0;
    double lo = hi / 2.0; // survival(lo) >= u > survival(hi)
    if (hi <= 1.0) return 1.0;
    while (hi - lo > 0.5) {
        double mid = std::floor(lo + (hi - lo) / 2.0);
        if (mid <= lo || mid >= hi) break; // adjacent doubles beyond 2^53
        if (survival(mid) >= u) lo = mid;
        else hi = mid;
    }
    return 2.0 * lo + 1.0;
}

ExcursionDraw ExcursionSampler::next() {
    double n_vert = sample_vertical_moves();

    // tangential move count: NegBin(n_vert, 1/m) as a gamma-Poisson mixture
    double mean_scale = double(m_ - 1);
    double m_tang;
    if (n_vert < kExact) {
        std::gamma_distribution<double> gamma(n_vert, mean_scale);
        double lambda = gamma(rng_);
        if (lambda < kExact) {
            std::poisson_distribution<long long> pois(lambda);
            m_tang = double(pois(rng_));
        } else {
            m_tang = std::floor(lambda + std::sqrt(lambda) * rng_.next_normal() + 0.5);
            if (m_tang < 0.0) m_tang = 0.0;
        }
    } else {
        // gamma itself is normal at this scale
        double lambda = n_vert * mean_scale +
                        std::sqrt(n_vert) * mean_scale * rng_.next_normal();
        m_tang = std::floor(lambda + std::sqrt(std::max(lambda, 0.0)) * rng_.next_normal() + 0.5);
        if (m_tang < 0.0) m_tang = 0.0;
    }

    ExcursionDraw draw;
    draw.duration = 1.0 + n_vert + m_tang;
    draw.dy.assign(size_t(tang_), 0);

    // split M moves over directions, then each is +-1 with equal probability
    double remaining = m_tang;
    for (int l = 0; l < tang_; ++l) {
        double share;
        if (l + 1 == tang_) {
            share = remaining;
        } else if (remaining < kExact) {
            std::binomial_distribution<long long> bin(
                (long long)remaining, 1.0 / double(tang_ - l));
            share = double(bin(rng_));
        } else {
            double p = 1.0 / double(tang_ - l);
            share = std::floor(remaining * p +
                               std::sqrt(remaining * p * (1.0 - p)) * rng_.next_normal() + 0.5);
            share = std::min(std::max(share, 0.0), remaining);
        }
        remaining -= share;

        if (share < kExact) {
            std::binomial_distribution<long long> bin((long long)share, 0.5);
            draw.dy[size_t(l)] = 2 * bin(rng_) - (long long)share;
        } else {
            // parity of the displacement must match the parity of the count
            double z = std::sqrt(share) * rng_.next_normal();
            long long rounded = (long long)std::llround(z / 2.0) * 2;
            long long parity = (long long)std::fmod(share, 2.0);
            draw.dy[size_t(l)] = rounded + parity;
        }
    }
    return draw;
}

} // namespace mwalk
