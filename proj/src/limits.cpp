#include "mwalk/limits.hpp"

#include <cmath>

#include "mwalk/errors.hpp"
#include "mwalk/stats.hpp"

namespace mwalk {

namespace {
void check_gamma_t(double gamma, double t) {
    if (gamma < -1.0 || gamma > 1.0) throw Error("skewness must lie in [-1, 1]");
    if (!(t > 0.0)) throw Error("time must be positive");
}
} // namespace

double skew_marginal_density(double gamma, double t, double x) {
    check_gamma_t(gamma, t);
    double phi = std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * M_PI * t);
    if (x > 0.0) return (1.0 + gamma) * phi;
    if (x < 0.0) return (1.0 - gamma) * phi;
    return phi;
}

double skew_marginal_cdf(double gamma, double t, double x) {
    check_gamma_t(gamma, t);
    double z = normal_cdf(x / std::sqrt(t));
    if (x <= 0.0) return (1.0 - gamma) * z;
    return (1.0 - gamma) / 2.0 + (1.0 + gamma) * (z - 0.5);
}

ReferencePath skew_path_sample(double gamma, uint64_t steps, Rng& rng) {
    if (gamma < -1.0 || gamma > 1.0) throw Error("skewness must lie in [-1, 1]");
    if (steps < 1) throw Error("need at least one step");
    double p_up = (1.0 + gamma) / 2.0;
    double root = std::sqrt(double(steps));
    ReferencePath path;
    path.t.reserve(steps + 1);
    path.x.reserve(steps + 1);
    path.local_time.reserve(steps + 1);
    int64_t s = 0;
    uint64_t visits = 0;
    for (uint64_t k = 0; k <= steps; ++k) {
        path.t.push_back(double(k) / double(steps));
        path.x.push_back(double(s) / root);
        path.local_time.push_back(double(visits) / root);
        if (k == steps) break;
        if (s == 0) {
            ++visits;
            s = rng.next_double() < p_up ? 1 : -1;
        } else {
            s += rng.next_bool() ? 1 : -1;
        }
    }
    return path;
}

std::vector<std::vector<double>> slide_path(const std::vector<double>& c,
                                            const ReferencePath& ref, Rng& rng,
                                            bool freeze_noise) {
    if (ref.local_time.size() != ref.t.size() || ref.t.empty())
        throw Error("reference path lacks a local-time component");
    std::vector<std::vector<double>> y(c.size(),
                                       std::vector<double>(ref.t.size(), 0.0));
    for (size_t l = 0; l < c.size(); ++l) {
        double w = 0.0;
        for (size_t k = 0; k < ref.t.size(); ++k) {
            if (k > 0 && !freeze_noise) {
                double dt = ref.t[k] - ref.t[k - 1];
                w += std::sqrt(dt) * rng.next_normal();
            }
            y[l][k] = c[l] * ref.local_time[k] + w;
        }
    }
    return y;
}

namespace {

// integrand tail and oscillation are both mild: integrate cos(ux) e^{-su}
// over [0, U] by Simpson panels sized to the finer of the two scales
double invert_char_fn(double s, double x, int max_panels) {
    double U = 40.0 / s;
    double scale = std::min(1.0 / s, M_PI / (4.0 * (std::fabs(x) + 1e-12)));
    double h = scale / 8.0;
    long panels = long(U / h) + 1;
    if (panels > max_panels)
        throw InversionNotConverged("quadrature budget too small for this argument");
    auto f = [&](double u) { return std::cos(u * x) * std::exp(-s * u); };
    double acc = 0.0;
    for (long i = 0; i < panels; ++i) {
        double a = U * double(i) / double(panels);
        double b = U * double(i + 1) / double(panels);
        acc += (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
    }
    return acc / M_PI;
}

} // namespace

double stable_hit_density(int m, double x, int max_panels) {
    if (m < 2) throw BadDimension("need at least one tangential coordinate");
    double s = 1.0 / std::sqrt(double(m));
    if (m == 2) return s / (M_PI * (s * s + x * x));
    return invert_char_fn(s, x, max_panels);
}

double stable_hit_cdf(int m, double x) {
    if (m < 2) throw BadDimension("need at least one tangential coordinate");
    double s = 1.0 / std::sqrt(double(m));
    return 0.5 + std::atan(x / s) / M_PI;
}

WalshDraw walsh_marginal_sample(const std::vector<double>& weights, double t, Rng& rng) {
    if (weights.empty()) throw BadWeights("no ray weights given");
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw BadWeights("ray weights must be positive");
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw BadWeights("ray weights must sum to 1");
    if (!(t > 0.0)) throw Error("time must be positive");
    double u = rng.next_double();
    size_t ray = weights.size() - 1;
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u <= acc) { ray = i; break; }
    }
    WalshDraw draw;
    draw.ray = ray;
    draw.radius = std::fabs(std::sqrt(t) * rng.next_normal());
    return draw;
}

} // namespace mwalk
