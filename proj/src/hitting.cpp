#include "mwalk/hitting.hpp"

#include <cmath>
#include <numbers>

#include "mwalk/errors.hpp"
#include "mwalk/linalg.hpp"
#include "mwalk/rng.hpp"

namespace mwalk {

double decay_root(const std::vector<double>& theta, int m) {
    double s = static_cast<double>(m);
    for (double t : theta) s -= std::cos(t);
    if (s <= 1.0) return 1.0; // theta = 0 (up to rounding): the zero mode
    return s - std::sqrt(s * s - 1.0);
}

HittingKernel hitting_kernel(int m, const std::vector<int>& periods) {
    if (m < 2) throw BadDimension("hitting kernel needs dimension >= 2");
    HittingKernel K;
    K.periods = periods;
    K.lattice = PeriodLattice(periods);
    K.u = K.lattice.size();
    const size_t u = K.u;
    if (K.lattice.dims() != static_cast<size_t>(m - 1))
        throw BadDimension("hitting kernel: periods do not match dimension");

    // first row by inverse character sum, remaining rows by circulant shift
    std::vector<double> lambda(u);
    std::vector<std::vector<double>> theta(u);
    for (size_t f = 0; f < u; ++f) {
        std::vector<int> idx = K.lattice.tuple(f);
        std::vector<double> th(idx.size());
        for (size_t l = 0; l < idx.size(); ++l)
            th[l] = 2.0 * std::numbers::pi * static_cast<double>(idx[l]) /
                    static_cast<double>(periods[l]);
        lambda[f] = decay_root(th, m);
        theta[f] = std::move(th);
    }
    std::vector<double> row(u, 0.0);
    for (size_t d = 0; d < u; ++d) {
        std::vector<int> dt = K.lattice.tuple(d);
        double sum = 0.0;
        for (size_t f = 0; f < u; ++f) {
            double phase = 0.0;
            for (size_t l = 0; l < dt.size(); ++l)
                phase += theta[f][l] * static_cast<double>(dt[l]);
            sum += lambda[f] * std::cos(phase);
        }
        row[d] = sum / static_cast<double>(u);
    }
    K.h.resize(u * u);
    for (size_t j = 0; j < u; ++j)
        for (size_t jp = 0; jp < u; ++jp) K.h[j * u + jp] = row[K.lattice.diff(jp, j)];
    return K;
}

namespace {

// nearest-neighbor class adjacency applied to a vector over U:
// (A v)[d] = sum_l (v[d - e_l] + v[d + e_l])
std::vector<double> class_adjacency(const PeriodLattice& lattice) {
    const size_t u = lattice.size();
    std::vector<double> A(u * u, 0.0);
    Coords e(lattice.dims(), 0);
    for (size_t d = 0; d < u; ++d) {
        for (size_t l = 0; l < lattice.dims(); ++l) {
            e.assign(lattice.dims(), 0);
            e[l] = 1;
            A[d * u + lattice.shift(d, e)] += 1.0;
            e[l] = -1;
            A[d * u + lattice.shift(d, e)] += 1.0;
        }
    }
    return A;
}

HittingKernel oracle_truncated_solve(int m, const std::vector<int>& periods, uint64_t x_max) {
    HittingKernel K;
    K.periods = periods;
    K.lattice = PeriodLattice(periods);
    K.u = K.lattice.size();
    const size_t u = K.u;
    if (x_max < 2) throw BudgetTooSmall("truncated solve needs X_max >= 2");
    const size_t X = static_cast<size_t>(x_max);

    // block-tridiagonal Thomas sweep for -u_{x-1} + D u_x - u_{x+1} = b_x
    // with D = 2m I - A on interior rows x = 1 .. X-1 and b_1 = e_0
    std::vector<double> D(u * u, 0.0);
    {
        std::vector<double> A = class_adjacency(K.lattice);
        for (size_t i = 0; i < u * u; ++i) D[i] = -A[i];
        for (size_t d = 0; d < u; ++d) D[d * u + d] += 2.0 * static_cast<double>(m);
    }
    const size_t rows = X - 1;
    std::vector<std::vector<double>> s_inv(rows + 1); // 1-based
    std::vector<std::vector<double>> y(rows + 1);
    {
        std::vector<double> S = D;
        s_inv[1] = invert(S, u);
        y[1].assign(u, 0.0);
        y[1][0] = 1.0;
        for (size_t x = 2; x <= rows; ++x) {
            std::vector<double> S2 = D;
            for (size_t i = 0; i < u * u; ++i) S2[i] -= s_inv[x - 1][i];
            s_inv[x] = invert(S2, u);
            y[x] = mat_vec(s_inv[x - 1], y[x - 1], u);
        }
    }
    std::vector<std::vector<double>> sol(rows + 2);
    sol[rows + 1].assign(u, 0.0);
    for (size_t x = rows; x >= 1; --x) {
        std::vector<double> rhs = y[x];
        for (size_t d = 0; d < u; ++d) rhs[d] += sol[x + 1][d];
        sol[x] = mat_vec(s_inv[x], rhs, u);
        if (x == 1) break;
    }

    // row 0 of H from the height-1 solution, far-wall mass spread uniformly
    std::vector<double> row = sol[1];
    double reached = 0.0;
    for (double v : row) reached += v;
    const double absorbed = 1.0 - reached;
    for (double& v : row) v += absorbed / static_cast<double>(u);

    // non-uniformity of the hitting law launched from the top interior row;
    // proxies how far from uniform the redistributed far-wall mass can be
    double spread = 0.0;
    {
        const std::vector<double>& top = sol[rows];
        double mass = 0.0;
        for (double v : top) mass += v;
        if (mass > 0.0 && u > 1) {
            for (double v : top)
                spread = std::max(spread, std::fabs(v / mass - 1.0 / static_cast<double>(u)));
        }
    }
    K.absorbed_mass = absorbed;
    K.truncation_error_bound = absorbed * spread;
    if (K.truncation_error_bound > 1e-3)
        throw BudgetTooSmall("truncation error bound " +
                             std::to_string(K.truncation_error_bound) +
                             " exceeds 1e-3 at X_max = " + std::to_string(x_max));

    K.h.resize(u * u);
    for (size_t j = 0; j < u; ++j)
        for (size_t jp = 0; jp < u; ++jp) K.h[j * u + jp] = row[K.lattice.diff(jp, j)];
    return K;
}

HittingKernel oracle_monte_carlo(int m, const std::vector<int>& periods, uint64_t excursions,
                                 uint64_t seed, uint64_t step_cap) {
    HittingKernel K;
    K.periods = periods;
    K.lattice = PeriodLattice(periods);
    K.u = K.lattice.size();
    const size_t u = K.u;
    if (excursions == 0) throw BudgetTooSmall("monte-carlo oracle needs at least one excursion");

    const size_t dims = K.lattice.dims();
    const uint64_t n_moves = 2ULL * static_cast<uint64_t>(m);
    std::vector<int64_t> counts(u, 0);
    uint64_t capped = 0;
    Rng rng = Rng::stream(seed, 0xabcdULL);

    std::vector<int> cls(dims);
    for (uint64_t e = 0; e < excursions; ++e) {
        int64_t x = 1;
        for (size_t l = 0; l < dims; ++l) cls[l] = 0;
        uint64_t steps = 0;
        while (true) {
            if (steps++ >= step_cap) { ++capped; break; }
            uint64_t mv = rng.next_below(n_moves);
            if (mv == 0) {
                ++x;
            } else if (mv == 1) {
                if (--x == 0) {
                    size_t idx = 0;
                    for (size_t l = 0; l < dims; ++l)
                        idx = idx * static_cast<size_t>(periods[l]) +
                              static_cast<size_t>(cls[l]);
                    ++counts[idx];
                    break;
                }
            } else {
                size_t l = static_cast<size_t>((mv - 2) >> 1);
                int k = periods[l];
                if (mv & 1) {
                    if (++cls[l] == k) cls[l] = 0;
                } else {
                    if (cls[l]-- == 0) cls[l] = k - 1;
                }
            }
        }
    }

    std::vector<double> row(u);
    const double n = static_cast<double>(excursions);
    const double spread_cap = static_cast<double>(capped) / n / static_cast<double>(u);
    for (size_t d = 0; d < u; ++d) row[d] = static_cast<double>(counts[d]) / n + spread_cap;
    K.absorbed_mass = static_cast<double>(capped) / n;
    K.h.resize(u * u);
    for (size_t j = 0; j < u; ++j)
        for (size_t jp = 0; jp < u; ++jp) K.h[j * u + jp] = row[K.lattice.diff(jp, j)];
    return K;
}

} // namespace

HittingKernel hitting_kernel_oracle(int m, const std::vector<int>& periods, OracleMethod method,
                                    uint64_t budget, uint64_t seed, uint64_t step_cap) {
    if (m < 2) throw BadDimension("hitting kernel needs dimension >= 2");
    if (PeriodLattice(periods).dims() != static_cast<size_t>(m - 1))
        throw BadDimension("hitting kernel: periods do not match dimension");
    if (method == OracleMethod::TruncatedSolve) return oracle_truncated_solve(m, periods, budget);
    return oracle_monte_carlo(m, periods, budget, seed, step_cap);
}

} // namespace mwalk
