#include "mwalk/chain.hpp"

#include <algorithm>
#include <cmath>

#include "mwalk/errors.hpp"
#include "mwalk/linalg.hpp"

namespace mwalk {

std::vector<double> build_transition_matrix(const ValidatedMembrane& membrane,
                                            const HittingKernel& H) {
    if (membrane.spec().periods != H.periods)
        throw KernelMismatch("hitting kernel periods do not match the membrane");
    const size_t u = membrane.num_classes();
    const size_t n = 2 * u;
    std::vector<double> P(n * n, 0.0);
    for (int s = 0; s < 2; ++s) {
        for (size_t j = 0; j < u; ++j) {
            const size_t from = static_cast<size_t>(s) * u + j;
            const auto& moves = membrane.entry(static_cast<Side>(s), j);
            for (size_t k = 0; k < moves.size(); ++k) {
                const size_t launch = membrane.exit_class(static_cast<Side>(s), j, k);
                const size_t to_side = moves[k].exit == Side::Right ? 1 : 0;
                const double q = moves[k].prob;
                for (size_t jp = 0; jp < u; ++jp)
                    P[from * n + to_side * u + jp] += q * H.at(launch, jp);
            }
        }
    }
    return P;
}

namespace {

// strongly connected components of the support digraph (iterative Tarjan)
std::vector<int> scc_of(const std::vector<double>& P, size_t n) {
    std::vector<int> comp(n, -1), low(n), num(n, -1), stack_flag(n, 0);
    std::vector<size_t> stack, call, edge;
    int counter = 0, ncomp = 0;
    for (size_t root = 0; root < n; ++root) {
        if (num[root] >= 0) continue;
        call.push_back(root);
        edge.push_back(0);
        while (!call.empty()) {
            size_t v = call.back();
            if (edge.back() == 0) {
                num[v] = low[v] = counter++;
                stack.push_back(v);
                stack_flag[v] = 1;
            }
            bool descended = false;
            for (size_t w = edge.back(); w < n; ++w) {
                if (P[v * n + w] <= 0.0) continue;
                if (num[w] < 0) {
                    edge.back() = w + 1;
                    call.push_back(w);
                    edge.push_back(0);
                    descended = true;
                    break;
                }
                if (stack_flag[w]) low[v] = std::min(low[v], num[w]);
            }
            if (descended) continue;
            if (low[v] == num[v]) {
                while (true) {
                    size_t w = stack.back();
                    stack.pop_back();
                    stack_flag[w] = 0;
                    comp[w] = ncomp;
                    if (w == v) break;
                }
                ++ncomp;
            }
            call.pop_back();
            edge.pop_back();
            if (!call.empty()) {
                size_t parent = call.back();
                low[parent] = std::min(low[parent], low[v]);
            }
        }
    }
    return comp;
}

} // namespace

std::vector<double> stationary(const std::vector<double>& P, size_t n,
                               const std::vector<std::string>* names) {
    for (size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (size_t j = 0; j < n; ++j) s += P[i * n + j];
        if (std::fabs(s - 1.0) > 1e-12)
            throw Error("transition matrix row " + std::to_string(i) + " sums to " +
                        std::to_string(s));
    }

    // a unique stationary law requires exactly one closed communicating class
    std::vector<int> comp = scc_of(P, n);
    int ncomp = 0;
    for (int c : comp) ncomp = std::max(ncomp, c + 1);
    std::vector<char> closed(static_cast<size_t>(ncomp), 1);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if (P[i * n + j] > 0.0 && comp[i] != comp[j]) closed[comp[i]] = 0;
    int nclosed = 0;
    for (char c : closed) nclosed += c;
    if (nclosed != 1) {
        std::string detail = "support graph has " + std::to_string(nclosed) +
                             " closed communicating classes; offending states:";
        int listed = 0;
        for (size_t i = 0; i < n && listed < 8; ++i)
            if (closed[comp[i]]) {
                detail += " ";
                detail += names && i < names->size() ? (*names)[i] : std::to_string(i);
                ++listed;
            }
        throw NotIrreducible(detail);
    }

    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1
    std::vector<double> A(n * n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) A[i * n + j] = P[j * n + i] - (i == j ? 1.0 : 0.0);
    for (size_t j = 0; j < n; ++j) A[(n - 1) * n + j] = 1.0;
    std::vector<double> b(n, 0.0);
    b[n - 1] = 1.0;
    std::vector<double> pi = lu_solve(lu_factor(std::move(A), n), b);
    double total = 0.0;
    for (double& v : pi) {
        if (v < 0.0) {
            if (v < -1e-9) throw Error("stationary solve produced a negative mass");
            v = 0.0;
        }
        total += v;
    }
    for (double& v : pi) v /= total;
    return pi;
}

std::vector<double> stationary_power(const std::vector<double>& P, size_t n, double tol,
                                     size_t max_iter) {
    std::vector<double> v(n, 1.0 / static_cast<double>(n)), w(n);
    for (size_t it = 0; it < max_iter; ++it) {
        // one step of the half-lazy chain: w = (v + vP) / 2
        for (size_t j = 0; j < n; ++j) w[j] = v[j];
        for (size_t i = 0; i < n; ++i) {
            const double vi = v[i];
            if (vi == 0.0) continue;
            for (size_t j = 0; j < n; ++j) w[j] += vi * P[i * n + j];
        }
        double diff = 0.0, total = 0.0;
        for (size_t j = 0; j < n; ++j) {
            w[j] *= 0.5;
            total += w[j];
        }
        for (size_t j = 0; j < n; ++j) {
            w[j] /= total;
            diff += std::fabs(w[j] - v[j]);
        }
        v.swap(w);
        if (diff < tol) return v;
    }
    throw Error("power iteration did not converge to tolerance");
}

double effective_permeability(const EmbeddedChain& chain) {
    double g = 0.0;
    for (size_t j = 0; j < chain.u; ++j) g += chain.pi[chain.u + j] - chain.pi[j];
    return g;
}

std::vector<double> effective_slide(const EmbeddedChain& chain) {
    std::vector<double> c(static_cast<size_t>(chain.m - 1), 0.0);
    for (size_t s = 0; s < 2 * chain.u; ++s)
        for (size_t l = 0; l < c.size(); ++l)
            c[l] += chain.pi[s] * chain.state_mean_slide[s][l];
    return c;
}

EmbeddedChain analyze_membrane(const ValidatedMembrane& membrane) {
    return analyze_membrane(membrane, hitting_kernel(membrane.m(), membrane.spec().periods));
}

EmbeddedChain analyze_membrane(const ValidatedMembrane& membrane, const HittingKernel& H) {
    EmbeddedChain chain;
    chain.m = membrane.m();
    chain.periods = membrane.spec().periods;
    chain.lattice = membrane.lattice();
    chain.u = membrane.num_classes();
    chain.P = build_transition_matrix(membrane, H);
    const size_t n = 2 * chain.u;
    chain.states.reserve(n);
    chain.state_mean_slide.reserve(n);
    chain.exit_right.reserve(n);
    for (int s = 0; s < 2; ++s)
        for (size_t j = 0; j < chain.u; ++j) {
            chain.states.push_back(std::string(s ? "+0" : "-0") + "|" +
                                   chain.lattice.class_name(j));
            chain.state_mean_slide.push_back(membrane.mean_slide(static_cast<Side>(s), j));
            chain.exit_right.push_back(membrane.exit_right_prob(static_cast<Side>(s), j));
        }
    chain.pi = stationary(chain.P, n, &chain.states);
    chain.gamma = effective_permeability(chain);
    chain.c = effective_slide(chain);
    return chain;
}

Fig1aClosedForm fig1a_closed_form(double p) {
    Fig1aClosedForm f;
    const double a = 2.0 - std::sqrt(2.0);
    f.alpha = a;
    const double d = (1.0 - a) * (2.0 * a + 1.0) + (2.0 * a - 1.0) * p * p;
    f.pi = {(1.0 - a) * (1.0 - a + (2.0 * a - 1.0) * p) / d,
            (1.0 - a) * a / d,
            a * (1.0 - a + (2.0 * a - 1.0) * p * p) / d,
            (1.0 - a) * (a - (2.0 * a - 1.0) * (1.0 - p) * p) / d};
    f.gamma = (2.0 * a - 1.0) * (a * (2.0 * p - 1.0) + (p - 1.0) * (p - 1.0)) / d;
    f.c = -(1.0 - a) * ((2.0 * a - 1.0) * p + 1.0) / d;
    return f;
}

} // namespace mwalk
