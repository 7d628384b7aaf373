#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mwalk/errors.hpp"

namespace mwalk {

// Dense row-major matrix helpers sized for this project's needs (a few
// hundred unknowns at most): LU factorization with partial pivoting.

struct LuFactors {
    size_t n = 0;
    std::vector<double> lu;   // packed L\U, row-major
    std::vector<size_t> perm; // row permutation
};

inline LuFactors lu_factor(std::vector<double> a, size_t n) {
    LuFactors f;
    f.n = n;
    f.perm.resize(n);
    for (size_t i = 0; i < n; ++i) f.perm[i] = i;
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        double best = std::fabs(a[col * n + col]);
        for (size_t r = col + 1; r < n; ++r) {
            double v = std::fabs(a[r * n + col]);
            if (v > best) { best = v; piv = r; }
        }
        if (best == 0.0) throw Error("singular matrix in LU factorization");
        if (piv != col) {
            for (size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(f.perm[col], f.perm[piv]);
        }
        const double d = a[col * n + col];
        for (size_t r = col + 1; r < n; ++r) {
            double factor = a[r * n + col] / d;
            a[r * n + col] = factor;
            for (size_t c = col + 1; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
        }
    }
    f.lu = std::move(a);
    return f;
}

inline std::vector<double> lu_solve(const LuFactors& f, const std::vector<double>& b) {
    const size_t n = f.n;
    std::vector<double> x(n);
    for (size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
    for (size_t i = 1; i < n; ++i) {
        double s = x[i];
        for (size_t j = 0; j < i; ++j) s -= f.lu[i * n + j] * x[j];
        x[i] = s;
    }
    for (size_t i = n; i-- > 0;) {
        double s = x[i];
        for (size_t j = i + 1; j < n; ++j) s -= f.lu[i * n + j] * x[j];
        x[i] = s / f.lu[i * n + i];
    }
    return x;
}

inline std::vector<double> invert(const std::vector<double>& a, size_t n) {
    LuFactors f = lu_factor(a, n);
    std::vector<double> inv(n * n);
    std::vector<double> e(n, 0.0);
    for (size_t c = 0; c < n; ++c) {
        e.assign(n, 0.0);
        e[c] = 1.0;
        std::vector<double> col = lu_solve(f, e);
        for (size_t r = 0; r < n; ++r) inv[r * n + c] = col[r];
    }
    return inv;
}

// c = a * b, all n x n row-major
inline std::vector<double> mat_mul(const std::vector<double>& a, const std::vector<double>& b,
                                   size_t n) {
    std::vector<double> c(n * n, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < n; ++k) {
            double v = a[i * n + k];
            if (v == 0.0) continue;
            for (size_t j = 0; j < n; ++j) c[i * n + j] += v * b[k * n + j];
        }
    return c;
}

inline std::vector<double> mat_vec(const std::vector<double>& a, const std::vector<double>& x,
                                   size_t n) {
    std::vector<double> y(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (size_t j = 0; j < n; ++j) s += a[i * n + j] * x[j];
        y[i] = s;
    }
    return y;
}

} // namespace mwalk
