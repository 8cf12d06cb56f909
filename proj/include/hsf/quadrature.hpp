#pragma once

// Gregory (end-corrected trapezoid) weights on uniform nodes.
//
// The left-end corrections a_0..a_{r-1} satisfy
//   sum_k a_k k^l = B_{l+1} / (l+1) for odd l, 0 for even l,  l = 0..r-1,
// which cancels the Euler-Maclaurin endpoint terms up to degree r-1. The right
// end is the mirror image.

#include <vector>

#include "hsf/extension.hpp"

namespace hsf {

/// Bernoulli number B_m (B_1 = -1/2 convention; only even m are used here).
inline rational bernoulli(int m) {
    std::vector<rational> B(std::size_t(m + 1));
    for (int k = 0; k <= m; ++k) {
        B[std::size_t(k)] = rational(1, k + 1);
        for (int j = k; j >= 1; --j) B[std::size_t(j - 1)] = j * (B[std::size_t(j - 1)] - B[std::size_t(j)]);
    }
    // Akiyama-Tanigawa yields B_1 = +1/2
    return m == 1 ? rational(-1, 2) : B[0];
}

inline std::vector<rational> gregory_corrections(int r) {
    const auto ur = static_cast<std::size_t>(r);
    std::vector<std::vector<rational>> A(ur, std::vector<rational>(ur));
    std::vector<rational> b(ur, rational(0));
    for (int l = 0; l < r; ++l) {
        for (int k = 0; k < r; ++k) {
            rational p = 1;
            for (int e = 0; e < l; ++e) p *= k;
            A[std::size_t(l)][std::size_t(k)] = p;
        }
        if (l % 2 == 1) b[std::size_t(l)] = bernoulli(l + 1) / (l + 1);
    }
    return solve_rational(A, b);
}

/// Weights of int_0^{n h} f on nodes 0..n; order r is lowered to fit short grids.
inline std::vector<double> gregory_weights(int n, double h, int r = 8) {
    if (n < 1) throw std::invalid_argument("gregory_weights: need at least two nodes");
    r = std::max(1, std::min(r, (n + 1) / 2));
    const auto a = gregory_corrections(r);
    std::vector<double> w(std::size_t(n + 1), h);
    w.front() = w.back() = 0.5 * h;
    for (int k = 0; k < r; ++k) {
        const double c = h * static_cast<double>(a[std::size_t(k)]);
        w[std::size_t(k)] += c;
        w[std::size_t(n - k)] += c;
    }
    return w;
}

}  // namespace hsf
