#pragma once

// Pointwise differential and tensor algebra on sampled fields.
// Tangential derivatives are spectral; the normal and time directions use
// fourth-order finite differences on half extents (one-sided near the ends)
// and spectral differentiation on periodic (full) extents.

#include <algorithm>
#include <cmath>
#include <vector>

#include "hsf/field.hpp"
#include "hsf/lattice.hpp"

namespace hsf {

/// Finite-difference weights (Fornberg's recursion) for derivatives 0..m at x0
/// using nodes x. Returns w[d][j].
inline std::vector<std::vector<double>> fornberg_weights(double x0, const std::vector<double>& x, int m) {
    const int n = int(x.size());
    std::vector<std::vector<double>> c(std::size_t(m) + 1, std::vector<double>(std::size_t(n), 0.0));
    double c1 = 1.0, c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

/// Stencil for derivative `order` at every node of a 1-D coordinate array.
struct NodeStencil {
    std::vector<int> start;
    std::vector<std::vector<double>> w;
};

inline NodeStencil build_stencil(const std::vector<double>& x, int order) {
    const int n = int(x.size());
    NodeStencil s;
    s.start.resize(std::size_t(n));
    s.w.resize(std::size_t(n));
    for (int k = 0; k < n; ++k) {
        int width = 5;
        int st = k - 2;
        if (order == 2 && (st < 0 || st + width > n)) width = 6;
        st = std::clamp(st, 0, n - width);
        if (st + width > n) throw ShapeError("stencil: too few nodes");
        std::vector<double> nodes(x.begin() + st, x.begin() + st + width);
        auto all = fornberg_weights(x[std::size_t(k)], nodes, order);
        s.start[std::size_t(k)] = st;
        s.w[std::size_t(k)] = all[std::size_t(order)];
    }
    return s;
}

namespace detail {

inline std::vector<double> normal_coords(const Field& f) {
    std::vector<double> z(f.nz_nodes());
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = f.z(k);
    return z;
}
inline std::vector<double> time_coords(const Field& f) {
    std::vector<double> t(f.nt_nodes());
    for (std::size_t m = 0; m < t.size(); ++m) t[m] = f.t(m);
    return t;
}

inline Field fd_normal(const Field& f, int order) {
    auto st = build_stencil(normal_coords(f), order);
    Field out(f.grid(), f.rank(), f.normal_extent(), f.time_extent());
    const std::size_t C = std::size_t(f.components());
    for (std::size_t m = 0; m < f.nt_nodes(); ++m)
        for (std::size_t k = 0; k < f.nz_nodes(); ++k) {
            const auto& w = st.w[k];
            const std::size_t s0 = std::size_t(st.start[k]);
            for (std::size_t p = 0; p < f.np(); ++p)
                for (std::size_t c = 0; c < C; ++c) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * f(m, s0 + j, p, int(c));
                    out(m, k, p, int(c)) = acc;
                }
        }
    return out;
}

inline Field fd_time(const Field& f, int order) {
    auto st = build_stencil(time_coords(f), order);
    Field out(f.grid(), f.rank(), f.normal_extent(), f.time_extent());
    const std::size_t slab = f.nz_nodes() * f.np() * std::size_t(f.components());
    auto in = f.values();
    auto o = out.values();
    for (std::size_t m = 0; m < f.nt_nodes(); ++m) {
        const auto& w = st.w[m];
        const std::size_t s0 = std::size_t(st.start[m]);
        for (std::size_t i = 0; i < slab; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * in[(s0 + j) * slab + i];
            o[m * slab + i] = acc;
        }
    }
    return out;
}

inline Field spectral_partial(const Field& f, int slot, bool time, int order) {
    Lattice lat(f);
    Field out(f.grid(), f.rank(), f.normal_extent(), f.time_extent());
    const bool odd = order % 2 == 1;
    auto sym = [&](const Freq& fr) -> cplx {
        const double k = time ? fr.tau : fr.xi[std::size_t(slot)];
        cplx m(0.0, kTwoPi * k);
        return order == 1 ? m : m * m;
    };
    for (int c = 0; c < f.components(); ++c) lat.apply(f, c, out, c, sym, odd);
    return out;
}

}  // namespace detail

/// d^order f / dx_axis^order (order 1 or 2); axis n-1 is the normal direction.
inline Field partial(const Field& f, int axis, int order = 1) {
    const int n = f.dim();
    if (axis < 0 || axis >= n) throw ShapeError("partial: axis out of range");
    if (order != 1 && order != 2) throw ShapeError("partial: order must be 1 or 2");
    if (axis < n - 1) return detail::spectral_partial(f, axis, false, order);
    switch (f.normal_extent()) {
        case NormalExtent::full: return detail::spectral_partial(f, n - 1, false, order);
        case NormalExtent::half: return detail::fd_normal(f, order);
        case NormalExtent::trace: break;
    }
    throw ShapeError("partial: no normal derivative on a boundary field");
}

/// Time derivative; spectral on full time extents, fourth-order differences otherwise.
inline Field partial_t(const Field& f, int order = 1) {
    switch (f.time_extent()) {
        case TimeExtent::full: return detail::spectral_partial(f, 0, true, order);
        case TimeExtent::half: return detail::fd_time(f, order);
        case TimeExtent::single: break;
    }
    throw ShapeError("partial_t: field has a single time slice");
}

inline void require_rank(const Field& f, Rank r, const char* what) {
    if (f.rank() != r) throw ShapeError(std::string(what) + ": rank mismatch");
}

/// Full gradient (grad u)_ij = du_i/dx_j of a vector field.
inline Field gradient(const Field& u) {
    require_rank(u, Rank::vector, "gradient");
    const int n = u.dim();
    Field G(u.grid(), Rank::tensor, u.normal_extent(), u.time_extent());
    for (int j = 0; j < n; ++j) {
        Field d = partial(u, j);
        for (int i = 0; i < n; ++i) G.set_component(i * n + j, d.component(i));
    }
    return G;
}

/// Gradient of a scalar field as a vector field.
inline Field scalar_gradient(const Field& f) {
    require_rank(f, Rank::scalar, "scalar_gradient");
    Field g(f.grid(), Rank::vector, f.normal_extent(), f.time_extent());
    for (int j = 0; j < f.dim(); ++j) g.set_component(j, partial(f, j));
    return g;
}

/// Du = (grad u + grad u^T)/2; the two off-diagonal entries are assigned from one value.
inline Field symmetric_gradient(const Field& u) {
    Field G = gradient(u);
    const int n = u.dim();
    auto v = G.values();
    const std::size_t C = std::size_t(n * n);
    for (std::size_t b = 0; b < v.size(); b += C)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double s = 0.5 * (v[b + std::size_t(i * n + j)] + v[b + std::size_t(j * n + i)]);
                v[b + std::size_t(i * n + j)] = s;
                v[b + std::size_t(j * n + i)] = s;
            }
    return G;
}

inline Field divergence(const Field& u) {
    require_rank(u, Rank::vector, "divergence");
    Field d(u.grid(), Rank::scalar, u.normal_extent(), u.time_extent());
    for (int i = 0; i < u.dim(); ++i) d += partial(u.component(i), i);
    return d;
}

/// Row-wise divergence (div F)_i = sum_j dF_ij/dx_j.
inline Field tensor_divergence(const Field& F) {
    require_rank(F, Rank::tensor, "tensor_divergence");
    const int n = F.dim();
    Field out(F.grid(), Rank::vector, F.normal_extent(), F.time_extent());
    for (int j = 0; j < n; ++j) {
        Field d = partial(F, j);
        auto dv = d.values();
        auto ov = out.values();
        const std::size_t nodes = F.size() / std::size_t(n * n);
        for (std::size_t b = 0; b < nodes; ++b)
            for (int i = 0; i < n; ++i) ov[b * std::size_t(n) + std::size_t(i)] += dv[b * std::size_t(n * n) + std::size_t(i * n + j)];
    }
    return out;
}

inline Field outer_product(const Field& u, const Field& v) {
    require_rank(u, Rank::vector, "outer_product");
    require_rank(v, Rank::vector, "outer_product");
    if (!u.same_support(v)) throw ShapeError("outer_product: grid mismatch");
    const int n = u.dim();
    Field T(u.grid(), Rank::tensor, u.normal_extent(), u.time_extent());
    auto a = u.values();
    auto b = v.values();
    auto t = T.values();
    const std::size_t nodes = u.size() / std::size_t(n);
    for (std::size_t q = 0; q < nodes; ++q)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                t[q * std::size_t(n * n) + std::size_t(i * n + j)] = a[q * std::size_t(n) + std::size_t(i)] * b[q * std::size_t(n) + std::size_t(j)];
    return T;
}

/// Pointwise Euclidean (Frobenius for tensors) magnitude.
inline Field pointwise_norm(const Field& A) {
    Field out(A.grid(), Rank::scalar, A.normal_extent(), A.time_extent());
    const std::size_t C = std::size_t(A.components());
    auto a = A.values();
    auto o = out.values();
    for (std::size_t q = 0; q < o.size(); ++q) {
        double s = 0.0;
        for (std::size_t c = 0; c < C; ++c) s += a[q * C + c] * a[q * C + c];
        o[q] = std::sqrt(s);
    }
    return out;
}

inline Field frobenius_norm_field(const Field& A) {
    require_rank(A, Rank::tensor, "frobenius_norm_field");
    return pointwise_norm(A);
}

/// Componentwise spatial Laplacian.
inline Field laplacian(const Field& f) {
    Field out(f.grid(), f.rank(), f.normal_extent(), f.time_extent());
    for (int a = 0; a < f.dim(); ++a) out += partial(f, a, 2);
    return out;
}

}  // namespace hsf
