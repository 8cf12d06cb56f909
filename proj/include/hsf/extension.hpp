#pragma once

// Reflection-series extensions across x_n = 0 (E1) and t = 0 (E2).
//
//   E1 f(x', -x_n) = sum_{j=1}^{2k+1} lambda_j f(x', j x_n),  sum_j (-j)^l lambda_j = 1, l = 0..2k
//   E2 f(x, -t)    = sum_{j=1}^{k+1}  lambda_j f(x, j t),     sum_j (-j)^l lambda_j = 1, l = 0..k
//
// The coefficients are solved exactly in rational arithmetic.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hsf/field.hpp"

namespace hsf {

using rational = boost::multiprecision::cpp_rational;

/// Exact solution of the square system A x = b by Gauss-Jordan elimination.
inline std::vector<rational> solve_rational(std::vector<std::vector<rational>> A, std::vector<rational> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && A[piv][c] == 0) ++piv;
        if (piv == n) throw std::domain_error("solve_rational: singular system");
        std::swap(A[piv], A[c]);
        std::swap(b[piv], b[c]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || A[r][c] == 0) continue;
            const rational f = A[r][c] / A[c][c];
            for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<rational> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
    return x;
}

enum class ExtensionKind { spatial, temporal };

struct ExtensionCoefficients {
    int k = 0;
    ExtensionKind kind = ExtensionKind::spatial;
    std::vector<rational> exact;
    std::vector<double> lambda;

    /// Number of enforced moment conditions minus one (2k or k).
    int max_moment() const { return kind == ExtensionKind::spatial ? 2 * k : k; }

    /// max_l |sum_j (-j)^l lambda_j - 1| evaluated in double precision.
    double moment_residual() const {
        double r = 0.0;
        for (int l = 0; l <= max_moment(); ++l) {
            long double s = 0.0L;
            for (std::size_t j = 0; j < lambda.size(); ++j)
                s += (long double)lambda[j] * std::pow(-(long double)(j + 1), l);
            r = std::max(r, double(std::abs(s - 1.0L)));
        }
        return r;
    }

    static ExtensionCoefficients solve(int k, ExtensionKind kind) {
        if (k < 0) throw std::invalid_argument("extension: k must be >= 0");
        ExtensionCoefficients c;
        c.k = k;
        c.kind = kind;
        const int m = kind == ExtensionKind::spatial ? 2 * k + 1 : k + 1;
        const auto um = static_cast<std::size_t>(m);
        std::vector<std::vector<rational>> A(um, std::vector<rational>(um));
        std::vector<rational> b(std::size_t(m), rational(1));
        for (int l = 0; l < m; ++l)
            for (int j = 1; j <= m; ++j) {
                rational p = 1;
                for (int e = 0; e < l; ++e) p *= -j;
                A[std::size_t(l)][std::size_t(j - 1)] = p;
            }
        c.exact = solve_rational(A, b);
        for (auto& v : c.exact) c.lambda.push_back(static_cast<double>(v));
        return c;
    }
};

struct ExtensionReport {
    int k_requested = 0;
    int k_used = 0;
    std::string warning;
};

/// Relative size of a half-extent field on its top tenth in x_n.
inline double normal_tail_ratio(const Field& f) {
    const double total = f.max_abs();
    if (total == 0.0) return 0.0;
    double tail = 0.0;
    const std::size_t C = std::size_t(f.components());
    for (std::size_t m = 0; m < f.nt_nodes(); ++m)
        for (std::size_t k = 0; k < f.nz_nodes(); ++k) {
            if (f.z(k) < 0.9 * f.grid().H()) continue;
            for (std::size_t p = 0; p < f.np(); ++p)
                for (std::size_t c = 0; c < C; ++c) tail = std::max(tail, std::abs(f(m, k, p, int(c))));
        }
    return tail / total;
}

/// Threshold on normal_tail_ratio above which reflections reaching past H are unsafe.
inline constexpr double kTailTolerance = 1e-3;

/// What to do with reflections reaching past x_n = H.
///   reduce_order: if the field is not negligible near H, fall back to k = 0
///   zero_fill   : keep k and read samples beyond H as 0
enum class ReachPolicy { reduce_order, zero_fill };

/// E1: half extent in x_n -> full (periodic) extent. Reflected samples whose
/// reach j*x_n exceeds H are taken as 0. Under reduce_order, a field that is not
/// negligible near H gets k = 0 (plain even reflection, reach <= H) and a warning.
inline Field extend_halfspace(const Field& f, int k, ExtensionReport* report = nullptr,
                              ReachPolicy policy = ReachPolicy::reduce_order) {
    if (f.normal_extent() != NormalExtent::half) throw ShapeError("extend_halfspace: half normal extent required");
    if (!f.grid().uniform_normal()) throw ShapeError("extend_halfspace: uniform normal spacing required");
    ExtensionReport rep;
    rep.k_requested = k;
    rep.k_used = k;
    if (k > 0 && policy == ReachPolicy::reduce_order && normal_tail_ratio(f) > kTailTolerance) {
        rep.k_used = 0;
        rep.warning = "extend_halfspace: field not negligible near x_n = H; reflection order reduced to k = 0";
    }
    const auto co = ExtensionCoefficients::solve(rep.k_used, ExtensionKind::spatial);
    const int nn = f.grid().nn();
    Field out(f.grid(), f.rank(), NormalExtent::full, f.time_extent());
    const std::size_t row = f.np() * std::size_t(f.components());
    for (std::size_t m = 0; m < f.nt_nodes(); ++m)
        for (int kk = 0; kk < 2 * nn; ++kk) {
            double* dst = &out.values()[out.index(m, std::size_t(kk), 0, 0)];
            if (kk >= nn) {
                const double* src = &f.values()[f.index(m, std::size_t(kk - nn), 0, 0)];
                std::copy(src, src + row, dst);
                continue;
            }
            const int d = nn - kk;
            for (std::size_t j = 0; j < co.lambda.size(); ++j) {
                const int reach = int(j + 1) * d;
                if (reach > nn) continue;
                const double* src = &f.values()[f.index(m, std::size_t(reach), 0, 0)];
                for (std::size_t i = 0; i < row; ++i) dst[i] += co.lambda[j] * src[i];
            }
        }
    if (report) *report = rep;
    return out;
}

/// E2: half extent in t -> full (periodic) extent; samples reaching past T are 0.
inline Field extend_time(const Field& f, int k) {
    if (f.time_extent() != TimeExtent::half) throw ShapeError("extend_time: half time extent required");
    if (!f.grid().uniform_time()) throw ShapeError("extend_time: uniform time spacing required");
    const auto co = ExtensionCoefficients::solve(k, ExtensionKind::temporal);
    const int nt = f.grid().nt();
    Field out(f.grid(), f.rank(), f.normal_extent(), TimeExtent::full);
    const std::size_t slab = f.nz_nodes() * f.np() * std::size_t(f.components());
    for (int l = 0; l < 2 * nt; ++l) {
        double* dst = &out.values()[std::size_t(l) * slab];
        if (l >= nt) {
            const double* src = &f.values()[std::size_t(l - nt) * slab];
            std::copy(src, src + slab, dst);
            continue;
        }
        const int d = nt - l;
        for (std::size_t j = 0; j < co.lambda.size(); ++j) {
            const int reach = int(j + 1) * d;
            if (reach > nt) continue;
            const double* src = &f.values()[std::size_t(reach) * slab];
            for (std::size_t i = 0; i < slab; ++i) dst[i] += co.lambda[j] * src[i];
        }
    }
    return out;
}

/// Zero extension to t < 0 (admissible for zero-history data).
inline Field zero_extend_time(const Field& f) {
    if (f.time_extent() != TimeExtent::half) throw ShapeError("zero_extend_time: half time extent required");
    if (!f.grid().uniform_time()) throw ShapeError("zero_extend_time: uniform time spacing required");
    const int nt = f.grid().nt();
    Field out(f.grid(), f.rank(), f.normal_extent(), TimeExtent::full);
    const std::size_t slab = f.nz_nodes() * f.np() * std::size_t(f.components());
    std::copy(f.values().begin(), f.values().begin() + std::ptrdiff_t(std::size_t(nt) * slab),
              out.values().begin() + std::ptrdiff_t(std::size_t(nt) * slab));
    return out;
}

/// Restriction of a full normal extent back to the half extent (x_n = H taken from x_n = -H by periodicity).
inline Field restrict_halfspace(const Field& f) {
    if (f.normal_extent() != NormalExtent::full) throw ShapeError("restrict_halfspace: full extent required");
    const int nn = f.grid().nn();
    Field out(f.grid(), f.rank(), NormalExtent::half, f.time_extent());
    const std::size_t row = f.np() * std::size_t(f.components());
    for (std::size_t m = 0; m < f.nt_nodes(); ++m)
        for (int k = 0; k <= nn; ++k) {
            const int src_k = k < nn ? nn + k : 0;
            const double* src = &f.values()[f.index(m, std::size_t(src_k), 0, 0)];
            std::copy(src, src + row, &out.values()[out.index(m, std::size_t(k), 0, 0)]);
        }
    return out;
}

/// Restriction of a full time extent to t in [0, T] (t = T taken from t = -T by periodicity).
inline Field restrict_time(const Field& f) {
    if (f.time_extent() != TimeExtent::full) throw ShapeError("restrict_time: full extent required");
    const int nt = f.grid().nt();
    Field out(f.grid(), f.rank(), f.normal_extent(), TimeExtent::half);
    const std::size_t slab = f.nz_nodes() * f.np() * std::size_t(f.components());
    for (int m = 0; m <= nt; ++m) {
        const int src = m < nt ? nt + m : 0;
        std::copy_n(&f.values()[std::size_t(src) * slab], slab, &out.values()[std::size_t(m) * slab]);
    }
    return out;
}

/// C-infinity step: 0 for x <= 0, 1 for x >= 1.
inline double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

namespace detail {

/// Two-sided tapered reflection of one axis into a period of twice its length:
/// acc(l, w, i) adds w * (node i of the half axis, 0..n) to periodic slot l
/// (0..2n-1, slot l holds coordinate (l - n) h). The two tapers never overlap.
template <class Acc>
void tapered_reflection(int n, const std::vector<double>& lambda, Acc acc) {
    const int m = int(lambda.size());
    // reflections stay within the data while the taper is on
    const double b = double(n) / std::max(m, 2);
    const double a = 0.25 * b;
    auto chi = [&](double d) { return 1.0 - smooth_step((d - a) / (b - a)); };
    for (int l = n; l < 2 * n; ++l) acc(l, 1.0, l - n);
    acc(0, 1.0, n);  // x = -period/2 is x = n h by periodicity
    for (int d = 1; d < n; ++d) {
        const double c = chi(double(d));
        if (c == 0.0) continue;
        for (int j = 1; j <= m; ++j) {
            const double w = c * lambda[std::size_t(j - 1)];
            if (j * d <= n) acc(n - d, w, j * d);  // x = -d h, mirrored about 0
        }
    }
    // above the far end (slot index wraps into the negative half)
    for (int d = 1; d < n; ++d) {
        const double c = chi(double(d));
        if (c == 0.0) continue;
        for (int j = 1; j <= m; ++j) {
            if (j * d > n) continue;
            acc(d, c * lambda[std::size_t(j - 1)], n - j * d);  // x = n h + d h  ==  slot d
        }
    }
}

}  // namespace detail

/// Canonical normal extension used for norms: E1 about x_n = 0 below the box and
/// the same reflection about x_n = H above it, both switched off smoothly before
/// any reflection leaves [0, H]. Agrees with f on [0, H] and closes the period 2H.
inline Field tapered_extend_normal(const Field& f, int k) {
    if (f.normal_extent() != NormalExtent::half) throw ShapeError("tapered_extend_normal: half normal extent required");
    if (!f.grid().uniform_normal()) throw ShapeError("tapered_extend_normal: uniform normal spacing required");
    const auto co = ExtensionCoefficients::solve(k, ExtensionKind::spatial);
    const int nn = f.grid().nn();
    Field out(f.grid(), f.rank(), NormalExtent::full, f.time_extent());
    const std::size_t row = f.np() * std::size_t(f.components());
    for (std::size_t m = 0; m < f.nt_nodes(); ++m)
        detail::tapered_reflection(nn, co.lambda, [&](int l, double w, int i) {
            if (w == 0.0) return;
            const double* src = &f.values()[f.index(m, std::size_t(i), 0, 0)];
            double* dst = &out.values()[out.index(m, std::size_t(l), 0, 0)];
            for (std::size_t r = 0; r < row; ++r) dst[r] += w * src[r];
        });
    return out;
}

/// Time counterpart of tapered_extend_normal (E2 about t = 0 and about t = T).
inline Field tapered_extend_time(const Field& f, int k) {
    if (f.time_extent() != TimeExtent::half) throw ShapeError("tapered_extend_time: half time extent required");
    if (!f.grid().uniform_time()) throw ShapeError("tapered_extend_time: uniform time spacing required");
    const auto co = ExtensionCoefficients::solve(k, ExtensionKind::temporal);
    const int nt = f.grid().nt();
    Field out(f.grid(), f.rank(), f.normal_extent(), TimeExtent::full);
    const std::size_t slab = f.nz_nodes() * f.np() * std::size_t(f.components());
    detail::tapered_reflection(nt, co.lambda, [&](int l, double w, int i) {
        if (w == 0.0) return;
        const double* src = &f.values()[std::size_t(i) * slab];
        double* dst = &out.values()[std::size_t(l) * slab];
        for (std::size_t r = 0; r < slab; ++r) dst[r] += w * src[r];
    });
    return out;
}

/// E = E2 E1 in its tapered form: every half axis of f is extended, periodic
/// and absent axes are left alone.
inline Field canonical_extension(const Field& f, int k_space = 1, int k_time = 1) {
    Field g = f.normal_extent() == NormalExtent::half ? tapered_extend_normal(f, k_space) : f;
    return g.time_extent() == TimeExtent::half ? tapered_extend_time(g, k_time) : g;
}

}  // namespace hsf
