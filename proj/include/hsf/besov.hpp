#pragma once

// Anisotropic (parabolic) Besov and Sobolev norms on sampled fields.
//
//   |f|_{B^{s,s/2}_{p,q}} = || 2^{sj} |f * phi_j|_{L^p} ||_{l^q(j)}
//
// Fields whose every axis is periodic (or absent) are measured directly on
// their lattice. Half-domain fields are first extended by the tapered E2 E1
// (canonical_extension), so the value is an extension norm.

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hsf/differential.hpp"
#include "hsf/extension.hpp"
#include "hsf/field.hpp"
#include "hsf/lattice.hpp"
#include "hsf/spectral.hpp"

namespace hsf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Quadrature weight of every scalar node: uniform on periodic axes, trapezoid
/// on half axes (graded spacing honoured), 1 on absent axes.
inline std::vector<double> node_weights(const Field& f) {
    const Grid& g = f.grid();
    auto trap = [](const std::vector<double>& x) {
        std::vector<double> w(x.size(), 0.0);
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            const double h = x[i + 1] - x[i];
            w[i] += 0.5 * h;
            w[i + 1] += 0.5 * h;
        }
        return w;
    };
    std::vector<double> wz, wt;
    switch (f.normal_extent()) {
        case NormalExtent::half: wz = trap(g.z()); break;
        case NormalExtent::full: wz.assign(f.nz_nodes(), g.dz()); break;
        case NormalExtent::trace: wz.assign(1, 1.0); break;
    }
    switch (f.time_extent()) {
        case TimeExtent::half: wt = trap(g.t()); break;
        case TimeExtent::full: wt.assign(f.nt_nodes(), g.dt()); break;
        case TimeExtent::single: wt.assign(1, 1.0); break;
    }
    const double wx = std::pow(g.dx(), g.dim() - 1);
    std::vector<double> w(f.nt_nodes() * f.nz_nodes() * f.np());
    for (std::size_t m = 0; m < f.nt_nodes(); ++m)
        for (std::size_t k = 0; k < f.nz_nodes(); ++k)
            for (std::size_t p = 0; p < f.np(); ++p) w[(m * f.nz_nodes() + k) * f.np() + p] = wt[m] * wz[k] * wx;
    return w;
}

/// L^p norm of the pointwise Euclidean magnitude; p = kInf gives the max.
inline double lp_norm(const Field& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    const auto w = node_weights(f);
    const std::size_t C = std::size_t(f.components());
    auto v = f.values();
    double acc = 0.0;
    for (std::size_t q = 0; q < w.size(); ++q) {
        double s = 0.0;
        for (std::size_t c = 0; c < C; ++c) s += v[q * C + c] * v[q * C + c];
        const double a = std::sqrt(s);
        if (std::isinf(p)) acc = std::max(acc, a);
        else acc += w[q] * std::pow(a, p);
    }
    return std::isinf(p) ? acc : std::pow(acc, 1.0 / p);
}

/// l^q aggregation of nonnegative entries.
inline double lq_aggregate(const std::vector<double>& b, double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("lq_aggregate: q must be >= 1");
    double acc = 0.0;
    for (double v : b) acc = std::isinf(q) ? std::max(acc, v) : acc + std::pow(v, q);
    return std::isinf(q) ? acc : std::pow(acc, 1.0 / q);
}

/// Share of the largest block above which an edge block marks the profile as
/// truncated. The two lowest and the two highest blocks count as edge blocks,
/// since both overlap the first or last lattice octave.
inline constexpr double kTruncationShare = 0.1;

struct BesovProfile {
    double s = 0, p = 2, q = 2;
    int j_min = 0, j_max = -1;
    std::vector<double> blocks;  // 2^{sj} |f * phi_j|_p, j = j_min..j_max
    double norm = 0;
    bool truncated_low = false, truncated_high = false;
    std::string family;
    std::string domain;

    bool truncated() const { return truncated_low || truncated_high; }
    double aggregate() const { return lq_aggregate(blocks, q); }
    double block(int j) const { return blocks.at(std::size_t(j - j_min)); }
};

inline void write_profile_csv(const BesovProfile& b, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << std::setprecision(17) << "j,block_value\n";
    for (int j = b.j_min; j <= b.j_max; ++j) os << j << "," << b.block(j) << "\n";
}

enum class BesovDomain { full, half };

inline bool fully_periodic(const Field& f) {
    return f.normal_extent() != NormalExtent::half && f.time_extent() != TimeExtent::half;
}

/// Block magnitudes |f * phi_j|_p of a field on a periodic lattice, j over the family.
inline std::vector<double> block_norms(const Field& f, const LPFamily& fam, double p) {
    Lattice lat(f);
    std::vector<std::vector<cplx>> spec;
    for (int c = 0; c < f.components(); ++c) spec.push_back(lat.forward(f, c));
    std::vector<double> out;
    Field blk(f.grid(), f.rank(), f.normal_extent(), f.time_extent());
    const std::size_t B = lat.block();
    std::vector<double> phi(B);
    for (int j = fam.j_min(); j <= fam.j_max(); ++j) {
        for (std::size_t q = 0; q < B; ++q) phi[q] = LPFamily::weight(j, lat.freq(q, false).parabolic_radius());
        for (int c = 0; c < f.components(); ++c) {
            auto a = spec[std::size_t(c)];
            for (int h = 0; h < lat.howmany(); ++h)
                for (std::size_t q = 0; q < B; ++q) a[std::size_t(h) * B + q] *= phi[q];
            lat.inverse(std::move(a), blk, c);
        }
        out.push_back(lp_norm(blk, p));
    }
    return out;
}

inline BesovProfile profile_from_blocks(std::vector<double> raw, const LPFamily& fam, double s, double p, double q) {
    BesovProfile b;
    b.s = s;
    b.p = p;
    b.q = q;
    b.j_min = fam.j_min();
    b.j_max = fam.j_max();
    b.family = fam.describe();
    for (int j = b.j_min; j <= b.j_max; ++j) raw[std::size_t(j - b.j_min)] *= std::exp2(s * j);
    b.blocks = std::move(raw);
    b.norm = b.aggregate();
    double top = 0.0;
    for (double v : b.blocks) top = std::max(top, v);
    if (top > 0.0) {
        const std::size_t n = b.blocks.size();
        for (std::size_t i = 0; i < std::min<std::size_t>(2, n); ++i) {
            b.truncated_low = b.truncated_low || b.blocks[i] > kTruncationShare * top;
            b.truncated_high = b.truncated_high || b.blocks[n - 1 - i] > kTruncationShare * top;
        }
    }
    return b;
}

/// Anisotropic Besov norm. domain = full requires every axis periodic or absent;
/// domain = half applies the canonical extension to the half axes first.
inline BesovProfile besov_norm(const Field& f, double s, double p, double q, BesovDomain domain,
                               int k_space = 1, int k_time = 1) {
    if (!(p >= 1.0) || !(q >= 1.0)) throw std::invalid_argument("besov_norm: p, q must be >= 1");
    if (domain == BesovDomain::full && !fully_periodic(f))
        throw ShapeError("besov_norm: full-domain norm needs periodic axes; use the half domain");
    const Field e = domain == BesovDomain::half ? canonical_extension(f, k_space, k_time) : f;
    LPFamily fam(e);
    auto b = profile_from_blocks(block_norms(e, fam, p), fam, s, p, q);
    b.domain = domain == BesovDomain::half ? "halfspace-halftime" : "full";
    return b;
}

/// Half if any axis is a half axis, full otherwise.
inline BesovDomain natural_domain(const Field& f) {
    return fully_periodic(f) ? BesovDomain::full : BesovDomain::half;
}

/// sum_{|beta| + l = k} |D_x^beta D_t^{l/2} f|_p, each |D_x^m g| being the pointwise
/// magnitude of the full m-th spatial derivative tensor. Half time axes use the
/// product-integration half derivative (zero history required).
inline double sobolev_aniso_norm(const Field& f, int k, double p) {
    if (k < 0) throw std::invalid_argument("sobolev_aniso_norm: k must be >= 0");
    // boundary fields carry tangential derivatives only
    const int n = f.normal_extent() == NormalExtent::trace ? f.dim() - 1 : f.dim();
    const bool has_time = f.time_extent() != TimeExtent::single;
    double total = 0.0;
    Field dt = f;
    for (int l = 0; l <= k; ++l) {
        if (l > 0) {
            if (!has_time) break;
            dt = half_time_derivative(dt);
        }
        const int m = k - l;
        // all m-th order spatial partials, accumulated as squared magnitudes
        std::vector<Field> level{dt};
        for (int o = 0; o < m; ++o) {
            std::vector<Field> next;
            for (const auto& g : level)
                for (int a = 0; a < n; ++a) next.push_back(partial(g, a));
            level = std::move(next);
        }
        Field mag2(f.grid(), Rank::scalar, f.normal_extent(), f.time_extent());
        for (const auto& g : level) {
            Field pn = pointwise_norm(g);
            for (std::size_t i = 0; i < mag2.size(); ++i) mag2.values()[i] += pn.values()[i] * pn.values()[i];
        }
        for (auto& v : mag2.values()) v = std::sqrt(v);
        total += lp_norm(mag2, p);
    }
    return total;
}

struct IntegralNorm {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t pairs = 0;
    bool exhaustive = true;
};

/// Double-integral form of the B^{s,s/2}_{p,q} norm, 0 < s < 1:
///   ( int ( int |f(X) - f(Y)|^p / d(X,Y)^{(p/q)(n+2) + ps} dY )^{q/p} dX )^{1/q},
/// d = |x - y| + |t - s|^{1/2} (minimum image on periodic axes). Exhaustive
/// pair sums up to max_pairs, stratified Monte Carlo beyond.
inline IntegralNorm besov_norm_integral(const Field& f, double s, double p, double q, std::uint64_t seed = 1,
                                        std::size_t max_pairs = 40'000'000, int batches = 8) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("besov_norm_integral: s must lie in (0, 1)");
    if (!(p >= 1.0 && q >= 1.0) || std::isinf(p) || std::isinf(q))
        throw std::invalid_argument("besov_norm_integral: finite p, q >= 1 required");
    const int n = f.dim();
    const Grid& g = f.grid();
    const std::size_t N = f.nt_nodes() * f.nz_nodes() * f.np();
    const std::size_t C = std::size_t(f.components());
    const auto w = node_weights(f);
    // coordinates (x', x_n, t) of every node
    std::vector<std::array<double, 4>> X(N);
    for (std::size_t m = 0; m < f.nt_nodes(); ++m)
        for (std::size_t k = 0; k < f.nz_nodes(); ++k)
            for (std::size_t pp = 0; pp < f.np(); ++pp) {
                auto& c = X[(m * f.nz_nodes() + k) * f.np() + pp];
                c = {0, 0, 0, 0};
                for (int a = 0; a + 1 < n; ++a) c[std::size_t(a)] = f.x(pp, a);
                c[2] = f.z(k);
                c[3] = f.t(m);
            }
    const bool zper = f.normal_extent() == NormalExtent::full, tper = f.time_extent() == TimeExtent::full;
    const double Pz = 2 * g.H(), Pt = 2 * g.T(), Px = g.L();
    auto wrap = [](double d, double P) {
        d = std::abs(d);
        return std::min(d, P - d);
    };
    const double expo = (p / q) * (n + 2) + p * s;
    auto pair_term = [&](std::size_t i, std::size_t j) {
        double dx2 = 0.0;
        for (int a = 0; a + 1 < n; ++a) {
            const double d = wrap(X[i][std::size_t(a)] - X[j][std::size_t(a)], Px);
            dx2 += d * d;
        }
        const double dz = zper ? wrap(X[i][2] - X[j][2], Pz) : std::abs(X[i][2] - X[j][2]);
        const double dt = tper ? wrap(X[i][3] - X[j][3], Pt) : std::abs(X[i][3] - X[j][3]);
        const double d = std::sqrt(dx2 + dz * dz) + std::sqrt(dt);
        double diff2 = 0.0;
        auto v = f.values();
        for (std::size_t c = 0; c < C; ++c) {
            const double e = v[i * C + c] - v[j * C + c];
            diff2 += e * e;
        }
        return std::pow(diff2, 0.5 * p) / std::pow(d, expo);
    };
    IntegralNorm out;
    if (N * N <= max_pairs) {
        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double inner = 0.0;
            for (std::size_t j = 0; j < N; ++j)
                if (j != i) inner += w[j] * pair_term(i, j);
            acc += w[i] * std::pow(inner, q / p);
        }
        out.value = std::pow(acc, 1.0 / q);
        out.pairs = N * (N - 1);
        return out;
    }
    // Stratified Monte Carlo: outer nodes one per stratum, inner nodes likewise;
    // independent batches give the standard error.
    out.exhaustive = false;
    const std::size_t budget = max_pairs / std::size_t(batches);
    const std::size_t n_out = std::max<std::size_t>(16, std::size_t(std::sqrt(double(budget))));
    const std::size_t n_in = std::max<std::size_t>(16, budget / n_out);
    std::mt19937_64 rng(seed);
    std::vector<double> est;
    for (int b = 0; b < batches; ++b) {
        double acc = 0.0;
        for (std::size_t so = 0; so < n_out; ++so) {
            const std::size_t lo = so * N / n_out, hi = std::max(lo + 1, (so + 1) * N / n_out);
            const std::size_t i = lo + std::uniform_int_distribution<std::size_t>(0, hi - lo - 1)(rng);
            double inner = 0.0;
            for (std::size_t si = 0; si < n_in; ++si) {
                const std::size_t a = si * N / n_in, c = std::max(a + 1, (si + 1) * N / n_in);
                const std::size_t j = a + std::uniform_int_distribution<std::size_t>(0, c - a - 1)(rng);
                if (j == i) continue;
                inner += double(c - a) * w[j] * pair_term(i, j);
            }
            acc += double(hi - lo) * w[i] * std::pow(inner, q / p);
        }
        est.push_back(std::pow(acc, 1.0 / q));
        out.pairs += n_out * n_in;
    }
    double mean = 0.0;
    for (double e : est) mean += e;
    mean /= double(est.size());
    double var = 0.0;
    for (double e : est) var += (e - mean) * (e - mean);
    var /= double(est.size() - 1);
    out.value = mean;
    out.std_error = std::sqrt(var / double(est.size()));
    return out;
}

struct TraceReport {
    Field trace;
    double trace_norm = std::numeric_limits<double>::quiet_NaN();
    double bulk_norm = std::numeric_limits<double>::quiet_NaN();
    double ratio = std::numeric_limits<double>::quiet_NaN();
    bool certified = false;
    std::string reason;
};

/// f(., t = 0) with the pairing |f(0)|_{B^{s-2/p}_{p,q}} / |f|_{B^{s,s/2}_{p,q}}; the
/// norms are only computed (certified) when s > 2/p.
inline TraceReport trace_time0(const Field& f, double s, double p, double q) {
    TraceReport r;
    switch (f.time_extent()) {
        case TimeExtent::half: r.trace = f.time_slice(0); break;
        case TimeExtent::full: r.trace = f.time_slice(std::size_t(f.grid().nt())); break;
        case TimeExtent::single: r.trace = f; break;
    }
    if (!(s > 2.0 / p)) {
        r.reason = "trace_time0: s <= 2/p, below the time-trace threshold";
        return r;
    }
    r.trace_norm = besov_norm(r.trace, s - 2.0 / p, p, q, natural_domain(r.trace)).norm;
    r.bulk_norm = besov_norm(f, s, p, q, natural_domain(f)).norm;
    r.ratio = r.bulk_norm > 0 ? r.trace_norm / r.bulk_norm : 0.0;
    r.certified = true;
    return r;
}

/// f(x', 0, t) with the pairing |f|_{x_n=0}|_{B^{s-1/p}} / |f|_{B^{s,s/2}}, s > 1/p.
inline TraceReport trace_boundary(const Field& f, double s, double p, double q) {
    TraceReport r;
    r.trace = trace_of(f);
    if (!(s > 1.0 / p)) {
        r.reason = "trace_boundary: s <= 1/p, below the boundary-trace threshold";
        return r;
    }
    r.trace_norm = besov_norm(r.trace, s - 1.0 / p, p, q, natural_domain(r.trace)).norm;
    r.bulk_norm = besov_norm(f, s, p, q, natural_domain(f)).norm;
    r.ratio = r.bulk_norm > 0 ? r.trace_norm / r.bulk_norm : 0.0;
    r.certified = true;
    return r;
}

/// L^p in time of the tangential B^{sigma}_{p,q} norm of each time slice of a boundary field.
inline double lp_time_tangential_besov(const Field& g, double sigma, double p, double q) {
    if (g.normal_extent() != NormalExtent::trace) throw ShapeError("tangential norm: boundary field required");
    Field one = g.time_slice(0);
    LPFamily fam(one);
    std::vector<double> per_slice(g.nt_nodes());
    for (std::size_t m = 0; m < g.nt_nodes(); ++m) {
        auto raw = block_norms(g.time_slice(m), fam, p);
        per_slice[m] = profile_from_blocks(std::move(raw), fam, sigma, p, q).norm;
    }
    if (g.time_extent() == TimeExtent::single) return per_slice[0];
    double acc = 0.0;
    const auto& t = g.grid().t();
    if (g.time_extent() == TimeExtent::half) {
        for (std::size_t m = 0; m + 1 < t.size(); ++m)
            acc += 0.5 * (t[m + 1] - t[m]) * (std::pow(per_slice[m], p) + std::pow(per_slice[m + 1], p));
    } else {
        for (double v : per_slice) acc += g.grid().dt() * std::pow(v, p);
    }
    return std::pow(acc, 1.0 / p);
}

/// Endpoint-couple norms of the boundary normal datum at levels k and k+1:
///   N_k = |g|_{L^p_t B^{k-1/p}_{p,q}} + |D_t^{k/2} g|_{L^p_t B^{-1/p}_{p,q}}.
/// A diagnostic bracket for the interpolation norm, never a certified value.
inline std::pair<double, double> a_norm_endpoints(const Field& gn, int k, double p, double q = -1.0) {
    if (k < 0) throw std::invalid_argument("a_norm_endpoints: k must be >= 0");
    if (gn.rank() != Rank::scalar || gn.normal_extent() != NormalExtent::trace)
        throw ShapeError("a_norm_endpoints: scalar boundary field required");
    if (q < 0) q = p;
    if (gn.time_extent() == TimeExtent::half) require_zero_history(gn, "a_norm_endpoints");
    auto level = [&](int kk) {
        Field d = gn;
        for (int i = 0; i < kk; ++i) d = half_time_derivative(d);
        return lp_time_tangential_besov(gn, kk - 1.0 / p, p, q) + lp_time_tangential_besov(d, -1.0 / p, p, q);
    };
    return {level(k), level(k + 1)};
}

}  // namespace hsf
