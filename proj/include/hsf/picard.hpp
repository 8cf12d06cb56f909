#pragma once

// Picard iteration for the non-Newtonian problem in its normalized form
//   u_t - Laplace u + grad p = div(sigma(Du)Du - u (x) u + F),  div u = 0,
// with the Stokes data (u0, g) of the problem:
//   u^0 = 0 (or a given start),  u^{m+1} = u_lin + S_F(sigma(Du^m)Du^m - u^m (x) u^m),
// where u_lin solves the linear problem with the full data and S_F is the
// Stokes solve with forcing only. Both pieces come from solve_stokes.

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hsf/besov.hpp"
#include "hsf/stokes.hpp"
#include "hsf/stress.hpp"

namespace hsf {

// ---------------------------------------------------------------- norms

struct TrackedNorms {
    double w = 0.0;     // |grad u|_r + |D_t^{1/2}(u - u(0))|_r,  r = (n + 2) / 2
    double b_crit = 0.0;  // B^{1 + (n+2)/p}_{p,1}
    double b_alpha = 0.0;  // B^{alpha, alpha/2}_{p,q}
};

struct NormExponents {
    double p = 8.0, q = 8.0, alpha = 1.6;
    int k_space = 1, k_time = 1;  // reflection orders of the canonical extension
};

/// The contraction norm. The half derivative acts on u - u(., 0), the part of u
/// with zero history; differences of iterates have zero history already.
inline double contraction_norm(const Field& u) {
    if (u.rank() != Rank::vector || u.time_extent() != TimeExtent::half)
        throw ShapeError("contraction_norm: vector field over [0, T] required");
    const double r = (u.dim() + 2) / 2.0;
    Field v = u;
    const std::size_t slab = u.nz_nodes() * u.np() * std::size_t(u.components());
    for (std::size_t m = 0; m < u.nt_nodes(); ++m)
        for (std::size_t i = 0; i < slab; ++i) v.values()[m * slab + i] -= u.values()[i];
    return lp_norm(pointwise_norm(gradient(u)), r) + lp_norm(pointwise_norm(half_time_derivative(v)), r);
}

inline TrackedNorms tracked_norms(const Field& u, const NormExponents& e) {
    TrackedNorms t;
    t.w = contraction_norm(u);
    if (u.max_abs() == 0.0) return t;
    const double s_crit = 1.0 + (u.dim() + 2) / e.p;
    t.b_crit = besov_norm(u, s_crit, e.p, 1.0, BesovDomain::half, e.k_space, e.k_time).norm;
    t.b_alpha = besov_norm(u, e.alpha, e.p, e.q, BesovDomain::half, e.k_space, e.k_time).norm;
    return t;
}

// ---------------------------------------------------------------- forcing

struct NonlinearForcing {
    Field F;
    double du_max = 0.0;       // |Du|_inf
    bool regime_left = false;  // |Du|_inf > delta
};

/// sigma(Du)Du - u (x) u (without the convection term when `convection` is false).
inline NonlinearForcing nonlinear_forcing(const Field& u, const StressModel& model, double delta = kInf,
                                          bool convection = true) {
    if (u.rank() != Rank::vector) throw ShapeError("nonlinear_forcing: vector field required");
    NonlinearForcing r;
    const Field Du = symmetric_gradient(u);
    r.du_max = pointwise_norm(Du).max_abs();
    r.regime_left = r.du_max > delta;
    r.F = model.family == StressFamily::newtonian ? Field(u.grid(), Rank::tensor, u.normal_extent(), u.time_extent())
                                                  : sigma_times(model, Du);
    if (convection) r.F -= outer_product(u, u);
    return r;
}

// ---------------------------------------------------------------- trace

struct IterateRecord {
    int m = 0;
    TrackedNorms norms;  // of u^m
    double diff = 0.0;   // |U^m| = |u^{m+1} - u^m| in the contraction norm
    double ratio = std::numeric_limits<double>::quiet_NaN();  // |U^m| / |U^{m-1}|
    double du_max = 0.0;
    bool regime_left = false;

    bool has_ratio() const { return !std::isnan(ratio); }
};

struct IterationTrace {
    std::vector<IterateRecord> rows;
    double delta0 = 0.0, M = 0.0, epsilon = 0.0, delta = 0.0;  // smallness parameters of the run
    double scale = 0.0;  // |u^1| in the contraction norm

    void append(IterateRecord r) { rows.push_back(std::move(r)); }
};

/// m,norm1,norm2,norm3,diff,ratio; undefined ratios are written as nan.
inline void write_trace_csv(const IterationTrace& t, std::ostream& os) {
    os << "m,norm1,norm2,norm3,diff,ratio\n";
    os.precision(17);
    for (const auto& r : t.rows) {
        os << r.m << ',' << r.norms.w << ',' << r.norms.b_crit << ',' << r.norms.b_alpha << ',' << r.diff << ',';
        if (r.has_ratio())
            os << r.ratio;
        else
            os << "nan";
        os << '\n';
    }
}

inline void write_trace_csv(const IterationTrace& t, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_trace_csv: cannot open " + path);
    write_trace_csv(t, f);
}

// ---------------------------------------------------------------- iteration

enum class IterationStatus { converged, max_iterates, diverged };

inline const char* to_string(IterationStatus s) {
    switch (s) {
        case IterationStatus::converged: return "converged";
        case IterationStatus::max_iterates: return "max_iterates";
        case IterationStatus::diverged: return "diverged";
    }
    return "?";
}

struct IterationOptions {
    int m_max = 25;             // Stokes solves with nonlinear forcing, at most
    double stop_tol = 1e-8;     // |U^m| < stop_tol |u^1|
    int diverge_after = 3;      // consecutive ratios >= 1
    double delta = kInf;        // |Du|_inf bound of the stress regime (flag only)
    bool convection = true;
    NormExponents norms;
    StokesOptions stokes;
};

struct IterationResult {
    IterationTrace trace;
    Field u;
    Field u_lin;
    IterationStatus status = IterationStatus::max_iterates;
    int solves = 0;
};

/// Stokes solution for the problem's own data and forcing.
inline Field solve_linear_part(const StokesProblem& pb, const StokesOptions& opt) {
    return solve_stokes(pb, opt).w;
}

inline Field solve_forcing_only(const Field& F, const StokesOptions& opt) {
    StokesProblem z;
    const Grid& g = F.grid();
    z.u0 = Field(g, Rank::vector, NormalExtent::half, TimeExtent::single);
    z.g = Field(g, Rank::vector, NormalExtent::trace, TimeExtent::half);
    z.F = F;
    StokesOptions o = opt;
    o.check = false;
    return solve_stokes(z, o).w;
}

inline IterationResult iterate(const StokesProblem& pb, const StressModel& model, const IterationOptions& opt = {},
                               const std::optional<Field>& start = std::nullopt, const Field* u_lin_in = nullptr) {
    IterationResult res;
    res.trace.delta = opt.delta;
    res.u_lin = u_lin_in ? *u_lin_in : solve_linear_part(pb, opt.stokes);
    res.solves = u_lin_in ? 0 : 1;
    const Grid& g = pb.grid();
    Field u = start ? *start : Field(g, Rank::vector, NormalExtent::half, TimeExtent::half);
    if (u.grid() != g || u.rank() != Rank::vector || u.time_extent() != TimeExtent::half ||
        u.normal_extent() != NormalExtent::half)
        throw ShapeError("iterate: start must be a vector half-space field over [0, T] on the problem grid");

    const double eps_floor = 10.0 * std::numeric_limits<double>::epsilon();
    double prev_diff = -1.0;
    int above_one = 0;
    for (int m = 0;; ++m) {
        IterateRecord rec;
        rec.m = m;
        rec.norms = tracked_norms(u, opt.norms);
        const auto nf = nonlinear_forcing(u, model, opt.delta, opt.convection);
        rec.du_max = nf.du_max;
        rec.regime_left = nf.regime_left;
        Field next = res.u_lin;
        const bool zero_forcing = nf.F.max_abs() == 0.0;
        if (!zero_forcing) {
            next += solve_forcing_only(nf.F, opt.stokes);
            ++res.solves;
        }
        rec.diff = contraction_norm(next - u);
        if (m == 0) res.trace.scale = contraction_norm(next);
        const double floor = eps_floor * std::max(res.trace.scale, 1e-300);
        if (prev_diff > floor) rec.ratio = rec.diff / prev_diff;
        prev_diff = rec.diff;
        u = std::move(next);
        const bool finite = std::isfinite(rec.diff);
        if (rec.has_ratio() && rec.ratio >= 1.0) ++above_one; else above_one = 0;
        res.trace.append(rec);
        if (!finite || above_one >= opt.diverge_after) {
            res.status = IterationStatus::diverged;
            break;
        }
        if (rec.diff <= opt.stop_tol * res.trace.scale) {
            res.status = IterationStatus::converged;
            break;
        }
        if (m + 1 >= opt.m_max) {
            res.status = IterationStatus::max_iterates;
            break;
        }
    }
    // closing row: norms of the returned iterate
    IterateRecord last;
    last.m = int(res.trace.rows.size());
    last.norms = tracked_norms(u, opt.norms);
    last.diff = std::numeric_limits<double>::quiet_NaN();
    const auto nf = nonlinear_forcing(u, model, opt.delta, opt.convection);
    last.du_max = nf.du_max;
    last.regime_left = nf.regime_left;
    res.trace.append(last);
    res.u = std::move(u);
    return res;
}

// ---------------------------------------------------------------- gate

struct GateConfig {
    double delta0 = 0.0;  // bound on the first two tracked norms; <= 0 takes the largest admissible value
    double M = 0.0;       // bound on the B^{alpha, alpha/2} norm; <= 0 takes 2 c M03
    double delta = 0.1;   // |Du|_inf regime of the stress modulus
    double c = 0.0;       // solver constant; <= 0 fits it from the linear solve
    std::size_t modulus_pairs = 100'000;
};

/// One data norm and its three pieces.
struct DataNorm {
    double u0 = 0.0, g = 0.0, gn_a = 0.0, F = 0.0;
    double total() const { return u0 + g + gn_a + F; }
};

struct GateReport {
    DataNorm M01, M02, M03;  // data-side surrogates paired with the three tracked norms
    TrackedNorms lin;        // tracked norms of u_lin
    double c = 0.0;          // max of lin_i / M0i (or the configured constant)
    bool c_fitted = true;
    double epsilon = 0.0;    // modulus estimate at delta
    double delta0 = 0.0, M = 0.0;
    double delta0_max = 0.0;  // min(1/(5c), delta/c, 1)
    double du_lin = 0.0;      // |D u_lin|_inf
    bool modulus_ok = false, delta0_ok = false, data_ok = false, regime_ok = false;
    bool passed = false;
    std::string failed;  // first failing condition
    Field u_lin;
};

/// Surrogate of the A^{k - 1/p} norm of the boundary normal datum: geometric
/// interpolation N_j^{1 - theta} N_{j+1}^theta of the endpoint norms, j = floor(k).
inline double a_norm_surrogate(const Field& gn, double k, double p, double q) {
    if (gn.max_abs() == 0.0) return 0.0;
    const int j = int(std::floor(k + 1e-12));
    const double th = k - j;
    const auto [a, b] = a_norm_endpoints(gn, j, p, q);
    return th < 1e-12 ? a : std::pow(a, 1.0 - th) * std::pow(b, th);
}

/// Data norm at level s (u0 at s - 2/p, g at s - 1/p on the boundary, g_n in the
/// A-surrogate at k = s, F at s - 1) with exponents (p, q).
inline DataNorm data_norm(const StokesProblem& pb, double s, double p, double q, const NormExponents& e) {
    DataNorm d;
    const int n = pb.grid().dim();
    if (pb.u0.max_abs() > 0.0)
        d.u0 = besov_norm(pb.u0, s - 2.0 / p, p, q, BesovDomain::half, e.k_space, e.k_time).norm;
    if (pb.g.max_abs() > 0.0) {
        d.g = besov_norm(pb.g, s - 1.0 / p, p, q, BesovDomain::half, e.k_space, e.k_time).norm;
        d.gn_a = a_norm_surrogate(pb.g.component(n - 1), s, p, q);
    }
    if (pb.has_forcing() && pb.F.max_abs() > 0.0)
        d.F = besov_norm(pb.F, s - 1.0, p, q, BesovDomain::half, e.k_space, e.k_time).norm;
    return d;
}

/// Smallness gate with the solver constant c:
///   c eps(delta) < 1/3,  delta0 <= min(1/(5c), delta/c, 1),
///   c M01 <= delta0/2,  c M02 <= delta0/2,  c M03 <= M,  |D u_lin|_inf <= delta.
/// M01 pairs with the W^{1,1/2}_{(n+2)/2} norm (exponents (n+2)/2), M02 with
/// B^{1+(n+2)/p}_{p,1}, M03 with B^{alpha}_{p,q}. Comparisons other than the
/// modulus one are inclusive: data exactly at a threshold pass.
inline GateReport smallness_gate(const StokesProblem& pb, const StressModel& model, const NormExponents& e,
                                 const GateConfig& cfg = {}, const StokesOptions& sopt = {}) {
    GateReport r;
    const int n = pb.grid().dim();
    const double r0 = (n + 2) / 2.0;
    r.M01 = data_norm(pb, 1.0, r0, r0, e);
    r.M02 = data_norm(pb, 1.0 + (n + 2) / e.p, e.p, 1.0, e);
    r.M03 = data_norm(pb, e.alpha, e.p, e.q, e);

    r.u_lin = solve_linear_part(pb, sopt);
    r.lin = tracked_norms(r.u_lin, e);
    r.du_lin = pointwise_norm(symmetric_gradient(r.u_lin)).max_abs();
    if (cfg.c > 0.0) {
        r.c = cfg.c;
        r.c_fitted = false;
    } else {
        auto ratio = [](double a, double b) { return b > 0.0 ? a / b : 0.0; };
        r.c = std::max({ratio(r.lin.w, r.M01.total()), ratio(r.lin.b_crit, r.M02.total()),
                        ratio(r.lin.b_alpha, r.M03.total())});
    }
    r.epsilon = model.family == StressFamily::newtonian ? 0.0
                                                         : modulus_estimate(model, cfg.delta, cfg.modulus_pairs, n).epsilon;
    r.delta0_max = r.c > 0.0 ? std::min({1.0 / (5.0 * r.c), cfg.delta / r.c, 1.0}) : 1.0;
    r.delta0 = cfg.delta0 > 0.0 ? cfg.delta0 : r.delta0_max;
    r.M = cfg.M > 0.0 ? cfg.M : 2.0 * r.c * r.M03.total();
    if (!(r.M > 0.0)) r.M = kInf;  // zero data: nothing to bound

    r.modulus_ok = r.c * r.epsilon < 1.0 / 3.0;
    r.delta0_ok = r.delta0 <= r.delta0_max;
    r.data_ok = r.c * r.M01.total() <= 0.5 * r.delta0 && r.c * r.M02.total() <= 0.5 * r.delta0 &&
                r.c * r.M03.total() <= r.M;
    r.regime_ok = r.du_lin <= cfg.delta;
    r.passed = r.modulus_ok && r.delta0_ok && r.data_ok && r.regime_ok;
    if (!r.modulus_ok)
        r.failed = "c * eps(delta) >= 1/3";
    else if (!r.delta0_ok)
        r.failed = "delta0 exceeds min(1/(5c), delta/c, 1)";
    else if (!r.data_ok)
        r.failed = "data norms exceed (delta0/2, delta0/2, M) / c";
    else if (!r.regime_ok)
        r.failed = "|D u_lin|_inf exceeds delta";
    return r;
}

// ---------------------------------------------------------------- summaries

struct ContractionSummary {
    std::vector<std::pair<int, double>> ratios;  // (m, rho_m) where defined
    double max_ratio = 0.0;
    double max_ratio_from2 = 0.0;  // over m >= 2
    double geometric_rate = std::numeric_limits<double>::quiet_NaN();  // exp of the log-diff slope
    int fit_points = 0;
    bool below_half = false;  // every rho_m (m >= 2) below 1/2, reported only

    bool empty() const { return ratios.empty(); }
};

inline ContractionSummary contraction_ratios(const IterationTrace& t) {
    ContractionSummary s;
    const double floor = 10.0 * std::numeric_limits<double>::epsilon() * std::max(t.scale, 1e-300);
    std::vector<double> xs, ys;
    for (const auto& r : t.rows) {
        if (r.has_ratio()) {
            s.ratios.emplace_back(r.m, r.ratio);
            s.max_ratio = std::max(s.max_ratio, r.ratio);
            if (r.m >= 2) s.max_ratio_from2 = std::max(s.max_ratio_from2, r.ratio);
        }
        if (std::isfinite(r.diff) && r.diff > floor) {
            xs.push_back(r.m);
            ys.push_back(std::log(r.diff));
        }
    }
    if (s.ratios.empty()) return s;
    s.fit_points = int(xs.size());
    if (xs.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= double(xs.size());
        my /= double(xs.size());
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        s.geometric_rate = std::exp(sxy / sxx);
    }
    s.below_half = true;
    for (const auto& [m, rho] : s.ratios)
        if (m >= 2 && rho >= 0.5) s.below_half = false;
    return s;
}

/// Uniform bounds along a trace: w <= delta0, b_crit <= delta0, b_alpha <= M per row.
struct BoundsReport {
    double worst_w = 0.0, worst_crit = 0.0, worst_alpha = 0.0;  // max over rows of norm / bound
    bool held = true;
};

inline BoundsReport check_uniform_bounds(const IterationTrace& t, double delta0, double M) {
    BoundsReport b;
    for (const auto& r : t.rows) {
        b.worst_w = std::max(b.worst_w, r.norms.w / delta0);
        b.worst_crit = std::max(b.worst_crit, r.norms.b_crit / delta0);
        b.worst_alpha = std::max(b.worst_alpha, r.norms.b_alpha / M);
    }
    b.held = b.worst_w <= 1.0 && b.worst_crit <= 1.0 && b.worst_alpha <= 1.0;
    return b;
}

struct UniquenessReport {
    double difference = 0.0;  // |u_a - u_b| / |u_a| in the contraction norm
    double perturbation = 0.0;
    IterationStatus status_a = IterationStatus::max_iterates, status_b = IterationStatus::max_iterates;
    int iterates_a = 0, iterates_b = 0;
};

/// Runs the iteration from 0 and from `perturbation` and compares the limits.
inline UniquenessReport uniqueness_probe(const StokesProblem& pb, const StressModel& model, const Field& perturbation,
                                         const IterationOptions& opt = {}) {
    UniquenessReport r;
    r.perturbation = contraction_norm(perturbation);
    const auto a = iterate(pb, model, opt);
    const auto b = iterate(pb, model, opt, perturbation, &a.u_lin);
    r.status_a = a.status;
    r.status_b = b.status;
    r.iterates_a = int(a.trace.rows.size()) - 1;
    r.iterates_b = int(b.trace.rows.size()) - 1;
    const double sc = std::max(contraction_norm(a.u), 1e-300);
    r.difference = contraction_norm(a.u - b.u) / sc;
    return r;
}

}  // namespace hsf
