#pragma once

// Half-space Stokes solver  u_t - Laplace u + grad p = div F,  div u = 0,
// u(0) = u0,  u|_{x_n=0} = g,  assembled as w = w1 + w2 + w3 + w4:
//
//   w1 = int_0^t Gamma * P div F~          (forcing, full-space lattice)
//   w2 = Gamma_t * u0~                      (initial data, full-space lattice)
//   w3 = 2 grad N*'h,  h = g_n - w1_n - w2_n on x_n = 0   (normal trace)
//   w4 = -2 U G_i - 2 delta_in U(sum_j R'_j G_j) + 4 d_i S  (tangential remainder G)
//
// with F_j = -U G_j / 2, F_n = -U(sum_j R'_j G_j) / 2 and, per tangential mode,
//   S^   = sum_j (i theta_j / 2 kappa)(D - I) F^_j + (S - I) F^_n / 2
//   dzS^ = sum_j (i theta_j / 2)(S + I) F^_j + (kappa / 2)(D + I) F^_n - F^_n
// (D, S, I the x_n kernel matrices of NormalKernels). Only the pressure of w3,
// pi3 = -2 d_t N*'h, is produced.

#include <cmath>
#include <string>
#include <vector>

#include "hsf/differential.hpp"
#include "hsf/extension.hpp"
#include "hsf/field.hpp"
#include "hsf/kernels.hpp"
#include "hsf/spectral.hpp"

namespace hsf {

struct StokesProblem {
    Field u0;  // vector, half normal extent, single time
    Field g;   // vector boundary field, half time
    Field F;   // tensor, half normal extent, half time (may be empty: no forcing)
    double p = 8.0, q = 8.0, alpha = 1.6;

    const Grid& grid() const { return g.grid(); }
    bool has_forcing() const { return !F.values().empty(); }
};

struct StokesTolerances {
    double compat = 1e-8;     // g(., 0) against u0 on x_n = 0, relative
    double div_u0 = 1e-8;     // div u0 relative to |grad u0|, below which no refinement test is needed
    double div_cap = 5e-2;    // never attribute more than this to the normal stencil
    double div_order = 2.0;   // minimum observed order of the defect under normal node halving
    double normal_mean = 1e-8;  // tangential mean of g_n, relative
};

struct CompatibilityReport {
    double div_u0 = 0.0;
    double div_u0_coarse = 0.0;  // same measure with every other normal node
    double trace_mismatch = 0.0;
    double normal_mean = 0.0;
    bool ok = true;
    std::string violated;
};

inline double max_abs_or(const Field& f, double floor = 1e-300) { return std::max(f.max_abs(), floor); }

/// Largest |tangential mean of g_n(t)| relative to |g_n|_inf.
inline double normal_mean_defect(const Field& g) {
    const int n = g.dim();
    double worst = 0.0, scale = 0.0;
    for (std::size_t m = 0; m < g.nt_nodes(); ++m) {
        double s = 0.0;
        for (std::size_t p = 0; p < g.np(); ++p) {
            s += g(m, 0, p, n - 1);
            scale = std::max(scale, std::abs(g(m, 0, p, n - 1)));
        }
        worst = std::max(worst, std::abs(s) / double(g.np()));
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

struct DivergenceDefect {
    double fine = 0.0;    // relative to |grad u|_inf
    double coarse = 0.0;  // normal stencil on every other node
};

/// Stencil divergence of a half-space field measured twice, on all normal nodes
/// and on the even ones, at the even nodes. A divergence-free sample shows a
/// defect that shrinks with the stencil order; a genuine divergence does not.
inline DivergenceDefect divergence_defect(const Field& u) {
    if (u.rank() != Rank::vector || u.normal_extent() != NormalExtent::half)
        throw ShapeError("divergence_defect: vector half-space field required");
    const int n = u.dim();
    DivergenceDefect r;
    const double scale = max_abs_or(pointwise_norm(gradient(u)));
    Field tang(u.grid(), Rank::scalar, u.normal_extent(), u.time_extent());
    for (int i = 0; i < n - 1; ++i) tang += partial(u.component(i), i);
    const Field un = u.component(n - 1);
    const Field fine = partial(un, n - 1);
    std::vector<double> zc;
    for (std::size_t k = 0; k < u.nz_nodes(); k += 2) zc.push_back(u.z(k));
    const auto st = build_stencil(zc, 1);
    for (std::size_t m = 0; m < u.nt_nodes(); ++m)
        for (std::size_t kc = 0; kc < zc.size(); ++kc) {
            const auto& w = st.w[kc];
            const std::size_t s0 = std::size_t(st.start[kc]);
            for (std::size_t p = 0; p < u.np(); ++p) {
                double dn = 0.0;
                for (std::size_t j = 0; j < w.size(); ++j) dn += w[j] * un(m, 2 * (s0 + j), p);
                const double t = tang(m, 2 * kc, p);
                r.fine = std::max(r.fine, std::abs(t + fine(m, 2 * kc, p)));
                r.coarse = std::max(r.coarse, std::abs(t + dn));
            }
        }
    r.fine /= scale;
    r.coarse /= scale;
    return r;
}

inline void validate_problem(const StokesProblem& pb) {
    if (pb.g.rank() != Rank::vector || pb.g.normal_extent() != NormalExtent::trace ||
        pb.g.time_extent() != TimeExtent::half)
        throw ShapeError("stokes: g must be a vector boundary field over [0, T]");
    if (pb.u0.rank() != Rank::vector || pb.u0.normal_extent() != NormalExtent::half ||
        pb.u0.time_extent() != TimeExtent::single)
        throw ShapeError("stokes: u0 must be a single-time vector field on the half-space");
    if (!(pb.u0.grid() == pb.g.grid())) throw ShapeError("stokes: u0 and g live on different grids");
    if (pb.has_forcing()) {
        if (pb.F.rank() != Rank::tensor || pb.F.normal_extent() != NormalExtent::half ||
            pb.F.time_extent() != TimeExtent::half)
            throw ShapeError("stokes: F must be a tensor field on the half-space over [0, T]");
        if (!(pb.F.grid() == pb.g.grid())) throw ShapeError("stokes: F and g live on different grids");
    }
    const Grid& gr = pb.g.grid();
    if (!gr.uniform_normal() || !gr.uniform_time())
        throw ShapeError("stokes: the solver needs uniform normal and time spacing");
}

inline CompatibilityReport check_compatibility(const StokesProblem& pb, const StokesTolerances& tol = {}) {
    validate_problem(pb);
    CompatibilityReport r;
    const int n = pb.u0.dim();
    const auto dd = divergence_defect(pb.u0);
    r.div_u0 = dd.fine;
    r.div_u0_coarse = dd.coarse;
    // above the floor the defect must be stencil error: small and shrinking at the stencil rate
    const bool div_ok = dd.fine <= tol.div_u0 ||
        (dd.fine <= tol.div_cap && dd.coarse >= std::pow(2.0, tol.div_order) * dd.fine);
    double mis = 0.0, sc = 0.0;
    for (std::size_t p = 0; p < pb.g.np(); ++p)
        for (int c = 0; c < n; ++c) {
            mis = std::max(mis, std::abs(pb.g(0, 0, p, c) - pb.u0(0, 0, p, c)));
            sc = std::max(sc, std::abs(pb.u0(0, 0, p, c)));
        }
    sc = std::max({sc, pb.g.max_abs(), 1e-300});
    r.trace_mismatch = mis / sc;
    r.normal_mean = normal_mean_defect(pb.g);
    if (!div_ok) {
        r.ok = false;
        r.violated = "div u0 = 0";
    } else if (r.trace_mismatch > tol.compat) {
        r.ok = false;
        r.violated = "g(., 0) = u0 on x_n = 0";
    } else if (r.normal_mean > tol.normal_mean) {
        r.ok = false;
        r.violated = "zero tangential mean of g_n";
    }
    return r;
}

// ---------------------------------------------------------------- u0 extension

struct InitialExtension {
    Field field;                     // full normal extent, single time
    bool normal_trace = false;       // u0_n did not vanish on x_n = 0
    double projection_defect = 0.0;  // |P u~ - u~|_inf / |u~|_inf
};

/// Reflection of a vector field across x_n = 0 that keeps div u = 0:
///   u_n(x', -s) = sum_j lambda_j u_n(x', j s),  u'(x', -s) = -sum_j j lambda_j u'(x', j s)
/// with the E1 coefficients lambda_j of order k. Differentiating shows the
/// divergence at -s is the lambda-weighted sum of divergences at j s. Samples
/// reaching past H are read as 0, as in extend_halfspace.
inline Field solenoidal_extend(const Field& u, int k = 1) {
    if (u.rank() != Rank::vector || u.normal_extent() != NormalExtent::half)
        throw ShapeError("solenoidal_extend: vector half-space field required");
    if (!u.grid().uniform_normal()) throw ShapeError("solenoidal_extend: uniform normal spacing required");
    const auto co = ExtensionCoefficients::solve(k, ExtensionKind::spatial);
    const int n = u.dim(), nn = u.grid().nn();
    Field out(u.grid(), Rank::vector, NormalExtent::full, u.time_extent());
    for (std::size_t m = 0; m < u.nt_nodes(); ++m)
        for (int kk = 0; kk < 2 * nn; ++kk) {
            if (kk >= nn) {
                for (std::size_t p = 0; p < u.np(); ++p)
                    for (int c = 0; c < n; ++c) out(m, std::size_t(kk), p, c) = u(m, std::size_t(kk - nn), p, c);
                continue;
            }
            const int d = nn - kk;
            for (std::size_t j = 0; j < co.lambda.size(); ++j) {
                const int reach = int(j + 1) * d;
                if (reach > nn) continue;
                const double wn = co.lambda[j], wt = -double(j + 1) * co.lambda[j];
                for (std::size_t p = 0; p < u.np(); ++p)
                    for (int c = 0; c < n; ++c)
                        out(m, std::size_t(kk), p, c) += (c == n - 1 ? wn : wt) * u(m, std::size_t(reach), p, c);
            }
        }
    return out;
}

/// Divergence-free extension of u0 to the full normal period: the solenoidal
/// reflection, then the lattice Helmholtz projection to remove what the
/// sampling and the truncation at H leave behind. The projection defect
/// measures that remainder.
inline InitialExtension extend_initial_divfree(const Field& u0, int k = 1, double trace_tol = 1e-8) {
    if (u0.rank() != Rank::vector || u0.normal_extent() != NormalExtent::half)
        throw ShapeError("extend_initial_divfree: vector half-space field required");
    const int n = u0.dim();
    InitialExtension r;
    double normal_trace = 0.0;
    for (std::size_t m = 0; m < u0.nt_nodes(); ++m)
        for (std::size_t p = 0; p < u0.np(); ++p) normal_trace = std::max(normal_trace, std::abs(u0(m, 0, p, n - 1)));
    r.normal_trace = normal_trace > trace_tol * max_abs_or(u0);
    const Field e = solenoidal_extend(u0, k);
    r.field = helmholtz_project(e);
    r.projection_defect = (r.field - e).max_abs() / max_abs_or(e);
    return r;
}

// ---------------------------------------------------------------- parts

struct W1Result {
    Field full;  // full normal extent
    Field half;
    ExtensionReport extension;
};

inline W1Result solve_w1(const Field& F) {
    W1Result r;
    r.full = duhamel_forcing_full(F, &r.extension);
    r.half = restrict_halfspace(r.full);
    return r;
}

struct W2Result {
    Field full;
    Field half;
};

inline W2Result solve_w2(const Field& u0_ext) {
    W2Result r;
    r.full = heat_series(u0_ext);
    r.half = restrict_halfspace(r.full);
    return r;
}

/// Zero the tangential Nyquist modes of a boundary field (they have no odd
/// symbol, so R'_j and d_j vanish there). Returns the removed sup-norm share.
inline double filter_nyquist(Field& f) {
    Lattice lat(f);
    const auto modes = tangential_modes(lat);
    bool any = false;
    for (const auto& m : modes) any = any || m.nyquist;
    if (!any) return 0.0;
    const double before = f.max_abs();
    Field out(f.grid(), f.rank(), f.normal_extent(), f.time_extent());
    for (int c = 0; c < f.components(); ++c) {
        auto a = lat.forward(f, c);
        for (int h = 0; h < lat.howmany(); ++h)
            for (std::size_t q = 0; q < lat.block(); ++q)
                if (modes[q].nyquist) a[std::size_t(h) * lat.block() + q] = 0.0;
        lat.inverse(std::move(a), out, c);
    }
    const double removed = (out - f).max_abs();
    f = std::move(out);
    return before > 0.0 ? removed / before : 0.0;
}

struct W3Result {
    Field w3;
    Field pi3;
    Field h;
    double h_initial = 0.0;       // |h(., 0)|_inf / |h|_inf
    double nyquist_removed = 0.0;
};

/// w3 = 2 grad N*'h with h = g_n - w1_n - w2_n on x_n = 0; pi3 = -2 d_t N*'h.
inline W3Result solve_w3(const Field& g, const Field& w1, const Field& w2, double h0_tol = 1e-8) {
    const int n = g.dim();
    W3Result r;
    r.h = g.component(n - 1);
    for (const Field* w : {&w1, &w2}) {
        if (w->values().empty()) continue;
        Field tr = trace_of(*w);
        r.h -= tr.component(n - 1);
    }
    double h0 = 0.0;
    for (std::size_t p = 0; p < r.h.np(); ++p) h0 = std::max(h0, std::abs(r.h(0, 0, p)));
    const double scale = std::max({r.h.max_abs(), g.max_abs(), 1e-300});
    r.h_initial = h0 / scale;
    if (r.h_initial > h0_tol) throw PreconditionError("solve_w3: h(., 0) does not vanish (compatibility)");
    // exact zero at t = 0 removes the compatibility round-off
    for (std::size_t p = 0; p < r.h.np(); ++p) r.h(0, 0, p) = 0.0;
    r.nyquist_removed = filter_nyquist(r.h);
    Field grad = poisson_extend(r.h, PoissonOutput::gradient);
    r.w3 = 2.0 * grad;
    Field phi = poisson_extend(r.h, PoissonOutput::potential);
    r.pi3 = -2.0 * partial_t(phi);
    return r;
}

/// Tangential multiplier -i theta_j / kappa (R'_j) on a scalar boundary field.
inline Field tangential_riesz(const Field& f, int j) { return riesz_transform(f, j, RieszDims::tangential); }

struct W4Result {
    Field w4;
    Field S;  // the scalar potential
    double nyquist_removed = 0.0;
};

/// w4 from the tangential boundary remainder G (G_n = 0, G(., 0) = 0).
inline W4Result solve_w4(const Field& G_in, const KernelQuadrature& kq = {}, double tol = 1e-8) {
    if (G_in.rank() != Rank::vector || G_in.normal_extent() != NormalExtent::trace ||
        G_in.time_extent() != TimeExtent::half)
        throw ShapeError("solve_w4: vector boundary field over [0, T] required");
    const int n = G_in.dim();
    const double scale = max_abs_or(G_in);
    W4Result r;
    if (G_in.component(n - 1).max_abs() > tol * scale && G_in.max_abs() > 0.0)
        throw PreconditionError("solve_w4: normal component of G must vanish");
    Field G = G_in;
    for (std::size_t m = 0; m < G.nt_nodes(); ++m)
        for (std::size_t p = 0; p < G.np(); ++p) G(m, 0, p, n - 1) = 0.0;
    r.nyquist_removed = filter_nyquist(G);
    const Grid& gr = G.grid();
    Field out(gr, Rank::vector, NormalExtent::half, TimeExtent::half);
    r.S = Field(gr, Rank::scalar, NormalExtent::half, TimeExtent::half);
    if (G.max_abs() == 0.0) {
        r.w4 = out;
        return r;
    }
    require_zero_history(G, "solve_w4");

    // boundary sources: G_j (j < n) and sum_j R'_j G_j
    Field RG(gr, Rank::scalar, NormalExtent::trace, TimeExtent::half);
    for (int j = 0; j < n - 1; ++j) RG += tangential_riesz(G.component(j), j);
    Field src(gr, Rank::vector, NormalExtent::trace, TimeExtent::half);
    for (int j = 0; j < n - 1; ++j) src.set_component(j, G.component(j));
    src.set_component(n - 1, RG);
    const Field UG = layer_potential_U(src, kq);  // components: U G_j, U(sum R'G)

    ModeData md(UG);
    const std::size_t P = md.P, Nz = md.Nz, Nt = md.Nt;
    NormalKernelCache cache(gr.z());
    std::vector<std::vector<cplx>> W(std::size_t(n), std::vector<cplx>(md.lat.total(), 0.0));
    std::vector<cplx> Sh(md.lat.total(), 0.0);
    std::vector<cplx> F(Nz), tD(Nz), tS(Nz), tI(Nz), s(Nz), ds(Nz);
    for (std::size_t q = 0; q < P; ++q) {
        const auto& mode = md.modes[q];
        const double kap = mode.kappa;
        const NormalKernels* K = kap > 0.0 ? &cache.get(kap) : nullptr;
        for (std::size_t m = 0; m < Nt; ++m) {
            std::fill(s.begin(), s.end(), cplx(0.0));
            std::fill(ds.begin(), ds.end(), cplx(0.0));
            for (int c = 0; c < n; ++c) {
                const cplx* u = md.column(c, m, q);
                for (std::size_t k = 0; k < Nz; ++k) F[k] = -0.5 * u[k * P];
                if (!K) continue;  // S = 0 on the zero mode
                std::fill(tD.begin(), tD.end(), cplx(0.0));
                std::fill(tS.begin(), tS.end(), cplx(0.0));
                std::fill(tI.begin(), tI.end(), cplx(0.0));
                K->D.apply(F.data(), 1, tD.data(), 1);
                K->S.apply(F.data(), 1, tS.data(), 1);
                K->I.apply(F.data(), 1, tI.data(), 1);
                if (c < n - 1) {
                    const cplx it(0.0, mode.theta[std::size_t(c)]);
                    for (std::size_t k = 0; k < Nz; ++k) {
                        s[k] += it / (2.0 * kap) * (tD[k] - tI[k]);
                        ds[k] += 0.5 * it * (tS[k] + tI[k]);
                    }
                } else {
                    for (std::size_t k = 0; k < Nz; ++k) {
                        s[k] += 0.5 * (tS[k] - tI[k]);
                        ds[k] += 0.5 * kap * (tD[k] + tI[k]) - F[k];
                    }
                }
            }
            for (std::size_t k = 0; k < Nz; ++k) {
                const std::size_t idx = (m * Nz + k) * P + q;
                Sh[idx] = s[k];
                for (int i = 0; i < n - 1; ++i)
                    W[std::size_t(i)][idx] = -2.0 * md.comp[std::size_t(i)][idx] + 4.0 * cplx(0.0, mode.theta[std::size_t(i)]) * s[k];
                W[std::size_t(n - 1)][idx] = -2.0 * md.comp[std::size_t(n - 1)][idx] + 4.0 * ds[k];
            }
        }
    }
    for (int i = 0; i < n; ++i) md.lat.inverse(std::move(W[std::size_t(i)]), out, i);
    md.lat.inverse(std::move(Sh), r.S, 0);
    r.w4 = std::move(out);
    return r;
}

// ---------------------------------------------------------------- pipeline

struct StokesLedger {
    double div_w1_spectral = 0.0;  // on the full lattice, relative
    double div_w2_spectral = 0.0;
    double div_w3 = 0.0;           // stencil divergence, relative to |grad w|
    double div_w4 = 0.0;
    double div_w = 0.0;
    double boundary_residual = 0.0;  // |w - g|_inf on x_n = 0 for t > 0, relative to |g|_inf
    double initial_residual = 0.0;   // |w(0) - u0|_inf relative to |u0|_inf
    double initial_w1 = 0.0, initial_w3 = 0.0, initial_w4 = 0.0;
    double w4_normal_trace = 0.0;
    double G_initial_removed = 0.0;  // |G(., 0)|_inf share zeroed before U
    double h_initial = 0.0;
    double nyquist_removed_h = 0.0, nyquist_removed_G = 0.0;
    double u0_projection_defect = 0.0;
    bool u0_normal_trace = false;
    ExtensionReport forcing_extension;
};

struct StokesSolution {
    Field w1, w2, w3, w4, w;
    Field pi3;
    Field h, G;
    StokesLedger ledger;
};

struct StokesOptions {
    StokesTolerances tol;
    KernelQuadrature kq;
    bool check = true;  // run the compatibility check first
};

namespace detail {
inline double relative_stencil_div(const Field& w) {
    const double s = max_abs_or(pointwise_norm(gradient(w)));
    return divergence(w).max_abs() / s;
}
inline double initial_share(const Field& w, double scale) {
    return w.time_slice(0).max_abs() / std::max(scale, 1e-300);
}
}  // namespace detail

inline StokesSolution solve_stokes(const StokesProblem& pb, const StokesOptions& opt = {}) {
    validate_problem(pb);
    if (opt.check) {
        const auto c = check_compatibility(pb, opt.tol);
        if (!c.ok) throw PreconditionError("solve_stokes: compatibility violated: " + c.violated);
    }
    const Grid& gr = pb.grid();
    const int n = gr.dim();
    StokesSolution sol;
    auto& L = sol.ledger;

    W1Result w1;
    if (pb.has_forcing()) {
        w1 = solve_w1(pb.F);
        L.forcing_extension = w1.extension;
        sol.w1 = w1.half;
        L.div_w1_spectral = spectral_divergence(w1.full).max_abs() / max_abs_or(pointwise_norm(gradient(w1.full)));
        if (w1.full.max_abs() == 0.0) L.div_w1_spectral = 0.0;
    } else {
        sol.w1 = Field(gr, Rank::vector, NormalExtent::half, TimeExtent::half);
    }

    const auto ext = extend_initial_divfree(pb.u0);
    L.u0_normal_trace = ext.normal_trace;
    L.u0_projection_defect = ext.projection_defect;
    const W2Result w2 = solve_w2(ext.field);
    sol.w2 = w2.half;
    L.div_w2_spectral = w2.full.max_abs() == 0.0 ? 0.0
        : spectral_divergence(w2.full).max_abs() / max_abs_or(pointwise_norm(gradient(w2.full)));

    auto w3 = solve_w3(pb.g, sol.w1, sol.w2, std::max(opt.tol.compat, 10 * L.u0_projection_defect));
    sol.w3 = w3.w3;
    sol.pi3 = w3.pi3;
    sol.h = w3.h;
    L.h_initial = w3.h_initial;
    L.nyquist_removed_h = w3.nyquist_removed;

    // tangential remainder
    Field G = pb.g;
    for (const Field* w : {&sol.w1, &sol.w2, &sol.w3}) G -= trace_of(*w);
    for (std::size_t m = 0; m < G.nt_nodes(); ++m)
        for (std::size_t p = 0; p < G.np(); ++p) G(m, 0, p, n - 1) = 0.0;
    L.G_initial_removed = G.time_slice(0).max_abs() / max_abs_or(pb.g);
    for (std::size_t p = 0; p < G.np(); ++p)
        for (int c = 0; c < n; ++c) G(0, 0, p, c) = 0.0;
    sol.G = G;
    auto w4 = solve_w4(G, opt.kq);
    sol.w4 = w4.w4;
    L.nyquist_removed_G = w4.nyquist_removed;

    sol.w = sol.w1 + sol.w2 + sol.w3 + sol.w4;

    // ledgers
    L.div_w3 = sol.w3.max_abs() == 0.0 ? 0.0 : detail::relative_stencil_div(sol.w3);
    L.div_w4 = sol.w4.max_abs() == 0.0 ? 0.0 : detail::relative_stencil_div(sol.w4);
    L.div_w = sol.w.max_abs() == 0.0 ? 0.0 : detail::relative_stencil_div(sol.w);
    const double gs = max_abs_or(pb.g);
    {
        // t = 0 is governed by the extension of u0 and reported as G_initial_removed
        Field d = trace_of(sol.w) - pb.g;
        double worst = 0.0;
        for (std::size_t m = 1; m < d.nt_nodes(); ++m) worst = std::max(worst, d.time_slice(m).max_abs());
        L.boundary_residual = worst / gs;
    }
    const double us = max_abs_or(pb.u0);
    L.initial_residual = (sol.w.time_slice(0) - pb.u0).max_abs() / std::max(us, gs);
    if (pb.u0.max_abs() == 0.0 && sol.w.max_abs() == 0.0) L.initial_residual = 0.0;
    const double ws = max_abs_or(sol.w);
    L.initial_w1 = detail::initial_share(sol.w1, ws);
    L.initial_w3 = detail::initial_share(sol.w3, ws);
    L.initial_w4 = detail::initial_share(sol.w4, ws);
    L.w4_normal_trace = trace_of(sol.w4).component(n - 1).max_abs() / ws;
    return sol;
}

}  // namespace hsf
