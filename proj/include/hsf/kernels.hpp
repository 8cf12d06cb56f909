#pragma once

// Fundamental-solution operators on the periodic-in-x' half-space.
//
// Conventions (kappa = 2 pi |xi'|, theta = 2 pi xi'):
//   N^(xi', z)        = -exp(-kappa |z|) / (2 kappa)        (Laplace N = delta)
//   Gamma^(xi', z, r) = exp(-kappa^2 r) (4 pi r)^{-1/2} exp(-z^2 / 4r)
// Every x' convolution is an exact lattice multiplier; only x_n and t integrals
// are discretized (product integration against piecewise-linear data).

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "hsf/extension.hpp"
#include "hsf/field.hpp"
#include "hsf/lattice.hpp"
#include "hsf/spectral.hpp"

namespace hsf {

/// exp(x^2) erfc(x) for x >= 0.
inline double erfcx(double x) {
    if (x < 0.0) return 2.0 * std::exp(x * x) - erfcx(-x);
    if (x < 26.0) return std::exp(x * x) * std::erfc(x);
    // asymptotic series, truncation error below 1e-16 here
    const double r = 1.0 / (2.0 * x * x);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 8; ++k) {
        term *= -(2.0 * k - 1.0) * r;
        sum += term;
    }
    return sum / (x * std::sqrt(std::numbers::pi));
}

/// I0 = int_0^h e^{-a s} ds and I1 = int_0^h s e^{-a s} ds for a >= 0.
inline std::pair<double, double> exp_moments(double a, double h) {
    const double x = a * h;
    if (x < 0.1) {
        // (1 - e^{-x})/x = sum_{k>=1} (-x)^{k-1}/k!,  (1 - e^{-x}(1+x))/x^2 = sum_{k>=2} (k-1)(-x)^{k-2}/k!
        double g0 = 0.0, g1 = 0.0, p = 1.0;  // p = (-x)^{k-1}/k!
        for (int k = 1; k <= 14; ++k) {
            p /= k;
            g0 += p;
            p *= -x;
        }
        double r = 0.5;  // (-x)^{k-2}/k!, starting at k = 2
        for (int k = 2; k <= 15; ++k) {
            g1 += (k - 1) * r;
            r *= -x / (k + 1);
        }
        return {h * g0, h * h * g1};
    }
    const double e = std::exp(-x);
    return {(1.0 - e) / a, (1.0 - e * (1.0 + x)) / (a * a)};
}

/// Weights (near, far) of int_0^h e^{-a s} g(s) ds for g linear between g(0) and g(h).
inline std::pair<double, double> exp_panel(double a, double h) {
    const auto [i0, i1] = exp_moments(a, h);
    return {i0 - i1 / h, i1 / h};
}

/// Time-singularity rules. Panels of the heat-flux kernel with z^2/(4r) above
/// drop_exponent carry less than e^{-drop_exponent} and are skipped.
struct KernelQuadrature {
    double drop_exponent = 30.0;

    /// int_0^r K(z, s) ds with K = z (4 pi)^{-1/2} s^{-3/2} exp(-z^2/4s - kappa^2 s).
    static double flux_mass(double kappa, double z, double r) {
        if (r <= 0.0) return 0.0;
        if (z == 0.0) return 1.0;
        const double sr = std::sqrt(r);
        const double a = z / (2 * sr) - kappa * sr;
        const double b = z / (2 * sr) + kappa * sr;
        const double E = std::exp(-z * z / (4 * r) - kappa * kappa * r);
        const double first = a > 0 ? E * erfcx(a) : std::exp(-kappa * z) * std::erfc(a);
        return 0.5 * (first + E * erfcx(b));
    }

    /// int_0^r s K(z, s) ds.
    static double flux_moment(double kappa, double z, double r) {
        if (r <= 0.0 || z == 0.0) return 0.0;
        const double sr = std::sqrt(r);
        const double u = z / (2 * sr);
        if (kappa == 0.0)
            return z / std::sqrt(std::numbers::pi) * sr * std::exp(-u * u) - 0.5 * z * z * std::erfc(u);
        const double a = u - kappa * sr;
        const double b = u + kappa * sr;
        const double E = std::exp(-z * z / (4 * r) - kappa * kappa * r);
        const double first = a > 0 ? E * erfcx(a) : std::exp(-kappa * z) * std::erfc(a);
        return z / (4 * kappa) * (first - E * erfcx(b));
    }

    /// Product-integration weights of int_0^{t_m} K(z, r) f(t_m - r) dr for
    /// piecewise-linear f: panel d (r in [d dt, (d+1) dt]) contributes
    /// lo[d] f(t_{m-d}) + hi[d] f(t_{m-d-1}).
    void flux_weights(double kappa, double z, int nt, double dt, std::vector<double>& lo,
                      std::vector<double>& hi) const {
        lo.assign(std::size_t(nt), 0.0);
        hi.assign(std::size_t(nt), 0.0);
        if (z == 0.0) {
            lo[0] = 1.0;  // all mass at r = 0+
            return;
        }
        double P0 = 0.0, M0 = 0.0;
        bool started = false;
        for (int d = 0; d < nt; ++d) {
            const double ra = d * dt, rb = (d + 1) * dt;
            if (z * z / (4 * rb) > drop_exponent) continue;
            if (!started) {
                P0 = flux_mass(kappa, z, ra);
                M0 = flux_moment(kappa, z, ra);
                started = true;
            }
            const double P1 = flux_mass(kappa, z, rb);
            const double M1 = flux_moment(kappa, z, rb);
            const double m0 = P1 - P0, m1 = M1 - M0;
            lo[std::size_t(d)] = (rb * m0 - m1) / dt;
            hi[std::size_t(d)] = (m1 - ra * m0) / dt;
            P0 = P1;
            M0 = M1;
        }
    }

    /// Abel weights of int_0^{t_m} f(s)(t_m - s)^{-1/2} ds, node j = 0..m.
    static std::vector<double> abel_weights(int m, double dt) {
        std::vector<double> w(static_cast<std::size_t>(m + 1));
        for (int j = 0; j <= m; ++j) w[std::size_t(j)] = std::sqrt(dt) * abel_hat_weight(m, j);
        return w;
    }
};

/// Per-tangential-mode data of a lattice whose normal axis is not periodic.
struct TangentialMode {
    double kappa = 0.0;                  // 2 pi |xi'| (true frequencies)
    std::array<double, 2> theta{0, 0};   // 2 pi xi'_j with Nyquist zeroed
    bool nyquist = false;
};

inline std::vector<TangentialMode> tangential_modes(const Lattice& lat) {
    if (lat.normal_periodic() || lat.time_periodic())
        throw ShapeError("tangential_modes: tangential-only lattice required");
    std::vector<TangentialMode> out(lat.block());
    for (std::size_t q = 0; q < lat.block(); ++q) {
        const Freq t = lat.freq(q, false), o = lat.freq(q, true);
        auto& md = out[q];
        md.kappa = kTwoPi * t.xi_norm();
        for (int a = 0; a < lat.tangential_dims(); ++a) {
            md.theta[std::size_t(a)] = kTwoPi * o.xi[std::size_t(a)];
            if (o.xi[std::size_t(a)] == 0.0 && t.xi[std::size_t(a)] != 0.0) md.nyquist = true;
        }
    }
    return out;
}

/// Square matrix of 1-D x_n quadrature weights, row = target node, column = source node.
struct NormalMatrix {
    std::size_t n = 0;
    std::vector<double> w;
    explicit NormalMatrix(std::size_t n_ = 0) : n(n_), w(n_ * n_, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return w[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return w[i * n + j]; }
    /// y = W x (complex, strided)
    void apply(const cplx* x, std::size_t sx, cplx* y, std::size_t sy, double scale = 1.0) const {
        for (std::size_t i = 0; i < n; ++i) {
            cplx s = 0.0;
            const double* row = &w[i * n];
            for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j * sx];
            y[i * sy] += scale * s;
        }
    }
};

/// Product-quadrature matrices of the x_n kernels for one kappa on nodes z:
///   D: exp(-kappa |z - y|), S: sign(y - z) exp(-kappa |z - y|), I: exp(-kappa (z + y)),
/// and the kappa = 0 linear kernels A: |z - y|, B: z + y. Data piecewise linear in y.
struct NormalKernels {
    NormalMatrix D, S, I, A, B;

    NormalKernels(double kappa, const std::vector<double>& z)
        : D(z.size()), S(z.size()), I(z.size()), A(z.size()), B(z.size()) {
        const std::size_t n = z.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double zi = z[i];
            for (std::size_t p = 0; p + 1 < n; ++p) {
                const double ya = z[p], yb = z[p + 1], h = yb - ya;
                const auto [near, far] = exp_panel(kappa, h);
                if (yb <= zi) {
                    // decays towards smaller y; near end is yb
                    const double c = std::exp(-kappa * (zi - yb));
                    D(i, p + 1) += c * near;
                    D(i, p) += c * far;
                    S(i, p + 1) -= c * near;
                    S(i, p) -= c * far;
                } else {
                    const double c = std::exp(-kappa * (ya - zi));
                    D(i, p) += c * near;
                    D(i, p + 1) += c * far;
                    S(i, p) += c * near;
                    S(i, p + 1) += c * far;
                }
                const double ci = std::exp(-kappa * (zi + ya));
                I(i, p) += ci * near;
                I(i, p + 1) += ci * far;
                // linear kernels: exact for linear x linear
                auto lin = [&](NormalMatrix& M, double ka, double kb) {
                    M(i, p) += h / 6.0 * (2 * ka + kb);
                    M(i, p + 1) += h / 6.0 * (ka + 2 * kb);
                };
                lin(A, std::abs(zi - ya), std::abs(zi - yb));
                lin(B, zi + ya, zi + yb);
            }
        }
    }
};

/// Cache of NormalKernels keyed by kappa for one set of normal nodes.
class NormalKernelCache {
public:
    explicit NormalKernelCache(std::vector<double> z) : z_(std::move(z)) {}
    const NormalKernels& get(double kappa) {
        auto it = cache_.find(kappa);
        if (it == cache_.end()) it = cache_.emplace(kappa, NormalKernels(kappa, z_)).first;
        return it->second;
    }

private:
    std::vector<double> z_;
    std::map<double, NormalKernels> cache_;
};

// ---------------------------------------------------------------- heat

/// e^{t Laplace} on the full-space lattice (every spatial axis periodic).
inline Field heat_evolve(const Field& u0, double t) {
    if (t < 0.0) throw std::invalid_argument("heat_evolve: t < 0");
    if (u0.normal_extent() != NormalExtent::full) throw ShapeError("heat_evolve: full-space lattice required");
    if (u0.time_extent() == TimeExtent::full) throw ShapeError("heat_evolve: spatial data expected");
    MultiplierSpec m;
    m.zero_value = 1.0;
    m.symbol = [t](const Freq& fr) -> cplx { return std::exp(-kTwoPi * kTwoPi * fr.xi_norm2() * t); };
    return apply_multiplier(u0, m);
}

/// e^{t_m Laplace} u0 at every node of the (uniform) time grid; u0 is a single-time full-space field.
inline Field heat_series(const Field& u0) {
    if (u0.normal_extent() != NormalExtent::full || u0.time_extent() != TimeExtent::single)
        throw ShapeError("heat_series: single-time full-space field required");
    Field out(u0.grid(), u0.rank(), NormalExtent::full, TimeExtent::half);
    Lattice lat(u0);
    const std::size_t B = lat.block();
    const std::size_t Nt = out.nt_nodes();
    Field slice(u0.grid(), Rank::scalar, NormalExtent::full, TimeExtent::single);
    for (int c = 0; c < u0.components(); ++c) {
        const auto a0 = lat.forward(u0, c);
        for (std::size_t m = 0; m < Nt; ++m) {
            const double t = out.t(m);
            auto a = a0;
            for (std::size_t q = 0; q < B; ++q) a[q] *= std::exp(-kTwoPi * kTwoPi * lat.freq(q, false).xi_norm2() * t);
            lat.inverse(std::move(a), slice, 0);
            const std::size_t n = slice.size();
            for (std::size_t i = 0; i < n; ++i) out.values()[(m * n + i) * std::size_t(u0.components()) + std::size_t(c)] = slice.values()[i];
        }
    }
    return out;
}

// ---------------------------------------------------------------- N*'

enum class PoissonOutput { potential, gradient };

/// phi = N*' h: phi^(xi', z) = -exp(-kappa z)/(2 kappa) h^(xi'), zero mode 0.
/// gradient: (i theta_j phi^, +1/2 exp(-kappa z) h^).
inline Field poisson_extend(const Field& h, PoissonOutput what = PoissonOutput::potential) {
    if (h.rank() != Rank::scalar || h.normal_extent() != NormalExtent::trace)
        throw ShapeError("poisson_extend: scalar boundary field required");
    if (h.time_extent() == TimeExtent::full) throw ShapeError("poisson_extend: half or single time extent required");
    Lattice lin(h);
    const auto modes = tangential_modes(lin);
    const auto a = lin.forward(h);
    const int n = h.dim();
    const bool grad = what == PoissonOutput::gradient;
    Field out(h.grid(), grad ? Rank::vector : Rank::scalar, NormalExtent::half, h.time_extent());
    Lattice lout(out);
    const std::size_t P = lin.block(), Nz = out.nz_nodes(), Nt = out.nt_nodes();
    const int C = grad ? n : 1;
    for (int c = 0; c < C; ++c) {
        std::vector<cplx> b(lout.total(), 0.0);
        for (std::size_t m = 0; m < Nt; ++m)
            for (std::size_t k = 0; k < Nz; ++k) {
                const double z = out.z(k);
                for (std::size_t q = 0; q < P; ++q) {
                    const double kap = modes[q].kappa;
                    if (kap == 0.0) continue;
                    const double e = std::exp(-kap * z);
                    const cplx hq = a[m * P + q];
                    cplx v;
                    if (!grad) v = -e / (2 * kap) * hq;
                    else if (c == n - 1) v = 0.5 * e * hq;
                    else v = cplx(0.0, modes[q].theta[std::size_t(c)]) * (-e / (2 * kap)) * hq;
                    b[(m * Nz + k) * P + q] = v;
                }
            }
        lout.inverse(std::move(b), out, c);
    }
    return out;
}

// ---------------------------------------------------------------- N*, N**

enum class NewtonVariant { direct, image };

inline NewtonVariant parse_newton_variant(const std::string& s) {
    if (s == "direct") return NewtonVariant::direct;
    if (s == "image") return NewtonVariant::image;
    throw std::invalid_argument("newton_potential: unknown variant '" + s + "'");
}

/// Tangential spectrum of each component, with the normal extent kept.
struct ModeData {
    Lattice lat;
    std::vector<TangentialMode> modes;
    std::vector<std::vector<cplx>> comp;
    std::size_t P, Nz, Nt;

    explicit ModeData(const Field& f) : lat(f), modes(tangential_modes(lat)) {
        for (int c = 0; c < f.components(); ++c) comp.push_back(lat.forward(f, c));
        P = lat.block();
        Nz = f.nz_nodes();
        Nt = f.nt_nodes();
    }
    cplx* column(int c, std::size_t m, std::size_t q) { return &comp[std::size_t(c)][(m * Nz) * P + q]; }
};

/// N*g (direct) or N**g (image) over the truncated box 0 <= y_n <= H.
/// kappa = 0 uses the 1-D kernels |z - y|/2 and (z + y)/2.
inline Field newton_potential(const Field& g, NewtonVariant v) {
    if (g.rank() != Rank::scalar || g.normal_extent() != NormalExtent::half)
        throw ShapeError("newton_potential: scalar half-space field required");
    if (g.time_extent() == TimeExtent::full) throw ShapeError("newton_potential: half or single time extent required");
    ModeData in(g);
    NormalKernelCache cache(g.grid().z());
    std::vector<cplx> b(in.lat.total(), 0.0);
    for (std::size_t q = 0; q < in.P; ++q) {
        const double kap = in.modes[q].kappa;
        const auto& K = cache.get(kap);
        const NormalMatrix& M = kap == 0.0 ? (v == NewtonVariant::direct ? K.A : K.B)
                                           : (v == NewtonVariant::direct ? K.D : K.I);
        const double s = kap == 0.0 ? 0.5 : -1.0 / (2 * kap);
        for (std::size_t m = 0; m < in.Nt; ++m)
            M.apply(in.column(0, m, q), in.P, &b[(m * in.Nz) * in.P + q], in.P, s);
    }
    Field out(g.grid(), Rank::scalar, NormalExtent::half, g.time_extent());
    in.lat.inverse(std::move(b), out, 0);
    return out;
}

/// Hessian of N*g or N**g (row-major n x n), from tangential multipliers and the
/// differentiated x_n kernels.
inline Field newton_hessian(const Field& g, NewtonVariant v) {
    if (g.rank() != Rank::scalar || g.normal_extent() != NormalExtent::half)
        throw ShapeError("newton_hessian: scalar half-space field required");
    if (g.time_extent() == TimeExtent::full) throw ShapeError("newton_hessian: half or single time extent required");
    ModeData in(g);
    NormalKernelCache cache(g.grid().z());
    const int n = g.dim();
    const std::size_t P = in.P, Nz = in.Nz;
    std::vector<cplx> pot(in.lat.total(), 0.0), dz(in.lat.total(), 0.0), dzz(in.lat.total(), 0.0);
    const bool direct = v == NewtonVariant::direct;
    for (std::size_t q = 0; q < P; ++q) {
        const double kap = in.modes[q].kappa;
        const auto& K = cache.get(kap);
        for (std::size_t m = 0; m < in.Nt; ++m) {
            const cplx* src = in.column(0, m, q);
            const std::size_t o = (m * Nz) * P + q;
            if (kap == 0.0) {
                (direct ? K.A : K.B).apply(src, P, &pot[o], P, 0.5);
                if (direct) K.S.apply(src, P, &dz[o], P, -0.5);
                else K.I.apply(src, P, &dz[o], P, 0.5);
            } else {
                (direct ? K.D : K.I).apply(src, P, &pot[o], P, -1.0 / (2 * kap));
                if (direct) K.S.apply(src, P, &dz[o], P, -0.5);
                else K.I.apply(src, P, &dz[o], P, 0.5);
            }
            for (std::size_t k = 0; k < Nz; ++k) {
                dzz[o + k * P] = kap * kap * pot[o + k * P] + (direct ? src[k * P] : cplx(0.0));
            }
        }
    }
    Field out(g.grid(), Rank::tensor, NormalExtent::half, g.time_extent());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::vector<cplx> b(pot.size());
            const bool ni = i == n - 1, nj = j == n - 1;
            for (std::size_t idx = 0; idx < b.size(); ++idx) {
                const auto& md = in.modes[idx % P];
                if (ni && nj) b[idx] = dzz[idx];
                else if (ni || nj) b[idx] = cplx(0.0, md.theta[std::size_t(ni ? j : i)]) * dz[idx];
                else b[idx] = -md.theta[std::size_t(i)] * md.theta[std::size_t(j)] * pot[idx];
            }
            in.lat.inverse(std::move(b), out, i * n + j);
        }
    return out;
}

// ---------------------------------------------------------------- U

/// U f = int_0^t int D_{x_n} Gamma(x' - y', x_n, t - s) f(y', s) dy' ds for
/// zero-history boundary data f (componentwise). Per mode the kernel is
/// -1/2 K(z, r) with K the normalized flux kernel, so U f -> -f/2 as x_n -> 0+.
inline Field layer_potential_U(const Field& f, const KernelQuadrature& kq = {}) {
    if (f.normal_extent() != NormalExtent::trace) throw ShapeError("layer_potential_U: boundary field required");
    if (!f.grid().uniform_time()) throw ShapeError("layer_potential_U: uniform time grid required");
    require_zero_history(f, "layer_potential_U");
    ModeData in(f);
    Field out(f.grid(), f.rank(), NormalExtent::half, TimeExtent::half);
    Lattice lout(out);
    const std::size_t P = in.P, Nz = out.nz_nodes();
    const int nt = f.grid().nt();
    const double dt = f.grid().dt();
    const auto& z = f.grid().z();
    std::vector<std::vector<cplx>> b(std::size_t(f.components()), std::vector<cplx>(lout.total(), 0.0));
    std::map<double, std::size_t> kappa_ids;
    std::vector<std::vector<double>> LO, HI;  // per (kappa id, k)
    std::vector<double> lo, hi;
    for (std::size_t q = 0; q < P; ++q) {
        const double kap = in.modes[q].kappa;
        auto [it, fresh] = kappa_ids.emplace(kap, kappa_ids.size());
        if (fresh) {
            for (std::size_t k = 0; k < Nz; ++k) {
                kq.flux_weights(kap, z[k], nt, dt, lo, hi);
                LO.push_back(lo);
                HI.push_back(hi);
            }
        }
        const std::size_t base = it->second * Nz;
        for (int c = 0; c < f.components(); ++c) {
            const auto& a = in.comp[std::size_t(c)];
            auto& bc = b[std::size_t(c)];
            for (std::size_t k = 0; k < Nz; ++k) {
                const auto& wl = LO[base + k];
                const auto& wh = HI[base + k];
                for (int m = 1; m <= nt; ++m) {
                    cplx s = 0.0;
                    for (int d = 0; d < m; ++d) {
                        if (wl[std::size_t(d)] == 0.0 && wh[std::size_t(d)] == 0.0) continue;
                        s += wl[std::size_t(d)] * a[std::size_t(m - d) * P + q] +
                             wh[std::size_t(d)] * a[std::size_t(m - d - 1) * P + q];
                    }
                    bc[(std::size_t(m) * Nz + k) * P + q] = -0.5 * s;
                }
            }
        }
    }
    for (int c = 0; c < f.components(); ++c) lout.inverse(std::move(b[std::size_t(c)]), out, c);
    return out;
}

// ---------------------------------------------------------------- Duhamel

/// w1 = int_0^t e^{(t-s) Laplace} P div F~(s) ds on the full-space lattice, F~ = E1 F
/// (k = 1). Exponential integrator, exact for F piecewise linear in t.
inline Field duhamel_forcing_full(const Field& F, ExtensionReport* report = nullptr) {
    if (F.rank() != Rank::tensor) throw ShapeError("duhamel_forcing: tensor field required");
    if (F.normal_extent() != NormalExtent::half || F.time_extent() != TimeExtent::half)
        throw ShapeError("duhamel_forcing: half-space space-time field required");
    if (!F.grid().uniform_time()) throw ShapeError("duhamel_forcing: uniform time grid required");
    const Field Fe = extend_halfspace(F, 1, report);
    Lattice lat(Fe);
    const int n = F.dim();
    const std::size_t B = lat.block();
    const int Nt = lat.howmany();
    const double dt = F.grid().dt();
    std::vector<std::vector<cplx>> A;
    for (int c = 0; c < n * n; ++c) A.push_back(lat.forward(Fe, c));
    std::vector<std::vector<cplx>> W(std::size_t(n), std::vector<cplx>(lat.total(), 0.0));
    const auto un = static_cast<std::size_t>(n);
    std::vector<cplx> fprev(un), fcur(un), w(un);
    for (std::size_t q = 0; q < B; ++q) {
        const Freq od = lat.freq(q, true);
        const double mu = kTwoPi * kTwoPi * lat.freq(q, false).xi_norm2();
        const double r2 = od.xi_norm2();
        auto forcing = [&](int m, std::vector<cplx>& f) {
            const std::size_t idx = std::size_t(m) * B + q;
            for (int i = 0; i < n; ++i) {
                cplx s = 0.0;
                for (int j = 0; j < n; ++j) s += cplx(0.0, kTwoPi * od.xi[std::size_t(j)]) * A[std::size_t(i * n + j)][idx];
                f[std::size_t(i)] = s;
            }
            if (r2 == 0.0) return;
            cplx dot = 0.0;
            for (int j = 0; j < n; ++j) dot += od.xi[std::size_t(j)] * f[std::size_t(j)];
            for (int i = 0; i < n; ++i) f[std::size_t(i)] -= od.xi[std::size_t(i)] * dot / r2;
        };
        const double decay = std::exp(-mu * dt);
        // weights for f at the old node (far from t_{m+1}) and the new node
        const auto [near, far] = exp_panel(mu, dt);
        std::fill(w.begin(), w.end(), 0.0);
        forcing(0, fprev);
        for (int m = 1; m < Nt; ++m) {
            forcing(m, fcur);
            for (int i = 0; i < n; ++i) {
                w[std::size_t(i)] = decay * w[std::size_t(i)] + far * fprev[std::size_t(i)] + near * fcur[std::size_t(i)];
                W[std::size_t(i)][std::size_t(m) * B + q] = w[std::size_t(i)];
            }
            std::swap(fprev, fcur);
        }
    }
    Field out(F.grid(), Rank::vector, NormalExtent::full, TimeExtent::half);
    for (int i = 0; i < n; ++i) lat.inverse(std::move(W[std::size_t(i)]), out, i);
    return out;
}

inline Field duhamel_forcing(const Field& F, ExtensionReport* report = nullptr) {
    return restrict_halfspace(duhamel_forcing_full(F, report));
}

}  // namespace hsf
