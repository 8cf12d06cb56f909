#pragma once

// Weak-form checks for the Stokes system against smooth compactly supported
// solenoidal test fields. With Phi = (d_n psi, 0, ..., -d_1 psi) (zero in the
// middle components when n = 3) and psi a product of bumps in x1 (x2), x_n and t,
//
//   int_0^T int (-u . (Phi_t + Laplace Phi) + F : grad Phi) dx dt = int u0 . Phi(., 0) dx,
//
// and for a scalar bump Psi supported inside the half-space,
//   int u(., t) . grad Psi dx = 0  for every t.

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "hsf/field.hpp"
#include "hsf/quadrature.hpp"

namespace hsf {

/// Exponent of the polynomial bump b(s) = (1 - s^2)^K.
inline constexpr int kBumpPower = 10;

/// b(s) = (1 - s^2)^K on |s| < 1 and its first three derivatives. The bump is
/// C^{K-1}, which keeps the trapezoid rule accurate for the third derivatives
/// at a few points per radius (the exp(-1/(1-s^2)) bump needs far more).
inline std::array<double, 4> bump_derivs(double s) {
    if (std::abs(s) >= 1.0) return {0.0, 0.0, 0.0, 0.0};
    constexpr double K = kBumpPower;
    const double u = 1.0 - s * s;
    const double u3 = std::pow(u, K - 3), u2 = u3 * u, u1 = u2 * u;
    return {u1 * u,
            -2.0 * K * s * u1,
            4.0 * K * (K - 1) * s * s * u2 - 2.0 * K * u1,
            -8.0 * K * (K - 1) * (K - 2) * s * s * s * u3 + 12.0 * K * (K - 1) * s * u2};
}

/// Bump of radius r around c, derivatives in the physical variable. A positive
/// period wraps the offset into (-period/2, period/2].
struct Bump {
    double c = 0.0, r = 1.0, period = 0.0;

    std::array<double, 4> eval(double x) const {
        double d = x - c;
        if (period > 0.0) d -= period * std::round(d / period);
        auto v = bump_derivs(d / r);
        double sc = 1.0;
        for (auto& e : v) {
            e *= sc;
            sc /= r;
        }
        return v;
    }
};

/// One member of the solenoidal test family.
struct WeakTestField {
    Bump x1, x2, z, t;  // x2 unused when n = 2; t is centred at 0 (support [0, t.r))
    std::string label;
};

inline std::string describe(const WeakTestField& w) {
    std::ostringstream os;
    os << "x1=" << w.x1.c << "/" << w.x1.r << " z=" << w.z.c << "/" << w.z.r << " tau=" << w.t.r;
    return os.str();
}

/// Deterministic family: three tangential scales crossed with four
/// (normal centre, normal radius, time support) placements.
inline std::vector<WeakTestField> weak_test_family(const Grid& g, int count = 12) {
    const double L = g.L(), H = g.H(), T = g.T();
    const std::array<double, 3> xr{0.45 * L, 0.3 * L, 0.2 * L};
    // centres avoid multiples of L/8, where single Fourier modes are symmetric
    const std::array<double, 3> xc{0.37 * L, 0.46 * L, 0.71 * L};
    // normal placements stay clear of x_n = 0 and of the top of the box
    const std::array<std::array<double, 3>, 4> zp{{{0.25 * H, 0.2 * H, T},
                                                    {0.15 * H, 0.12 * H, 0.75 * T},
                                                    {0.35 * H, 0.25 * H, 0.5 * T},
                                                    {0.1 * H, 0.08 * H, T}}};
    std::vector<WeakTestField> out;
    for (int i = 0; int(out.size()) < count; ++i) {
        const auto a = std::size_t(i % 3), b = std::size_t((i / 3) % 4);
        const double shrink = 1.0 / (1.0 + double(i / 12));  // past twelve members, narrower copies
        WeakTestField w;
        w.x1 = {xc[a], xr[a] * shrink, L};
        w.x2 = {xc[(a + 1) % 3], xr[(a + 1) % 3] * shrink, L};
        w.z = {zp[b][0], zp[b][1] * shrink, 0.0};
        w.t = {0.0, zp[b][2], 0.0};
        w.label = "phi" + std::to_string(out.size());
        out.push_back(w);
    }
    return out;
}

struct WeakMemberResult {
    std::string label;
    double lhs_transport = 0.0;  // int int u . (Phi_t + Laplace Phi)
    double lhs_forcing = 0.0;    // int int F : grad Phi
    double rhs = 0.0;            // int u0 . Phi(0)
    double scale = 0.0;          // the same three integrals with absolute values inside
    double residual = 0.0;       // |-transport + forcing - rhs| / scale
};

struct WeakReport {
    std::vector<WeakMemberResult> members;
    double max_residual = 0.0;
    double max_divergence_pairing = 0.0;
};

namespace detail {

/// Node weights of the trapezoid rule on an arbitrary increasing abscissa.
inline std::vector<double> trapezoid_weights(const std::vector<double>& x) {
    std::vector<double> w(x.size(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    return w;
}

/// Phi, its time derivative, Laplacian and gradient at one point.
struct PhiSample {
    std::array<double, 3> phi{}, phi_t{}, lap{};
    std::array<double, 9> grad{};  // grad[i * n + j] = d_j Phi_i
};

inline PhiSample sample_phi(const WeakTestField& w, int n, const std::vector<double>& x, double t) {
    PhiSample s;
    const auto X = w.x1.eval(x[0]);
    const std::array<double, 4> one{1.0, 0.0, 0.0, 0.0};
    const auto Y = n == 3 ? w.x2.eval(x[1]) : one;
    const auto Z = w.z.eval(x[std::size_t(n - 1)]);
    const auto Tt = w.t.eval(t);
    const std::size_t N = std::size_t(n - 1);
    // psi = X Y Z T;  Phi_0 = X Y Z' T,  Phi_N = -X' Y Z T
    auto P0 = [&](int a, int b, int c, int d) { return X[std::size_t(a)] * Y[std::size_t(b)] * Z[std::size_t(c + 1)] * Tt[std::size_t(d)]; };
    auto PN = [&](int a, int b, int c, int d) { return -X[std::size_t(a + 1)] * Y[std::size_t(b)] * Z[std::size_t(c)] * Tt[std::size_t(d)]; };
    s.phi[0] = P0(0, 0, 0, 0);
    s.phi[N] = PN(0, 0, 0, 0);
    s.phi_t[0] = P0(0, 0, 0, 1);
    s.phi_t[N] = PN(0, 0, 0, 1);
    s.lap[0] = P0(2, 0, 0, 0) + P0(0, 0, 2, 0) + (n == 3 ? P0(0, 2, 0, 0) : 0.0);
    s.lap[N] = PN(2, 0, 0, 0) + PN(0, 0, 2, 0) + (n == 3 ? PN(0, 2, 0, 0) : 0.0);
    const std::size_t un = std::size_t(n);
    // derivative multi-index for direction j
    auto dir = [&](int j, std::array<int, 3>& m) { m = {0, 0, 0}; m[j == 0 ? 0 : (j == n - 1 ? 2 : 1)] = 1; };
    for (int j = 0; j < n; ++j) {
        std::array<int, 3> m;
        dir(j, m);
        s.grad[0 * un + std::size_t(j)] = P0(m[0], m[1], m[2], 0);
        s.grad[N * un + std::size_t(j)] = PN(m[0], m[1], m[2], 0);
    }
    return s;
}

}  // namespace detail

/// Weak-form residual of a velocity field u (vector, half normal extent, half
/// time) for data u0 and forcing F (F may be empty) over a test family.
inline WeakReport weak_residual(const Field& u, const Field& u0, const Field& F,
                                const std::vector<WeakTestField>& family, int gregory_order = 8) {
    if (u.rank() != Rank::vector || u.normal_extent() != NormalExtent::half || u.time_extent() != TimeExtent::half)
        throw ShapeError("weak_residual: u must be a vector field on the half-space over [0, T]");
    const bool forcing = !F.values().empty();
    if (forcing && (F.rank() != Rank::tensor || F.grid() != u.grid() || F.normal_extent() != NormalExtent::half))
        throw ShapeError("weak_residual: F must be a tensor half-space field on the grid of u");
    if (u0.rank() != Rank::vector || u0.grid() != u.grid()) throw ShapeError("weak_residual: u0 must be a vector field on the grid of u");
    const Grid& g = u.grid();
    const int n = g.dim();
    std::vector<double> zs(u.nz_nodes());
    for (std::size_t k = 0; k < zs.size(); ++k) zs[k] = u.z(k);
    const auto wz = detail::trapezoid_weights(zs);
    const auto wt = gregory_weights(int(u.nt_nodes()) - 1, g.dt(), gregory_order);
    const double wx = std::pow(g.dx(), n - 1);

    WeakReport rep;
    for (const auto& w : family) {
        WeakMemberResult r;
        r.label = w.label;
        long double A = 0.0L, B = 0.0L, R = 0.0L, S = 0.0L;
        for (std::size_t m = 0; m < u.nt_nodes(); ++m) {
            const double t = u.t(m);
            if (t >= w.t.r) continue;
            for (std::size_t k = 0; k < u.nz_nodes(); ++k) {
                const double zz = zs[k];
                if (std::abs(zz - w.z.c) >= w.z.r) continue;
                for (std::size_t p = 0; p < u.np(); ++p) {
                    const auto x = u.point(k, p);
                    const auto s = detail::sample_phi(w, n, x, t);
                    const double wgt = wt[m] * wz[k] * wx;
                    double a = 0.0, b = 0.0, sa = 0.0;
                    for (int c = 0; c < n; ++c) {
                        const double v = u(m, k, p, c) * (s.phi_t[std::size_t(c)] + s.lap[std::size_t(c)]);
                        a += v;
                        sa += std::abs(v);
                    }
                    if (forcing)
                        for (std::size_t ij = 0; ij < std::size_t(n * n); ++ij) {
                            const double v = F(m, k, p, int(ij)) * s.grad[ij];
                            b += v;
                            sa += std::abs(v);
                        }
                    A += wgt * a;
                    B += wgt * b;
                    S += std::abs(wgt) * sa;
                    if (m == 0) {
                        double c0 = 0.0, s0 = 0.0;
                        for (int c = 0; c < n; ++c) {
                            c0 += u0(0, k, p, c) * s.phi[std::size_t(c)];
                            s0 += std::abs(u0(0, k, p, c) * s.phi[std::size_t(c)]);
                        }
                        R += wz[k] * wx * c0;
                        S += wz[k] * wx * s0;
                    }
                }
            }
        }
        r.lhs_transport = double(A);
        r.lhs_forcing = double(B);
        r.rhs = double(R);
        r.scale = double(S);
        r.residual = r.scale > 0.0 ? std::abs(-r.lhs_transport + r.lhs_forcing - r.rhs) / r.scale : 0.0;
        rep.max_residual = std::max(rep.max_residual, r.residual);
        rep.members.push_back(r);
    }

    // divergence pairing against interior scalar bumps Psi = X (Y) Z
    for (const auto& w : family) {
        for (std::size_t m = 0; m < u.nt_nodes(); ++m) {
            long double pair = 0.0L, uu = 0.0L, gg = 0.0L;
            for (std::size_t k = 0; k < u.nz_nodes(); ++k) {
                if (std::abs(zs[k] - w.z.c) >= w.z.r) continue;
                for (std::size_t p = 0; p < u.np(); ++p) {
                    const auto x = u.point(k, p);
                    const auto X = w.x1.eval(x[0]);
                    const std::array<double, 4> one{1.0, 0.0, 0.0, 0.0};
                    const auto Y = n == 3 ? w.x2.eval(x[1]) : one;
                    const auto Z = w.z.eval(x[std::size_t(n - 1)]);
                    std::array<double, 3> gp{X[1] * Y[0] * Z[0], 0.0, 0.0};
                    if (n == 3) gp[1] = X[0] * Y[1] * Z[0];
                    gp[std::size_t(n - 1)] = X[0] * Y[0] * Z[1];
                    const double wgt = wz[k] * wx;
                    for (int c = 0; c < n; ++c) {
                        pair += wgt * u(m, k, p, c) * gp[std::size_t(c)];
                        uu += wgt * u(m, k, p, c) * u(m, k, p, c);
                        gg += wgt * gp[std::size_t(c)] * gp[std::size_t(c)];
                    }
                }
            }
            const double den = std::sqrt(double(uu) * double(gg));
            if (den > 0.0) rep.max_divergence_pairing = std::max(rep.max_divergence_pairing, double(std::abs(pair)) / den);
        }
    }
    return rep;
}

}  // namespace hsf
