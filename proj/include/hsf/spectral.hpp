#pragma once

// Fourier-side operators: general multipliers, Riesz transforms, the Helmholtz
// projection, the half-order time derivative and Littlewood-Paley blocks.

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hsf/differential.hpp"
#include "hsf/field.hpp"
#include "hsf/lattice.hpp"

namespace hsf {

/// A Fourier multiplier m(xi, tau) on the lattice of a field.
struct MultiplierSpec {
    std::function<cplx(const Freq&)> symbol;
    /// Zero the Nyquist component of every axis before evaluating (odd symbols).
    bool odd = false;
    /// Informational: the symbol is homogeneous under (xi, tau) -> (2^j xi, 4^j tau).
    bool parabolic = false;
    /// Value used at the zero frequency; never taken from `symbol`.
    cplx zero_value = 0.0;
};

/// Componentwise application of a multiplier.
inline Field apply_multiplier(const Field& f, const MultiplierSpec& m) {
    if (!m.symbol) throw std::invalid_argument("multiplier: empty symbol");
    Lattice lat(f);
    Field out(f.grid(), f.rank(), f.normal_extent(), f.time_extent());
    auto sym = [&](const Freq& fr) -> cplx { return fr.is_zero() ? m.zero_value : m.symbol(fr); };
    for (int c = 0; c < f.components(); ++c) lat.apply(f, c, out, c, sym, m.odd);
    return out;
}

enum class RieszDims { tangential, full_space };

/// R_i f with symbol -i xi_i/|xi|; |xi| runs over the tangential frequencies or,
/// for full_space, over all spatial frequencies (the field must be full in x_n).
inline Field riesz_transform(const Field& f, int axis, RieszDims dims) {
    if (f.rank() != Rank::scalar) throw ShapeError("riesz_transform: scalar field required");
    const int n = f.dim();
    const int naxes = dims == RieszDims::tangential ? n - 1 : n;
    if (axis < 0 || axis >= naxes) throw std::out_of_range("riesz_transform: axis out of range");
    if (dims == RieszDims::full_space && f.normal_extent() != NormalExtent::full)
        throw ShapeError("riesz_transform: full-space variant needs an x_n-extended field");
    MultiplierSpec m;
    m.odd = true;
    m.symbol = [=](const Freq& fr) -> cplx {
        const double r = std::sqrt(dims == RieszDims::tangential ? fr.tan_norm2() : fr.xi_norm2());
        if (r == 0.0) return 0.0;
        return cplx(0.0, -fr.xi[std::size_t(axis)] / r);
    };
    return apply_multiplier(f, m);
}

/// Spectral divergence on a field whose every spatial axis is periodic.
inline Field spectral_divergence(const Field& u) {
    if (u.normal_extent() != NormalExtent::full) throw ShapeError("spectral_divergence: full extent required");
    return divergence(u);
}

/// (P f)_i = f_i - xi_i (xi . f)/|xi|^2, zero mode passed through.
inline Field helmholtz_project(const Field& f) {
    if (f.rank() != Rank::vector) throw ShapeError("helmholtz_project: vector field required");
    if (f.normal_extent() != NormalExtent::full)
        throw ShapeError("helmholtz_project: input must be extended to full space");
    const int n = f.dim();
    Lattice lat(f);
    std::vector<std::vector<cplx>> a(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) a[std::size_t(i)] = lat.forward(f, i);
    const std::size_t B = lat.block();
    for (std::size_t q = 0; q < B; ++q) {
        const Freq fr = lat.freq(q, true);
        const double r2 = fr.xi_norm2();
        if (r2 == 0.0) continue;
        for (int b = 0; b < lat.howmany(); ++b) {
            const std::size_t idx = std::size_t(b) * B + q;
            cplx dot = 0.0;
            for (int j = 0; j < n; ++j) dot += fr.xi[std::size_t(j)] * a[std::size_t(j)][idx];
            for (int i = 0; i < n; ++i) a[std::size_t(i)][idx] -= fr.xi[std::size_t(i)] * dot / r2;
        }
    }
    Field out(f.grid(), Rank::vector, f.normal_extent(), f.time_extent());
    for (int i = 0; i < n; ++i) lat.inverse(std::move(a[std::size_t(i)]), out, i);
    return out;
}

/// Product-integration weights for I_m = int_0^{t_m} f(s) (t_m - s)^{-1/2} ds on a
/// uniform grid with piecewise-linear f; W(m, j) in units where dt = 1.
inline double abel_hat_weight(int m, int j) {
    auto A = [](double a, double b) { return 2.0 * (std::sqrt(b) - std::sqrt(a)); };
    auto B = [](double a, double b) { return 2.0 / 3.0 * (b * std::sqrt(b) - a * std::sqrt(a)); };
    const double d = double(m - j);
    double w = 0.0;
    if (j < m) w += B(d - 1, d) - (d - 1) * A(d - 1, d);
    if (j >= 1) w += (d + 1) * A(d, d + 1) - B(d, d + 1);
    return w;
}

/// Relative tolerance on |f(t=0)| for the zero-history precondition.
inline constexpr double kZeroHistoryTol = 1e-10;

inline void require_zero_history(const Field& f, const char* what, double tol = kZeroHistoryTol) {
    if (f.time_extent() != TimeExtent::half) throw ShapeError(std::string(what) + ": half time extent required");
    const double scale = std::max(f.max_abs(), 1e-300);
    const std::size_t slab = f.nz_nodes() * f.np() * std::size_t(f.components());
    double v0 = 0.0;
    for (std::size_t i = 0; i < slab; ++i) v0 = std::max(v0, std::abs(f.values()[i]));
    if (v0 > tol * scale && v0 > 1e-300)
        throw PreconditionError(std::string(what) + ": nonzero value at t = 0 (zero-history required)");
}

/// D_t^{1/2} f = pi^{-1/2} d/dt int_0^t f(s)(t-s)^{-1/2} ds for zero-history data on a
/// uniform time grid: exact Abel weights against piecewise-linear f, then a
/// backward difference. First order in dt.
inline Field half_time_derivative(const Field& f) {
    if (f.time_extent() == TimeExtent::full) {
        MultiplierSpec m;
        m.odd = true;
        m.parabolic = true;
        m.symbol = [](const Freq& fr) { return std::sqrt(cplx(0.0, kTwoPi * fr.tau)); };
        return apply_multiplier(f, m);
    }
    if (!f.grid().uniform_time()) throw ShapeError("half_time_derivative: uniform time grid required");
    require_zero_history(f, "half_time_derivative");
    const int nt = f.grid().nt();
    const double dt = f.grid().dt();
    const std::size_t slab = f.nz_nodes() * f.np() * std::size_t(f.components());
    // I_m for every m, then differences.
    std::vector<double> W(std::size_t(nt + 1) * std::size_t(nt + 1), 0.0);
    for (int m = 1; m <= nt; ++m)
        for (int j = 1; j <= m; ++j) W[std::size_t(m) * std::size_t(nt + 1) + std::size_t(j)] = abel_hat_weight(m, j);
    Field out(f.grid(), f.rank(), f.normal_extent(), f.time_extent());
    auto in = f.values();
    auto o = out.values();
    std::vector<double> Iprev(slab, 0.0), Icur(slab);
    const double scale = std::sqrt(dt) / (std::sqrt(std::numbers::pi) * dt);
    for (int m = 1; m <= nt; ++m) {
        std::fill(Icur.begin(), Icur.end(), 0.0);
        for (int j = 1; j <= m; ++j) {
            const double w = W[std::size_t(m) * std::size_t(nt + 1) + std::size_t(j)];
            const double* src = &in[std::size_t(j) * slab];
            for (std::size_t i = 0; i < slab; ++i) Icur[i] += w * src[i];
        }
        for (std::size_t i = 0; i < slab; ++i) o[std::size_t(m) * slab + i] = scale * (Icur[i] - Iprev[i]);
        std::swap(Iprev, Icur);
    }
    return out;
}

/// Smooth bump exp(1/(x^2-1)) on (-1, 1).
inline double lp_bump(double x) {
    if (std::abs(x) >= 1.0) return 0.0;
    return std::exp(1.0 / (x * x - 1.0));
}

/// Dyadic Littlewood-Paley family in the variable r = |xi| + |tau|^{1/2}:
/// phi_j(r) = b(log2 r - j) / sum_i b(log2 r - i), so the blocks sum to one on
/// every nonzero frequency. [j_min, j_max] covers every nonzero lattice frequency.
class LPFamily {
public:
    LPFamily() = default;

    explicit LPFamily(const Field& f) {
        Lattice lat(f);
        double rmin = 1e300, rmax = 0.0;
        for (std::size_t q = 0; q < lat.block(); ++q) {
            const double r = lat.freq(q, false).parabolic_radius();
            if (r == 0.0) continue;
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
        if (rmax == 0.0) throw ShapeError("lp family: lattice has no nonzero frequency");
        jmin_ = int(std::floor(std::log2(rmin)));
        jmax_ = int(std::floor(std::log2(rmax))) + 1;
        rmin_ = rmin;
        rmax_ = rmax;
    }

    int j_min() const { return jmin_; }
    int j_max() const { return jmax_; }
    double r_min() const { return rmin_; }
    double r_max() const { return rmax_; }

    /// phi_j at parabolic radius r.
    static double weight(int j, double r) {
        if (r <= 0.0) return 0.0;
        const double x = std::log2(r);
        const double b = lp_bump(x - j);
        if (b == 0.0) return 0.0;
        const int i0 = int(std::floor(x));
        double s = 0.0;
        for (int i = i0 - 1; i <= i0 + 2; ++i) s += lp_bump(x - i);
        return b / s;
    }

    std::string describe() const {
        std::ostringstream os;
        os << "lp_family j_min=" << jmin_ << " j_max=" << jmax_ << " r_min=" << rmin_ << " r_max=" << rmax_
           << " bump=exp(1/(x^2-1)) x=log2(|xi|+|tau|^0.5)-j";
        return os.str();
    }

private:
    int jmin_ = 0, jmax_ = 0;
    double rmin_ = 0.0, rmax_ = 0.0;
};

/// f * phi_j computed as a frequency-domain product (componentwise).
inline Field lp_block(const Field& f, int j, const LPFamily& fam) {
    if (j < fam.j_min() || j > fam.j_max()) throw std::out_of_range("lp_block: j outside family range");
    MultiplierSpec m;
    m.parabolic = true;
    m.symbol = [j](const Freq& fr) -> cplx { return LPFamily::weight(j, fr.parabolic_radius()); };
    return apply_multiplier(f, m);
}

/// Sum of all blocks of the family (equals f minus its mean on covered lattices).
inline Field lp_reconstruct(const Field& f, const LPFamily& fam) {
    Field out(f.grid(), f.rank(), f.normal_extent(), f.time_extent());
    for (int j = fam.j_min(); j <= fam.j_max(); ++j) out += lp_block(f, j, fam);
    return out;
}

}  // namespace hsf
