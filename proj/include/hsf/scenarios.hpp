#pragma once

// Data sets shared by the command-line tool, the acceptance run and the tests.

#include <cmath>
#include <string>

#include "hsf/manufactured.hpp"
#include "hsf/stokes.hpp"

namespace hsf {

/// Zero initial velocity and a boundary wave switched on quadratically in time:
///   g_1 = a cos(k x1) t^2,  g_n = a sin(k x1) t^2,  k = 2 pi / L.
/// No forcing. Compatible (g(., 0) = 0 = u0) and g_n has zero tangential mean.
inline StokesProblem boundary_wave_problem(const Grid& g, double amplitude) {
    StokesProblem pb;
    const int n = g.dim();
    const double k = kTwoPi / g.L();
    pb.u0 = Field(g, Rank::vector, NormalExtent::half, TimeExtent::single);
    pb.g = Field(g, Rank::vector, NormalExtent::trace, TimeExtent::half);
    pb.g.fill([&](const std::vector<double>& x, double t, std::span<double> v) {
        v[0] = amplitude * std::cos(k * x[0]) * t * t;
        v[std::size_t(n - 1)] = amplitude * std::sin(k * x[0]) * t * t;
    });
    return pb;
}

/// The problem scaled by a: u0, g and F all multiplied.
inline StokesProblem scaled(const StokesProblem& pb, double a) {
    StokesProblem r = pb;
    r.u0 *= a;
    r.g *= a;
    if (r.has_forcing()) r.F *= a;
    return r;
}

inline StokesProblem named_problem(const std::string& kind, const Grid& g, double amplitude) {
    if (kind == "boundary_wave") return boundary_wave_problem(g, amplitude);
    if (kind == "manufactured") return scaled(ManufacturedSolution(g).problem(g), amplitude);
    throw std::invalid_argument("unknown data kind '" + kind + "' (boundary_wave, manufactured)");
}

}  // namespace hsf
