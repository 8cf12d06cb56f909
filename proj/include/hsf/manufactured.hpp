#pragma once

// Closed-form Stokes solution used for convergence studies:
//
//   u = (sin(k x1) h'(x_n), -k cos(k x1) h(x_n)) e^{-t},  h = e^{-x_n},  k = 2 pi / L
//   p = cos(k x1) e^{-x_n - t}
//
// solves u_t - Laplace u + grad p = div F with the diagonal forcing
//   F_11 = ((k^2 + k - 2) / k) cos(k x1) e^{-x_n - t},  F_nn = (k^3 - 2k + 1) cos(k x1) e^{-x_n - t}.
// In three dimensions the middle velocity component is zero.

#include <cmath>

#include "hsf/field.hpp"
#include "hsf/stokes.hpp"

namespace hsf {

struct ManufacturedSolution {
    double k = 1.0;

    explicit ManufacturedSolution(const Grid& g) : k(kTwoPi / g.L()) {}

    double u(int c, int n, double x1, double z, double t) const {
        const double e = std::exp(-z - t);
        if (c == 0) return -std::sin(k * x1) * e;
        if (c == n - 1) return -k * std::cos(k * x1) * e;
        return 0.0;
    }
    double p(double x1, double z, double t) const { return std::cos(k * x1) * std::exp(-z - t); }
    double F(int i, int j, int n, double x1, double z, double t) const {
        if (i != j) return 0.0;
        const double e = std::cos(k * x1) * std::exp(-z - t);
        if (i == 0) return (k * k + k - 2.0) / k * e;
        if (i == n - 1) return (k * k * k - 2.0 * k + 1.0) * e;
        return 0.0;
    }

    Field velocity(const Grid& g, NormalExtent z = NormalExtent::half, TimeExtent t = TimeExtent::half) const {
        Field f(g, Rank::vector, z, t);
        const int n = g.dim();
        f.fill([&](const std::vector<double>& x, double tt, std::span<double> v) {
            for (int c = 0; c < n; ++c) v[std::size_t(c)] = u(c, n, x[0], x[std::size_t(n - 1)], tt);
        });
        return f;
    }

    Field pressure(const Grid& g) const {
        Field f(g, Rank::scalar);
        const int n = g.dim();
        f.fill_component(0, [&](const std::vector<double>& x, double tt) { return p(x[0], x[std::size_t(n - 1)], tt); });
        return f;
    }

    Field forcing(const Grid& g) const {
        Field f(g, Rank::tensor);
        const int n = g.dim();
        f.fill([&](const std::vector<double>& x, double tt, std::span<double> v) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) v[std::size_t(i * n + j)] = F(i, j, n, x[0], x[std::size_t(n - 1)], tt);
        });
        return f;
    }

    StokesProblem problem(const Grid& g) const {
        StokesProblem pb;
        pb.u0 = velocity(g, NormalExtent::half, TimeExtent::single);
        pb.g = velocity(g, NormalExtent::trace, TimeExtent::half);
        pb.F = forcing(g);
        return pb;
    }
};

}  // namespace hsf
