#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hsf/differential.hpp"

using namespace hsf;

namespace {

Grid make_grid(int nx, int nn, int nt, double L = 2.0 * M_PI, double H = 4.0, double T = 1.0,
               Spacing zs = Spacing::uniform) {
    GridSpec s;
    s.dim = 2;
    s.L = L;
    s.nx = nx;
    s.H = H;
    s.nn = nn;
    s.T = T;
    s.nt = nt;
    s.normal_spacing = zs;
    return Grid(s);
}

double max_abs_diff(const Field& a, const Field& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
    return d;
}

}  // namespace

TEST(Grid, ValidatesResolutionAndExtent) {
    GridSpec s;
    s.nx = 5;
    EXPECT_THROW(Grid{s}, std::invalid_argument);
    s = GridSpec{};
    s.nn = 3;
    EXPECT_THROW(Grid{s}, std::invalid_argument);
    s = GridSpec{};
    s.H = 0.0;
    EXPECT_THROW(Grid{s}, std::invalid_argument);
    s = GridSpec{};
    s.dim = 4;
    EXPECT_THROW(Grid{s}, std::invalid_argument);
}

TEST(Grid, GradedNodesIncreaseFromBoundary) {
    Grid g = make_grid(8, 20, 8, 1.0, 3.0, 1.0, Spacing::graded);
    const auto& z = g.z();
    EXPECT_EQ(z.front(), 0.0);
    EXPECT_EQ(z.back(), 3.0);
    for (std::size_t k = 1; k < z.size(); ++k) EXPECT_GT(z[k], z[k - 1]);
    // clustered toward the wall
    EXPECT_LT(z[1] - z[0], z[20] - z[19]);
}

TEST(Grid, RescaleIsParabolic) {
    Grid g = make_grid(8, 8, 8, 1.0, 2.0, 3.0);
    Grid r = g.rescaled(2.0);
    EXPECT_DOUBLE_EQ(r.L(), 2.0);
    EXPECT_DOUBLE_EQ(r.H(), 4.0);
    EXPECT_DOUBLE_EQ(r.T(), 12.0);
}

TEST(Field, ExtentsAndLayout) {
    Grid g = make_grid(8, 6, 4);
    Field u(g, Rank::vector);
    EXPECT_EQ(u.nt_nodes(), 5u);
    EXPECT_EQ(u.nz_nodes(), 7u);
    EXPECT_EQ(u.np(), 8u);
    EXPECT_EQ(u.size(), 5u * 7 * 8 * 2);
    EXPECT_EQ(u.index(1, 2, 3, 1), ((1u * 7 + 2) * 8 + 3) * 2 + 1);

    Field full(g, Rank::scalar, NormalExtent::full, TimeExtent::full);
    EXPECT_EQ(full.nz_nodes(), 12u);
    EXPECT_EQ(full.nt_nodes(), 8u);
    EXPECT_DOUBLE_EQ(full.z(0), -g.H());
    EXPECT_DOUBLE_EQ(full.z(6), 0.0);
    EXPECT_DOUBLE_EQ(full.t(4), 0.0);

    Field b = make_boundary(g, Rank::vector);
    EXPECT_EQ(b.nz_nodes(), 1u);
    EXPECT_EQ(normal_part(b).rank(), Rank::scalar);
}

TEST(Field, FullExtentNeedsUniformSpacing) {
    Grid g = make_grid(8, 8, 8, 1.0, 1.0, 1.0, Spacing::graded);
    EXPECT_THROW(Field(g, Rank::scalar, NormalExtent::full), ShapeError);
}

TEST(Field, MismatchedGridsRejected) {
    Field a(make_grid(8, 8, 8), Rank::vector);
    Field b(make_grid(16, 8, 8), Rank::vector);
    EXPECT_THROW(a += b, ShapeError);
    EXPECT_THROW(outer_product(a, b), ShapeError);
    EXPECT_THROW(divergence(Field(make_grid(8, 8, 8), Rank::scalar)), ShapeError);
    EXPECT_THROW(tensor_divergence(a), ShapeError);
}

TEST(Fornberg, CentredFivePointFirstDerivative) {
    auto w = fornberg_weights(0.0, {-2, -1, 0, 1, 2}, 1)[1];
    EXPECT_NEAR(w[0], 1.0 / 12, 1e-14);
    EXPECT_NEAR(w[1], -8.0 / 12, 1e-14);
    EXPECT_NEAR(w[2], 0.0, 1e-14);
    EXPECT_NEAR(w[3], 8.0 / 12, 1e-14);
    EXPECT_NEAR(w[4], -1.0 / 12, 1e-14);
}

TEST(SymmetricGradient, LinearShear) {
    Grid g = make_grid(8, 8, 4);
    Field u(g, Rank::vector, NormalExtent::half, TimeExtent::single);
    u.fill_component(0, [](const std::vector<double>& x, double) { return x[1]; });
    Field D = symmetric_gradient(u);
    for (std::size_t k = 0; k < D.nz_nodes(); ++k)
        for (std::size_t p = 0; p < D.np(); ++p) {
            EXPECT_NEAR(D(0, k, p, 0), 0.0, 1e-12);
            EXPECT_NEAR(D(0, k, p, 1), 0.5, 1e-12);
            EXPECT_NEAR(D(0, k, p, 2), 0.5, 1e-12);
            EXPECT_NEAR(D(0, k, p, 3), 0.0, 1e-12);
        }
}

TEST(SymmetricGradient, ZeroField) {
    Field u(make_grid(8, 8, 4), Rank::vector);
    EXPECT_EQ(symmetric_gradient(u).max_abs(), 0.0);
}

TEST(SymmetricGradient, MatchesSymbolicDerivative) {
    // u = curl(sin(k x1) e^{-x2})
    const double L = 2.0 * M_PI, k = 2.0 * M_PI / L;
    Grid g = make_grid(16, 64, 4, L, 4.0);
    Field u(g, Rank::vector, NormalExtent::half, TimeExtent::single);
    u.fill([&](const std::vector<double>& x, double, std::span<double> v) {
        v[0] = -std::sin(k * x[0]) * std::exp(-x[1]);
        v[1] = -k * std::cos(k * x[0]) * std::exp(-x[1]);
    });
    Field D = symmetric_gradient(u);
    Field ref(g, Rank::tensor, NormalExtent::half, TimeExtent::single);
    ref.fill([&](const std::vector<double>& x, double, std::span<double> v) {
        const double e = std::exp(-x[1]);
        const double d11 = -k * std::cos(k * x[0]) * e;
        const double d12 = std::sin(k * x[0]) * e;           // du1/dx2
        const double d21 = k * k * std::sin(k * x[0]) * e;   // du2/dx1
        const double d22 = k * std::cos(k * x[0]) * e;
        v[0] = d11;
        v[1] = v[2] = 0.5 * (d12 + d21);
        v[3] = d22;
    });
    EXPECT_LT(max_abs_diff(D, ref), 2e-5);
}

TEST(SymmetricGradient, OutputIsBitSymmetric) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1, 1);
    Grid g = make_grid(8, 8, 4);
    Field u(g, Rank::vector);
    for (auto& v : u.values()) v = U(rng);
    Field D = symmetric_gradient(u);
    for (std::size_t q = 0; q < D.size(); q += 4) EXPECT_EQ(D.values()[q + 1], D.values()[q + 2]);
}

TEST(Divergence, LinearFieldIsExact) {
    // periodic x1 cannot carry x1 itself; (x2, 2 x2) has divergence 2
    Grid g = make_grid(8, 8, 4);
    Field u(g, Rank::vector);
    u.fill([](const std::vector<double>& x, double, std::span<double> v) {
        v[0] = x[1];
        v[1] = 2.0 * x[1];
    });
    Field d = divergence(u);
    for (double v : d.values()) EXPECT_NEAR(v, 2.0, 1e-12);
}

TEST(Divergence, CurlConvergesAtFourthOrder) {
    const double L = 2.0 * M_PI;
    std::vector<double> err;
    for (int nn : {16, 32, 64}) {
        Grid g = make_grid(16, nn, 4, L, 4.0);
        Field u(g, Rank::vector, NormalExtent::half, TimeExtent::single);
        // psi = sin(x1) sin(x2) e^{-x2/2}
        u.fill([](const std::vector<double>& x, double, std::span<double> v) {
            const double e = std::exp(-0.5 * x[1]);
            const double dpsi2 = std::sin(x[0]) * (std::cos(x[1]) - 0.5 * std::sin(x[1])) * e;
            const double dpsi1 = std::cos(x[0]) * std::sin(x[1]) * e;
            v[0] = dpsi2;
            v[1] = -dpsi1;
        });
        err.push_back(divergence(u).max_abs());
    }
    const double order = std::log2(err[1] / err[2]);
    EXPECT_GE(order, 3.5) << err[0] << " " << err[1] << " " << err[2];
}

TEST(Divergence, BandLimitedAgainstSymbolicOracle) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1, 1);
    const double L = 2.0;
    Grid g = make_grid(16, 96, 4, L, 3.0);
    struct Mode {
        int kx;
        double a, ph, c;
    };
    std::vector<Mode> m1, m2;
    for (int i = 0; i < 4; ++i) {
        m1.push_back({1 + i, U(rng), U(rng), 1.0 + 0.5 * (U(rng) + 1)});
        m2.push_back({1 + (i + 2) % 5, U(rng), U(rng), 1.0 + 0.5 * (U(rng) + 1)});
    }
    const double w = 2.0 * M_PI / L;
    auto eval = [&](const std::vector<Mode>& ms, const std::vector<double>& x, int d) {
        double s = 0.0;
        for (auto& m : ms) {
            const double arg = w * m.kx * x[0] + m.ph, e = std::exp(-m.c * x[1]);
            if (d == 0) s += m.a * std::cos(arg) * e;
            if (d == 1) s += -m.a * w * m.kx * std::sin(arg) * e;
            if (d == 2) s += -m.c * m.a * std::cos(arg) * e;
        }
        return s;
    };
    Field u(g, Rank::vector, NormalExtent::half, TimeExtent::single);
    Field ref(g, Rank::scalar, NormalExtent::half, TimeExtent::single);
    u.fill([&](const std::vector<double>& x, double, std::span<double> v) {
        v[0] = eval(m1, x, 0);
        v[1] = eval(m2, x, 0);
    });
    ref.fill_component(0, [&](const std::vector<double>& x, double) { return eval(m1, x, 1) + eval(m2, x, 2); });
    EXPECT_LT(max_abs_diff(divergence(u), ref), 1e-5 * ref.max_abs());
}

TEST(TensorDivergence, ConstantTensorHasZeroDivergence) {
    Field F(make_grid(8, 8, 4), Rank::tensor);
    F.fill([](const std::vector<double>&, double, std::span<double> v) {
        for (std::size_t c = 0; c < v.size(); ++c) v[c] = double(c) + 1.0;
    });
    EXPECT_LT(tensor_divergence(F).max_abs(), 1e-11);
}

TEST(TensorDivergence, OuterWithE1IsFirstPartial) {
    Grid g = make_grid(16, 32, 4, 2.0 * M_PI, 4.0);
    Field u(g, Rank::vector);
    u.fill([](const std::vector<double>& x, double t, std::span<double> v) {
        v[0] = std::sin(x[0]) * std::exp(-x[1]) * (1 + t);
        v[1] = std::cos(2 * x[0]) * x[1] * x[1];
    });
    Field e1(g, Rank::vector);
    e1.fill([](const std::vector<double>&, double, std::span<double> v) { v[0] = 1.0; });
    Field lhs = tensor_divergence(outer_product(u, e1));
    Field rhs(g, Rank::vector);
    for (int i = 0; i < 2; ++i) rhs.set_component(i, partial(u.component(i), 0));
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-11);
}

TEST(TensorDivergence, RowwiseOracle) {
    Grid g = make_grid(16, 128, 4, 2.0, 3.0);
    const double w = M_PI;
    Field F(g, Rank::tensor, NormalExtent::half, TimeExtent::single);
    F.fill([&](const std::vector<double>& x, double, std::span<double> v) {
        for (int c = 0; c < 4; ++c) v[c] = std::cos(w * (c + 1) * x[0]) * std::exp(-(0.5 + c) * x[1]);
    });
    Field ref(g, Rank::vector, NormalExtent::half, TimeExtent::single);
    ref.fill([&](const std::vector<double>& x, double, std::span<double> v) {
        for (int i = 0; i < 2; ++i) {
            const int c1 = 2 * i, c2 = 2 * i + 1;
            v[i] = -w * (c1 + 1) * std::sin(w * (c1 + 1) * x[0]) * std::exp(-(0.5 + c1) * x[1]) -
                   (0.5 + c2) * std::cos(w * (c2 + 1) * x[0]) * std::exp(-(0.5 + c2) * x[1]);
        }
    });
    EXPECT_LT(max_abs_diff(tensor_divergence(F), ref), 5e-5);
}

TEST(TensorDivergence, ConvectiveIdentity) {
    // div(u (x) u) = (u . grad) u + u div u
    Grid g = make_grid(16, 64, 4, 2.0 * M_PI, 4.0);
    Field u(g, Rank::vector);
    u.fill([](const std::vector<double>& x, double, std::span<double> v) {
        v[0] = std::sin(x[0]) * std::exp(-x[1]);
        v[1] = (0.3 + std::cos(x[0])) * std::exp(-0.5 * x[1]);
    });
    Field lhs = tensor_divergence(outer_product(u, u));
    Field G = gradient(u);
    Field dv = divergence(u);
    Field rhs(g, Rank::vector);
    for (std::size_t q = 0; q < dv.size(); ++q)
        for (int i = 0; i < 2; ++i) {
            double s = 0.0;
            for (int j = 0; j < 2; ++j) s += u.values()[2 * q + j] * G.values()[4 * q + 2 * i + j];
            rhs.values()[2 * q + i] = s + u.values()[2 * q + i] * dv.values()[q];
        }
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-4);
}

TEST(OuterProduct, BasisVectors) {
    Grid g = make_grid(8, 8, 4);
    Field e1(g, Rank::vector), e2(g, Rank::vector);
    e1.fill([](const std::vector<double>&, double, std::span<double> v) { v[0] = 1; });
    e2.fill([](const std::vector<double>&, double, std::span<double> v) { v[1] = 1; });
    Field E = outer_product(e1, e2);
    for (std::size_t q = 0; q < E.size(); q += 4) {
        EXPECT_EQ(E.values()[q + 0], 0.0);
        EXPECT_EQ(E.values()[q + 1], 1.0);
        EXPECT_EQ(E.values()[q + 2], 0.0);
        EXPECT_EQ(E.values()[q + 3], 0.0);
    }
    EXPECT_EQ(outer_product(Field(g, Rank::vector), e1).max_abs(), 0.0);
}

TEST(OuterProduct, TraceIsSquaredNorm) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N;
    Grid g = make_grid(8, 8, 4);
    Field u(g, Rank::vector);
    for (auto& v : u.values()) v = N(rng);
    Field T = outer_product(u, u);
    for (std::size_t q = 0; q < u.size() / 2; ++q) {
        const double tr = T.values()[4 * q] + T.values()[4 * q + 3];
        const double n2 = u.values()[2 * q] * u.values()[2 * q] + u.values()[2 * q + 1] * u.values()[2 * q + 1];
        EXPECT_NEAR(tr, n2, 1e-14 * (1 + n2));
        EXPECT_EQ(T.values()[4 * q + 1], T.values()[4 * q + 2]);
    }
}

TEST(FrobeniusNorm, IdentityZeroAndRandom) {
    Grid g = make_grid(8, 8, 4);
    Field I(g, Rank::tensor);
    I.fill([](const std::vector<double>&, double, std::span<double> v) { v[0] = v[3] = 1; });
    for (double v : frobenius_norm_field(I).values()) EXPECT_NEAR(v, std::sqrt(2.0), 1e-15);
    EXPECT_EQ(frobenius_norm_field(Field(g, Rank::tensor)).max_abs(), 0.0);

    std::mt19937_64 rng(5);
    std::normal_distribution<double> N;
    Field A(g, Rank::tensor);
    for (auto& v : A.values()) v = N(rng);
    Field f = frobenius_norm_field(A);
    for (std::size_t q = 0; q < f.size(); ++q) {
        double s = 0;
        for (int c = 0; c < 4; ++c) s += A.values()[4 * q + c] * A.values()[4 * q + c];
        EXPECT_NEAR(f.values()[q], std::sqrt(s), 1e-14 * (1 + std::sqrt(s)));
    }
}

TEST(Partial, TimeDerivativeFourthOrder) {
    Grid g = make_grid(8, 8, 32, 2.0 * M_PI, 1.0, 1.0);
    Field f(g, Rank::scalar);
    f.fill_component(0, [](const std::vector<double>&, double t) { return t * t * t * t; });
    Field d = partial_t(f);
    for (std::size_t m = 0; m < f.nt_nodes(); ++m)
        EXPECT_NEAR(d(m, 0, 0), 4.0 * std::pow(f.t(m), 3), 1e-10);
}

TEST(Partial, ThreeDimensionalTangentialAxes) {
    GridSpec s;
    s.dim = 3;
    s.L = 2.0 * M_PI;
    s.nx = 8;
    s.nn = 8;
    s.nt = 4;
    Grid g(s);
    Field f(g, Rank::scalar);
    f.fill_component(0, [](const std::vector<double>& x, double) { return std::sin(x[0]) * std::cos(2 * x[1]) * x[2]; });
    Field d0 = partial(f, 0), d1 = partial(f, 1), d2 = partial(f, 2);
    for (std::size_t k = 0; k < f.nz_nodes(); ++k)
        for (std::size_t p = 0; p < f.np(); ++p) {
            auto x = f.point(k, p);
            EXPECT_NEAR(d0(0, k, p), std::cos(x[0]) * std::cos(2 * x[1]) * x[2], 1e-12);
            EXPECT_NEAR(d1(0, k, p), -2 * std::sin(x[0]) * std::sin(2 * x[1]) * x[2], 1e-12);
            EXPECT_NEAR(d2(0, k, p), std::sin(x[0]) * std::cos(2 * x[1]), 1e-12);
        }
}
