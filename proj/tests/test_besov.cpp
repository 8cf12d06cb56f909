#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "hsf/besov.hpp"
#include "hsf/kernels.hpp"
#include "test_support.hpp"

using namespace hsf;
using namespace hsf::testing;

namespace {

// One tangential axis only: trace extent, single time slice.
Field line_field(int nx, double L, const std::function<double(double)>& f) {
    Grid g = grid2d(nx, 4, 4, L);
    Field out(g, Rank::scalar, NormalExtent::trace, TimeExtent::single);
    for (std::size_t p = 0; p < out.np(); ++p) out(0, 0, p) = f(out.x(p, 0));
    return out;
}

double cos_lp(double p) {  // |cos(2 pi x)|_{L^p(0,1)}, by the Beta function
    return std::pow(std::tgamma(0.5 * (p + 1)) / (std::sqrt(M_PI) * std::tgamma(0.5 * p + 1)), 1.0 / p);
}

}  // namespace

// ------------------------------------------------------------ extensions

TEST(ExtensionCoefficients, KnownValues) {
    auto s = ExtensionCoefficients::solve(1, ExtensionKind::spatial);
    ASSERT_EQ(s.exact.size(), 3u);
    EXPECT_EQ(s.exact[0], rational(6));
    EXPECT_EQ(s.exact[1], rational(-8));
    EXPECT_EQ(s.exact[2], rational(3));
    auto t = ExtensionCoefficients::solve(1, ExtensionKind::temporal);
    ASSERT_EQ(t.exact.size(), 2u);
    EXPECT_EQ(t.exact[0], rational(3));
    EXPECT_EQ(t.exact[1], rational(-2));
    auto z = ExtensionCoefficients::solve(0, ExtensionKind::spatial);
    ASSERT_EQ(z.lambda.size(), 1u);
    EXPECT_EQ(z.lambda[0], 1.0);
}

TEST(ExtensionCoefficients, MomentConditionsHold) {
    for (int k = 0; k <= 4; ++k)
        for (auto kind : {ExtensionKind::spatial, ExtensionKind::temporal}) {
            auto c = ExtensionCoefficients::solve(k, kind);
            EXPECT_LE(c.moment_residual(), 1e-10) << "k=" << k;
            // exact rational check as well
            for (int l = 0; l <= c.max_moment(); ++l) {
                rational s = 0;
                for (std::size_t j = 0; j < c.exact.size(); ++j) {
                    rational pw = 1;
                    for (int e = 0; e < l; ++e) pw *= -rational(int(j + 1));
                    s += pw * c.exact[j];
                }
                EXPECT_EQ(s, rational(1));
            }
        }
    EXPECT_THROW(ExtensionCoefficients::solve(-1, ExtensionKind::spatial), std::invalid_argument);
}

TEST(ExtendHalfspace, ReproducesQuadraticsWithinReach) {
    Grid g = grid2d(8, 24, 4, 2 * M_PI, 3.0);
    Field f(g, Rank::scalar);
    f.fill_component(0, [](const std::vector<double>& x, double t) { return 1 + 2 * x[1] - 0.5 * x[1] * x[1] + t; });
    ExtensionReport rep;
    Field e = extend_halfspace(f, 1, &rep, ReachPolicy::zero_fill);
    EXPECT_EQ(rep.k_used, 1);
    EXPECT_TRUE(rep.warning.empty());
    for (std::size_t m = 0; m < e.nt_nodes(); ++m)
        for (std::size_t k = 0; k < e.nz_nodes(); ++k) {
            const double z = e.z(k);
            if (std::abs(z) > g.H() / 3 + 1e-12) continue;
            const double want = 1 + 2 * z - 0.5 * z * z + e.t(m);
            for (std::size_t p = 0; p < e.np(); ++p) EXPECT_NEAR(e(m, k, p), want, 1e-12);
        }
    Field back = restrict_halfspace(e);
    for (std::size_t m = 0; m < f.nt_nodes(); ++m)
        for (std::size_t k = 0; k < std::size_t(g.nn()); ++k)
            for (std::size_t p = 0; p < f.np(); ++p) EXPECT_EQ(back(m, k, p), f(m, k, p));
}

TEST(ExtendHalfspace, ReduceOrderWhenFieldReachesTop) {
    Grid g = grid2d(8, 16, 4);
    Field f(g, Rank::scalar);
    f.fill_component(0, [](const std::vector<double>& x, double) { return std::cos(x[0]) + x[1]; });
    ExtensionReport rep;
    Field e = extend_halfspace(f, 1, &rep);
    EXPECT_EQ(rep.k_requested, 1);
    EXPECT_EQ(rep.k_used, 0);
    EXPECT_FALSE(rep.warning.empty());
    // k = 0 is the even reflection
    const int nn = g.nn();
    for (int d = 1; d < nn; ++d)
        for (std::size_t p = 0; p < e.np(); ++p) EXPECT_EQ(e(1, std::size_t(nn - d), p), f(1, std::size_t(d), p));

    Field decaying(g, Rank::scalar);
    decaying.fill_component(0, [](const std::vector<double>& x, double) { return std::exp(-4 * x[1]); });
    extend_halfspace(decaying, 1, &rep);
    EXPECT_EQ(rep.k_used, 1);
}

TEST(ExtendTime, ReproducesLinearInTime) {
    Grid g = grid2d(8, 4, 12);
    Field f(g, Rank::vector, NormalExtent::half);
    f.fill([](const std::vector<double>& x, double t, std::span<double> v) {
        v[0] = 2 - 3 * t;
        v[1] = x[1] * (1 + t);
    });
    Field e = extend_time(f, 1);
    for (std::size_t m = 0; m < e.nt_nodes(); ++m) {
        const double t = e.t(m);
        if (t < -g.T() / 2 - 1e-12) continue;
        for (std::size_t k = 0; k < e.nz_nodes(); ++k)
            for (std::size_t p = 0; p < e.np(); ++p) {
                EXPECT_NEAR(e(m, k, p, 0), 2 - 3 * t, 1e-12);
                EXPECT_NEAR(e(m, k, p, 1), e.z(k) * (1 + t), 1e-12);
            }
    }
}

TEST(TaperedExtension, AgreesOnHalfDomainAndIsSmooth) {
    Grid g = grid2d(8, 64, 32, 2 * M_PI, 2.0, 1.0);
    Field f(g, Rank::scalar);
    f.fill_component(0, [](const std::vector<double>& x, double t) { return std::cos(x[0]) * (1 + x[1] + t * t); });
    Field e = canonical_extension(f);
    ASSERT_EQ(e.normal_extent(), NormalExtent::full);
    ASSERT_EQ(e.time_extent(), TimeExtent::full);
    const int nn = g.nn(), nt = g.nt();
    for (int m = 0; m < nt; ++m)
        for (int k = 0; k < nn; ++k)
            for (std::size_t p = 0; p < f.np(); ++p)
                EXPECT_NEAR(e(std::size_t(nt + m), std::size_t(nn + k), p), f(std::size_t(m), std::size_t(k), p), 1e-14);
    // second differences across the seams stay of interior size (C^2 gluing)
    auto d2 = [&](int m, int k) {
        auto at = [&](int kk) { return e(std::size_t(m), std::size_t((kk + 2 * nn) % (2 * nn)), 0); };
        return std::abs(at(k + 1) - 2 * at(k) + at(k - 1));
    };
    const double h2 = g.dz() * g.dz();
    for (int m = 0; m < 2 * nt; ++m)
        for (int k : {0, nn - 1, nn, nn + 1, 2 * nn - 1}) EXPECT_LT(d2(m, k), 60 * h2) << m << " " << k;
}

// ------------------------------------------------------------ Lp and LP norms

TEST(LpNorm, TrapezoidAndMagnitude) {
    Grid g = grid2d(8, 4, 4, 2.0, 1.0, 1.0);
    Field f(g, Rank::vector);
    f.fill([](const std::vector<double>&, double, std::span<double> v) {
        v[0] = 3;
        v[1] = 4;
    });
    // |(3,4)| = 5 over a box of measure L*H*T = 2
    EXPECT_NEAR(lp_norm(f, 2), 5 * std::sqrt(2.0), 1e-13);
    EXPECT_NEAR(lp_norm(f, 1), 10, 1e-13);
    EXPECT_EQ(lp_norm(f, kInf), 5);
    EXPECT_THROW(lp_norm(f, 0.5), std::invalid_argument);
}

TEST(BesovNorm, SingleAtomAtUnitRadius) {
    // cos(2 pi x) on [0,1): one mode at |xi| = 1, where phi_0 = 1 and every other block vanishes
    Field f = line_field(32, 1.0, [](double x) { return std::cos(2 * M_PI * x); });
    for (double s : {-0.5, 0.0, 0.7})
        for (double q : {1.0, 2.0, kInf}) {
            EXPECT_NEAR(besov_norm(f, s, kInf, q, BesovDomain::full).norm, 1.0, 1e-13);
            EXPECT_NEAR(besov_norm(f, s, 2, q, BesovDomain::full).norm, std::sqrt(0.5), 1e-13);
        }
    auto b = besov_norm(f, 0.3, 4, 2, BesovDomain::full);
    EXPECT_NEAR(b.block(0), cos_lp(4), 1e-13);
    for (int j = b.j_min; j <= b.j_max; ++j)
        if (j != 0) {
            EXPECT_LT(b.block(j), 1e-14);
        }
}

TEST(BesovNorm, DyadicAtomScaling) {
    // |xi| = 2^j gives 2^{sj} |cos|_p exactly (p = 2, 4 sample cos^p exactly)
    for (int j : {1, 2, 3}) {
        Field f = line_field(64, 1.0, [j](double x) { return std::cos(2 * M_PI * std::exp2(j) * x); });
        for (double s : {-0.4, 0.6})
            for (double p : {2.0, 4.0})
                EXPECT_NEAR(besov_norm(f, s, p, 2, BesovDomain::full).norm, std::exp2(s * j) * cos_lp(p), 1e-12);
    }
}

TEST(BesovNorm, ParabolicDilationLaw) {
    // f(X / lambda) on the dilated box: norm scales by lambda^{(n+2)/p - s}
    Grid g = grid2d(16, 8, 8, 2.0, 1.0, 1.0);
    Field f = random_bandlimited(g, Rank::scalar, NormalExtent::full, TimeExtent::full, 4, 7);
    const double lam = 2.0;
    Field fl(g.rescaled(lam), Rank::scalar, NormalExtent::full, TimeExtent::full);
    std::copy(f.values().begin(), f.values().end(), fl.values().begin());
    for (double s : {0.25, 0.8})
        for (double p : {2.0, 3.0}) {
            const double a = besov_norm(f, s, p, 2, BesovDomain::full).norm;
            const double b = besov_norm(fl, s, p, 2, BesovDomain::full).norm;
            EXPECT_NEAR(b / a, std::pow(lam, 4.0 / p - s), 1e-10);
        }
}

TEST(BesovNorm, DecreasesInQ) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        Field f = random_bandlimited(grid2d(16, 8, 8), Rank::vector, NormalExtent::full, TimeExtent::full, 5, seed, 6);
        double prev = kInf;
        for (double q : {1.0, 1.5, 2.0, 4.0, 8.0, kInf}) {
            const double v = besov_norm(f, 0.5, 2, q, BesovDomain::full).norm;
            EXPECT_LE(v, prev * (1 + 1e-14));
            prev = v;
        }
    }
}

TEST(BesovNorm, ProfileAggregatesAndWritesCsv) {
    Field f = random_bandlimited(grid2d(16, 8, 8), Rank::scalar, NormalExtent::full, TimeExtent::full, 5, 3, 6);
    auto b = besov_norm(f, 0.5, 2, 3, BesovDomain::full);
    double acc = 0;
    for (double v : b.blocks) acc += std::pow(v, 3);
    EXPECT_NEAR(b.norm, std::cbrt(acc), 1e-14 * b.norm);
    EXPECT_EQ(int(b.blocks.size()), b.j_max - b.j_min + 1);
    EXPECT_FALSE(b.family.empty());

    const auto path = std::filesystem::temp_directory_path() / "hsf_profile.csv";
    write_profile_csv(b, path.string());
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "j,block_value");
    int rows = 0;
    while (std::getline(is, line)) {
        const auto comma = line.find(',');
        const int j = std::stoi(line.substr(0, comma));
        EXPECT_DOUBLE_EQ(std::stod(line.substr(comma + 1)), b.block(j));
        ++rows;
    }
    EXPECT_EQ(rows, int(b.blocks.size()));
    std::filesystem::remove(path);
}

TEST(BesovNorm, TruncationFlags) {
    // energy in the top block only
    Field hi = line_field(16, 1.0, [](double x) { return std::cos(2 * M_PI * 8 * x); });
    EXPECT_TRUE(besov_norm(hi, 0, 2, 2, BesovDomain::full).truncated_high);
    Field mid = line_field(64, 1.0, [](double x) { return std::cos(2 * M_PI * 4 * x); });
    auto b = besov_norm(mid, 0, 2, 2, BesovDomain::full);
    EXPECT_FALSE(b.truncated());
}

TEST(BesovNorm, DomainChecks) {
    Field f = random_bandlimited(grid2d(8, 8, 8), Rank::scalar, NormalExtent::half, TimeExtent::half, 3, 2);
    EXPECT_THROW(besov_norm(f, 0.5, 2, 2, BesovDomain::full), ShapeError);
    auto b = besov_norm(f, 0.5, 2, 2, BesovDomain::half);
    EXPECT_GT(b.norm, 0);
    EXPECT_EQ(b.domain, "halfspace-halftime");
    EXPECT_THROW(besov_norm(f, 0.5, 0.5, 2, BesovDomain::half), std::invalid_argument);
}

TEST(BesovNorm, HalfDomainNormStableUnderRefinement) {
    auto norm_at = [](int r) {
        Grid g = grid2d(8 * r, 16 * r, 8 * r, 2 * M_PI, 3.0, 1.0);
        Field f(g, Rank::scalar);
        f.fill_component(0, [](const std::vector<double>& x, double t) {
            return std::cos(x[0]) * std::exp(-2 * x[1]) * (1 + t);
        });
        return besov_norm(f, 0.5, 2, 2, BesovDomain::half).norm;
    };
    const double a = norm_at(1), b = norm_at(2), c = norm_at(4);
    EXPECT_LT(std::abs(c - b), 0.05 * c);
    EXPECT_LT(std::abs(c - b), std::abs(b - a) + 0.01 * c);
}

// ------------------------------------------------------------ Sobolev

TEST(SobolevAniso, SpatialClosedForms) {
    // sin x on [0, 2 pi): |f|_p = |f'|_p = |f''|_p = (2 pi)^{1/p} |cos|_{L^p(0,1)}
    Field f = line_field(64, 2 * M_PI, [](double x) { return std::sin(x); });
    for (double p : {2.0, 4.0}) {
        const double want = std::pow(2 * M_PI, 1 / p) * cos_lp(p);
        for (int k = 0; k <= 2; ++k) EXPECT_NEAR(sobolev_aniso_norm(f, k, p), want, 1e-12) << k;
    }
    EXPECT_NEAR(sobolev_aniso_norm(f, 0, 3), lp_norm(f, 3), 1e-15);
}

TEST(SobolevAniso, HalfDerivativeTerm) {
    // f = sin(x) t: D_t^{1/2} f = sin(x) 2 sqrt(t/pi); p = 2 over [0, 2 pi) x [0, 1]
    Grid g = grid2d(32, 4, 256, 2 * M_PI, 1.0, 1.0);
    Field f(g, Rank::scalar, NormalExtent::trace, TimeExtent::half);
    f.fill_component(0, [](const std::vector<double>& x, double t) { return std::sin(x[0]) * t; });
    const double grad = std::sqrt(M_PI) * std::sqrt(1.0 / 3);
    const double half = std::sqrt(M_PI) * std::sqrt(4.0 / M_PI * 0.5);
    EXPECT_NEAR(sobolev_aniso_norm(f, 1, 2), grad + half, 2e-2 * (grad + half));
}

// ------------------------------------------------------------ double-integral form

TEST(BesovIntegral, ZeroOnConstants) {
    Field f = line_field(32, 1.0, [](double) { return 2.5; });
    auto r = besov_norm_integral(f, 0.5, 2, 2);
    EXPECT_TRUE(r.exhaustive);
    EXPECT_EQ(r.value, 0.0);
}

TEST(BesovIntegral, DilationLawExact) {
    Grid g = grid2d(8, 6, 6, 2.0, 1.0, 1.0);
    Field f = random_bandlimited(g, Rank::scalar, NormalExtent::half, TimeExtent::half, 3, 11);
    Field fl(g.rescaled(3.0), Rank::scalar);
    std::copy(f.values().begin(), f.values().end(), fl.values().begin());
    for (double s : {0.3, 0.7}) {
        const double a = besov_norm_integral(f, s, 2, 3).value;
        const double b = besov_norm_integral(fl, s, 2, 3).value;
        EXPECT_NEAR(b / a, std::pow(3.0, 4.0 / 2 - s), 1e-12);
    }
}

TEST(BesovIntegral, AveragingDoesNotIncrease) {
    // nonnegative periodic averaging is a contraction of the q = p seminorm
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N;
    Field f = line_field(48, 1.0, [&](double) { return N(rng); });
    Field a = f;
    const std::size_t n = f.np();
    for (std::size_t p = 0; p < n; ++p)
        a(0, 0, p) = 0.25 * f(0, 0, (p + n - 1) % n) + 0.5 * f(0, 0, p) + 0.25 * f(0, 0, (p + 1) % n);
    for (double s : {0.2, 0.6}) EXPECT_LE(besov_norm_integral(a, s, 2, 2).value, besov_norm_integral(f, s, 2, 2).value);
}

TEST(BesovIntegral, MonteCarloAgreesWithExhaustive) {
    Field f = random_bandlimited(grid2d(8, 8, 8), Rank::scalar, NormalExtent::half, TimeExtent::half, 3, 13);
    auto ex = besov_norm_integral(f, 0.5, 2, 2);
    ASSERT_TRUE(ex.exhaustive);
    auto mc = besov_norm_integral(f, 0.5, 2, 2, 99, 200'000, 8);
    ASSERT_FALSE(mc.exhaustive);
    EXPECT_GT(mc.std_error, 0);
    EXPECT_LT(std::abs(mc.value - ex.value), 5 * mc.std_error + 0.03 * ex.value);
    auto mc2 = besov_norm_integral(f, 0.5, 2, 2, 99, 200'000, 8);
    EXPECT_EQ(mc.value, mc2.value);
}

// ------------------------------------------------------------ traces

TEST(Trace, TimeZeroSliceOfHeatFlow) {
    Field u0 = random_bandlimited(grid2d(16, 8, 8), Rank::scalar, NormalExtent::full, TimeExtent::single, 4, 17);
    Field u = heat_series(u0);
    auto r = trace_time0(u, 0.9, 4, 4);
    ASSERT_TRUE(r.certified);
    for (std::size_t i = 0; i < u0.size(); ++i) EXPECT_NEAR(r.trace.values()[i], u0.values()[i], 1e-14);
    EXPECT_GT(r.ratio, 0);
    EXPECT_TRUE(std::isfinite(r.ratio));
}

TEST(Trace, TimeIndependentField) {
    Grid g = grid2d(16, 16, 8);
    Field f(g, Rank::scalar);
    f.fill_component(0, [](const std::vector<double>& x, double) { return std::cos(x[0]) * std::exp(-x[1]); });
    auto r = trace_boundary(f, 0.8, 2, 2);
    ASSERT_TRUE(r.certified);
    for (std::size_t m = 0; m < r.trace.nt_nodes(); ++m)
        for (std::size_t p = 0; p < r.trace.np(); ++p) EXPECT_NEAR(r.trace(m, 0, p), std::cos(f.x(p, 0)), 1e-15);
    auto t0 = trace_time0(f, 1.2, 2, 2);
    ASSERT_TRUE(t0.certified);
    for (std::size_t i = 0; i < t0.trace.size(); ++i) EXPECT_EQ(t0.trace.values()[i], f.values()[i]);
}

TEST(Trace, CertificationRefusedBelowThreshold) {
    Field f = random_bandlimited(grid2d(8, 8, 8), Rank::scalar, NormalExtent::half, TimeExtent::half, 3, 1);
    auto a = trace_time0(f, 0.9, 2, 2);  // needs s > 1
    EXPECT_FALSE(a.certified);
    EXPECT_FALSE(a.reason.empty());
    EXPECT_TRUE(std::isnan(a.ratio));
    auto b = trace_boundary(f, 0.5, 2, 2);  // needs s > 1/2
    EXPECT_FALSE(b.certified);
    EXPECT_TRUE(trace_boundary(f, 0.51, 2, 2).certified);
}

// ------------------------------------------------------------ boundary-datum endpoints

TEST(ANormEndpoints, ZeroAndSingleMode) {
    Grid g = grid2d(16, 4, 128, 1.0, 1.0, 1.0);
    Field zero(g, Rank::scalar, NormalExtent::trace, TimeExtent::half);
    auto z = a_norm_endpoints(zero, 0, 2);
    EXPECT_EQ(z.first, 0.0);
    EXPECT_EQ(z.second, 0.0);

    // cos(2 pi x) t: one tangential atom at |xi| = 1, so every tangential Besov
    // norm of a slice is |cos|_2 |t| = |t| / sqrt 2
    Field gn(g, Rank::scalar, NormalExtent::trace, TimeExtent::half);
    gn.fill_component(0, [](const std::vector<double>& x, double t) { return std::cos(2 * M_PI * x[0]) * t; });
    auto e = a_norm_endpoints(gn, 0, 2);
    const double lt = std::sqrt(1.0 / 3), lhalf = std::sqrt(2.0 / M_PI);  // |t|_2, |2 sqrt(t/pi)|_2
    EXPECT_NEAR(e.first, 2 * lt / std::sqrt(2.0), 1e-3);
    EXPECT_NEAR(e.second, (lt + lhalf) / std::sqrt(2.0), 2e-2);

    auto e2 = a_norm_endpoints(3.0 * gn, 0, 2);
    EXPECT_NEAR(e2.first, 3 * e.first, 1e-12);
    EXPECT_NEAR(e2.second, 3 * e.second, 1e-12);
}

TEST(ANormEndpoints, RejectsNonzeroHistoryAndWrongShape) {
    Grid g = grid2d(8, 4, 8);
    Field gn(g, Rank::scalar, NormalExtent::trace, TimeExtent::half);
    gn.fill_component(0, [](const std::vector<double>& x, double) { return std::cos(x[0]); });
    EXPECT_THROW(a_norm_endpoints(gn, 1, 2), PreconditionError);
    Field bulk(g, Rank::scalar);
    EXPECT_THROW(a_norm_endpoints(bulk, 1, 2), ShapeError);
}
