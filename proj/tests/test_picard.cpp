#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hsf/picard.hpp"
#include "hsf/scenarios.hpp"
#include "hsf/weak.hpp"
#include "test_support.hpp"

using namespace hsf;
using namespace hsf::testing;

namespace {

Grid small_grid() { return grid2d(16, 32, 16, 2 * M_PI, 8.0, 1.0); }

StressModel s2() { return StressModel(StressFamily::S2, 1.0, 1.0, 4.0); }
StressModel s3() { return StressModel(StressFamily::S3, 0.5, 1.0, 3.0); }

constexpr double kAmp = 0.005;
constexpr double kDelta = 0.1;

struct GatedRun {
    GateReport gate;
    IterationResult run;
};

GatedRun gated_run(const StressModel& model, double amp = kAmp) {
    Grid g = small_grid();
    auto pb = boundary_wave_problem(g, amp);
    GateConfig gc;
    gc.delta = kDelta;
    GatedRun r;
    r.gate = smallness_gate(pb, model, NormExponents{}, gc);
    IterationOptions opt;
    opt.delta = kDelta;
    r.run = iterate(pb, model, opt, std::nullopt, &r.gate.u_lin);
    return r;
}

IterationTrace geometric_trace(double rho, int n) {
    IterationTrace t;
    t.scale = 1.0;
    double d = 1.0;
    for (int m = 0; m < n; ++m) {
        IterateRecord r;
        r.m = m;
        r.diff = d;
        if (m > 0) r.ratio = rho;
        t.append(r);
        d *= rho;
    }
    return t;
}

}  // namespace

TEST(NonlinearForcing, ZeroFieldGivesZero) {
    Grid g = small_grid();
    Field u(g, Rank::vector, NormalExtent::half, TimeExtent::half);
    auto nf = nonlinear_forcing(u, s3());
    EXPECT_EQ(nf.F.max_abs(), 0.0);
    EXPECT_EQ(nf.du_max, 0.0);
    EXPECT_FALSE(nf.regime_left);
}

TEST(NonlinearForcing, NewtonianIsConvectionOnly) {
    Grid g = small_grid();
    Field u = random_bandlimited(g, Rank::vector, NormalExtent::half, TimeExtent::half, 3, 5);
    auto nf = nonlinear_forcing(u, StressModel());
    Field expect = outer_product(u, u);
    expect *= -1.0;
    EXPECT_EQ((nf.F - expect).max_abs(), 0.0);
    EXPECT_EQ(nonlinear_forcing(u, StressModel(), kInf, false).F.max_abs(), 0.0);
}

TEST(NonlinearForcing, S3MatchesPointwiseFormula) {
    // mu0 = 1/2, mu1 = 1, d = 3: sigma(A) A = |A| A
    Grid g = small_grid();
    Field u = random_bandlimited(g, Rank::vector, NormalExtent::half, TimeExtent::half, 3, 9);
    u *= 0.1;
    auto nf = nonlinear_forcing(u, s3(), 0.05);
    const Field Du = symmetric_gradient(u);
    const Field uu = outer_product(u, u);
    const std::size_t C = std::size_t(Du.components());
    double err = 0.0, du = 0.0;
    for (std::size_t i = 0; i < Du.size() / C; ++i) {
        double a2 = 0.0;
        for (std::size_t c = 0; c < C; ++c) a2 += Du.values()[i * C + c] * Du.values()[i * C + c];
        const double a = std::sqrt(a2);
        du = std::max(du, a);
        for (std::size_t c = 0; c < C; ++c) {
            const double want = a * Du.values()[i * C + c] - uu.values()[i * C + c];
            err = std::max(err, std::abs(nf.F.values()[i * C + c] - want));
        }
    }
    EXPECT_LT(err, 1e-15);
    EXPECT_DOUBLE_EQ(nf.du_max, du);
    EXPECT_EQ(nf.regime_left, du > 0.05);
}

TEST(Gate, ZeroDataPasses) {
    Grid g = small_grid();
    auto pb = boundary_wave_problem(g, 0.0);
    auto r = smallness_gate(pb, s3(), NormExponents{});
    EXPECT_TRUE(r.passed) << r.failed;
    EXPECT_EQ(r.M01.total(), 0.0);
    EXPECT_EQ(r.M03.total(), 0.0);
    EXPECT_EQ(r.c, 0.0);
}

TEST(Gate, DataNormsScaleLinearly) {
    Grid g = small_grid();
    auto pb = boundary_wave_problem(g, 0.01);
    GateConfig gc;
    gc.delta = kDelta;
    auto a = smallness_gate(pb, s2(), NormExponents{}, gc);
    auto b = smallness_gate(scaled(pb, 3.0), s2(), NormExponents{}, gc);
    EXPECT_NEAR(b.M01.total() / a.M01.total(), 3.0, 1e-12);
    EXPECT_NEAR(b.M02.total() / a.M02.total(), 3.0, 1e-12);
    EXPECT_NEAR(b.M03.total() / a.M03.total(), 3.0, 1e-12);
    EXPECT_NEAR(b.c / a.c, 1.0, 1e-12);  // the fitted constant does not see the amplitude
    EXPECT_GT(a.M01.gn_a, 0.0);
    EXPECT_GT(a.M02.g, 0.0);
}

TEST(Gate, TieAtThresholdPasses) {
    Grid g = small_grid();
    auto pb = boundary_wave_problem(g, kAmp);
    GateConfig gc;
    gc.delta = kDelta;
    auto base = smallness_gate(pb, s2(), NormExponents{}, gc);
    ASSERT_TRUE(base.passed) << base.failed;
    // put delta0 exactly on the binding data constraint
    gc.c = base.c;
    gc.delta0 = 2.0 * base.c * std::max(base.M01.total(), base.M02.total());
    gc.M = base.c * base.M03.total();
    auto tie = smallness_gate(pb, s2(), NormExponents{}, gc);
    EXPECT_TRUE(tie.passed) << tie.failed;
    EXPECT_FALSE(tie.c_fitted);
    gc.M = std::nextafter(gc.M, 0.0);
    auto below = smallness_gate(pb, s2(), NormExponents{}, gc);
    EXPECT_FALSE(below.passed);
    EXPECT_FALSE(below.data_ok);
}

TEST(Gate, LargeDataFails) {
    Grid g = small_grid();
    auto pb = boundary_wave_problem(g, 0.5);
    GateConfig gc;
    gc.delta = kDelta;
    auto r = smallness_gate(pb, s3(), NormExponents{}, gc);
    EXPECT_FALSE(r.passed);
    EXPECT_FALSE(r.failed.empty());
}

TEST(Iterate, ZeroDataConvergesAtOnce) {
    Grid g = small_grid();
    auto r = iterate(boundary_wave_problem(g, 0.0), s3());
    EXPECT_EQ(r.status, IterationStatus::converged);
    EXPECT_EQ(r.u.max_abs(), 0.0);
    ASSERT_EQ(r.trace.rows.size(), 2u);  // m = 0 and the closing row
    EXPECT_EQ(r.trace.rows[0].diff, 0.0);
    EXPECT_FALSE(r.trace.rows[0].has_ratio());
}

TEST(Iterate, GatedRunsContract) {
    for (const auto& model : {s2(), s3()}) {
        auto [gate, run] = gated_run(model);
        ASSERT_TRUE(gate.passed) << model.describe() << ": " << gate.failed;
        EXPECT_EQ(run.status, IterationStatus::converged) << model.describe();
        EXPECT_LE(run.solves, 25);
        auto s = contraction_ratios(run.trace);
        ASSERT_FALSE(s.empty());
        EXPECT_LT(s.max_ratio_from2, 1.0) << model.describe();
        EXPECT_TRUE(s.below_half) << model.describe();
        for (const auto& r : run.trace.rows) EXPECT_FALSE(r.regime_left);

        auto b = check_uniform_bounds(run.trace, gate.delta0, gate.M);
        EXPECT_TRUE(b.held) << b.worst_w << ' ' << b.worst_crit << ' ' << b.worst_alpha;
    }
}

TEST(Iterate, HalvingTheDataDoesNotSlowContraction) {
    auto full = contraction_ratios(gated_run(s3()).run.trace);
    auto half = contraction_ratios(gated_run(s3(), 0.5 * kAmp).run.trace);
    ASSERT_FALSE(half.empty());
    for (const auto& [m, rho] : half.ratios)
        for (const auto& [mf, rf] : full.ratios)
            if (m == mf && m >= 2) {
                EXPECT_LE(rho, rf * 1.05 + 1e-12) << m;
            }
}

TEST(Iterate, LimitIsAWeakSolution) {
    Grid g = grid2d(32, 64, 32, 2 * M_PI, 8.0, 1.0);
    auto pb = boundary_wave_problem(g, kAmp);
    auto model = s3();
    IterationOptions opt;
    auto run = iterate(pb, model, opt);
    ASSERT_EQ(run.status, IterationStatus::converged);
    auto F = nonlinear_forcing(run.u, model).F;
    auto rep = weak_residual(run.u, pb.u0, F, weak_test_family(g));
    // dropping the nonlinear term makes the identity visibly worse
    auto off = weak_residual(run.u, pb.u0, Field(), weak_test_family(g));
    double on_sum = 0.0, off_sum = 0.0;
    for (std::size_t i = 0; i < rep.members.size(); ++i) {
        on_sum += rep.members[i].residual;
        off_sum += off.members[i].residual;
    }
    EXPECT_LT(rep.max_residual, 1e-5);
    EXPECT_LT(on_sum, 0.5 * off_sum);
}

TEST(Contraction, GeometricTraceFit) {
    auto s = contraction_ratios(geometric_trace(0.4, 10));
    EXPECT_NEAR(s.geometric_rate, 0.4, 1e-12);
    EXPECT_NEAR(s.max_ratio, 0.4, 1e-15);
    EXPECT_EQ(s.ratios.size(), 9u);
    EXPECT_TRUE(s.below_half);
}

TEST(Contraction, ConstantSequenceIsEmpty) {
    IterationTrace z;
    z.scale = 1.0;
    for (int m = 0; m < 5; ++m) {
        IterateRecord r;
        r.m = m;
        r.diff = 0.0;
        z.append(r);
    }
    EXPECT_TRUE(contraction_ratios(z).empty());
}

TEST(Contraction, TraceCsvSchema) {
    auto t = geometric_trace(0.5, 3);
    t.rows[0].norms = {1.0, 2.0, 3.0};
    std::ostringstream os;
    write_trace_csv(t, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "m,norm1,norm2,norm3,diff,ratio");
    std::getline(is, line);
    EXPECT_EQ(line, "0,1,2,3,1,nan");
    std::getline(is, line);
    EXPECT_EQ(line, "1,0,0,0,0.5,0.5");
}

TEST(Bounds, DetectsViolation) {
    IterationTrace t;
    IterateRecord r;
    r.norms = {0.1, 0.05, 0.2};
    t.append(r);
    EXPECT_TRUE(check_uniform_bounds(t, 0.1, 0.2).held);  // equality holds
    EXPECT_FALSE(check_uniform_bounds(t, 0.09, 1.0).held);
    EXPECT_FALSE(check_uniform_bounds(t, 1.0, 0.19).held);
}

TEST(Uniqueness, ZeroPerturbationIsIdentical) {
    Grid g = small_grid();
    auto pb = boundary_wave_problem(g, kAmp);
    Field zero(g, Rank::vector, NormalExtent::half, TimeExtent::half);
    auto r = uniqueness_probe(pb, s2(), zero);
    EXPECT_EQ(r.difference, 0.0);
    EXPECT_EQ(r.iterates_a, r.iterates_b);
}

TEST(Uniqueness, SmallPerturbationReachesTheSameLimit) {
    Grid g = small_grid();
    auto pb = boundary_wave_problem(g, kAmp);
    Field pert = random_bandlimited(g, Rank::vector, NormalExtent::half, TimeExtent::half, 3, 21);
    pert *= 1e-3 / pert.max_abs();
    IterationOptions opt;
    auto r = uniqueness_probe(pb, s3(), pert, opt);
    EXPECT_EQ(r.status_a, IterationStatus::converged);
    EXPECT_EQ(r.status_b, IterationStatus::converged);
    EXPECT_LE(r.difference, 10 * opt.stop_tol);
}

TEST(Uniqueness, LinearNewtonianCoincidesAfterOneStep) {
    Grid g = small_grid();
    auto pb = boundary_wave_problem(g, kAmp);
    Field pert = random_bandlimited(g, Rank::vector, NormalExtent::half, TimeExtent::half, 3, 4);
    IterationOptions opt;
    opt.convection = false;
    auto a = iterate(pb, StressModel(), opt);
    auto b = iterate(pb, StressModel(), opt, pert, &a.u_lin);
    EXPECT_EQ((a.u - b.u).max_abs(), 0.0);
    EXPECT_EQ((a.u - a.u_lin).max_abs(), 0.0);
}
