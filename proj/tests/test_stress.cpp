#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hsf/stress.hpp"
#include "test_support.hpp"

using namespace hsf;
using namespace hsf::testing;

namespace {

std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b, int n, bool ta = false) {
    std::vector<double> c(std::size_t(n * n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                c[std::size_t(i * n + j)] += (ta ? a[std::size_t(k * n + i)] : a[std::size_t(i * n + k)]) * b[std::size_t(k * n + j)];
    return c;
}

std::vector<double> random_orthogonal(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    std::vector<double> q(std::size_t(n * n));
    for (auto& v : q) v = N(rng);
    // Gram-Schmidt on rows
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) {
            double d = 0;
            for (int j = 0; j < n; ++j) d += q[std::size_t(i * n + j)] * q[std::size_t(k * n + j)];
            for (int j = 0; j < n; ++j) q[std::size_t(i * n + j)] -= d * q[std::size_t(k * n + j)];
        }
        double s = 0;
        for (int j = 0; j < n; ++j) s += q[std::size_t(i * n + j)] * q[std::size_t(i * n + j)];
        for (int j = 0; j < n; ++j) q[std::size_t(i * n + j)] /= std::sqrt(s);
    }
    return q;
}

std::vector<StressModel> all_models() {
    return {{StressFamily::S1, 1.0, 0.5, 3.0}, {StressFamily::S1, 1.0, 2.0, 1.5}, {StressFamily::S2, 1.0, 1.0, 4.0},
            {StressFamily::S3, 0.5, 1.0, 3.0}, {StressFamily::S3, 1.0, 1.0, 1.5}, {StressFamily::newtonian, 2.0, 1.0, 2.0},
            {StressFamily::log, 0.0, 0.0, 0.0}};
}

}  // namespace

TEST(StressModel, Validation) {
    EXPECT_THROW(StressModel(StressFamily::S1, 0.0, 1.0, 3.0), std::invalid_argument);
    EXPECT_THROW(StressModel(StressFamily::S2, 1.0, -1.0, 3.0), std::invalid_argument);
    EXPECT_THROW(StressModel(StressFamily::S3, 1.0, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(parse_stress_family("S4"), std::invalid_argument);
    EXPECT_EQ(parse_stress_family("S2"), StressFamily::S2);
    StressModel thin(StressFamily::S3, 1.0, 1.0, 1.5);
    EXPECT_FALSE(thin.finite_at_zero());
    std::vector<double> a{0.1, 0, 0, 0}, o(4);
    EXPECT_THROW(sigma_times(thin, a, o), std::domain_error);
}

TEST(EvalStress, ClosedForms) {
    std::vector<double> A{1, 0, 0, 0}, out(4);
    eval_stress(StressModel(StressFamily::S3, 1, 1, 3), A, out);
    for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(out[std::size_t(i)], 2 * A[std::size_t(i)]);

    std::vector<double> B{0.3, -0.7, -0.7, 2.0};
    eval_stress(StressModel(StressFamily::S2, 1.7, 3.1, 2), B, out);
    for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(out[std::size_t(i)], B[std::size_t(i)]);

    // S1: (mu0 + mu1 |B|)^{d-2} B
    const double r = std::sqrt(0.09 + 0.98 + 4.0);
    eval_stress(StressModel(StressFamily::S1, 1, 0.5, 3.5), B, out);
    EXPECT_NEAR(out[3], std::pow(1 + 0.5 * r, 1.5) * 2.0, 1e-13);

    std::vector<double> zero(4, 0.0);
    for (const auto& m : all_models()) {
        eval_stress(m, zero, out);
        for (double v : out) EXPECT_EQ(v, 0.0) << m.describe();
    }
}

TEST(SigmaTimes, NormalizedDeviation) {
    std::mt19937_64 rng(3);
    StressModel s3(StressFamily::S3, 0.5, 1.0, 3.0);  // 2 F(0) = I already
    StressModel newt(StressFamily::newtonian, 3.0, 1.0, 2.0);
    std::vector<double> out(4);
    for (int k = 0; k < 50; ++k) {
        auto A = random_symmetric(2, 2.0, rng);
        sigma_times(s3, A, out);
        const double r = frob(A);
        for (int i = 0; i < 4; ++i) EXPECT_NEAR(out[std::size_t(i)], r * A[std::size_t(i)], 1e-14);
        sigma_times(newt, A, out);
        for (double v : out) EXPECT_EQ(v, 0.0);
    }
    // unnormalized S3 (mu0 = 2): F~ = F / 4, sigma A = mu1 |A| A / (2 mu0)
    StressModel s3b(StressFamily::S3, 2.0, 1.0, 3.0);
    std::vector<double> A{0.2, 0.1, 0.1, -0.3};
    sigma_times(s3b, A, out);
    EXPECT_NEAR(out[0], frob(A) * 0.2 / 4.0, 1e-15);
}

TEST(SigmaTimes, VanishesAtZeroWithModulus) {
    // |sigma(A) A| <= eps(|A|) |A| with eps -> 0
    for (const auto& m : all_models()) {
        if (!m.finite_at_zero()) continue;
        double prev = kInf;
        for (double r : {1e-1, 1e-2, 1e-3, 1e-4}) {
            const double e = std::abs(m.sigma_factor(r));
            EXPECT_LE(e, prev) << m.describe();
            prev = e;
        }
        EXPECT_LT(prev, 0.2) << m.describe();
    }
}

TEST(EvalStress, FrameIndifference) {
    std::mt19937_64 rng(11);
    for (int n : {2, 3})
        for (const auto& m : all_models())
            for (int k = 0; k < 20; ++k) {
                auto Q = random_orthogonal(n, rng);
                auto A = random_symmetric(n, m.family == StressFamily::log ? 0.9 : 3.0, rng);
                auto QtAQ = matmul(matmul(Q, A, n, true), Q, n);
                std::vector<double> s1(A.size()), s2(A.size());
                eval_stress(m, QtAQ, s1);
                eval_stress(m, A, s2);
                auto want = matmul(matmul(Q, s2, n, true), Q, n);
                const double scale = std::max(frob(want), 1e-300);
                for (std::size_t i = 0; i < A.size(); ++i) EXPECT_LE(std::abs(s1[i] - want[i]), 1e-12 * scale);
            }
}

TEST(EvalStress, FieldWrapperMatchesPointwise) {
    Field A = random_bandlimited(grid2d(8, 4, 4), Rank::tensor, NormalExtent::half, TimeExtent::half, 3, 5);
    StressModel m(StressFamily::S2, 1.0, 1.0, 4.0);
    Field S = eval_stress(m, A);
    std::vector<double> o(4);
    for (std::size_t q = 0; q < A.size(); q += 4) {
        eval_stress(m, std::span<const double>(A.values().data() + q, 4), o);
        for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(S.values()[q + c], o[c]);
    }
    EXPECT_THROW(eval_stress(m, Field(A.grid(), Rank::vector)), ShapeError);
}

TEST(ModulusEstimate, NewtonianIsZero) {
    for (double d : {0.01, 1.0, 10.0}) EXPECT_EQ(modulus_estimate(StressModel(StressFamily::newtonian, 1, 1, 2), d, 100).epsilon, 0.0);
    EXPECT_THROW(modulus_estimate(StressModel(), 0.0), std::invalid_argument);
}

TEST(ModulusEstimate, S3CubicWithinMeanValueBounds) {
    // sigma(A)A = |A|A: Lipschitz constant on the delta-ball lies in [delta, 2 delta]
    StressModel m(StressFamily::S3, 0.5, 1.0, 3.0);
    for (double d : {0.05, 0.1, 0.5}) {
        const auto e = modulus_estimate(m, d);
        EXPECT_GE(e.epsilon, d);
        EXPECT_LE(e.epsilon, 2 * d * (1 + 1e-12));
        EXPECT_GT(e.epsilon, 1.9 * d);
        EXPECT_EQ(e.pairs, 100'000u + 512u);
    }
}

TEST(ModulusEstimate, S2QuarticSlope) {
    // sigma(A)A = |A|^2 A / 2: eps(delta) ~ 3/2 delta^2
    StressModel m(StressFamily::S2, 1.0, 1.0, 4.0);
    std::vector<double> x, y;
    for (double d : {0.4, 0.2, 0.1, 0.05}) {
        x.push_back(std::log(d));
        y.push_back(std::log(modulus_estimate(m, d, 20'000).epsilon));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double n = double(x.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    EXPECT_GE(slope, 1.5);
}

TEST(ModulusEstimate, NondecreasingInDelta) {
    for (const auto& m : all_models()) {
        if (!m.finite_at_zero()) continue;
        double prev = 0;
        for (double d : {0.01, 0.05, 0.1, 0.3, 0.6}) {
            const double e = modulus_estimate(m, d, 20'000).epsilon;
            EXPECT_GE(e, prev * (1 - 1e-3)) << m.describe() << " delta=" << d;
            prev = std::max(prev, e);
        }
    }
}

TEST(PointwiseModulus, HoldsOnSmallFields) {
    for (auto m : {StressModel(StressFamily::S2, 1, 1, 4), StressModel(StressFamily::S3, 0.5, 1, 3)}) {
        const double delta = 0.1;
        Field G = random_bandlimited(grid2d(16, 8, 8), Rank::tensor, NormalExtent::half, TimeExtent::half, 4, 9);
        G *= 0.99 * delta / pointwise_norm(G).max_abs();
        const double eps = modulus_estimate(m, delta).epsilon;
        auto r = pointwise_modulus_check(G, m, eps);
        EXPECT_EQ(r.pairs, 10'000u);
        EXPECT_EQ(r.violations, 0u) << m.describe() << " max ratio " << r.max_ratio << " eps " << eps;
    }
}

TEST(SmallnessCheck, ZeroNewtonianAndAtom) {
    Grid g = grid2d(8, 6, 6, 2.0, 1.0, 1.0);
    StressModel s3(StressFamily::S3, 0.5, 1.0, 3.0);
    Field zero(g, Rank::tensor);
    auto z = besov_smallness_check(zero, 0.5, 2, 2, s3, 0.1);
    EXPECT_EQ(z.lhs, 0.0);
    EXPECT_EQ(z.rhs, 0.0);
    EXPECT_TRUE(z.passed);

    Field G(g, Rank::tensor);
    G.fill([&](const std::vector<double>& x, double t, std::span<double> v) {
        const double a = std::cos(M_PI * x[0]) * std::exp(-x[1]) * t;
        v[0] = a;
        v[3] = -a;
        v[1] = v[2] = 0.5 * a;
    });
    G *= 0.05 / pointwise_norm(G).max_abs();
    auto n = besov_smallness_check(G, 0.5, 2, 2, StressModel(StressFamily::newtonian, 1, 1, 2), 0.1);
    EXPECT_EQ(n.lhs, 0.0);
    auto r = besov_smallness_check(G, 0.5, 2, 2, s3, 0.1);
    EXPECT_TRUE(r.passed) << r.ratio << " vs " << r.epsilon;
    EXPECT_GT(r.lhs, 0.0);
    EXPECT_LE(r.ratio, r.epsilon * 1.1);
    EXPECT_THROW(besov_smallness_check(G, 0.5, 2, 2, s3, 0.01), PreconditionError);
}
