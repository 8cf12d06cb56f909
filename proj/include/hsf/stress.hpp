#pragma once

// Shear-dependent extra stress S(A) = F(A) A and its deviation from the
// linear part.
//
//   S1 = (mu0 + mu1 |A|)^{d-2} A
//   S2 = (mu0 + mu1 |A|^2)^{(d-2)/2} A
//   S3 = (mu0 + mu1 |A|^{d-2}) A
//   newtonian: F = mu0,  log: F = 1/ln|A| + 1 (F(0) = 1, defined for |A| < 1)
//
// sigma_times works with F rescaled so that 2 F(0) = I:
//   sigma(A) A = (F(A) - F(0)) / (2 F(0)) A.

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hsf/besov.hpp"
#include "hsf/field.hpp"

namespace hsf {

enum class StressFamily { S1, S2, S3, newtonian, log };

inline StressFamily parse_stress_family(const std::string& s) {
    if (s == "S1" || s == "s1") return StressFamily::S1;
    if (s == "S2" || s == "s2") return StressFamily::S2;
    if (s == "S3" || s == "s3") return StressFamily::S3;
    if (s == "newtonian") return StressFamily::newtonian;
    if (s == "log") return StressFamily::log;
    throw std::invalid_argument("unknown stress family '" + s + "'");
}

inline const char* to_string(StressFamily f) {
    switch (f) {
        case StressFamily::S1: return "S1";
        case StressFamily::S2: return "S2";
        case StressFamily::S3: return "S3";
        case StressFamily::newtonian: return "newtonian";
        case StressFamily::log: return "log";
    }
    return "?";
}

/// Frobenius norm of an n x n sample.
inline double frob(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

struct StressModel {
    StressFamily family = StressFamily::newtonian;
    double mu0 = 1.0, mu1 = 1.0, d = 2.0;

    StressModel() = default;
    StressModel(StressFamily f, double m0, double m1, double dd) : family(f), mu0(m0), mu1(m1), d(dd) { validate(); }

    void validate() const {
        if (family == StressFamily::log) return;
        if (!(mu0 > 0.0) || !(mu1 > 0.0)) throw std::invalid_argument("stress model: mu0, mu1 must be > 0");
        if (family != StressFamily::newtonian && !(d > 1.0)) throw std::invalid_argument("stress model: d must be > 1");
    }

    /// F(0) is finite (and then the sigma route is available).
    bool finite_at_zero() const { return !(family == StressFamily::S3 && d < 2.0); }

    /// Scalar viscosity F at |A| = r.
    double viscosity(double r) const {
        switch (family) {
            case StressFamily::S1: return std::pow(mu0 + mu1 * r, d - 2.0);
            case StressFamily::S2: return std::pow(mu0 + mu1 * r * r, 0.5 * (d - 2.0));
            case StressFamily::S3:
                if (r == 0.0) {
                    if (d > 2.0) return mu0;
                    if (d == 2.0) return mu0 + mu1;
                    return std::numeric_limits<double>::infinity();
                }
                return mu0 + mu1 * std::pow(r, d - 2.0);
            case StressFamily::newtonian: return mu0;
            case StressFamily::log:
                if (r == 0.0) return 1.0;
                if (r >= 1.0) throw std::domain_error("log stress model: |A| must be < 1");
                return 1.0 / std::log(r) + 1.0;
        }
        return 0.0;
    }

    double viscosity_at_zero() const { return viscosity(0.0); }

    /// (F(r) - F(0)) / (2 F(0)); identically 0 for the newtonian family.
    double sigma_factor(double r) const {
        if (family == StressFamily::newtonian) return 0.0;
        if (!finite_at_zero()) throw std::domain_error("stress model: F(0) is infinite (S3 with d < 2)");
        const double f0 = viscosity_at_zero();
        return (viscosity(r) - f0) / (2.0 * f0);
    }

    std::string describe() const {
        return std::string(to_string(family)) + " mu0=" + std::to_string(mu0) + " mu1=" + std::to_string(mu1) +
               " d=" + std::to_string(d);
    }
};

/// S(A) for one n x n sample (out may alias a).
inline void eval_stress(const StressModel& m, std::span<const double> a, std::span<double> out) {
    const double r = frob(a);
    // S3 with d < 2 has S3(0) = 0 as its limit value
    const double f = r == 0.0 && !m.finite_at_zero() ? 0.0 : m.viscosity(r);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f * a[i];
}

/// sigma(A) A for one sample.
inline void sigma_times(const StressModel& m, std::span<const double> a, std::span<double> out) {
    const double f = m.sigma_factor(frob(a));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f * a[i];
}

namespace detail {
template <class Op>
Field map_tensor(const Field& A, Op op) {
    if (A.rank() != Rank::tensor) throw ShapeError("stress: tensor field required");
    Field out(A.grid(), Rank::tensor, A.normal_extent(), A.time_extent());
    const std::size_t C = std::size_t(A.components());
    for (std::size_t q = 0; q < A.size(); q += C)
        op(std::span<const double>(A.values().data() + q, C), std::span<double>(out.values().data() + q, C));
    return out;
}
}  // namespace detail

inline Field eval_stress(const StressModel& m, const Field& A) {
    return detail::map_tensor(A, [&](auto a, auto o) { eval_stress(m, a, o); });
}

inline Field sigma_times(const StressModel& m, const Field& A) {
    return detail::map_tensor(A, [&](auto a, auto o) { sigma_times(m, a, o); });
}

struct ModulusEstimate {
    double delta = 0.0;
    double epsilon = 0.0;
    std::size_t pairs = 0;
    int dim = 2;
    bool above_one = false;  // eps >= 1: outside the contraction regime, caller decides
};

/// Uniform sample from the open delta-ball of symmetric n x n matrices.
inline std::vector<double> random_symmetric(int n, double radius, std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> a(std::size_t(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) a[std::size_t(i * n + j)] = a[std::size_t(j * n + i)] = N(rng);
    const int free = n * (n + 1) / 2;
    const double s = radius * std::pow(U(rng), 1.0 / free) / std::max(frob(a), 1e-300);
    for (auto& v : a) v *= s;
    return a;
}

/// Empirical sup |sigma(A)A - sigma(B)B| / |A - B| over symmetric |A|, |B| < delta:
/// `pairs` random pairs (half of them close pairs, probing the local Lipschitz
/// constant) plus pairs along the radial direction A = a E, B = b E.
inline ModulusEstimate modulus_estimate(const StressModel& m, double delta, std::size_t pairs = 100'000, int n = 2,
                                        std::uint64_t seed = 20240501) {
    if (!(delta > 0.0)) throw std::invalid_argument("modulus_estimate: delta must be > 0");
    ModulusEstimate r;
    r.delta = delta;
    r.dim = n;
    if (m.family == StressFamily::newtonian) {
        r.pairs = pairs;
        return r;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const std::size_t C = std::size_t(n * n);
    std::vector<double> sa(C), sb(C), diff(C);
    auto ratio = [&](const std::vector<double>& a, const std::vector<double>& b) {
        sigma_times(m, a, sa);
        sigma_times(m, b, sb);
        for (std::size_t i = 0; i < C; ++i) diff[i] = a[i] - b[i];
        const double den = frob(diff);
        if (den == 0.0) return 0.0;
        for (std::size_t i = 0; i < C; ++i) diff[i] = sa[i] - sb[i];
        return frob(diff) / den;
    };
    const double inside = delta * (1.0 - 1e-12);
    for (std::size_t k = 0; k < pairs; ++k) {
        auto a = random_symmetric(n, inside, rng);
        std::vector<double> b;
        if (k % 2 == 0) {
            b = random_symmetric(n, inside, rng);
        } else {
            // close pair: small perturbation kept inside the ball
            auto e = random_symmetric(n, 1e-3 * delta, rng);
            b = a;
            for (std::size_t i = 0; i < C; ++i) b[i] += e[i];
            const double nb = frob(b);
            if (nb >= inside)
                for (auto& v : b) v *= inside / nb;
        }
        r.epsilon = std::max(r.epsilon, ratio(a, b));
    }
    // radial direction, a and b on a fine grid of (0, delta)
    auto e = random_symmetric(n, 1.0, rng);
    const double ne = frob(e);
    for (auto& v : e) v /= ne;
    const int R = 256;
    for (int i = 1; i <= R; ++i)
        for (int j : {i - 1, std::max(0, i - 8)}) {
            if (j == i) continue;
            std::vector<double> a(C), b(C);
            for (std::size_t c = 0; c < C; ++c) {
                a[c] = inside * i / R * e[c];
                b[c] = inside * j / R * e[c];
            }
            r.epsilon = std::max(r.epsilon, ratio(a, b));
        }
    r.pairs = pairs + 2 * std::size_t(R);
    r.above_one = r.epsilon >= 1.0;
    return r;
}

struct PointwiseModulusReport {
    std::size_t pairs = 0;
    std::size_t violations = 0;
    double max_ratio = 0.0;
    double epsilon = 0.0;
};

/// |sigma(G(X))G(X) - sigma(G(Y))G(Y)| <= eps |G(X) - G(Y)| over random node pairs of a field.
inline PointwiseModulusReport pointwise_modulus_check(const Field& G, const StressModel& m, double eps,
                                                      std::size_t pairs = 10'000, std::uint64_t seed = 7) {
    if (G.rank() != Rank::tensor) throw ShapeError("pointwise_modulus_check: tensor field required");
    PointwiseModulusReport r;
    r.epsilon = eps;
    const std::size_t C = std::size_t(G.components());
    const std::size_t N = G.size() / C;
    Field SG = sigma_times(m, G);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> I(0, N - 1);
    for (std::size_t k = 0; k < pairs; ++k) {
        const std::size_t x = I(rng), y = I(rng);
        double num = 0.0, den = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            const double a = SG.values()[x * C + c] - SG.values()[y * C + c];
            const double b = G.values()[x * C + c] - G.values()[y * C + c];
            num += a * a;
            den += b * b;
        }
        num = std::sqrt(num);
        den = std::sqrt(den);
        ++r.pairs;
        if (den == 0.0) {
            if (num > 0.0) ++r.violations;
            continue;
        }
        r.max_ratio = std::max(r.max_ratio, num / den);
        if (num > eps * den * (1.0 + 1e-12)) ++r.violations;
    }
    return r;
}

struct SmallnessReport {
    double sup_norm = 0.0;
    double lhs = 0.0;  // |sigma(G) G|_B
    double rhs = 0.0;  // |G|_B
    double ratio = 0.0;
    double epsilon = 0.0;
    double slack = 0.10;
    bool passed = false;
};

/// Both sides of |sigma(G)G|_{B^{s,s/2}_{p,q}} <= eps |G|_{B^{s,s/2}_{p,q}} for |G|_inf <= delta,
/// through the double-integral norm (0 < s < 1); eps from modulus_estimate.
inline SmallnessReport besov_smallness_check(const Field& G, double s, double p, double q, const StressModel& m,
                                             double delta, std::uint64_t seed = 1) {
    SmallnessReport r;
    auto P = pointwise_norm(G);
    r.sup_norm = P.max_abs();
    if (r.sup_norm > delta) throw PreconditionError("besov_smallness_check: |G|_inf exceeds delta");
    r.epsilon = modulus_estimate(m, delta, 100'000, G.dim()).epsilon;
    const Field SG = sigma_times(m, G);
    r.lhs = besov_norm_integral(SG, s, p, q, seed).value;
    r.rhs = besov_norm_integral(G, s, p, q, seed).value;
    r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
    r.passed = r.lhs <= (1.0 + r.slack) * r.epsilon * r.rhs;
    return r;
}

}  // namespace hsf
