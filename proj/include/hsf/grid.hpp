#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsf {

/// Raised when operands disagree on grid, extent or rank.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when an operation's documented precondition does not hold.
struct PreconditionError : std::domain_error {
    using std::domain_error::domain_error;
};

enum class Spacing { uniform, graded };

/// Geometry of the truncated half-space x' in [0,L)^{n-1} (periodic),
/// x_n in [0,H], t in [0,T].
///
/// Resolutions count intervals in x_n and t (nn+1 and nt+1 nodes) and samples
/// per side in x' (periodic, nx nodes).
struct GridSpec {
    int dim = 2;
    double L = 1.0;
    int nx = 16;
    double H = 1.0;
    int nn = 16;
    double T = 1.0;
    int nt = 16;
    Spacing normal_spacing = Spacing::uniform;
    Spacing time_spacing = Spacing::uniform;
    /// tanh stretching strength for graded spacing
    double grading = 2.0;
};

class Grid {
public:
    Grid() : Grid(GridSpec{}) {}

    explicit Grid(const GridSpec& spec) : spec_(spec) {
        if (spec.dim != 2 && spec.dim != 3)
            throw std::invalid_argument("grid: dim must be 2 or 3");
        if (spec.nx < 4 || spec.nn < 4 || spec.nt < 4)
            throw std::invalid_argument("grid: resolutions must be >= 4");
        if (spec.nx % 2 != 0)
            throw std::invalid_argument("grid: tangential resolution must be even");
        if (!(spec.L > 0 && spec.H > 0 && spec.T > 0))
            throw std::invalid_argument("grid: L, H, T must be positive");
        if (spec.grading <= 0)
            throw std::invalid_argument("grid: grading must be positive");
        z_ = nodes(spec.H, spec.nn, spec.normal_spacing, spec.grading);
        t_ = nodes(spec.T, spec.nt, spec.time_spacing, spec.grading);
    }

    const GridSpec& spec() const { return spec_; }
    int dim() const { return spec_.dim; }
    int tangential_dims() const { return spec_.dim - 1; }
    int nx() const { return spec_.nx; }
    int nn() const { return spec_.nn; }
    int nt() const { return spec_.nt; }
    double L() const { return spec_.L; }
    double H() const { return spec_.H; }
    double T() const { return spec_.T; }

    /// Number of tangential sample points, nx^(n-1).
    std::size_t tangential_size() const {
        return spec_.dim == 2 ? std::size_t(spec_.nx) : std::size_t(spec_.nx) * spec_.nx;
    }
    double dx() const { return spec_.L / spec_.nx; }
    /// Uniform normal step; only meaningful for uniform spacing.
    double dz() const { return spec_.H / spec_.nn; }
    double dt() const { return spec_.T / spec_.nt; }

    bool uniform_normal() const { return spec_.normal_spacing == Spacing::uniform; }
    bool uniform_time() const { return spec_.time_spacing == Spacing::uniform; }

    const std::vector<double>& z() const { return z_; }
    const std::vector<double>& t() const { return t_; }

    /// Tangential coordinate of axis `axis` (0-based) for flattened index p.
    double x_tan(std::size_t p, int axis) const {
        return double(tangential_index(p, axis)) * dx();
    }

    /// Flattened tangential index is row-major with axis 0 slowest.
    int tangential_index(std::size_t p, int axis) const {
        if (spec_.dim == 2) return int(p);
        return axis == 0 ? int(p / spec_.nx) : int(p % spec_.nx);
    }

    bool operator==(const Grid& o) const {
        const auto& a = spec_;
        const auto& b = o.spec_;
        return a.dim == b.dim && a.L == b.L && a.nx == b.nx && a.H == b.H && a.nn == b.nn &&
               a.T == b.T && a.nt == b.nt && a.normal_spacing == b.normal_spacing &&
               a.time_spacing == b.time_spacing && a.grading == b.grading;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

    /// Same geometry with every resolution multiplied by `factor`.
    Grid refined(int factor_x, int factor_n, int factor_t) const {
        GridSpec s = spec_;
        s.nx *= factor_x;
        s.nn *= factor_n;
        s.nt *= factor_t;
        return Grid(s);
    }

    /// Box and resolution rescaled parabolically: (L,H,T) -> (lL, lH, l^2 T).
    Grid rescaled(double lambda) const {
        GridSpec s = spec_;
        s.L *= lambda;
        s.H *= lambda;
        s.T *= lambda * lambda;
        return Grid(s);
    }

private:
    static std::vector<double> nodes(double extent, int n, Spacing rule, double beta) {
        std::vector<double> v(std::size_t(n) + 1);
        for (int k = 0; k <= n; ++k) {
            double s = double(k) / n;
            if (rule == Spacing::uniform) {
                v[k] = extent * s;
            } else {
                // clustered toward 0, v[0] = 0 and v[n] = extent
                v[k] = extent * (1.0 - std::tanh(beta * (1.0 - s)) / std::tanh(beta));
            }
        }
        v.front() = 0.0;
        v.back() = extent;
        return v;
    }

    GridSpec spec_;
    std::vector<double> z_;
    std::vector<double> t_;
};

}  // namespace hsf
