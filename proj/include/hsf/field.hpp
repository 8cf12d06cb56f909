#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hsf/grid.hpp"

namespace hsf {

/// Which part of the normal axis a field is sampled on.
///   half : x_n = z_0..z_nn (grid nodes, first node on the boundary)
///   full : periodic extension x_n = (k - nn) dz, k = 0..2nn-1 (uniform grids only)
///   trace: the boundary plane x_n = 0 only
enum class NormalExtent { half, full, trace };

/// Which part of the time axis a field is sampled on.
///   half  : t = t_0..t_nt
///   full  : periodic extension t = (l - nt) dt, l = 0..2nt-1 (uniform grids only)
///   single: one time slice (a purely spatial field)
enum class TimeExtent { half, full, single };

/// 0 scalar, 1 vector (n components), 2 tensor (n*n components, row-major).
enum class Rank { scalar = 0, vector = 1, tensor = 2 };

inline int component_count(Rank r, int dim) {
    switch (r) {
        case Rank::scalar: return 1;
        case Rank::vector: return dim;
        case Rank::tensor: return dim * dim;
    }
    return 1;
}

inline const char* to_string(NormalExtent e) {
    switch (e) {
        case NormalExtent::half: return "half";
        case NormalExtent::full: return "full";
        case NormalExtent::trace: return "trace";
    }
    return "?";
}

inline const char* to_string(TimeExtent e) {
    switch (e) {
        case TimeExtent::half: return "half";
        case TimeExtent::full: return "full";
        case TimeExtent::single: return "single";
    }
    return "?";
}

/// Sampled field on (part of) a Grid. Values are stored row-major as
/// (t, x_n, x', component), the same order as the on-disk snapshot format.
class Field {
public:
    Field() = default;

    Field(Grid grid, Rank rank, NormalExtent z = NormalExtent::half,
          TimeExtent t = TimeExtent::half)
        : grid_(std::move(grid)), rank_(rank), zext_(z), text_(t) {
        if (z == NormalExtent::full && !grid_.uniform_normal())
            throw ShapeError("field: full normal extent requires uniform normal spacing");
        if (t == TimeExtent::full && !grid_.uniform_time())
            throw ShapeError("field: full time extent requires uniform time spacing");
        values_.assign(size(), 0.0);
    }

    const Grid& grid() const { return grid_; }
    Rank rank() const { return rank_; }
    NormalExtent normal_extent() const { return zext_; }
    TimeExtent time_extent() const { return text_; }
    int dim() const { return grid_.dim(); }
    int components() const { return component_count(rank_, grid_.dim()); }

    std::size_t nt_nodes() const {
        switch (text_) {
            case TimeExtent::half: return std::size_t(grid_.nt()) + 1;
            case TimeExtent::full: return 2 * std::size_t(grid_.nt());
            case TimeExtent::single: return 1;
        }
        return 1;
    }
    std::size_t nz_nodes() const {
        switch (zext_) {
            case NormalExtent::half: return std::size_t(grid_.nn()) + 1;
            case NormalExtent::full: return 2 * std::size_t(grid_.nn());
            case NormalExtent::trace: return 1;
        }
        return 1;
    }
    std::size_t np() const { return grid_.tangential_size(); }
    std::size_t size() const { return nt_nodes() * nz_nodes() * np() * std::size_t(components()); }

    std::size_t index(std::size_t m, std::size_t k, std::size_t p, int c = 0) const {
        return ((m * nz_nodes() + k) * np() + p) * std::size_t(components()) + std::size_t(c);
    }

    double& operator()(std::size_t m, std::size_t k, std::size_t p, int c = 0) {
        return values_[index(m, k, p, c)];
    }
    double operator()(std::size_t m, std::size_t k, std::size_t p, int c = 0) const {
        return values_[index(m, k, p, c)];
    }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    /// Normal coordinate of node k for this extent.
    double z(std::size_t k) const {
        switch (zext_) {
            case NormalExtent::half: return grid_.z()[k];
            case NormalExtent::full: return (double(k) - grid_.nn()) * grid_.dz();
            case NormalExtent::trace: return 0.0;
        }
        return 0.0;
    }
    /// Time coordinate of node m for this extent.
    double t(std::size_t m) const {
        switch (text_) {
            case TimeExtent::half: return grid_.t()[m];
            case TimeExtent::full: return (double(m) - grid_.nt()) * grid_.dt();
            case TimeExtent::single: return 0.0;
        }
        return 0.0;
    }
    double x(std::size_t p, int axis) const { return grid_.x_tan(p, axis); }

    /// Spatial point (x', x_n) of node (k, p) as an n-vector.
    std::vector<double> point(std::size_t k, std::size_t p) const {
        std::vector<double> x(static_cast<std::size_t>(dim()));
        for (int a = 0; a + 1 < dim(); ++a) x[a] = this->x(p, a);
        x[dim() - 1] = z(k);
        return x;
    }

    bool same_layout(const Field& o) const {
        return grid_ == o.grid_ && rank_ == o.rank_ && zext_ == o.zext_ && text_ == o.text_;
    }
    bool same_support(const Field& o) const {
        return grid_ == o.grid_ && zext_ == o.zext_ && text_ == o.text_;
    }

    /// Fill from f(x, t) -> component values (size components()).
    void fill(const std::function<void(const std::vector<double>&, double, std::span<double>)>& f) {
        const int C = components();
        for (std::size_t m = 0; m < nt_nodes(); ++m)
            for (std::size_t k = 0; k < nz_nodes(); ++k)
                for (std::size_t p = 0; p < np(); ++p) {
                    auto x = point(k, p);
                    f(x, t(m), std::span<double>(&values_[index(m, k, p, 0)], std::size_t(C)));
                }
    }

    /// Scalar convenience overload of fill for a single component.
    void fill_component(int c, const std::function<double(const std::vector<double>&, double)>& f) {
        for (std::size_t m = 0; m < nt_nodes(); ++m)
            for (std::size_t k = 0; k < nz_nodes(); ++k)
                for (std::size_t p = 0; p < np(); ++p) (*this)(m, k, p, c) = f(point(k, p), t(m));
    }

    /// Extract a single component as a scalar field.
    Field component(int c) const {
        Field out(grid_, Rank::scalar, zext_, text_);
        const int C = components();
        for (std::size_t i = 0, n = size() / std::size_t(C); i < n; ++i)
            out.values_[i] = values_[i * std::size_t(C) + std::size_t(c)];
        return out;
    }

    /// Overwrite component c from a scalar field of the same support.
    void set_component(int c, const Field& s) {
        if (!same_support(s) || s.rank() != Rank::scalar)
            throw ShapeError("set_component: support mismatch");
        const int C = components();
        for (std::size_t i = 0, n = size() / std::size_t(C); i < n; ++i)
            values_[i * std::size_t(C) + std::size_t(c)] = s.values_[i];
    }

    /// Single time slice m as a spatial field.
    Field time_slice(std::size_t m) const {
        Field out(grid_, rank_, zext_, TimeExtent::single);
        const std::size_t block = nz_nodes() * np() * std::size_t(components());
        std::copy_n(values_.begin() + std::ptrdiff_t(m * block), block, out.values_.begin());
        return out;
    }

    Field& operator+=(const Field& o) {
        check(o, "+=");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        check(o, "-=");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    Field& operator*=(double a) {
        for (auto& v : values_) v *= a;
        return *this;
    }
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double s, Field a) { return a *= s; }

    /// a*this + b*o
    Field axpby(double a, double b, const Field& o) const {
        check(o, "axpby");
        Field out = *this;
        for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = a * values_[i] + b * o.values_[i];
        return out;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    void check(const Field& o, const char* what) const {
        if (!same_layout(o)) throw ShapeError(std::string("field ") + what + ": layout mismatch");
    }

    Grid grid_;
    Rank rank_ = Rank::scalar;
    NormalExtent zext_ = NormalExtent::half;
    TimeExtent text_ = TimeExtent::half;
    std::vector<double> values_;
};

/// Boundary data g(x', t) on x_n = 0. Stored as a Field with trace normal extent;
/// the normal component g_n is component n-1 and is exposed separately.
using BoundaryField = Field;

inline Field make_boundary(const Grid& g, Rank r, TimeExtent t = TimeExtent::half) {
    return Field(g, r, NormalExtent::trace, t);
}

inline Field normal_part(const Field& g) {
    if (g.rank() != Rank::vector) throw ShapeError("normal_part: vector field required");
    return g.component(g.dim() - 1);
}

/// Tangential part of a vector field with the normal component zeroed.
inline Field tangential_part(const Field& g) {
    if (g.rank() != Rank::vector) throw ShapeError("tangential_part: vector field required");
    Field out = g;
    const int n = g.dim();
    for (std::size_t i = 0; i < out.size(); i += std::size_t(n)) out.values()[i + std::size_t(n - 1)] = 0.0;
    return out;
}

/// Restriction of a half-extent field to x_n = 0.
inline Field trace_of(const Field& f) {
    if (f.normal_extent() == NormalExtent::trace) return f;
    if (f.normal_extent() != NormalExtent::half) throw ShapeError("trace_of: half extent required");
    Field out(f.grid(), f.rank(), NormalExtent::trace, f.time_extent());
    const int C = f.components();
    for (std::size_t m = 0; m < f.nt_nodes(); ++m)
        for (std::size_t p = 0; p < f.np(); ++p)
            for (int c = 0; c < C; ++c) out(m, 0, p, c) = f(m, 0, p, c);
    return out;
}

/// Relative max-norm difference |a-b|_inf / max(|b|_inf, floor).
inline double rel_max_diff(const Field& a, const Field& b, double floor = 1e-300) {
    if (!a.same_layout(b)) throw ShapeError("rel_max_diff: layout mismatch");
    double d = 0.0;
    auto va = a.values();
    auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) d = std::max(d, std::abs(va[i] - vb[i]));
    return d / std::max(b.max_abs(), floor);
}

}  // namespace hsf
