#pragma once

// Frequency lattice attached to the periodic axes of a Field, plus the
// forward/inverse transforms of a single scalar component.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "hsf/fft.hpp"
#include "hsf/field.hpp"

namespace hsf {

/// One lattice frequency. xi holds the spatial frequencies in cycles per unit
/// length: tangential axes first, then the normal axis when the field is full in
/// x_n. tau is the temporal frequency when the field is full in t.
struct Freq {
    std::array<double, 3> xi{0.0, 0.0, 0.0};
    int nspace = 0;
    double tau = 0.0;
    bool has_tau = false;
    /// Index of the normal frequency in xi, or -1.
    int normal_slot = -1;

    double xi_norm2() const {
        double s = 0.0;
        for (int i = 0; i < nspace; ++i) s += xi[i] * xi[i];
        return s;
    }
    double xi_norm() const { return std::sqrt(xi_norm2()); }
    double tan_norm2() const {
        double s = 0.0;
        for (int i = 0; i < nspace; ++i)
            if (i != normal_slot) s += xi[i] * xi[i];
        return s;
    }
    /// Parabolic radius |xi| + |tau|^(1/2).
    double parabolic_radius() const {
        return xi_norm() + (has_tau ? std::sqrt(std::abs(tau)) : 0.0);
    }
    bool is_zero() const { return xi_norm2() == 0.0 && (!has_tau || tau == 0.0); }
};

/// Periodic structure of a field's scalar block (t, x_n, x').
class Lattice {
public:
    explicit Lattice(const Field& f) {
        const Grid& g = f.grid();
        const int n = g.dim();
        nt_ = int(f.nt_nodes());
        nz_ = int(f.nz_nodes());
        np_ = int(f.np());
        t_full_ = f.time_extent() == TimeExtent::full;
        z_full_ = f.normal_extent() == NormalExtent::full;
        if (t_full_ && f.normal_extent() == NormalExtent::half)
            throw ShapeError("lattice: full time extent needs full or trace normal extent");
        ntan_ = n - 1;
        nx_ = g.nx();
        L_ = g.L();
        if (t_full_) period_t_ = 2.0 * g.T();
        if (z_full_) period_z_ = 2.0 * g.H();

        if (t_full_) {
            dims_ = {nt_, nz_};
            howmany_ = 1;
        } else if (z_full_) {
            dims_ = {nz_};
            howmany_ = nt_;
        } else {
            dims_ = {};
            howmany_ = nt_ * nz_;
        }
        for (int a = 0; a < ntan_; ++a) dims_.push_back(nx_);
        block_ = 1;
        for (int d : dims_) block_ *= std::size_t(d);
    }

    std::size_t block() const { return block_; }
    int howmany() const { return howmany_; }
    std::size_t total() const { return block_ * std::size_t(howmany_); }
    bool time_periodic() const { return t_full_; }
    bool normal_periodic() const { return z_full_; }
    int tangential_dims() const { return ntan_; }

    /// Frequency of flattened index q within one block. With odd = true, any
    /// Nyquist component is replaced by 0 so odd symbols stay real there.
    Freq freq(std::size_t q, bool odd) const {
        Freq fr;
        // Tangential axes are the fastest-varying, axis ntan-1 fastest.
        std::size_t rem = q;
        std::array<int, 2> tan_idx{0, 0};
        for (int a = ntan_ - 1; a >= 0; --a) {
            tan_idx[a] = int(rem % std::size_t(nx_));
            rem /= std::size_t(nx_);
        }
        int kz = 0, mt = 0;
        if (t_full_) {
            kz = int(rem % std::size_t(nz_));
            mt = int(rem / std::size_t(nz_));
        } else if (z_full_) {
            kz = int(rem);
        }
        for (int a = 0; a < ntan_; ++a) fr.xi[a] = axis_freq(tan_idx[a], nx_, L_, odd);
        fr.nspace = ntan_;
        if (z_full_) {
            fr.normal_slot = ntan_;
            fr.xi[ntan_] = axis_freq(kz, nz_, period_z_, odd);
            fr.nspace = ntan_ + 1;
        }
        if (t_full_) {
            fr.has_tau = true;
            fr.tau = axis_freq(mt, nt_, period_t_, odd);
        }
        return fr;
    }

    /// Scalar component c of f, forward transformed.
    std::vector<cplx> forward(const Field& f, int c = 0) const {
        std::vector<cplx> a(total());
        const int C = f.components();
        auto v = f.values();
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = v[i * std::size_t(C) + std::size_t(c)];
        fft_many(a.data(), dims_, howmany_, FFTW_FORWARD);
        return a;
    }

    /// Inverse transform of a, real part written to component c of f.
    void inverse(std::vector<cplx> a, Field& f, int c = 0) const {
        fft_many(a.data(), dims_, howmany_, FFTW_BACKWARD);
        const double s = 1.0 / double(block_);
        const int C = f.components();
        auto v = f.values();
        for (std::size_t i = 0; i < a.size(); ++i) v[i * std::size_t(C) + std::size_t(c)] = a[i].real() * s;
    }

    /// Multiply every block of a by sym(freq) in place.
    void multiply(std::vector<cplx>& a, const std::function<cplx(const Freq&)>& sym, bool odd) const {
        std::vector<cplx> m(block_);
        for (std::size_t q = 0; q < block_; ++q) m[q] = sym(freq(q, odd));
        for (int b = 0; b < howmany_; ++b) {
            cplx* p = a.data() + std::size_t(b) * block_;
            for (std::size_t q = 0; q < block_; ++q) p[q] *= m[q];
        }
    }

    /// Scalar multiplier applied to component c_in, written to component c_out of out.
    void apply(const Field& in, int c_in, Field& out, int c_out,
               const std::function<cplx(const Freq&)>& sym, bool odd) const {
        auto a = forward(in, c_in);
        multiply(a, sym, odd);
        inverse(std::move(a), out, c_out);
    }

private:
    static double axis_freq(int i, int n, double period, bool odd) {
        if (odd && 2 * i == n) return 0.0;
        return double(wavenumber(i, n)) / period;
    }

    int nt_ = 1, nz_ = 1, np_ = 1, ntan_ = 1, nx_ = 1;
    bool t_full_ = false, z_full_ = false;
    double L_ = 1.0, period_t_ = 1.0, period_z_ = 1.0;
    std::vector<int> dims_;
    int howmany_ = 1;
    std::size_t block_ = 1;
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace hsf
