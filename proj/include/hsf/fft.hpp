#pragma once

// Thin FFTW wrapper: batched complex transforms over contiguous n-d blocks.

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace hsf {

using cplx = std::complex<double>;

namespace detail {

struct PlanKey {
    std::vector<int> dims;
    int howmany;
    int sign;
    bool operator<(const PlanKey& o) const {
        return std::tie(dims, howmany, sign) < std::tie(o.dims, o.howmany, o.sign);
    }
};

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache c;
        return c;
    }

    fftw_plan get(const std::vector<int>& dims, int howmany, int sign) {
        std::lock_guard<std::mutex> lock(mu_);
        PlanKey key{dims, howmany, sign};
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::size_t block = 1;
        for (int d : dims) block *= std::size_t(d);
        std::size_t total = block * std::size_t(howmany);
        auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
        fftw_plan p = fftw_plan_many_dft(int(dims.size()), dims.data(), howmany, buf, nullptr, 1,
                                         int(block), buf, nullptr, 1, int(block), sign,
                                         FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        if (!p) throw std::runtime_error("fftw: plan creation failed");
        plans_.emplace(key, p);
        return p;
    }

    ~PlanCache() {
        for (auto& [k, p] : plans_) fftw_destroy_plan(p);
    }

private:
    PlanCache() = default;
    std::mutex mu_;
    std::map<PlanKey, fftw_plan> plans_;
};

}  // namespace detail

/// In-place unnormalized DFT of `howmany` contiguous blocks of shape `dims`.
/// sign = -1 forward, +1 backward. Size-1 axes are dropped.
inline void fft_many(cplx* data, std::vector<int> dims, int howmany, int sign) {
    std::vector<int> d;
    for (int x : dims)
        if (x > 1) d.push_back(x);
    if (d.empty() || howmany <= 0) return;
    fftw_plan p = detail::PlanCache::instance().get(d, howmany, sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, buf, buf);
}

/// Signed integer wavenumber of DFT index i on an axis of size n.
/// Nyquist (i = n/2) is reported as +n/2.
inline int wavenumber(int i, int n) { return i <= n / 2 ? i : i - n; }

}  // namespace hsf
