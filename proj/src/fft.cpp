// SPDX-License-Identifier: Apache-2.0
#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

namespace cstdoa::detail {

namespace {

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
};

// Plan creation in FFTW is not thread-safe; execution with the new-array
// interface is. Plans live for the process lifetime.
const PlanPair& plans_for(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, PlanPair> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    const int len = static_cast<int>(n);
    auto* r = fftw_alloc_real(n);
    auto* c = fftw_alloc_complex(n / 2 + 1);
    PlanPair p;
    p.forward = fftw_plan_dft_r2c_1d(len, r, c, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.inverse = fftw_plan_dft_c2r_1d(len, c, r, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(r);
    fftw_free(c);
    return cache.emplace(n, p).first->second;
}

}  // namespace

void rfft(std::span<const double> in, std::span<std::complex<double>> out) {
    const auto& p = plans_for(in.size());
    fftw_execute_dft_r2c(p.forward, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
}

void irfft(std::span<const std::complex<double>> in, std::span<double> out) {
    const auto& p = plans_for(out.size());
    // c2r destroys its input
    std::unique_ptr<std::complex<double>[]> scratch(new std::complex<double>[in.size()]);
    std::copy(in.begin(), in.end(), scratch.get());
    fftw_execute_dft_c2r(p.inverse, reinterpret_cast<fftw_complex*>(scratch.get()), out.data());
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace cstdoa::detail
