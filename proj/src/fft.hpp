// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace cstdoa::detail {

/// Real-to-complex forward transform of length n (out has n/2 + 1 bins).
void rfft(std::span<const double> in, std::span<std::complex<double>> out);
/// Inverse of rfft, unnormalized (result is n times the input).
void irfft(std::span<const std::complex<double>> in, std::span<double> out);

std::size_t next_pow2(std::size_t n);

}  // namespace cstdoa::detail
