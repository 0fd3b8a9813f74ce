// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cstdoa/tdoa.hpp"

namespace cstdoa {

/// r(tau) = sum_i x1[i] * x2[i + tau] for tau in [-max_lag, max_lag];
/// out-of-range samples count as zero. Element k holds tau = k - max_lag.
/// With x1 the reference and x2 a copy delayed by D samples, the peak is at
/// tau = D.
std::vector<double> cross_correlate(std::span<const double> x1, std::span<const double> x2,
                                    std::size_t max_lag);

/// Lag of the largest correlation value; ties go to the smallest |tau|.
std::ptrdiff_t xcorr_peak_lag(std::span<const double> corr);

/// Full-rate cross-correlation TDOA. max_abs_delay bounds the lag search
/// (d_max / c). Confidence is reported as not-applicable and the estimate is
/// always marked accepted.
TdoaReport tdoa_xcorr(std::span<const double> reference, std::span<const double> signal,
                      double max_abs_delay, double sample_period, bool refine = true);

}  // namespace cstdoa
