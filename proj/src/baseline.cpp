// SPDX-License-Identifier: Apache-2.0
#include "cstdoa/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cstdoa/error.hpp"

namespace cstdoa {

std::vector<double> cross_correlate(std::span<const double> x1, std::span<const double> x2,
                                    std::size_t max_lag) {
    if (x1.size() != x2.size()) {
        throw DimensionError("cross_correlate: blocks have lengths " + std::to_string(x1.size()) +
                             " and " + std::to_string(x2.size()));
    }
    const auto n = static_cast<std::ptrdiff_t>(x1.size());
    if (static_cast<std::ptrdiff_t>(max_lag) >= n) {
        throw DimensionError("cross_correlate: max_lag must be below the block length");
    }
    const auto l = static_cast<std::ptrdiff_t>(max_lag);
    std::vector<double> out(static_cast<std::size_t>(2 * l + 1), 0.0);
    for (std::ptrdiff_t tau = -l; tau <= l; ++tau) {
        const std::ptrdiff_t i0 = std::max<std::ptrdiff_t>(0, -tau);
        const std::ptrdiff_t i1 = std::min<std::ptrdiff_t>(n, n - tau);
        double acc = 0.0;
        for (std::ptrdiff_t i = i0; i < i1; ++i) {
            acc += x1[static_cast<std::size_t>(i)] * x2[static_cast<std::size_t>(i + tau)];
        }
        out[static_cast<std::size_t>(tau + l)] = acc;
    }
    return out;
}

std::ptrdiff_t xcorr_peak_lag(std::span<const double> corr) {
    const auto l = static_cast<std::ptrdiff_t>(corr.size() / 2);
    std::ptrdiff_t best = 0;
    double best_val = corr[static_cast<std::size_t>(l)];
    // walk outward from zero so equal values keep the smaller |tau|
    for (std::ptrdiff_t a = 1; a <= l; ++a) {
        for (std::ptrdiff_t tau : {-a, a}) {
            const double v = corr[static_cast<std::size_t>(tau + l)];
            if (v > best_val) {
                best_val = v;
                best = tau;
            }
        }
    }
    return best;
}

TdoaReport tdoa_xcorr(std::span<const double> reference, std::span<const double> signal,
                      double max_abs_delay, double sample_period, bool refine) {
    const auto n = reference.size();
    auto max_lag = static_cast<std::size_t>(std::floor(max_abs_delay / sample_period + 1e-9));
    if (n > 0) max_lag = std::min(max_lag, n - 1);
    const auto corr = cross_correlate(reference, signal, max_lag);
    if (std::all_of(corr.begin(), corr.end(), [](double v) { return v == 0.0; })) {
        throw NoPeakError("cross-correlation is identically zero");
    }
    const auto lag = xcorr_peak_lag(corr);
    const auto l = static_cast<std::ptrdiff_t>(max_lag);
    double frac = 0.0;
    if (refine && lag > -l && lag < l) {
        const auto k = static_cast<std::size_t>(lag + l);
        frac = parabolic_offset(corr[k - 1], corr[k], corr[k + 1]);
    }
    TdoaReport rep;
    rep.method = Method::xcorr;
    rep.delta_t = std::clamp((static_cast<double>(lag) + frac) * sample_period, -max_abs_delay,
                             max_abs_delay);
    rep.confidence = Confidence::not_applicable();
    rep.accepted = true;
    return rep;
}

}  // namespace cstdoa
