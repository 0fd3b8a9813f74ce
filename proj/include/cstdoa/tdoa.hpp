// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cstdoa/linear_operator.hpp"
#include "cstdoa/solver.hpp"

namespace cstdoa {

/// Jackknife confidence. Infinity is a distinct state rather than an
/// overflowed double; the cross-correlation baseline reports "not applicable".
class Confidence {
public:
    enum class Kind { finite, infinite, not_applicable };

    static Confidence finite(double value) { return Confidence(Kind::finite, value); }
    static Confidence infinite() { return Confidence(Kind::infinite, 0.0); }
    static Confidence not_applicable() { return Confidence(Kind::not_applicable, 0.0); }

    Confidence() = default;

    Kind kind() const { return kind_; }
    bool is_infinite() const { return kind_ == Kind::infinite; }
    bool is_finite() const { return kind_ == Kind::finite; }
    /// Finite value; 0 for not-applicable and +inf (IEEE) for the sentinel.
    double value() const;
    bool meets(double threshold) const;
    /// "inf", "na" or the shortest round-trip decimal.
    std::string to_string() const;

    friend bool operator==(const Confidence&, const Confidence&) = default;

private:
    Confidence(Kind kind, double value) : kind_(kind), value_(value) {}
    Kind kind_ = Kind::not_applicable;
    double value_ = 0.0;
};

enum class Method { compressive, xcorr };
std::string to_string(Method m);

struct TdoaReport {
    std::size_t sensor_id = 0;
    std::size_t block_index = 0;
    Method method = Method::compressive;
    /// Seconds; positive when the sensor hears the source after the reference.
    double delta_t = std::numeric_limits<double>::quiet_NaN();
    Confidence confidence;
    bool accepted = false;
    /// Fewer than three jackknife repetitions produced a delay.
    bool indeterminate = false;
    std::vector<double> jackknife_delays;
};

struct DelayOptions {
    /// 3-point parabolic sub-sample refinement; off reproduces the pure
    /// integer-lag estimate.
    bool refine = true;
    /// Admissible |delay| in seconds (d_max / c). Peaks are searched inside it.
    std::optional<double> max_abs_delay;
};

/// Vertex offset of the parabola through (-1, left), (0, center), (1, right),
/// bounded to [-0.5, 0.5]; zero when the points do not form a maximum.
double parabolic_offset(double left, double center, double right);

/// (argmax_j |h_j| - floor(N/2)) * T, optionally refined. Throws NoPeakError
/// when h is identically zero inside the admissible window.
double delay_from_channel(std::span<const double> h, double sample_period,
                          const DelayOptions& opts = {});
double delay_from_estimate(const ChannelEstimate& est, double sample_period,
                           const DelayOptions& opts = {});

struct JackknifeConfig {
    int repetitions = 8;
    int removed = 4;
    std::uint64_t seed = 0;
    /// Acceptance threshold on C; default 1 / (2T).
    std::optional<double> min_confidence;

    void validate(std::size_t measurements) const;
    double threshold(double sample_period) const;
};

/// Rows kept by repetition `rep`: all of [0, M) except `removed` distinct
/// rows drawn from a generator keyed by (seed, rep). Sorted ascending.
std::vector<std::size_t> jackknife_subset(std::size_t measurements, int removed,
                                          std::uint64_t seed, int rep);

/// Builds the forward operator restricted to the kept measurement rows.
using SubsetOperatorBuilder =
    std::function<std::unique_ptr<LinearOperator>(std::span<const std::size_t> kept_rows)>;

/// Median / spread reduction over per-repetition delays.
TdoaReport aggregate_jackknife(std::vector<double> delays, double min_confidence);

struct JackknifeDiagnostics {
    std::vector<ChannelEstimate> solves;
    std::vector<bool> failed;
};

TdoaReport jackknife_estimate(std::span<const double> y, const SubsetOperatorBuilder& build,
                              const JackknifeConfig& cfg, const SolverConfig& solver,
                              double sample_period, const DelayOptions& opts = {},
                              std::span<const double> warm_start = {},
                              JackknifeDiagnostics* diagnostics = nullptr);

}  // namespace cstdoa
