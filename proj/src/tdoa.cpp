// SPDX-License-Identifier: Apache-2.0
#include "cstdoa/tdoa.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>

#include "cstdoa/error.hpp"
#include "cstdoa/random.hpp"

namespace cstdoa {

double Confidence::value() const {
    switch (kind_) {
        case Kind::finite: return value_;
        case Kind::infinite: return std::numeric_limits<double>::infinity();
        case Kind::not_applicable: break;
    }
    return 0.0;
}

bool Confidence::meets(double threshold) const {
    switch (kind_) {
        case Kind::finite: return value_ >= threshold;
        case Kind::infinite: return true;
        case Kind::not_applicable: break;
    }
    return false;
}

std::string Confidence::to_string() const {
    switch (kind_) {
        case Kind::infinite: return "inf";
        case Kind::not_applicable: return "na";
        case Kind::finite: break;
    }
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value_);
    return std::string(buf, res.ptr);
}

std::string to_string(Method m) { return m == Method::compressive ? "compressive" : "xcorr"; }

double parabolic_offset(double left, double center, double right) {
    const double denom = left - 2.0 * center + right;
    if (!(denom < 0.0)) return 0.0;
    const double off = 0.5 * (left - right) / denom;
    return std::clamp(off, -0.5, 0.5);
}

double delay_from_channel(std::span<const double> h, double sample_period,
                          const DelayOptions& opts) {
    if (h.empty()) throw NoPeakError("empty channel estimate");
    const auto n = static_cast<std::ptrdiff_t>(h.size());
    const std::ptrdiff_t center = n / 2;
    std::ptrdiff_t lo = 0;
    std::ptrdiff_t hi = n - 1;
    if (opts.max_abs_delay) {
        const auto max_lag = static_cast<std::ptrdiff_t>(
            std::floor(*opts.max_abs_delay / sample_period + 1e-9));
        lo = std::max<std::ptrdiff_t>(0, center - max_lag);
        hi = std::min<std::ptrdiff_t>(n - 1, center + max_lag);
    }
    std::ptrdiff_t peak = -1;
    double best = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
        const double m = std::abs(h[static_cast<std::size_t>(j)]);
        if (m > best) {
            best = m;
            peak = j;
        }
    }
    if (peak < 0) throw NoPeakError("channel estimate is zero over the admissible lags");

    double lag = static_cast<double>(peak - center);
    if (opts.refine && peak > 0 && peak < n - 1) {
        lag += parabolic_offset(std::abs(h[static_cast<std::size_t>(peak - 1)]), best,
                                std::abs(h[static_cast<std::size_t>(peak + 1)]));
    }
    double dt = lag * sample_period;
    if (opts.max_abs_delay) dt = std::clamp(dt, -*opts.max_abs_delay, *opts.max_abs_delay);
    return dt;
}

double delay_from_estimate(const ChannelEstimate& est, double sample_period,
                           const DelayOptions& opts) {
    return delay_from_channel(est.h, sample_period, opts);
}

void JackknifeConfig::validate(std::size_t measurements) const {
    if (repetitions < 3) throw InvalidSpecError("jackknife needs at least 3 repetitions");
    if (removed < 0) throw InvalidSpecError("jackknife removed count must be non-negative");
    if (static_cast<long long>(measurements) - removed < 8) {
        throw InvalidSpecError("jackknife leaves fewer than 8 measurements per solve");
    }
    if (min_confidence && !(*min_confidence > 0.0)) {
        throw InvalidSpecError("jackknife min_confidence must be positive");
    }
}

double JackknifeConfig::threshold(double sample_period) const {
    return min_confidence.value_or(1.0 / (2.0 * sample_period));
}

std::vector<std::size_t> jackknife_subset(std::size_t measurements, int removed,
                                          std::uint64_t seed, int rep) {
    std::vector<std::size_t> idx(measurements);
    for (std::size_t i = 0; i < measurements; ++i) idx[i] = i;
    std::mt19937_64 gen(mix64(seed ^ mix64(0x4a4b0000ULL + static_cast<std::uint64_t>(rep))));
    // partial Fisher-Yates: the first `removed` slots become the dropped rows
    const auto r = static_cast<std::size_t>(std::min<long long>(removed, measurements));
    for (std::size_t i = 0; i < r; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(gen() % (measurements - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<std::size_t> kept(idx.begin() + static_cast<std::ptrdiff_t>(r), idx.end());
    std::sort(kept.begin(), kept.end());
    return kept;
}

TdoaReport aggregate_jackknife(std::vector<double> delays, double min_confidence) {
    TdoaReport rep;
    rep.jackknife_delays = delays;
    if (delays.size() < 3) {
        rep.indeterminate = true;
        rep.confidence = Confidence::finite(0.0);
        rep.accepted = false;
        return rep;
    }
    std::sort(delays.begin(), delays.end());
    const std::size_t k = delays.size();
    rep.delta_t = (k % 2 == 1) ? delays[k / 2] : 0.5 * (delays[k / 2 - 1] + delays[k / 2]);
    const double spread = delays.back() - delays.front();
    rep.confidence = spread == 0.0 ? Confidence::infinite() : Confidence::finite(1.0 / spread);
    rep.accepted = rep.confidence.meets(min_confidence);
    return rep;
}

TdoaReport jackknife_estimate(std::span<const double> y, const SubsetOperatorBuilder& build,
                              const JackknifeConfig& cfg, const SolverConfig& solver,
                              double sample_period, const DelayOptions& opts,
                              std::span<const double> warm_start,
                              JackknifeDiagnostics* diagnostics) {
    cfg.validate(y.size());
    std::vector<double> delays;
    delays.reserve(static_cast<std::size_t>(cfg.repetitions));
    for (int r = 0; r < cfg.repetitions; ++r) {
        const auto kept = jackknife_subset(y.size(), cfg.removed, cfg.seed, r);
        std::vector<double> y_sub(kept.size());
        for (std::size_t i = 0; i < kept.size(); ++i) y_sub[i] = y[kept[i]];
        try {
            const auto op = build(kept);
            auto est = solve_l1(*op, y_sub, solver, warm_start);
            delays.push_back(delay_from_estimate(est, sample_period, opts));
            if (diagnostics) {
                diagnostics->solves.push_back(std::move(est));
                diagnostics->failed.push_back(false);
            }
        } catch (const Error&) {
            // a failed repetition is excluded from the aggregate
            if (diagnostics) {
                diagnostics->solves.emplace_back();
                diagnostics->failed.push_back(true);
            }
        }
    }
    return aggregate_jackknife(std::move(delays), cfg.threshold(sample_period));
}

}  // namespace cstdoa
