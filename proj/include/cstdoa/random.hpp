// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cstdoa {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stateless counter-based generator: every draw is a pure function of
/// (seed, stream, index), so samples can be produced in any order.
class CounterRng {
public:
    constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(mix64(seed ^ mix64(stream ^ 0x6a09e667f3bcc909ULL))) {}

    constexpr std::uint64_t bits(std::uint64_t index, std::uint64_t lane = 0) const noexcept {
        return mix64(key_ ^ mix64(index * 2 + lane));
    }

    /// Uniform in (0, 1).
    constexpr double uniform(std::uint64_t index, std::uint64_t lane = 0) const noexcept {
        return (static_cast<double>(bits(index, lane) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller.
    double gaussian(std::int64_t index) const noexcept {
        const auto i = static_cast<std::uint64_t>(index);
        const double u1 = uniform(i, 0);
        const double u2 = uniform(i, 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t key_;
};

}  // namespace cstdoa
