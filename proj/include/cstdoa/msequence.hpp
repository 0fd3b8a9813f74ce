// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cstdoa/linear_operator.hpp"

namespace cstdoa {

inline constexpr int kMinDegree = 2;
inline constexpr int kMaxDegree = 16;

/// Fibonacci LFSR description.
///
/// `taps` is a bit mask of the polynomial exponents: bit (e-1) set means the
/// term x^e is present, for e = 1..degree. The constant term is implied, and
/// bit (degree-1) must be set. Example: x^3 + x + 1 -> 0b101.
///
/// Bit i of `seed` is the i-th output bit; the first `degree` outputs are the
/// seed itself.
struct MSequenceSpec {
    int degree = 0;
    std::uint32_t taps = 0;
    std::uint32_t seed = 1;

    /// Spec using the built-in primitive polynomial for `degree`.
    static MSequenceSpec primitive(int degree, std::uint32_t seed = 1);

    std::size_t period() const { return (std::size_t{1} << degree) - 1; }

    /// Throws InvalidSpecError on a bad degree, zero seed or malformed taps.
    void validate() const;
};

/// Built-in primitive polynomial tap mask for degrees 2..16.
std::uint32_t primitive_taps(int degree);

/// 2^degree - 1 for a supported degree.
std::size_t sequence_length(int degree);

/// Largest supported degree k with 2^k - 1 <= n, or the degree whose length
/// is nearest to n when `nearest` is set.
int degree_for_length(std::size_t n, bool nearest = true);

/// One full period of the LFSR output, as 0/1 values.
/// Throws PeriodMismatchError if the state returns early.
std::vector<std::uint8_t> generate_msequence(const MSequenceSpec& spec);

/// M x N sensing matrix whose row i is the +-1 mapped m-sequence rotated by
/// row_shifts[i]: entry(i, j) = 1 - 2 p[(j + shift_i) mod N].
struct SensingMatrixSpec {
    MSequenceSpec mseq;
    std::size_t rows = 0;
    std::vector<std::size_t> row_shifts;

    /// shift_i = (base_shift + i * floor(N / M)) mod N.
    static SensingMatrixSpec spread(const MSequenceSpec& mseq, std::size_t rows,
                                    std::size_t base_shift = 0);

    std::size_t cols() const { return mseq.period(); }
    void validate() const;
};

/// Matrix-free view of a SensingMatrixSpec. Holds one cached period of the
/// +-1 sequence; rows are never stored.
class SensingMatrix final : public LinearOperator {
public:
    explicit SensingMatrix(SensingMatrixSpec spec);

    std::size_t rows() const override { return spec_.rows; }
    std::size_t cols() const override { return signs_.size(); }

    void apply_to(std::span<const double> x, std::span<double> out) const override;
    void adjoint_to(std::span<const double> y, std::span<double> out) const override;

    double entry(std::size_t i, std::size_t j) const;
    std::vector<double> row(std::size_t i) const;
    /// Dense row-major copy; only allowed for N <= 64.
    std::vector<double> dense() const;

    const SensingMatrixSpec& spec() const { return spec_; }
    std::span<const double> signs() const { return signs_; }

private:
    SensingMatrixSpec spec_;
    std::vector<double> signs_;
};

inline constexpr std::size_t kMaxDenseSensingCols = 64;

}  // namespace cstdoa
