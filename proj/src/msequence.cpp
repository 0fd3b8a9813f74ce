// SPDX-License-Identifier: Apache-2.0
#include "cstdoa/msequence.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <string>

#include "cstdoa/error.hpp"

namespace cstdoa {

namespace {

// One primitive polynomial per degree, as exponent bit masks (bit e-1 <-> x^e).
constexpr std::array<std::uint32_t, kMaxDegree + 1> kPrimitiveTaps = {
    0x0,     0x0,     // degrees 0, 1 unsupported
    0x3,              // x^2 + x + 1
    0x5,              // x^3 + x + 1
    0xC,              // x^4 + x^3 + 1
    0x14,             // x^5 + x^3 + 1
    0x30,             // x^6 + x^5 + 1
    0x60,             // x^7 + x^6 + 1
    0xB8,             // x^8 + x^6 + x^5 + x^4 + 1
    0x110,            // x^9 + x^5 + 1
    0x240,            // x^10 + x^7 + 1
    0x500,            // x^11 + x^9 + 1
    0xE08,            // x^12 + x^11 + x^10 + x^4 + 1
    0x1C80,           // x^13 + x^12 + x^11 + x^8 + 1
    0x3802,           // x^14 + x^13 + x^12 + x^2 + 1
    0x6000,           // x^15 + x^14 + 1
    0xD008,           // x^16 + x^15 + x^13 + x^4 + 1
};

void check_degree(int degree) {
    if (degree < kMinDegree || degree > kMaxDegree) {
        throw InvalidSpecError("m-sequence degree " + std::to_string(degree) +
                               " outside supported range [2, 16]");
    }
}

}  // namespace

std::uint32_t primitive_taps(int degree) {
    check_degree(degree);
    return kPrimitiveTaps[static_cast<std::size_t>(degree)];
}

std::size_t sequence_length(int degree) {
    check_degree(degree);
    return (std::size_t{1} << degree) - 1;
}

int degree_for_length(std::size_t n, bool nearest) {
    int best = kMinDegree;
    for (int k = kMinDegree; k <= kMaxDegree; ++k) {
        const auto len = static_cast<double>(sequence_length(k));
        if (nearest) {
            const auto cur = static_cast<double>(sequence_length(best));
            if (std::abs(len - static_cast<double>(n)) < std::abs(cur - static_cast<double>(n))) {
                best = k;
            }
        } else if (sequence_length(k) <= n) {
            best = k;
        }
    }
    return best;
}

MSequenceSpec MSequenceSpec::primitive(int degree, std::uint32_t seed) {
    return MSequenceSpec{degree, primitive_taps(degree), seed};
}

void MSequenceSpec::validate() const {
    check_degree(degree);
    const std::uint32_t state_mask = (std::uint32_t{1} << degree) - 1;
    if ((seed & state_mask) == 0) {
        throw InvalidSpecError("m-sequence seed must be nonzero (all-zero state is absorbing)");
    }
    if ((seed & ~state_mask) != 0) {
        throw InvalidSpecError("m-sequence seed wider than degree " + std::to_string(degree));
    }
    if ((taps & ~state_mask) != 0 || (taps & (std::uint32_t{1} << (degree - 1))) == 0) {
        throw InvalidSpecError("tap mask must contain x^" + std::to_string(degree) +
                               " and no higher terms");
    }
}

std::vector<std::uint8_t> generate_msequence(const MSequenceSpec& spec) {
    spec.validate();
    const int k = spec.degree;
    const std::uint32_t lower = spec.taps & ((std::uint32_t{1} << (k - 1)) - 1);
    // a[n+k] = a[n] ^ XOR_{e in taps, e < k} a[n+e]; state bit i holds a[n+i].
    const std::uint32_t feedback = 1u | (lower << 1);
    const std::size_t period = spec.period();

    std::vector<std::uint8_t> out;
    out.reserve(period);
    std::uint32_t state = spec.seed;
    for (std::size_t n = 0; n < period; ++n) {
        if (n > 0 && state == spec.seed) {
            throw PeriodMismatchError("LFSR period " + std::to_string(n) + " != " +
                                      std::to_string(period) + ": taps are not primitive");
        }
        out.push_back(static_cast<std::uint8_t>(state & 1u));
        const auto next = static_cast<std::uint32_t>(std::popcount(state & feedback) & 1);
        state = (state >> 1) | (next << (k - 1));
    }
    if (state != spec.seed) {
        throw PeriodMismatchError("LFSR did not return to its seed after " +
                                  std::to_string(period) + " steps: taps are not primitive");
    }
    return out;
}

SensingMatrixSpec SensingMatrixSpec::spread(const MSequenceSpec& mseq, std::size_t rows,
                                            std::size_t base_shift) {
    SensingMatrixSpec spec{mseq, rows, {}};
    const std::size_t n = mseq.period();
    if (rows == 0 || rows > n) {
        throw InvalidSpecError("sensing rows must be in [1, N]");
    }
    const std::size_t stride = n / rows;
    spec.row_shifts.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        spec.row_shifts.push_back((base_shift + i * stride) % n);
    }
    return spec;
}

void SensingMatrixSpec::validate() const {
    mseq.validate();
    const std::size_t n = mseq.period();
    if (rows == 0) throw InvalidSpecError("sensing matrix needs at least one row");
    if (row_shifts.size() != rows) {
        throw InvalidSpecError("row_shifts has " + std::to_string(row_shifts.size()) +
                               " entries, expected " + std::to_string(rows));
    }
    std::vector<std::size_t> sorted = row_shifts;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidSpecError("row shifts must be distinct");
    }
    if (!sorted.empty() && sorted.back() >= n) {
        throw InvalidSpecError("row shift out of range [0, N)");
    }
}

SensingMatrix::SensingMatrix(SensingMatrixSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    const auto bits = generate_msequence(spec_.mseq);
    signs_.resize(bits.size());
    std::transform(bits.begin(), bits.end(), signs_.begin(),
                   [](std::uint8_t b) { return 1.0 - 2.0 * b; });
}

void SensingMatrix::apply_to(std::span<const double> x, std::span<double> out) const {
    check_apply_dims(x, out);
    const std::size_t n = signs_.size();
    const std::span<const double> s(signs_);
    for (std::size_t i = 0; i < spec_.rows; ++i) {
        const std::size_t shift = spec_.row_shifts[i];
        // j in [0, n - shift) reads s[shift..n), the rest wraps to s[0..shift)
        out[i] = dot(s.subspan(shift), x.first(n - shift)) + dot(s.first(shift), x.subspan(n - shift));
    }
}

void SensingMatrix::adjoint_to(std::span<const double> y, std::span<double> out) const {
    check_adjoint_dims(y, out);
    const std::size_t n = signs_.size();
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < spec_.rows; ++i) {
        const double yi = y[i];
        const std::size_t shift = spec_.row_shifts[i];
        for (std::size_t j = 0; j < n - shift; ++j) out[j] += signs_[j + shift] * yi;
        for (std::size_t j = n - shift; j < n; ++j) out[j] += signs_[j + shift - n] * yi;
    }
}

double SensingMatrix::entry(std::size_t i, std::size_t j) const {
    if (i >= rows() || j >= cols()) throw DimensionError("sensing entry index out of range");
    return signs_[(j + spec_.row_shifts[i]) % signs_.size()];
}

std::vector<double> SensingMatrix::row(std::size_t i) const {
    if (i >= rows()) throw DimensionError("sensing row index out of range");
    const std::size_t n = signs_.size();
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = signs_[(j + spec_.row_shifts[i]) % n];
    return out;
}

std::vector<double> SensingMatrix::dense() const {
    if (cols() > kMaxDenseSensingCols) {
        throw UnsupportedError("dense sensing matrix only materialized for N <= 64");
    }
    std::vector<double> out;
    out.reserve(rows() * cols());
    for (std::size_t i = 0; i < rows(); ++i) {
        auto r = row(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

}  // namespace cstdoa
