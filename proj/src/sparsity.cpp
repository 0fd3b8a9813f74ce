// SPDX-License-Identifier: Apache-2.0
#include "cstdoa/sparsity.hpp"

#include <cmath>
#include <string>

#include "cstdoa/error.hpp"
#include "fft.hpp"

namespace cstdoa {

std::size_t SparsityBasis::window_length(std::size_t block_length) {
    return block_length + 2 * window_origin(block_length);
}

std::size_t SparsityBasis::window_origin(std::size_t block_length) {
    return (block_length + 1) / 2;
}

SparsityBasis::SparsityBasis(std::vector<double> window, std::size_t block_length)
    : n_(block_length), window_(std::move(window)) {
    if (n_ == 0) throw DimensionError("sparsity basis needs a positive block length");
    if (window_.size() != window_length(n_)) {
        throw DimensionError("reference window has " + std::to_string(window_.size()) +
                             " samples, expected " + std::to_string(window_length(n_)));
    }
    for (double v : window_) {
        if (!std::isfinite(v)) throw NumericError("reference window contains non-finite samples");
    }
    fft_size_ = detail::next_pow2(2 * n_);
    std::vector<double> padded(fft_size_, 0.0);
    std::copy(window_.begin(), window_.end(), padded.begin());
    window_spectrum_.resize(fft_size_ / 2 + 1);
    detail::rfft(padded, window_spectrum_);
}

void SparsityBasis::convolve_window(std::span<const double> v, std::span<double> out) const {
    std::vector<double> buf(fft_size_, 0.0);
    std::copy(v.begin(), v.end(), buf.begin());
    std::vector<std::complex<double>> spec(fft_size_ / 2 + 1);
    detail::rfft(buf, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= window_spectrum_[k];
    detail::irfft(spec, buf);
    const double scale = 1.0 / static_cast<double>(fft_size_);
    for (std::size_t m = 0; m < n_; ++m) out[m] = buf[n_ + m] * scale;
}

void SparsityBasis::apply_to(std::span<const double> h, std::span<double> out) const {
    check_apply_dims(h, out);
    convolve_window(h, out);
}

void SparsityBasis::adjoint_to(std::span<const double> r, std::span<double> out) const {
    check_adjoint_dims(r, out);
    std::vector<double> reversed(r.rbegin(), r.rend());
    std::vector<double> tmp(n_);
    convolve_window(reversed, tmp);
    for (std::size_t j = 0; j < n_; ++j) out[j] = tmp[n_ - 1 - j];
}

std::vector<double> SparsityBasis::apply_direct(std::span<const double> h) const {
    if (h.size() != n_) throw DimensionError("basis apply: length mismatch");
    std::vector<double> out(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
        if (h[j] == 0.0) continue;
        for (std::size_t m = 0; m < n_; ++m) out[m] += h[j] * window_[m + n_ - j];
    }
    return out;
}

std::vector<double> SparsityBasis::adjoint_direct(std::span<const double> r) const {
    if (r.size() != n_) throw DimensionError("basis adjoint: length mismatch");
    std::vector<double> out(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
        double acc = 0.0;
        for (std::size_t m = 0; m < n_; ++m) acc += r[m] * window_[m + n_ - j];
        out[j] = acc;
    }
    return out;
}

double SparsityBasis::reference_at(std::ptrdiff_t index) const {
    const auto k = index + static_cast<std::ptrdiff_t>(window_origin(n_));
    if (k < 0 || k >= static_cast<std::ptrdiff_t>(window_.size())) return 0.0;
    return window_[static_cast<std::size_t>(k)];
}

std::span<const double> SparsityBasis::reference_block() const {
    return std::span<const double>(window_).subspan(window_origin(n_), n_);
}

ComposedOperator::ComposedOperator(SensingMatrix sensing, SparsityBasis basis)
    : sensing_(std::move(sensing)), basis_(std::move(basis)) {
    if (sensing_.cols() != basis_.rows()) {
        throw DimensionError("sensing matrix has " + std::to_string(sensing_.cols()) +
                             " columns but basis block length is " +
                             std::to_string(basis_.rows()));
    }
}

void ComposedOperator::apply_to(std::span<const double> h, std::span<double> out) const {
    check_apply_dims(h, out);
    std::vector<double> x(basis_.rows());
    basis_.apply_to(h, x);
    sensing_.apply_to(x, out);
}

void ComposedOperator::adjoint_to(std::span<const double> y, std::span<double> out) const {
    check_adjoint_dims(y, out);
    std::vector<double> x(sensing_.cols());
    sensing_.adjoint_to(y, x);
    basis_.adjoint_to(x, out);
}

double ComposedOperator::spectral_norm() const {
    return estimate_spectral_norm(*this, 30, 1e-4);
}

DenseOperator ComposedOperator::materialize() const {
    DenseOperator out(rows(), cols());
    for (std::size_t i = 0; i < rows(); ++i) {
        const auto r = sensing_.row(i);
        basis_.adjoint_to(r, out.row(i));
    }
    return out;
}

ComposedOperator forward_operator(const SensingMatrix& sensing, const SparsityBasis& basis) {
    return ComposedOperator(sensing, basis);
}

}  // namespace cstdoa
