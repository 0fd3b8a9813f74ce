// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "cstdoa/linear_operator.hpp"
#include "cstdoa/msequence.hpp"

namespace cstdoa {

/// Toeplitz basis built from the reference sensor's extended window.
///
/// The window holds the reference samples at block-relative indices
/// [-ceil(N/2), N - 1 + ceil(N/2)], i.e. window_length(N) samples with the
/// block start at window_origin(N). For a channel vector h of length N:
///
///     x[m] = sum_j h[j] * ref[m - (j - L0)],   L0 = floor(N/2)
///
/// so column j is the reference delayed by (j - L0) samples and h = e_{L0}
/// reproduces the reference block.
class SparsityBasis final : public LinearOperator {
public:
    SparsityBasis(std::vector<double> window, std::size_t block_length);

    static std::size_t window_length(std::size_t block_length);
    static std::size_t window_origin(std::size_t block_length);

    std::size_t rows() const override { return n_; }
    std::size_t cols() const override { return n_; }

    /// FFT route.
    void apply_to(std::span<const double> h, std::span<double> out) const override;
    void adjoint_to(std::span<const double> r, std::span<double> out) const override;

    /// Direct O(N^2) route, kept for cross-checking the FFT path.
    std::vector<double> apply_direct(std::span<const double> h) const;
    std::vector<double> adjoint_direct(std::span<const double> r) const;

    std::size_t block_length() const { return n_; }
    std::size_t center_lag() const { return n_ / 2; }

    /// Reference sample at a block-relative index; zero outside the window.
    double reference_at(std::ptrdiff_t index) const;
    std::span<const double> reference_block() const;
    std::span<const double> window() const { return window_; }

private:
    // Returns (v * window)[N + m] for m in [0, N), v of length N.
    void convolve_window(std::span<const double> v, std::span<double> out) const;

    std::size_t n_;
    std::vector<double> window_;
    std::size_t fft_size_;
    std::vector<std::complex<double>> window_spectrum_;
};

/// A = Phi * Psi0, with apply, adjoint and a cached spectral-norm estimate.
class ComposedOperator final : public LinearOperator {
public:
    ComposedOperator(SensingMatrix sensing, SparsityBasis basis);

    std::size_t rows() const override { return sensing_.rows(); }
    std::size_t cols() const override { return basis_.cols(); }

    void apply_to(std::span<const double> h, std::span<double> out) const override;
    void adjoint_to(std::span<const double> y, std::span<double> out) const override;

    /// Largest singular value by power iteration (30 iterations, tol 1e-4).
    double spectral_norm() const;

    /// Dense M x N copy: row i is Psi0^T applied to sensing row i.
    DenseOperator materialize() const;

    const SensingMatrix& sensing() const { return sensing_; }
    const SparsityBasis& basis() const { return basis_; }

private:
    SensingMatrix sensing_;
    SparsityBasis basis_;
};

ComposedOperator forward_operator(const SensingMatrix& sensing, const SparsityBasis& basis);

}  // namespace cstdoa
