// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cstdoa {

/// Real linear map R^cols -> R^rows with an explicit adjoint.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;

    /// out = A x. `x.size()` must equal cols(), `out.size()` rows().
    virtual void apply_to(std::span<const double> x, std::span<double> out) const = 0;
    /// out = A^T y.
    virtual void adjoint_to(std::span<const double> y, std::span<double> out) const = 0;

    std::vector<double> apply(std::span<const double> x) const;
    std::vector<double> adjoint(std::span<const double> y) const;

protected:
    void check_apply_dims(std::span<const double> x, std::span<double> out) const;
    void check_adjoint_dims(std::span<const double> y, std::span<double> out) const;
};

/// Row-major dense matrix. Used for materialized forward operators and for
/// small test harnesses.
class DenseOperator final : public LinearOperator {
public:
    DenseOperator(std::size_t rows, std::size_t cols);
    DenseOperator(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const override { return rows_; }
    std::size_t cols() const override { return cols_; }

    void apply_to(std::span<const double> x, std::span<double> out) const override;
    void adjoint_to(std::span<const double> y, std::span<double> out) const override;

    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> data() const { return data_; }

    /// New operator keeping only the listed rows, in the given order.
    DenseOperator select_rows(std::span<const std::size_t> keep) const;

    static DenseOperator identity(std::size_t n);
    /// Materialize any operator column by column. Intended for small sizes.
    static DenseOperator materialize(const LinearOperator& op);

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

/// Power iteration on A^T A. Returns an estimate of the largest singular
/// value of `op`. Deterministic start vector.
double estimate_spectral_norm(const LinearOperator& op, int max_iterations = 30,
                              double tolerance = 1e-4);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace cstdoa
