// SPDX-License-Identifier: Apache-2.0
#include "cstdoa/linear_operator.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "cstdoa/error.hpp"
#include "cstdoa/random.hpp"

namespace cstdoa {

namespace {

void require_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) +
                             ", got " + std::to_string(got));
    }
}

}  // namespace

std::vector<double> LinearOperator::apply(std::span<const double> x) const {
    std::vector<double> out(rows());
    apply_to(x, out);
    return out;
}

std::vector<double> LinearOperator::adjoint(std::span<const double> y) const {
    std::vector<double> out(cols());
    adjoint_to(y, out);
    return out;
}

void LinearOperator::check_apply_dims(std::span<const double> x, std::span<double> out) const {
    require_size(x.size(), cols(), "apply input");
    require_size(out.size(), rows(), "apply output");
}

void LinearOperator::check_adjoint_dims(std::span<const double> y, std::span<double> out) const {
    require_size(y.size(), rows(), "adjoint input");
    require_size(out.size(), cols(), "adjoint output");
}

DenseOperator::DenseOperator(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseOperator::DenseOperator(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require_size(data_.size(), rows * cols, "dense matrix data");
}

void DenseOperator::apply_to(std::span<const double> x, std::span<double> out) const {
    check_apply_dims(x, out);
    // solver iterates are mostly zero; gather the support when it is small
    std::size_t nnz = 0;
    for (double v : x) nnz += v != 0.0;
    if (nnz * 4 >= cols_) {
        for (std::size_t i = 0; i < rows_; ++i) out[i] = dot(row(i), x);
        return;
    }
    std::vector<std::size_t> idx;
    idx.reserve(nnz);
    for (std::size_t j = 0; j < cols_; ++j) {
        if (x[j] != 0.0) idx.push_back(j);
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* r = data_.data() + i * cols_;
        double acc = 0.0;
        for (auto j : idx) acc += r[j] * x[j];
        out[i] = acc;
    }
}

void DenseOperator::adjoint_to(std::span<const double> y, std::span<double> out) const {
    check_adjoint_dims(y, out);
    std::fill(out.begin(), out.end(), 0.0);
    double* o = out.data();
    std::size_t i = 0;
    // four rows per sweep keeps the output in registers longer
    for (; i + 4 <= rows_; i += 4) {
        const double* r0 = data_.data() + i * cols_;
        const double* r1 = r0 + cols_;
        const double* r2 = r1 + cols_;
        const double* r3 = r2 + cols_;
        const double y0 = y[i], y1 = y[i + 1], y2 = y[i + 2], y3 = y[i + 3];
        for (std::size_t j = 0; j < cols_; ++j) {
            o[j] += (r0[j] * y0 + r1[j] * y1) + (r2[j] * y2 + r3[j] * y3);
        }
    }
    for (; i < rows_; ++i) {
        const double yi = y[i];
        const double* r = data_.data() + i * cols_;
        for (std::size_t j = 0; j < cols_; ++j) o[j] += r[j] * yi;
    }
}

DenseOperator DenseOperator::select_rows(std::span<const std::size_t> keep) const {
    DenseOperator out(keep.size(), cols_);
    for (std::size_t k = 0; k < keep.size(); ++k) {
        if (keep[k] >= rows_) {
            throw DimensionError("select_rows: row " + std::to_string(keep[k]) + " out of range");
        }
        auto src = row(keep[k]);
        std::copy(src.begin(), src.end(), out.row(k).begin());
    }
    return out;
}

DenseOperator DenseOperator::identity(std::size_t n) {
    DenseOperator out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
}

DenseOperator DenseOperator::materialize(const LinearOperator& op) {
    DenseOperator out(op.rows(), op.cols());
    std::vector<double> e(op.cols(), 0.0);
    std::vector<double> col(op.rows());
    for (std::size_t j = 0; j < op.cols(); ++j) {
        e[j] = 1.0;
        op.apply_to(e, col);
        e[j] = 0.0;
        for (std::size_t i = 0; i < op.rows(); ++i) out(i, j) = col[i];
    }
    return out;
}

double estimate_spectral_norm(const LinearOperator& op, int max_iterations, double tolerance) {
    const std::size_t n = op.cols();
    if (n == 0 || op.rows() == 0) return 0.0;

    const CounterRng rng(0x5eed, 0x9041);
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = rng.gaussian(static_cast<std::int64_t>(j));
    double nv = norm2(v);
    for (auto& x : v) x /= nv;

    std::vector<double> av(op.rows());
    std::vector<double> w(n);
    double sigma = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        op.apply_to(v, av);
        op.adjoint_to(av, w);
        const double nw = norm2(w);
        if (nw == 0.0) return 0.0;
        const double next = std::sqrt(nw);
        for (std::size_t j = 0; j < n; ++j) v[j] = w[j] / nw;
        const bool done = it > 0 && std::abs(next - sigma) <= tolerance * next;
        sigma = next;
        if (done) break;
    }
    return sigma;
}

double dot(std::span<const double> a, std::span<const double> b) {
    // four partial sums keep the compiler free to vectorize
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    const std::size_t n = a.size();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    for (; j < n; ++j) s0 += a[j] * b[j];
    return (s0 + s1) + (s2 + s3);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace cstdoa
