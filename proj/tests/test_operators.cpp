// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "cstdoa/error.hpp"
#include "cstdoa/linear_operator.hpp"
#include "cstdoa/msequence.hpp"
#include "cstdoa/sparsity.hpp"

using namespace cstdoa;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

Eigen::VectorXd as_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd sensing_oracle(const SensingMatrixSpec& spec) {
    const auto seq = generate_msequence(spec.mseq);
    const auto n = static_cast<Eigen::Index>(seq.size());
    Eigen::MatrixXd phi(static_cast<Eigen::Index>(spec.rows), n);
    for (Eigen::Index i = 0; i < phi.rows(); ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            phi(i, j) = 1.0 - 2.0 * seq[(static_cast<std::size_t>(j) + spec.row_shifts[static_cast<std::size_t>(i)]) %
                                        seq.size()];
        }
    }
    return phi;
}

// Psi(m, j) = ref[m - (j - floor(N/2))], ref indexed relative to the block start
Eigen::MatrixXd basis_oracle(const std::vector<double>& window, std::size_t n) {
    const auto origin = static_cast<long>((n + 1) / 2);
    const auto lag0 = static_cast<long>(n / 2);
    Eigen::MatrixXd psi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (long m = 0; m < static_cast<long>(n); ++m) {
        for (long j = 0; j < static_cast<long>(n); ++j) {
            psi(m, j) = window[static_cast<std::size_t>(m - (j - lag0) + origin)];
        }
    }
    return psi;
}

double max_abs_diff(const Eigen::VectorXd& a, const std::vector<double>& b) {
    return (a - as_eigen(b)).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("sensing operator matches the dense oracle") {
    std::mt19937_64 rng(11);
    for (int k : {2, 3, 4}) {
        const auto mseq = MSequenceSpec::primitive(k);
        const std::size_t n = mseq.period();
        for (std::size_t rows = 1; rows < n; rows += 2) {
            const auto spec = SensingMatrixSpec::spread(mseq, rows, 1);
            const SensingMatrix phi(spec);
            const auto oracle = sensing_oracle(spec);
            const auto x = random_vector(rng, n);
            const auto y = random_vector(rng, rows);
            CHECK(max_abs_diff(oracle * as_eigen(x), phi.apply(x)) <= 1e-9);
            CHECK(max_abs_diff(oracle.transpose() * as_eigen(y), phi.adjoint(y)) <= 1e-9);
        }
    }
}

TEST_CASE("basis operator matches the Toeplitz oracle") {
    std::mt19937_64 rng(12);
    for (std::size_t n : {3u, 7u, 15u}) {
        const auto window = random_vector(rng, SparsityBasis::window_length(n));
        const SparsityBasis psi(window, n);
        const auto oracle = basis_oracle(window, n);
        for (int rep = 0; rep < 5; ++rep) {
            const auto h = random_vector(rng, n);
            const auto r = random_vector(rng, n);
            CHECK(max_abs_diff(oracle * as_eigen(h), psi.apply(h)) <= 1e-9);
            CHECK(max_abs_diff(oracle.transpose() * as_eigen(r), psi.adjoint(r)) <= 1e-9);
            CHECK(max_abs_diff(oracle * as_eigen(h), psi.apply_direct(h)) <= 1e-9);
            CHECK(max_abs_diff(oracle.transpose() * as_eigen(r), psi.adjoint_direct(r)) <= 1e-9);
        }
    }
}

TEST_CASE("unit channel at the center lag reproduces the reference block") {
    std::mt19937_64 rng(13);
    const std::size_t n = 31;
    const auto window = random_vector(rng, SparsityBasis::window_length(n));
    const SparsityBasis psi(window, n);
    for (long d : {-15L, -3L, 0L, 4L, 15L}) {
        std::vector<double> h(n, 0.0);
        h[static_cast<std::size_t>(static_cast<long>(psi.center_lag()) + d)] = 1.0;
        const auto x = psi.apply(h);
        for (long m = 0; m < static_cast<long>(n); ++m) {
            CHECK(x[static_cast<std::size_t>(m)] == doctest::Approx(psi.reference_at(m - d)).epsilon(1e-12));
        }
    }
}

TEST_CASE("composed operator matches the dense product") {
    std::mt19937_64 rng(14);
    const auto mseq = MSequenceSpec::primitive(4);
    const auto spec = SensingMatrixSpec::spread(mseq, 6, 3);
    const auto window = random_vector(rng, SparsityBasis::window_length(15));
    const ComposedOperator a(SensingMatrix(spec), SparsityBasis(window, 15));
    const Eigen::MatrixXd oracle = sensing_oracle(spec) * basis_oracle(window, 15);
    const auto h = random_vector(rng, 15);
    const auto y = random_vector(rng, 6);
    CHECK(max_abs_diff(oracle * as_eigen(h), a.apply(h)) <= 1e-9);
    CHECK(max_abs_diff(oracle.transpose() * as_eigen(y), a.adjoint(y)) <= 1e-9);

    const auto dense = a.materialize();
    for (Eigen::Index i = 0; i < oracle.rows(); ++i) {
        for (Eigen::Index j = 0; j < oracle.cols(); ++j) {
            CHECK(std::abs(dense(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) - oracle(i, j)) <= 1e-9);
        }
    }
}

TEST_CASE("adjoint identity on random draws") {
    std::mt19937_64 rng(15);
    const auto mseq = MSequenceSpec::primitive(4);
    for (int draw = 0; draw < 100; ++draw) {
        const std::size_t rows = 1 + static_cast<std::size_t>(draw % 14);
        const SensingMatrix phi(SensingMatrixSpec::spread(mseq, rows, static_cast<std::size_t>(draw) % 15));
        const SparsityBasis psi(random_vector(rng, SparsityBasis::window_length(15)), 15);
        const ComposedOperator a(phi, psi);
        const auto x = random_vector(rng, 15);
        const auto y = random_vector(rng, rows);
        const auto r = random_vector(rng, 15);
        CHECK(std::abs(dot(phi.apply(x), y) - dot(x, phi.adjoint(y))) <= 1e-12);
        CHECK(std::abs(dot(psi.apply(x), r) - dot(x, psi.adjoint(r))) <= 1e-12);
        CHECK(std::abs(dot(a.apply(x), y) - dot(x, a.adjoint(y))) <= 1e-12);
    }
}

TEST_CASE("power iteration agrees with the singular value decomposition") {
    std::mt19937_64 rng(16);
    const auto window = random_vector(rng, SparsityBasis::window_length(63));
    const ComposedOperator a(SensingMatrix(SensingMatrixSpec::spread(MSequenceSpec::primitive(6), 12)),
                             SparsityBasis(window, 63));
    const auto dense = a.materialize();
    Eigen::MatrixXd m(12, 63);
    for (Eigen::Index i = 0; i < 12; ++i) {
        for (Eigen::Index j = 0; j < 63; ++j) m(i, j) = dense(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
    const double est = estimate_spectral_norm(a);
    CHECK(est <= sigma * (1.0 + 1e-9));
    CHECK(est >= sigma * 0.99);
    CHECK(a.spectral_norm() == doctest::Approx(est).epsilon(1e-12));
}

TEST_CASE("dense operator helpers") {
    DenseOperator a(3, 2, {1, 2, 3, 4, 5, 6});
    const std::vector<std::size_t> keep{0, 2};
    const auto sub = a.select_rows(keep);
    CHECK(sub.rows() == 2);
    CHECK(sub(1, 1) == 6.0);
    CHECK(a.apply(std::vector<double>{1, 1}) == std::vector<double>{3, 7, 11});
    CHECK(a.adjoint(std::vector<double>{1, 0, 1}) == std::vector<double>{6, 8});
    const auto id = DenseOperator::identity(3);
    CHECK(estimate_spectral_norm(id) == doctest::Approx(1.0));
    CHECK_THROWS_AS(a.apply(std::vector<double>{1, 1, 1}), DimensionError);
    CHECK_THROWS_AS(DenseOperator(2, 2, {1.0}), DimensionError);
}

TEST_CASE("basis rejects bad windows") {
    CHECK_THROWS_AS(SparsityBasis(std::vector<double>(10, 0.0), 7), DimensionError);
    std::vector<double> w(SparsityBasis::window_length(7), 0.0);
    w[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(SparsityBasis(w, 7), NumericError);
}
