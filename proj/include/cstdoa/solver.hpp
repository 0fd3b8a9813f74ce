// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cstdoa/linear_operator.hpp"

namespace cstdoa {

/// Settings for the l1-regularized recovery
///
///     min_h  F(h) = ||h||_1 + (mu / 2) ||A h - y||_2^2
struct SolverConfig {
    /// Weight of the data term. Empty: pick default_mu() per problem.
    std::optional<double> mu;
    /// Multiplier applied to the automatic mu. Large values approximate the
    /// equality-constrained problem (see kBasisPursuitScale).
    double mu_scale = 1.0;
    int max_iterations = 5000;
    double rel_tolerance = 1e-6;
    bool backtracking = true;
    bool record_trace = false;

    void validate() const;
};

inline constexpr double kFallbackMu = 1.0;
inline constexpr double kBasisPursuitScale = 1e6;

struct ChannelEstimate {
    std::vector<double> h;
    int iterations = 0;
    double objective = 0.0;
    double residual_norm = 0.0;
    std::size_t peak_index = 0;
    double peak_magnitude = 0.0;
    double mu = 0.0;
    bool converged = false;
    std::vector<double> objective_trace;
};

/// mu = 1 / (0.01 * ||A^T y||_inf): the threshold 1/mu sits at 1% of the
/// smallest value that zeroes the solution. Throws NumericError for y = 0;
/// callers then use kFallbackMu.
double default_mu(const LinearOperator& op, std::span<const double> y);

/// Explicit mu from the config, else mu_scale * default_mu, else the fallback.
double resolve_mu(const SolverConfig& cfg, const LinearOperator& op, std::span<const double> y);

double objective_value(const LinearOperator& op, std::span<const double> y,
                       std::span<const double> h, double mu);

/// Elementwise soft-thresholding, the proximal map of threshold * ||.||_1.
double soft_threshold(double v, double threshold);

/// Accelerated proximal gradient with restart-on-increase, so F never grows
/// across accepted iterations. `warm_start`, when non-empty, is the initial h.
ChannelEstimate solve_l1(const LinearOperator& op, std::span<const double> y,
                         const SolverConfig& cfg, std::span<const double> warm_start = {});

/// Index of max |h_j|, first one on ties.
std::size_t peak_index(std::span<const double> h);

}  // namespace cstdoa
