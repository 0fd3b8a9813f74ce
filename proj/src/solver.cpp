// SPDX-License-Identifier: Apache-2.0
#include "cstdoa/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cstdoa/error.hpp"

namespace cstdoa {

namespace {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double l1_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

double half_sq_residual(std::span<const double> ah, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = ah[i] - y[i];
        s += r * r;
    }
    return 0.5 * s;
}

}  // namespace

void SolverConfig::validate() const {
    if (mu && !(*mu > 0.0 && std::isfinite(*mu))) {
        throw InvalidSpecError("solver mu must be a positive finite number");
    }
    if (!(mu_scale > 0.0)) throw InvalidSpecError("solver mu_scale must be positive");
    if (max_iterations <= 0) throw InvalidSpecError("solver max_iterations must be positive");
    if (!(rel_tolerance > 0.0)) throw InvalidSpecError("solver rel_tolerance must be positive");
}

double soft_threshold(double v, double threshold) {
    if (v > threshold) return v - threshold;
    if (v < -threshold) return v + threshold;
    return 0.0;
}

std::size_t peak_index(std::span<const double> h) {
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t j = 0; j < h.size(); ++j) {
        const double m = std::abs(h[j]);
        if (m > best_mag) {
            best_mag = m;
            best = j;
        }
    }
    return best;
}

double default_mu(const LinearOperator& op, std::span<const double> y) {
    const auto aty = op.adjoint(y);
    double inf_norm = 0.0;
    for (double v : aty) inf_norm = std::max(inf_norm, std::abs(v));
    if (inf_norm == 0.0 || !std::isfinite(inf_norm)) {
        throw NumericError("default_mu: A^T y is zero; use the fallback mu");
    }
    return 1.0 / (0.01 * inf_norm);
}

double resolve_mu(const SolverConfig& cfg, const LinearOperator& op, std::span<const double> y) {
    if (cfg.mu) return *cfg.mu;
    try {
        return cfg.mu_scale * default_mu(op, y);
    } catch (const NumericError&) {
        return kFallbackMu;
    }
}

double objective_value(const LinearOperator& op, std::span<const double> y,
                       std::span<const double> h, double mu) {
    const auto ah = op.apply(h);
    return l1_norm(h) + mu * half_sq_residual(ah, y);
}

ChannelEstimate solve_l1(const LinearOperator& op, std::span<const double> y,
                         const SolverConfig& cfg, std::span<const double> warm_start) {
    cfg.validate();
    const std::size_t m = op.rows();
    const std::size_t n = op.cols();
    if (y.size() != m) {
        throw DimensionError("solve_l1: y has length " + std::to_string(y.size()) +
                             ", operator has " + std::to_string(m) + " rows");
    }
    if (!warm_start.empty() && warm_start.size() != n) {
        throw DimensionError("solve_l1: warm start has wrong length");
    }
    if (!all_finite(y) || !all_finite(warm_start)) {
        throw NumericError("solve_l1: non-finite input");
    }

    const double sigma = estimate_spectral_norm(op, 30, 1e-4);
    if (!std::isfinite(sigma)) throw NumericError("solve_l1: operator produced non-finite values");
    if (sigma == 0.0) throw DegenerateOperatorError("solve_l1: operator norm is zero");

    const double mu = resolve_mu(cfg, op, y);
    ChannelEstimate est;
    est.mu = mu;
    est.h.assign(n, 0.0);

    if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) {
        est.converged = true;
        return est;
    }

    // Work with G = F / mu = lambda ||h||_1 + 1/2 ||Ah - y||^2; step 1/L, threshold lambda/L.
    const double lambda = 1.0 / mu;
    double lip = sigma * sigma * 1.02;

    std::vector<double> x(n, 0.0);
    if (!warm_start.empty()) std::copy(warm_start.begin(), warm_start.end(), x.begin());
    std::vector<double> ax = op.apply(x);
    double g_x = lambda * l1_norm(x) + half_sq_residual(ax, y);

    std::vector<double> z = x;
    std::vector<double> az = ax;
    std::vector<double> resid(m), grad(n), x_new(n), ax_new(m);
    double t = 1.0;
    bool momentum_active = false;

    if (cfg.record_trace) est.objective_trace.push_back(mu * g_x);

    int it = 0;
    while (it < cfg.max_iterations) {
        ++it;
        for (std::size_t i = 0; i < m; ++i) resid[i] = az[i] - y[i];
        op.adjoint_to(resid, grad);
        const double f_z = half_sq_residual(az, y);

        double f_new = 0.0;
        for (;;) {
            const double thr = lambda / lip;
            for (std::size_t j = 0; j < n; ++j) x_new[j] = soft_threshold(z[j] - grad[j] / lip, thr);
            op.apply_to(x_new, ax_new);
            f_new = half_sq_residual(ax_new, y);
            if (!cfg.backtracking) break;
            double lin = 0.0, quad = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double d = x_new[j] - z[j];
                lin += grad[j] * d;
                quad += d * d;
            }
            const double bound = f_z + lin + 0.5 * lip * quad;
            if (f_new <= bound + 1e-12 * std::abs(f_z)) break;
            lip *= 2.0;
        }
        if (!std::isfinite(f_new)) throw NumericError("solve_l1: iteration diverged");

        const double g_new = lambda * l1_norm(x_new) + f_new;
        if (g_new > g_x) {
            if (momentum_active) {
                // restart from the last accepted point without momentum
                z = x;
                az = ax;
                t = 1.0;
                momentum_active = false;
                continue;
            }
            if (!cfg.backtracking) {
                lip *= 2.0;
                continue;
            }
            // a plain proximal step cannot increase G; only rounding remains
            est.converged = true;
            break;
        }

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        for (std::size_t j = 0; j < n; ++j) z[j] = x_new[j] + beta * (x_new[j] - x[j]);
        for (std::size_t i = 0; i < m; ++i) az[i] = ax_new[i] + beta * (ax_new[i] - ax[i]);
        momentum_active = beta != 0.0;
        t = t_next;

        const double decrease = g_x - g_new;
        x.swap(x_new);
        ax.swap(ax_new);
        g_x = g_new;
        if (cfg.record_trace) est.objective_trace.push_back(mu * g_x);

        if (decrease <= cfg.rel_tolerance * std::max(g_x, std::numeric_limits<double>::min())) {
            est.converged = true;
            break;
        }
    }

    est.iterations = it;
    est.h = std::move(x);
    const auto ah = op.apply(est.h);
    est.residual_norm = std::sqrt(2.0 * half_sq_residual(ah, y));
    est.objective = l1_norm(est.h) + mu * half_sq_residual(ah, y);
    est.peak_index = peak_index(est.h);
    est.peak_magnitude = std::abs(est.h[est.peak_index]);
    return est;
}

}  // namespace cstdoa
