// SPDX-License-Identifier: Apache-2.0
#include "cstdoa/geometry.hpp"

#include <algorithm>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cstdoa/error.hpp"

namespace cstdoa {

double CircleTrajectory::period() const { return 2.0 * std::numbers::pi * radius / speed; }

Point2 position_at(const Trajectory& traj, double t) {
    return std::visit(
        [t](const auto& tr) -> Point2 {
            using T = std::decay_t<decltype(tr)>;
            if constexpr (std::is_same_v<T, CircleTrajectory>) {
                const double phi = tr.start_angle + tr.speed * t / tr.radius;
                return {tr.radius * std::cos(phi), tr.center_offset + tr.radius * std::sin(phi)};
            } else if constexpr (std::is_same_v<T, StaticTrajectory>) {
                return tr.position;
            } else {
                if (tr.times.empty()) throw InvalidSpecError("sampled trajectory is empty");
                if (t <= tr.times.front()) return tr.points.front();
                if (t >= tr.times.back()) return tr.points.back();
                const auto it = std::upper_bound(tr.times.begin(), tr.times.end(), t);
                const auto k = static_cast<std::size_t>(it - tr.times.begin());
                const double t0 = tr.times[k - 1];
                const double t1 = tr.times[k];
                const double a = (t - t0) / (t1 - t0);
                return tr.points[k - 1] + a * (tr.points[k] - tr.points[k - 1]);
            }
        },
        traj);
}

bool has_closed_form(const Trajectory& traj) {
    return !std::holds_alternative<SampledTrajectory>(traj);
}

SampledTrajectory load_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open trajectory file '" + path + "'");
    SampledTrajectory tr;
    tr.source_path = path;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double t, x, y;
        if (!(ss >> t >> x >> y)) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": expected t,x,y");
        }
        if (!tr.times.empty() && t <= tr.times.back()) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": times must increase");
        }
        tr.times.push_back(t);
        tr.points.push_back({x, y});
    }
    if (tr.times.empty()) throw FormatError("trajectory file '" + path + "' has no samples");
    return tr;
}

ArrayGeometry::ArrayGeometry(std::vector<Point2> sensors, double c_air)
    : sensors_(std::move(sensors)), c_air_(c_air) {
    if (sensors_.size() < 2) throw InvalidSpecError("array needs at least two sensors");
    if (!(c_air_ > 0.0)) throw InvalidSpecError("speed of sound must be positive");
    for (std::size_t i = 0; i < sensors_.size(); ++i) {
        for (std::size_t j = i + 1; j < sensors_.size(); ++j) {
            if (!(spacing(i, j) > 0.0)) {
                throw InvalidSpecError("sensors " + std::to_string(i) + " and " +
                                       std::to_string(j) + " coincide");
            }
        }
    }
}

double ArrayGeometry::spacing(std::size_t i, std::size_t j) const {
    return distance(sensors_.at(i), sensors_.at(j));
}

double ArrayGeometry::max_pairwise_distance() const {
    double d = 0.0;
    for (std::size_t i = 0; i < sensors_.size(); ++i) {
        for (std::size_t j = i + 1; j < sensors_.size(); ++j) d = std::max(d, spacing(i, j));
    }
    return d;
}

double ArrayGeometry::max_delay() const { return max_pairwise_distance() / c_air_; }

double ArrayGeometry::max_delay(std::size_t i) const { return spacing(0, i) / c_air_; }

double doa_from_tdoa(double tau, double d, double c_air) {
    if (!(d > 0.0) || !(c_air > 0.0)) throw InvalidSpecError("doa: spacing and c must be positive");
    const double c = c_air * tau / d;
    // a few ulps past endfire is rounding, not an inconsistent estimate
    if (!(std::abs(c) <= 1.0 + 1e-12)) {
        throw InadmissibleDelayError("delay " + std::to_string(tau) +
                                     " s exceeds the pair bound d/c");
    }
    return std::acos(std::clamp(c, -1.0, 1.0));
}

double analytic_tdoa(const Trajectory& traj, std::span<const Point2> sensors, std::size_t i,
                     double t, double c_air) {
    if (!has_closed_form(traj)) {
        throw UnsupportedError("analytic TDOA needs a closed-form trajectory");
    }
    if (i >= sensors.size()) throw DimensionError("analytic_tdoa: sensor index out of range");
    const Point2 s = position_at(traj, t);
    return (distance(s, sensors[i]) - distance(s, sensors[0])) / c_air;
}

Bearing pair_bearing(const PairObservation& obs, Point2 normal) {
    const Point2 base = obs.sensor - obs.reference;
    const double d = norm(base);
    if (!(d > 0.0)) throw DegenerateGeometryError("pair sensors coincide");
    const Point2 u = (1.0 / d) * base;
    const Point2 perp{-u.y, u.x};
    // theta is measured against the propagation direction, so the source lies
    // at angle theta from -u.
    const double c = std::cos(obs.theta);
    const double s = std::sin(obs.theta);
    const Point2 a = (-c) * u + s * perp;
    const Point2 b = (-c) * u + (-s) * perp;
    const Point2 mid = 0.5 * (obs.reference + obs.sensor);
    return {mid, dot(normal, a) >= dot(normal, b) ? a : b};
}

double bearing_cost(std::span<const Bearing> bearings, Point2 p) {
    double cost = 0.0;
    for (const auto& b : bearings) {
        const Point2 r = p - b.origin;
        const double cross = r.x * b.direction.y - r.y * b.direction.x;
        cost += cross * cross;
    }
    return cost;
}

TriangulationResult triangulate(std::span<const PairObservation> pairs, Point2 normal) {
    TriangulationResult out;
    for (const auto& p : pairs) out.bearings.push_back(pair_bearing(p, normal));
    out.pairs_used = pairs.size();
    if (pairs.size() < 2) return out;

    // minimize sum |(I - b b^T)(p - o)|^2  ->  (sum P_k) p = sum P_k o_k
    double a11 = 0.0, a12 = 0.0, a22 = 0.0, r1 = 0.0, r2 = 0.0;
    for (const auto& b : out.bearings) {
        const double p11 = 1.0 - b.direction.x * b.direction.x;
        const double p12 = -b.direction.x * b.direction.y;
        const double p22 = 1.0 - b.direction.y * b.direction.y;
        a11 += p11;
        a12 += p12;
        a22 += p22;
        r1 += p11 * b.origin.x + p12 * b.origin.y;
        r2 += p12 * b.origin.x + p22 * b.origin.y;
    }
    const double det = a11 * a22 - a12 * a12;
    const double scale = a11 + a22;
    if (!(std::abs(det) > 1e-12 * scale * scale)) {
        out.degenerate = true;
        return out;
    }
    const Point2 p{(a22 * r1 - a12 * r2) / det, (a11 * r2 - a12 * r1) / det};
    out.position = p;
    out.residual = std::sqrt(bearing_cost(out.bearings, p));
    return out;
}

}  // namespace cstdoa
