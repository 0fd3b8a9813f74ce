// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cstdoa {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

inline constexpr double kDefaultSpeedOfSound = 343.0;

/// Circle centered at (0, center_offset), travelled counter-clockwise at
/// constant speed starting from `start_angle` (radians, 0 = +x side).
struct CircleTrajectory {
    double center_offset = 7.0;
    double radius = 5.0;
    double speed = 0.47;
    double start_angle = 0.0;

    double period() const;
};

struct StaticTrajectory {
    Point2 position;
};

/// Piecewise-linear track from (t, x, y) samples, held constant outside.
struct SampledTrajectory {
    std::vector<double> times;
    std::vector<Point2> points;
    std::string source_path;
};

using Trajectory = std::variant<CircleTrajectory, StaticTrajectory, SampledTrajectory>;

Point2 position_at(const Trajectory& traj, double t);
bool has_closed_form(const Trajectory& traj);

/// Load a SampledTrajectory from CSV rows "t,x,y" ('#' comments allowed).
SampledTrajectory load_trajectory_csv(const std::string& path);

/// Sensor layout; index 0 is the reference.
class ArrayGeometry {
public:
    ArrayGeometry(std::vector<Point2> sensors, double c_air = kDefaultSpeedOfSound);

    std::size_t size() const { return sensors_.size(); }
    Point2 sensor(std::size_t i) const { return sensors_.at(i); }
    std::span<const Point2> sensors() const { return sensors_; }
    double c_air() const { return c_air_; }

    double spacing(std::size_t i, std::size_t j) const;
    double max_pairwise_distance() const;
    /// Admissible delay bound d_max / c.
    double max_delay() const;
    /// Bound for the pair (reference, i).
    double max_delay(std::size_t i) const;

private:
    std::vector<Point2> sensors_;
    double c_air_;
};

/// theta = arccos(c * tau / d) in [0, pi]. Throws InadmissibleDelayError
/// when |c * tau| > d.
double doa_from_tdoa(double tau, double d, double c_air = kDefaultSpeedOfSound);

/// (|s(t) - p_i| - |s(t) - p_0|) / c for a closed-form trajectory.
/// SampledTrajectory is rejected with UnsupportedError.
double analytic_tdoa(const Trajectory& traj, std::span<const Point2> sensors, std::size_t i,
                     double t, double c_air = kDefaultSpeedOfSound);

/// Angle between the pair baseline (reference -> sensor) and the arrival
/// direction, for one sensor pair.
struct PairObservation {
    Point2 reference;
    Point2 sensor;
    double theta = 0.0;
};

/// A ray from `origin` towards the source.
struct Bearing {
    Point2 origin;
    Point2 direction;
};

/// Of the two mirror-image bearings a pair allows, pick the one pointing into
/// the half-plane dot(normal, p - origin) >= 0.
Bearing pair_bearing(const PairObservation& obs, Point2 source_side_normal);

struct TriangulationResult {
    std::optional<Point2> position;
    /// sqrt of the summed squared perpendicular distances to the bearing lines.
    double residual = 0.0;
    std::size_t pairs_used = 0;
    /// Bearings are (near) parallel; only `bearings` is meaningful.
    bool degenerate = false;
    std::vector<Bearing> bearings;
};

/// Least-squares intersection of the pair bearings. A single pair or
/// parallel bearings give a bearing-only result without a position.
TriangulationResult triangulate(std::span<const PairObservation> pairs,
                                Point2 source_side_normal = {0.0, 1.0});

/// Sum of squared perpendicular distances from p to the bearing lines.
double bearing_cost(std::span<const Bearing> bearings, Point2 p);

}  // namespace cstdoa
