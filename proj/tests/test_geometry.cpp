// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "cstdoa/error.hpp"
#include "cstdoa/geometry.hpp"

using namespace cstdoa;
using std::numbers::pi;

TEST_CASE("doa special angles") {
    CHECK(doa_from_tdoa(0.0, 1.0) == doctest::Approx(pi / 2));
    CHECK(doa_from_tdoa(1.0 / 343.0, 1.0) == doctest::Approx(0.0));
    CHECK(doa_from_tdoa(-1.0 / 343.0, 1.0) == doctest::Approx(pi));
    // arccos(343 * 1.4577e-3) = 60.000588817513... degrees
    CHECK(doa_from_tdoa(1.4577e-3, 1.0) * 180.0 / pi == doctest::Approx(60.00058881751351).epsilon(1e-12));
    CHECK_THROWS_AS(doa_from_tdoa(1.01 / 343.0, 1.0), InadmissibleDelayError);
    CHECK_THROWS_AS(doa_from_tdoa(0.0, 0.0), InvalidSpecError);
}

TEST_CASE("doa round trip") {
    for (int i = 0; i < 1000; ++i) {
        const double theta = pi * (i + 0.5) / 1000.0;
        const double tau = 0.7 * std::cos(theta) / 343.0;
        CHECK(std::abs(doa_from_tdoa(tau, 0.7) - theta) <= 1e-12);
    }
    // rounding overshoot at endfire is clamped rather than rejected
    CHECK(doa_from_tdoa(std::nextafter(0.7 / 343.0, 1.0), 0.7) == 0.0);
}

TEST_CASE("analytic tdoa: symmetry and bound") {
    const std::vector<Point2> sensors{{0, 0}, {-1, 0}, {1, 0}};
    // on the bisector of (0, 2): x = 0.5
    CHECK(analytic_tdoa(StaticTrajectory{{0.5, 4.0}}, sensors, 2, 0.0) == doctest::Approx(0.0));
    const CircleTrajectory circle;
    for (int k = 0; k < 2000; ++k) {
        const double t = circle.period() * k / 2000.0;
        CHECK(std::abs(analytic_tdoa(circle, sensors, 1, t)) <= 1.0 / 343.0);
    }
    CHECK_THROWS_AS(analytic_tdoa(SampledTrajectory{{0.0, 1.0}, {{0, 1}, {1, 1}}, "x"}, sensors, 1, 0.5),
                    UnsupportedError);
}

TEST_CASE("analytic tdoa at the nearest circle point against 128-bit arithmetic") {
    using big = boost::multiprecision::cpp_bin_float_quad;
    const std::vector<Point2> sensors{{0, 0}, {-1, 0}, {1, 0}};
    const CircleTrajectory circle;
    // nearest point to the origin is (0, 2), reached at phase 3pi/2
    const double t = circle.period() * 0.75;
    const big x = 0, y = 2;
    const big d0 = boost::multiprecision::sqrt(x * x + y * y);
    const big d1 = boost::multiprecision::sqrt((x + 1) * (x + 1) + y * y);
    const double expect = static_cast<double>((d1 - d0) / big(343));
    CHECK(analytic_tdoa(circle, sensors, 1, t) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(analytic_tdoa(circle, sensors, 2, t) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("far-field limit approaches the plane-wave delay") {
    const double d = 1.0;
    const std::vector<Point2> sensors{{0, 0}, {d, 0}};
    const Point2 mid{d / 2, 0};
    for (int k = 1; k < 180; ++k) {
        const double theta = pi * k / 180.0;
        // bearing measured from the -baseline direction, as doa_from_tdoa reports it
        const Point2 dir{-std::cos(theta), std::sin(theta)};
        for (double range : {20.0 * d, 50.0 * d, 400.0 * d}) {
            const double tau = analytic_tdoa(StaticTrajectory{mid + range * dir}, sensors, 1, 0.0);
            const double plane = d * std::cos(theta) / 343.0;
            CHECK(std::abs(tau - plane) <= 0.01 * d / 343.0);
        }
    }
}

TEST_CASE("circle trajectory") {
    const CircleTrajectory c;
    CHECK(c.period() == doctest::Approx(2 * pi * 5 / 0.47));
    const auto p0 = position_at(c, 0.0);
    CHECK(p0.x == doctest::Approx(5.0));
    CHECK(p0.y == doctest::Approx(7.0));
    const auto q = position_at(c, c.period() / 4);
    CHECK(q.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(q.y == doctest::Approx(12.0));
}

TEST_CASE("sampled trajectory from csv") {
    const std::string path = std::string(CSTDOA_TEST_TMP) + "/traj.csv";
    std::filesystem::create_directories(CSTDOA_TEST_TMP);
    {
        std::ofstream out(path);
        out << "# t,x,y\n0,0,1\n2,2,1\n";
    }
    const auto tr = load_trajectory_csv(path);
    CHECK(tr.times.size() == 2);
    const auto p = position_at(tr, 1.0);
    CHECK(p.x == doctest::Approx(1.0));
    CHECK(position_at(tr, 5.0).x == doctest::Approx(2.0));
    CHECK_THROWS_AS(load_trajectory_csv(path + ".missing"), FormatError);
}

TEST_CASE("array geometry") {
    const ArrayGeometry g({{0, 0}, {-1, 0}, {1, 0}});
    CHECK(g.max_pairwise_distance() == 2.0);
    CHECK(g.max_delay() == doctest::Approx(2.0 / 343.0));
    CHECK(g.max_delay(1) == doctest::Approx(1.0 / 343.0));
    CHECK_THROWS_AS(ArrayGeometry({{0, 0}}), InvalidSpecError);
    CHECK_THROWS_AS(ArrayGeometry({{0, 0}, {0, 0}}), InvalidSpecError);
    CHECK_THROWS_AS(ArrayGeometry({{0, 0}, {1, 0}}, 0.0), InvalidSpecError);
}

TEST_CASE("two orthogonal bearings meet exactly") {
    // broadside bearing up the y axis, endfire bearing along y = 7
    const std::vector<PairObservation> ortho{{{-1, 0}, {1, 0}, pi / 2}, {{-3, 7}, {-2, 7}, pi}};
    const auto tri = triangulate(ortho, {0, 1});
    REQUIRE(tri.position);
    CHECK(tri.position->x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(tri.position->y == doctest::Approx(7.0));
    CHECK(tri.residual == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(tri.pairs_used == 2);
}

TEST_CASE("perturbed bearings agree with a grid-search oracle") {
    const Point2 src{1.5, 6.0};
    const std::vector<std::pair<Point2, Point2>> arr{{{0, 0}, {1, 0}}, {{-3, 0}, {-2, 0.2}}, {{3, 0}, {4, -0.3}}};
    std::mt19937_64 rng(41);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<PairObservation> pairs;
    for (const auto& [a, b] : arr) {
        const double d = distance(a, b);
        const double tau = (distance(src, b) - distance(src, a)) / 343.0;
        const double theta = std::acos(std::clamp(343.0 * tau / d, -1.0, 1.0)) + noise(rng);
        pairs.push_back({a, b, theta});
    }
    const auto tri = triangulate(pairs, {0, 1});
    REQUIRE(tri.position);
    // coarse-to-fine grid search over the same cost
    Point2 best{0, 0};
    double best_cost = 1e300;
    double lo_x = -10, hi_x = 10, lo_y = -2, hi_y = 20;
    for (int level = 0; level < 6; ++level) {
        const double sx = (hi_x - lo_x) / 200, sy = (hi_y - lo_y) / 200;
        for (int i = 0; i <= 200; ++i)
            for (int j = 0; j <= 200; ++j) {
                const Point2 p{lo_x + i * sx, lo_y + j * sy};
                const double c = bearing_cost(tri.bearings, p);
                if (c < best_cost) {
                    best_cost = c;
                    best = p;
                }
            }
        lo_x = best.x - 2 * sx, hi_x = best.x + 2 * sx, lo_y = best.y - 2 * sy, hi_y = best.y + 2 * sy;
    }
    CHECK(distance(*tri.position, best) < 1e-6);
    CHECK(bearing_cost(tri.bearings, *tri.position) <= best_cost + 1e-12);
    CHECK(distance(*tri.position, src) < 0.5);
}

TEST_CASE("single pair and parallel bearings") {
    const std::vector<PairObservation> one{{{0, 0}, {1, 0}, 1.0}};
    const auto a = triangulate(one);
    CHECK_FALSE(a.position);
    CHECK(a.bearings.size() == 1);
    const std::vector<PairObservation> parallel{{{0, 0}, {1, 0}, pi / 2}, {{3, 0}, {4, 0}, pi / 2}};
    const auto b = triangulate(parallel);
    CHECK(b.degenerate);
    CHECK_FALSE(b.position);
}

TEST_CASE("source side picks the half-plane") {
    const PairObservation obs{{0, 0}, {1, 0}, pi / 3};
    CHECK(pair_bearing(obs, {0, 1}).direction.y > 0);
    CHECK(pair_bearing(obs, {0, -1}).direction.y < 0);
}
