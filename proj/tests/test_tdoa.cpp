// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "cstdoa/error.hpp"
#include "cstdoa/linear_operator.hpp"
#include "cstdoa/tdoa.hpp"

using namespace cstdoa;

namespace {
constexpr double kT = 1.0 / 16000.0;
}

TEST_CASE("center peak is zero delay") {
    std::vector<double> h(255, 0.0);
    h[127] = 1.0;
    CHECK(delay_from_channel(h, kT) == 0.0);
}

TEST_CASE("peak eight lags right of center with symmetric neighbors") {
    std::vector<double> h(255, 0.0);
    h[135] = 2.0;
    h[134] = 0.5;
    h[136] = 0.5;
    CHECK(delay_from_channel(h, kT) == doctest::Approx(500e-6).epsilon(1e-12));
    h[134] = -0.5;  // magnitude is what counts
    CHECK(delay_from_channel(h, kT) == doctest::Approx(500e-6).epsilon(1e-12));
}

TEST_CASE("parabolic offset") {
    CHECK(parabolic_offset(0.0, 1.0, 0.0) == 0.0);
    // samples of -(x - 0.25)^2 at -1, 0, 1
    CHECK(parabolic_offset(-1.5625, -0.0625, -0.5625) == doctest::Approx(0.25));
    CHECK(parabolic_offset(1.0, 1.0, 1.0) == 0.0);
    CHECK(parabolic_offset(0.0, 1.0, 5.0) == 0.0);
    CHECK(parabolic_offset(0.0, 1.0, 1.0) == 0.5);
    CHECK(parabolic_offset(1.0, 1.0, 0.0) == -0.5);
}

TEST_CASE("refinement can be switched off") {
    std::vector<double> h(15, 0.0);
    h[9] = 1.0;
    h[10] = 0.6;
    DelayOptions opts;
    opts.refine = false;
    CHECK(delay_from_channel(h, 1.0, opts) == 2.0);
    CHECK(delay_from_channel(h, 1.0) > 2.0);
    CHECK(delay_from_channel(h, 1.0) <= 2.5);
}

TEST_CASE("peak search honors the admissible window") {
    std::vector<double> h(255, 0.0);
    h[127 + 60] = 5.0;
    h[127 - 10] = 1.0;
    DelayOptions opts;
    opts.max_abs_delay = 20 * kT;
    CHECK(delay_from_channel(h, kT, opts) == doctest::Approx(-10 * kT));
    std::vector<double> edge(255, 0.0);
    edge[127 + 20] = 1.0;
    edge[127 + 21] = 0.9;
    CHECK(std::abs(delay_from_channel(edge, kT, opts)) <= 20 * kT);
    std::vector<double> outside(255, 0.0);
    outside[200] = 1.0;
    CHECK_THROWS_AS(delay_from_channel(outside, kT, opts), NoPeakError);
    CHECK_THROWS_AS(delay_from_channel(std::vector<double>(255, 0.0), kT), NoPeakError);
}

TEST_CASE("scaling the channel leaves the delay unchanged") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    std::vector<double> h(63);
    for (auto& v : h) v = g(rng);
    const double base = delay_from_channel(h, kT);
    for (double s : {0.01, 3.0, 1e6}) {
        auto hs = h;
        for (auto& v : hs) v *= s;
        CHECK(delay_from_channel(hs, kT) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("confidence states") {
    CHECK(Confidence::infinite().to_string() == "inf");
    CHECK(Confidence::not_applicable().to_string() == "na");
    CHECK(Confidence::finite(0.5).to_string() == "0.5");
    CHECK(Confidence::infinite().meets(1e300));
    CHECK_FALSE(Confidence::not_applicable().meets(0.0));
    CHECK(std::isinf(Confidence::infinite().value()));
    CHECK(Confidence::finite(3.0).meets(3.0));
}

TEST_CASE("aggregate: median, spread and the infinity sentinel") {
    const double thr = 1.0 / (2 * kT);
    auto rep = aggregate_jackknife({3 * kT, 3 * kT, 3 * kT, 3 * kT}, thr);
    CHECK(rep.delta_t == 3 * kT);
    CHECK(rep.confidence.is_infinite());
    CHECK(rep.accepted);

    rep = aggregate_jackknife({1.0, 4.0, 2.0, 3.0, 10.0}, 0.5);
    CHECK(rep.delta_t == 3.0);
    CHECK(rep.confidence.value() == doctest::Approx(1.0 / 9.0));
    CHECK_FALSE(rep.accepted);

    rep = aggregate_jackknife({1.0, 2.0, 4.0, 5.0}, 0.1);
    CHECK(rep.delta_t == 3.0);
    CHECK(rep.accepted);

    rep = aggregate_jackknife({1.0, 2.0}, 0.1);
    CHECK(rep.indeterminate);
    CHECK_FALSE(rep.accepted);
}

TEST_CASE("aggregate is invariant to repetition order") {
    std::mt19937_64 rng(9);
    std::vector<double> d{0.1, -0.3, 0.7, 0.2, 0.2, 0.9, -1.0, 0.05};
    const auto ref = aggregate_jackknife(d, 1.0);
    for (int i = 0; i < 20; ++i) {
        std::shuffle(d.begin(), d.end(), rng);
        const auto rep = aggregate_jackknife(d, 1.0);
        CHECK(rep.delta_t == ref.delta_t);
        CHECK(rep.confidence == ref.confidence);
    }
}

TEST_CASE("tighter spread never lowers confidence") {
    std::vector<double> d{0.0, 1.0, 2.0, 3.0, 4.0};
    double last = aggregate_jackknife(d, 1.0).confidence.value();
    for (int step = 0; step < 10; ++step) {
        d.front() += 0.2;
        d.back() -= 0.2;
        const double c = aggregate_jackknife(d, 1.0).confidence.value();
        CHECK(c >= last);
        last = c;
    }
}

TEST_CASE("jackknife subsets") {
    const auto kept = jackknife_subset(40, 4, 77, 0);
    CHECK(kept.size() == 36);
    CHECK(std::is_sorted(kept.begin(), kept.end()));
    CHECK(std::set<std::size_t>(kept.begin(), kept.end()).size() == 36);
    CHECK(kept == jackknife_subset(40, 4, 77, 0));
    CHECK(kept != jackknife_subset(40, 4, 77, 1));
    CHECK(kept != jackknife_subset(40, 4, 78, 0));
}

TEST_CASE("jackknife config") {
    JackknifeConfig cfg;
    CHECK_NOTHROW(cfg.validate(40));
    CHECK_NOTHROW(cfg.validate(12));
    CHECK_THROWS_AS(cfg.validate(11), InvalidSpecError);
    cfg.repetitions = 2;
    CHECK_THROWS_AS(cfg.validate(40), InvalidSpecError);
    CHECK(JackknifeConfig{}.threshold(kT) == doctest::Approx(8000.0));
}

TEST_CASE("jackknife estimate on an exactly sparse identity problem") {
    const std::size_t n = 31;
    std::vector<double> y(n, 0.0);
    y[15 + 4] = 10.0;
    const auto a = DenseOperator::identity(n);
    const SubsetOperatorBuilder build = [&](std::span<const std::size_t> kept) {
        return std::make_unique<DenseOperator>(a.select_rows(kept));
    };
    JackknifeConfig cfg;
    cfg.seed = 3;
    JackknifeDiagnostics diag;
    const auto rep = jackknife_estimate(y, build, cfg, {}, 1.0, {}, {}, &diag);
    CHECK(diag.solves.size() == 8);
    // a repetition that drops row 19 sees y = 0 and is excluded
    const auto dropped = std::count(diag.failed.begin(), diag.failed.end(), true);
    CHECK(rep.jackknife_delays.size() == 8 - static_cast<std::size_t>(dropped));
    CHECK(rep.delta_t == 4.0);
    CHECK(rep.confidence.is_infinite());
    CHECK(rep.accepted);
}
