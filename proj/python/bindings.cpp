// SPDX-License-Identifier: Apache-2.0
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <vector>

#include "cstdoa/baseline.hpp"
#include "cstdoa/config.hpp"
#include "cstdoa/error.hpp"
#include "cstdoa/geometry.hpp"
#include "cstdoa/msequence.hpp"
#include "cstdoa/pipeline.hpp"
#include "cstdoa/sigsim.hpp"
#include "cstdoa/solver.hpp"
#include "cstdoa/sparsity.hpp"
#include "cstdoa/version.hpp"

namespace py = pybind11;
using namespace cstdoa;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
    if (a.ndim() != 1) throw DimensionError("expected a 1-d array");
    return {a.data(), a.data() + a.size()};
}

Array to_array(const std::vector<double>& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

DenseOperator to_operator(const Array& a) {
    if (a.ndim() != 2) throw DimensionError("expected a 2-d array");
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto cols = static_cast<std::size_t>(a.shape(1));
    return DenseOperator(rows, cols, std::vector<double>(a.data(), a.data() + a.size()));
}

py::dict report_dict(const TdoaReport& r) {
    py::dict d;
    d["sensor_id"] = r.sensor_id;
    d["block_index"] = r.block_index;
    d["method"] = to_string(r.method);
    d["delta_t"] = r.delta_t;
    d["confidence"] = r.confidence.to_string() == "na" ? py::object(py::none()) : py::object(py::float_(r.confidence.value()));
    d["accepted"] = r.accepted;
    d["indeterminate"] = r.indeterminate;
    d["jackknife_delays"] = to_array(r.jackknife_delays);
    return d;
}

py::dict summary_dict(const RunSummary& s) {
    py::dict d;
    d["output_dir"] = s.output_dir;
    d["blocks"] = s.blocks;
    d["dropped_samples"] = s.dropped_samples;
    d["accepted"] = s.accepted;
    d["rejected"] = s.rejected;
    d["compression_ratio"] = s.compression_ratio;
    d["files"] = s.files;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Compressive-sensing time-difference-of-arrival estimation";
    m.attr("__version__") = kVersion;

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<NoPeakError>(m, "NoPeakError", base.ptr());
    py::register_exception<InadmissibleDelayError>(m, "InadmissibleDelayError", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<InvalidSpecError>(m, "InvalidSpecError", base.ptr());

    m.def(
        "msequence",
        [](int degree, std::uint32_t seed) {
            const auto seq = generate_msequence(MSequenceSpec::primitive(degree, seed));
            py::array_t<std::uint8_t> out(static_cast<py::ssize_t>(seq.size()));
            std::copy(seq.begin(), seq.end(), out.mutable_data());
            return out;
        },
        py::arg("degree"), py::arg("seed") = 1, "One period of the 0/1 m-sequence of the given degree.");

    m.def(
        "sensing_matrix",
        [](int degree, std::size_t rows, std::size_t base_shift) {
            const SensingMatrix phi(SensingMatrixSpec::spread(MSequenceSpec::primitive(degree), rows, base_shift));
            const std::size_t n = phi.cols();
            Array out({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(n)});
            auto* p = out.mutable_data();
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < n; ++j) p[i * n + j] = phi.entry(i, j);
            return out;
        },
        py::arg("degree"), py::arg("rows"), py::arg("base_shift") = 0,
        "Dense +-1 sensing matrix with the spread row-shift schedule.");

    m.def(
        "measure",
        [](const Array& block, int degree, std::size_t rows, std::size_t base_shift) {
            const SensingMatrix phi(SensingMatrixSpec::spread(MSequenceSpec::primitive(degree), rows, base_shift));
            return to_array(phi.apply(to_vector(block)));
        },
        py::arg("block"), py::arg("degree"), py::arg("rows"), py::arg("base_shift") = 0);

    m.def(
        "basis_matrix",
        [](const Array& window, std::size_t block_length) {
            const SparsityBasis psi(to_vector(window), block_length);
            const auto dense = DenseOperator::materialize(psi);
            Array out({static_cast<py::ssize_t>(block_length), static_cast<py::ssize_t>(block_length)});
            for (std::size_t i = 0; i < block_length; ++i)
                for (std::size_t j = 0; j < block_length; ++j) out.mutable_data()[i * block_length + j] = dense(i, j);
            return out;
        },
        py::arg("window"), py::arg("block_length"), "Delay basis built from an extended reference window.");

    m.def(
        "default_mu", [](const Array& a, const Array& y) { return default_mu(to_operator(a), to_vector(y)); },
        py::arg("a"), py::arg("y"));

    m.def(
        "solve_l1",
        [](const Array& a, const Array& y, std::optional<double> mu, double mu_scale, int max_iterations,
           double rel_tolerance) {
            SolverConfig cfg;
            cfg.mu = mu;
            cfg.mu_scale = mu_scale;
            cfg.max_iterations = max_iterations;
            cfg.rel_tolerance = rel_tolerance;
            const auto est = solve_l1(to_operator(a), to_vector(y), cfg);
            py::dict d;
            d["h"] = to_array(est.h);
            d["iterations"] = est.iterations;
            d["objective"] = est.objective;
            d["residual_norm"] = est.residual_norm;
            d["mu"] = est.mu;
            d["converged"] = est.converged;
            d["peak_index"] = est.peak_index;
            return d;
        },
        py::arg("a"), py::arg("y"), py::arg("mu") = py::none(), py::arg("mu_scale") = 1.0,
        py::arg("max_iterations") = 5000, py::arg("rel_tolerance") = 1e-6,
        "Minimize ||h||_1 + mu/2 ||A h - y||^2.");

    m.def(
        "delay_from_channel",
        [](const Array& h, double sample_period, bool refine, std::optional<double> max_abs_delay) {
            return delay_from_channel(to_vector(h), sample_period, {refine, max_abs_delay});
        },
        py::arg("h"), py::arg("sample_period"), py::arg("refine") = true, py::arg("max_abs_delay") = py::none());

    m.def(
        "aggregate_jackknife",
        [](const std::vector<double>& delays, double min_confidence) {
            return report_dict(aggregate_jackknife(delays, min_confidence));
        },
        py::arg("delays"), py::arg("min_confidence"));

    m.def(
        "cross_correlate",
        [](const Array& x1, const Array& x2, std::size_t max_lag) {
            return to_array(cross_correlate(to_vector(x1), to_vector(x2), max_lag));
        },
        py::arg("x1"), py::arg("x2"), py::arg("max_lag"));

    m.def(
        "tdoa_xcorr",
        [](const Array& reference, const Array& signal, double max_abs_delay, double sample_period, bool refine) {
            return report_dict(tdoa_xcorr(to_vector(reference), to_vector(signal), max_abs_delay, sample_period, refine));
        },
        py::arg("reference"), py::arg("signal"), py::arg("max_abs_delay"), py::arg("sample_period"),
        py::arg("refine") = true);

    m.def(
        "process_block",
        [](const Array& window, const Array& block, std::size_t rows, std::size_t base_shift, double sample_period,
           std::optional<double> max_abs_delay, bool refine, std::uint64_t seed) {
            const auto w = to_vector(window);
            const auto b = to_vector(block);
            const SensingMatrix phi(
                SensingMatrixSpec::spread(MSequenceSpec::primitive(degree_for_length(b.size(), false)), rows, base_shift));
            ProcessingOptions opts;
            opts.sample_period = sample_period;
            opts.max_abs_delay = max_abs_delay;
            opts.refine = refine;
            opts.jackknife.seed = seed;
            const auto r = process_sensor_block(w, b, phi, opts, 0, 1);
            py::dict d;
            d["compressive"] = report_dict(r.compressive);
            d["xcorr"] = r.xcorr ? py::object(report_dict(*r.xcorr)) : py::object(py::none());
            d["channel"] = to_array(r.channel);
            d["measurements"] = to_array(r.measurements);
            return d;
        },
        py::arg("window"), py::arg("block"), py::arg("rows"), py::arg("base_shift") = 0,
        py::arg("sample_period") = 1.0 / 16000.0, py::arg("max_abs_delay") = py::none(), py::arg("refine") = true,
        py::arg("seed") = 0,
        "Measure one sensor block compressively and estimate its delay against the reference window.");

    m.def("doa_from_tdoa", &doa_from_tdoa, py::arg("tau"), py::arg("spacing"), py::arg("c_air") = kDefaultSpeedOfSound);

    m.def(
        "circle_tdoa",
        [](const std::vector<std::pair<double, double>>& sensors, std::size_t i, double t, double center_offset,
           double radius, double speed, double c_air) {
            std::vector<Point2> pts;
            for (const auto& [x, y] : sensors) pts.push_back({x, y});
            return analytic_tdoa(CircleTrajectory{center_offset, radius, speed, 0.0}, pts, i, t, c_air);
        },
        py::arg("sensors"), py::arg("i"), py::arg("t"), py::arg("center_offset") = 7.0, py::arg("radius") = 5.0,
        py::arg("speed") = 0.47, py::arg("c_air") = kDefaultSpeedOfSound,
        "Exact delay of sensor i relative to sensor 0 for a source on a circle.");

    m.def("preset_names", &preset_names);
    m.def(
        "preset", [](const std::string& name) { return config_to_json(preset(name)); }, py::arg("name"),
        "Canonical JSON of a built-in preset.");
    m.def(
        "normalize_config", [](const std::string& text) { return config_to_json(parse_config(text)); },
        py::arg("config_json"), "Parse, validate and echo a JSON run description.");

    m.def(
        "simulate_block",
        [](const std::string& config_json, std::size_t sensor, std::size_t block_index) {
            const auto cfg = parse_config(config_json);
            const Simulator sim(cfg.scenario);
            const auto b = sim.block(sensor, block_index);
            py::dict d;
            d["start_time"] = b.start_time;
            d["samples"] = to_array(b.samples);
            d["extended"] = to_array(b.extended);
            return d;
        },
        py::arg("config_json"), py::arg("sensor"), py::arg("block_index"));

    m.def(
        "run",
        [](const std::string& config_json, std::optional<std::string> out, std::size_t workers, bool dry_run) {
            auto cfg = parse_config(config_json);
            if (out) cfg.output_dir = *out;
            RunSummary s;
            {
                py::gil_scoped_release release;
                s = run(cfg, {workers, dry_run});
            }
            return summary_dict(s);
        },
        py::arg("config_json"), py::arg("out") = py::none(), py::arg("workers") = 1, py::arg("dry_run") = false,
        "Run a simulate or audio-pair job and write its CSV files.");

    m.def("format_number", &format_number);
}
