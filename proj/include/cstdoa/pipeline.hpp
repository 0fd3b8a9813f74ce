// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cstdoa/config.hpp"
#include "cstdoa/geometry.hpp"
#include "cstdoa/msequence.hpp"
#include "cstdoa/tdoa.hpp"

namespace cstdoa {

/// Everything needed to turn one (reference window, sensor block) pair into
/// delay reports.
struct ProcessingOptions {
    double sample_period = 1.0 / 16000.0;
    SolverConfig solver;
    JackknifeConfig jackknife;
    bool refine = true;
    /// Admissible |delay| for this sensor pair; empty searches all lags.
    std::optional<double> max_abs_delay;
    bool run_xcorr = true;
    bool keep_diagnostics = false;
};

struct SensorBlockResult {
    TdoaReport compressive;
    std::optional<TdoaReport> xcorr;
    /// Channel estimate of the first successful repetition (warm start for
    /// the next block of the same sensor).
    std::vector<double> channel;
    JackknifeDiagnostics diagnostics;
    std::vector<double> measurements;
};

/// Jackknife seed for one (block, sensor) cell.
std::uint64_t cell_seed(std::uint64_t run_seed, std::size_t block_index, std::size_t sensor_id);

/// Compressively measure `sensor_block`, recover the channel against the
/// reference window, and aggregate the jackknife repetitions. The xcorr
/// baseline uses the full-rate sensor block.
SensorBlockResult process_sensor_block(std::span<const double> reference_window,
                                       std::span<const double> sensor_block,
                                       const SensingMatrix& sensing,
                                       const ProcessingOptions& opts, std::size_t block_index,
                                       std::size_t sensor_id,
                                       std::span<const double> warm_start = {});

struct RunOptions {
    std::size_t workers = 1;
    bool dry_run = false;
};

struct RunSummary {
    std::string output_dir;
    std::size_t blocks = 0;
    std::size_t dropped_samples = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    double compression_ratio = 0.0;
    std::vector<std::string> files;
};

/// Simulate mode: writes tdoa.csv, figure.csv, solver.csv, track.csv (3+
/// sensors) and manifest.json into cfg.output_dir.
RunSummary run_scenario(const RunConfig& cfg, const RunOptions& opts = {});

/// Audio-pair mode: reference = channel 0, compressive sensor = channel 1.
RunSummary run_audio_pair(const RunConfig& cfg, const RunOptions& opts = {});

/// Dispatch on cfg.mode.
RunSummary run(const RunConfig& cfg, const RunOptions& opts = {});

/// Shortest round-trip decimal; "nan" / "inf" / "-inf" for non-finite values.
std::string format_number(double v);

/// Loop period of a closed (dt1, dt2) trace: the time after the start at
/// which the trace comes back closest to its first point, searched over
/// times >= min_fraction * (last time - first time).
double loop_period(std::span<const double> times, std::span<const double> dt1,
                   std::span<const double> dt2, double min_fraction = 0.5);

}  // namespace cstdoa
