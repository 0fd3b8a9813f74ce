// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cstdoa/geometry.hpp"
#include "cstdoa/msequence.hpp"
#include "cstdoa/sigsim.hpp"
#include "cstdoa/solver.hpp"
#include "cstdoa/tdoa.hpp"

namespace cstdoa {

enum class RunMode { simulate, audio_pair };

struct SensingConfig {
    int degree = 12;
    std::size_t rows = 40;
    /// Explicit row shifts shared by all sensors; empty uses the spread schedule.
    std::vector<std::size_t> shifts;
    /// Per-sensor base shift, indexed by sensor id. Missing entries use
    /// default_base_shift().
    std::vector<std::size_t> base_shifts;

    std::size_t block_length() const { return sequence_length(degree); }
    std::size_t default_base_shift(std::size_t sensor, std::size_t compressive_sensors) const;
    SensingMatrixSpec matrix_for(std::size_t sensor, std::size_t compressive_sensors) const;
};

struct AudioChannelConfig {
    std::string path;
    std::size_t channel = 0;
    /// "wav" or "raw".
    std::string format = "wav";
    double raw_rate = 0.0;
    std::size_t raw_channels = 1;
};

struct AudioPairConfig {
    AudioChannelConfig reference;
    AudioChannelConfig sensor;
    /// Microphone spacing in meters; bounds the admissible delay.
    double spacing = 0.11;
    double c_air = kDefaultSpeedOfSound;
};

struct RunConfig {
    std::string name;
    RunMode mode = RunMode::simulate;
    std::uint64_t seed = 0;
    Scenario scenario;
    SensingConfig sensing;
    SolverConfig solver;
    JackknifeConfig jackknife;
    bool refine = true;
    bool warm_start = true;
    /// Restrict peak search to |delay| <= spacing / c.
    bool bound_by_geometry = true;
    Point2 source_side{0.0, 1.0};
    AudioPairConfig audio;
    std::string output_dir = "cstdoa-out";
    bool objective_trace = false;

    std::size_t block_length() const { return sensing.block_length(); }
    double compression_ratio() const;
    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Parse the JSON run description. Errors carry the dotted field path.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
/// Canonical JSON echo of every tunable (used for the run manifest).
std::string config_to_json(const RunConfig& cfg, int indent = 2);

/// Built-in presets: "paper-fig5" and "desk-255".
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace cstdoa
