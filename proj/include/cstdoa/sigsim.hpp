// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cstdoa/geometry.hpp"

namespace cstdoa {

enum class SourceKind {
    gaussian_sine,  ///< exp(-(t/tau)^2 / 2) * sin(2 pi f0 t)
    bandnoise,      ///< band-pass filtered Gaussian noise, optionally gated into bursts
    pcm,            ///< samples from an audio file
    silence,
};

std::string to_string(SourceKind kind);
SourceKind source_kind_from_string(const std::string& name);

struct SourceSignal {
    SourceKind kind = SourceKind::gaussian_sine;
    double envelope_width = 10.0;
    double carrier_hz = 1000.0;

    double band_low_hz = 300.0;
    double band_high_hz = 3400.0;
    /// Burst gating for bandnoise; burst_on <= 0 means continuous.
    double burst_on = 0.0;
    double burst_off = 0.0;

    /// File-backed samples at `pcm_rate`, which must equal the scenario rate.
    std::vector<double> pcm;
    double pcm_rate = 0.0;
    std::string pcm_path;

    void validate(double sample_rate) const;
};

/// Closed-form source value. Only gaussian_sine and silence have one;
/// sampled kinds throw UnsupportedError.
double synth_source(const SourceSignal& sig, double t);

enum class Attenuation { none, inverse_distance };

struct Echo {
    double extra_delay = 0.0;
    double gain = 0.0;
};

/// 2-D world: sensors on the plane, one moving source. Sensor 0 is the
/// reference (full-rate) sensor.
struct Scenario {
    std::vector<Point2> sensors;
    Trajectory trajectory = CircleTrajectory{};
    SourceSignal source;
    double sample_rate = 16000.0;
    std::size_t block_length = 4095;
    double c_air = kDefaultSpeedOfSound;
    double duration = 0.0;
    /// Per-sensor SNR in dB against the block's signal power; empty or
    /// nullopt entries mean no SNR-scaled noise.
    std::vector<std::optional<double>> snr_db;
    /// Absolute noise standard deviation added at every sensor. Defaults to
    /// 1e-3 for a silence source and 0 otherwise.
    std::optional<double> noise_floor;
    std::vector<Echo> echoes;
    Attenuation attenuation = Attenuation::none;
    std::uint64_t seed = 0;

    double sample_period() const { return 1.0 / sample_rate; }
    double effective_noise_floor() const;
    ArrayGeometry geometry() const { return ArrayGeometry(sensors, c_air); }
    void validate() const;
};

inline constexpr double kSilenceNoiseFloor = 1e-3;
inline constexpr int kInterpolationTaps = 64;

struct SampleBlock {
    std::size_t sensor_id = 0;
    std::size_t block_index = 0;
    double start_time = 0.0;
    std::vector<double> samples;
    /// Reference sensor only: block-relative samples
    /// [-ceil(N/2), N - 1 + ceil(N/2)], zero outside the recording.
    std::vector<double> extended;
};

/// Hann-windowed sinc kernel with kInterpolationTaps taps; value of the
/// kernel at offset x (samples).
double windowed_sinc(double x);

/// Kernel weights for taps k = -31..32 at fractional offset frac in (0, 1),
/// i.e. windowed_sinc(k - frac).
std::array<double, kInterpolationTaps> interpolation_weights(double frac);

/// Value of a uniformly sampled signal at fractional index `position`,
/// using taps [floor(position) - 31, floor(position) + 32].
template <class Fetch>
double interpolate_at(double position, Fetch&& fetch);

/// Deterministic world simulator: every sample is a pure function of
/// (scenario, sensor, sample index).
class Simulator {
public:
    explicit Simulator(Scenario scenario);

    const Scenario& scenario() const { return scn_; }

    Point2 source_position(double t) const { return position_at(scn_.trajectory, t); }

    /// Emission time of the sound reaching `sensor` at time t (retarded
    /// time, at most 5 fixed-point iterations).
    double emission_time(std::size_t sensor, double t) const;

    /// Noiseless received amplitude at continuous time t.
    double propagate(std::size_t sensor, double t) const;

    /// Received sample n (noise included); zero outside the recording.
    double sample(std::size_t sensor, std::int64_t n) const;
    std::vector<double> samples(std::size_t sensor, std::int64_t first, std::size_t count) const;

    std::size_t total_samples() const { return total_; }
    std::size_t block_count() const { return total_ / scn_.block_length; }
    /// Samples after the last full block.
    std::size_t dropped_samples() const { return total_ % scn_.block_length; }

    SampleBlock block(std::size_t sensor, std::size_t block_index) const;
    std::vector<SampleBlock> sample_blocks(std::size_t sensor) const;

    /// Mean square of the noiseless samples of one block.
    double block_signal_power(std::size_t sensor, std::size_t block_index) const;

    /// Source value on the emission-time sample grid.
    double source_sample(std::int64_t n) const;

private:
    double clean_sample(std::size_t sensor, std::int64_t n) const;
    double noise_sigma(std::size_t sensor, std::size_t block_index) const;
    double compute_source_sample(std::int64_t n) const;
    double max_path_delay() const;

    Scenario scn_;
    std::size_t total_ = 0;
    std::int64_t grid_first_ = 0;
    std::vector<double> grid_;
};

template <class Fetch>
double interpolate_at(double position, Fetch&& fetch) {
    const double base = std::floor(position);
    const double frac = position - base;
    const auto n0 = static_cast<std::int64_t>(base);
    if (frac == 0.0) return fetch(n0);
    const auto w = interpolation_weights(frac);
    double acc = 0.0;
    for (int i = 0; i < kInterpolationTaps; ++i) {
        acc += fetch(n0 + i - (kInterpolationTaps / 2 - 1)) * w[static_cast<std::size_t>(i)];
    }
    return acc;
}

}  // namespace cstdoa
