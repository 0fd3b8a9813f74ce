// SPDX-License-Identifier: Apache-2.0
#include "cstdoa/sigsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "cstdoa/error.hpp"
#include "cstdoa/msequence.hpp"
#include "cstdoa/random.hpp"

namespace cstdoa {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kBandTaps = 129;
constexpr double kBurstRamp = 0.01;

constexpr std::uint64_t kStreamSource = 0x50;
constexpr std::uint64_t kStreamSnrNoise = 0x1000;
constexpr std::uint64_t kStreamFloorNoise = 0x2000;

double sinc(double x) {
    if (x == 0.0) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

std::vector<double> bandpass_taps(double low, double high, double fs) {
    const double fl = low / fs;
    const double fh = high / fs;
    const int half = kBandTaps / 2;
    std::vector<double> taps(kBandTaps);
    double energy = 0.0;
    for (int k = -half; k <= half; ++k) {
        const double w = 0.5 * (1.0 + std::cos(kPi * k / (half + 1)));
        const double v = (2.0 * fh * sinc(2.0 * fh * k) - 2.0 * fl * sinc(2.0 * fl * k)) * w;
        taps[static_cast<std::size_t>(k + half)] = v;
        energy += v * v;
    }
    for (auto& v : taps) v /= std::sqrt(energy);
    return taps;
}

double burst_gate(const SourceSignal& sig, double t) {
    if (sig.burst_on <= 0.0) return 1.0;
    const double period = sig.burst_on + sig.burst_off;
    double phase = std::fmod(t, period);
    if (phase < 0.0) phase += period;
    if (phase >= sig.burst_on) return 0.0;
    const double ramp = std::min(kBurstRamp, 0.5 * sig.burst_on);
    if (phase < ramp) return 0.5 * (1.0 - std::cos(kPi * phase / ramp));
    if (phase > sig.burst_on - ramp) return 0.5 * (1.0 - std::cos(kPi * (sig.burst_on - phase) / ramp));
    return 1.0;
}

bool is_block_length(std::size_t n) {
    for (int k = kMinDegree; k <= kMaxDegree; ++k) {
        if (sequence_length(k) == n) return true;
    }
    return false;
}

}  // namespace

std::string to_string(SourceKind kind) {
    switch (kind) {
        case SourceKind::gaussian_sine: return "gaussian-sine";
        case SourceKind::bandnoise: return "bandnoise";
        case SourceKind::pcm: return "pcm";
        case SourceKind::silence: return "silence";
    }
    return "unknown";
}

SourceKind source_kind_from_string(const std::string& name) {
    if (name == "gaussian-sine") return SourceKind::gaussian_sine;
    if (name == "bandnoise") return SourceKind::bandnoise;
    if (name == "pcm") return SourceKind::pcm;
    if (name == "silence") return SourceKind::silence;
    throw InvalidSpecError("unknown source kind '" + name + "'");
}

void SourceSignal::validate(double sample_rate) const {
    switch (kind) {
        case SourceKind::gaussian_sine:
            if (!(envelope_width > 0.0)) throw InvalidSpecError("envelope width must be positive");
            if (!(carrier_hz >= 0.0 && carrier_hz < 0.5 * sample_rate)) {
                throw InvalidSpecError("carrier must lie below half the sample rate");
            }
            break;
        case SourceKind::bandnoise:
            if (!(band_low_hz > 0.0 && band_low_hz < band_high_hz && band_high_hz < 0.5 * sample_rate)) {
                throw InvalidSpecError("noise band must satisfy 0 < low < high < fs/2");
            }
            if (burst_on > 0.0 && !(burst_off >= 0.0)) {
                throw InvalidSpecError("burst_off must be non-negative");
            }
            break;
        case SourceKind::pcm:
            if (pcm.empty()) throw InvalidSpecError("pcm source has no samples");
            if (pcm_rate != sample_rate) {
                throw InvalidSpecError("pcm source rate differs from the scenario sample rate");
            }
            break;
        case SourceKind::silence: break;
    }
}

double synth_source(const SourceSignal& sig, double t) {
    switch (sig.kind) {
        case SourceKind::gaussian_sine: {
            const double u = t / sig.envelope_width;
            return std::exp(-0.5 * u * u) * std::sin(2.0 * kPi * sig.carrier_hz * t);
        }
        case SourceKind::silence: return 0.0;
        default: break;
    }
    throw UnsupportedError("source kind '" + to_string(sig.kind) + "' has no closed form");
}

double Scenario::effective_noise_floor() const {
    if (noise_floor) return *noise_floor;
    return source.kind == SourceKind::silence ? kSilenceNoiseFloor : 0.0;
}

void Scenario::validate() const {
    if (sensors.size() < 2) throw InvalidSpecError("scenario needs at least two sensors");
    (void)geometry();
    if (!(sample_rate > 0.0)) throw InvalidSpecError("sample rate must be positive");
    if (!is_block_length(block_length)) {
        throw InvalidSpecError("block length " + std::to_string(block_length) +
                               " is not 2^k - 1 for a supported k");
    }
    if (!(duration > 0.0)) throw InvalidSpecError("duration must be positive");
    if (snr_db.size() > sensors.size()) throw InvalidSpecError("more SNR entries than sensors");
    if (noise_floor && !(*noise_floor >= 0.0)) throw InvalidSpecError("noise floor must be >= 0");
    for (const auto& e : echoes) {
        if (!(e.extra_delay >= 0.0)) throw InvalidSpecError("echo delay must be non-negative");
    }
    if (const auto* c = std::get_if<CircleTrajectory>(&trajectory)) {
        if (!(c->radius > 0.0) || !(c->speed > 0.0)) {
            throw InvalidSpecError("circle radius and speed must be positive");
        }
    }
    source.validate(sample_rate);
}

double windowed_sinc(double x) {
    constexpr double half = kInterpolationTaps / 2;
    if (std::abs(x) >= half) return 0.0;
    return sinc(x) * 0.5 * (1.0 + std::cos(kPi * x / half));
}

std::array<double, kInterpolationTaps> interpolation_weights(double frac) {
    constexpr int half = kInterpolationTaps / 2;
    static const auto table = [] {
        std::array<std::pair<double, double>, kInterpolationTaps> t{};
        for (int i = 0; i < kInterpolationTaps; ++i) {
            const int k = i - (half - 1);
            t[static_cast<std::size_t>(i)] = {std::cos(kPi * k / half), std::sin(kPi * k / half)};
        }
        return t;
    }();
    // sin(pi (k - f)) = -(-1)^k sin(pi f); the Hann term uses the angle-difference identity.
    const double s = std::sin(kPi * frac);
    const double cw = std::cos(kPi * frac / half);
    const double sw = std::sin(kPi * frac / half);
    std::array<double, kInterpolationTaps> w{};
    for (int i = 0; i < kInterpolationTaps; ++i) {
        const int k = i - (half - 1);
        const double x = k - frac;
        const double sign = (k % 2 == 0) ? -1.0 : 1.0;
        const auto [ck, sk] = table[static_cast<std::size_t>(i)];
        const double hann = 0.5 * (1.0 + ck * cw + sk * sw);
        w[static_cast<std::size_t>(i)] = sign * s / (kPi * x) * hann;
    }
    return w;
}

Simulator::Simulator(Scenario scenario) : scn_(std::move(scenario)) {
    scn_.validate();
    total_ = static_cast<std::size_t>(std::floor(scn_.duration * scn_.sample_rate + 1e-9));

    const double fs = scn_.sample_rate;
    const auto margin = static_cast<std::int64_t>(kInterpolationTaps);
    grid_first_ = static_cast<std::int64_t>(std::floor(-max_path_delay() * fs)) - margin;
    const auto grid_last = static_cast<std::int64_t>(total_) + margin;

    if (scn_.source.kind == SourceKind::pcm &&
        static_cast<std::int64_t>(scn_.source.pcm.size()) < static_cast<std::int64_t>(total_)) {
        throw TruncationError("pcm source has " + std::to_string(scn_.source.pcm.size()) +
                              " samples but the scenario needs " + std::to_string(total_));
    }

    const auto count = static_cast<std::size_t>(grid_last - grid_first_ + 1);
    grid_.resize(count);
    if (scn_.source.kind == SourceKind::bandnoise) {
        const auto taps = bandpass_taps(scn_.source.band_low_hz, scn_.source.band_high_hz, fs);
        const int half = kBandTaps / 2;
        const CounterRng rng(scn_.seed, kStreamSource);
        std::vector<double> white(count + kBandTaps - 1);
        for (std::size_t i = 0; i < white.size(); ++i) {
            white[i] = rng.gaussian(grid_first_ - half + static_cast<std::int64_t>(i));
        }
        for (std::size_t i = 0; i < count; ++i) {
            double acc = 0.0;
            for (int k = 0; k < kBandTaps; ++k) acc += taps[static_cast<std::size_t>(k)] * white[i + static_cast<std::size_t>(kBandTaps - 1 - k)];
            const double t = static_cast<double>(grid_first_ + static_cast<std::int64_t>(i)) / fs;
            grid_[i] = acc * burst_gate(scn_.source, t);
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            grid_[i] = compute_source_sample(grid_first_ + static_cast<std::int64_t>(i));
        }
    }
}

double Simulator::max_path_delay() const {
    double far = 0.0;
    auto consider = [&](Point2 p) {
        for (const auto& s : scn_.sensors) far = std::max(far, distance(p, s));
    };
    std::visit(
        [&](const auto& tr) {
            using T = std::decay_t<decltype(tr)>;
            if constexpr (std::is_same_v<T, CircleTrajectory>) {
                for (const auto& s : scn_.sensors) {
                    far = std::max(far, distance(Point2{0.0, tr.center_offset}, s) + tr.radius);
                }
            } else if constexpr (std::is_same_v<T, StaticTrajectory>) {
                consider(tr.position);
            } else {
                for (const auto& p : tr.points) consider(p);
            }
        },
        scn_.trajectory);
    double echo = 0.0;
    for (const auto& e : scn_.echoes) echo = std::max(echo, e.extra_delay);
    return far / scn_.c_air + echo;
}

double Simulator::compute_source_sample(std::int64_t n) const {
    const auto& src = scn_.source;
    const double t = static_cast<double>(n) / scn_.sample_rate;
    switch (src.kind) {
        case SourceKind::gaussian_sine:
        case SourceKind::silence: return synth_source(src, t);
        case SourceKind::pcm:
            if (n < 0 || n >= static_cast<std::int64_t>(src.pcm.size())) return 0.0;
            return src.pcm[static_cast<std::size_t>(n)];
        case SourceKind::bandnoise: {
            const auto taps = bandpass_taps(src.band_low_hz, src.band_high_hz, scn_.sample_rate);
            const int half = kBandTaps / 2;
            const CounterRng rng(scn_.seed, kStreamSource);
            double acc = 0.0;
            for (int k = -half; k <= half; ++k) {
                acc += taps[static_cast<std::size_t>(k + half)] * rng.gaussian(n - k);
            }
            return acc * burst_gate(src, t);
        }
    }
    return 0.0;
}

double Simulator::source_sample(std::int64_t n) const {
    const std::int64_t i = n - grid_first_;
    if (i >= 0 && i < static_cast<std::int64_t>(grid_.size())) return grid_[static_cast<std::size_t>(i)];
    return compute_source_sample(n);
}

double Simulator::emission_time(std::size_t sensor, double t) const {
    const Point2 p = scn_.sensors.at(sensor);
    double te = t - distance(source_position(t), p) / scn_.c_air;
    for (int it = 0; it < 5; ++it) {
        const double next = t - distance(source_position(te), p) / scn_.c_air;
        const bool done = std::abs(next - te) < 1e-12;
        te = next;
        if (done) break;
    }
    return te;
}

double Simulator::propagate(std::size_t sensor, double t) const {
    const double te = emission_time(sensor, t);
    double gain = 1.0;
    if (scn_.attenuation == Attenuation::inverse_distance) {
        gain = 1.0 / std::max(distance(source_position(te), scn_.sensors[sensor]), 1e-3);
    }
    const double fs = scn_.sample_rate;
    auto fetch = [this](std::int64_t n) { return source_sample(n); };
    double value = gain * interpolate_at(te * fs, fetch);
    for (const auto& e : scn_.echoes) {
        value += gain * e.gain * interpolate_at((te - e.extra_delay) * fs, fetch);
    }
    return value;
}

double Simulator::clean_sample(std::size_t sensor, std::int64_t n) const {
    if (n < 0 || n >= static_cast<std::int64_t>(total_)) return 0.0;
    return propagate(sensor, static_cast<double>(n) / scn_.sample_rate);
}

double Simulator::block_signal_power(std::size_t sensor, std::size_t block_index) const {
    const std::size_t n = scn_.block_length;
    const auto first = static_cast<std::int64_t>(block_index * n);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double v = clean_sample(sensor, first + static_cast<std::int64_t>(k));
        acc += v * v;
    }
    return acc / static_cast<double>(n);
}

double Simulator::noise_sigma(std::size_t sensor, std::size_t block_index) const {
    if (sensor >= scn_.snr_db.size() || !scn_.snr_db[sensor]) return 0.0;
    const double power = block_signal_power(sensor, block_index);
    return std::sqrt(power / std::pow(10.0, *scn_.snr_db[sensor] / 10.0));
}

double Simulator::sample(std::size_t sensor, std::int64_t n) const {
    return samples(sensor, n, 1).front();
}

std::vector<double> Simulator::samples(std::size_t sensor, std::int64_t first,
                                       std::size_t count) const {
    if (sensor >= scn_.sensors.size()) throw DimensionError("sensor index out of range");
    std::vector<double> out(count, 0.0);
    const double floor_sigma = scn_.effective_noise_floor();
    const CounterRng snr_rng(scn_.seed, kStreamSnrNoise + sensor);
    const CounterRng floor_rng(scn_.seed, kStreamFloorNoise + sensor);
    const bool snr_noise = sensor < scn_.snr_db.size() && scn_.snr_db[sensor].has_value();
    std::unordered_map<std::size_t, double> sigma_cache;
    const auto n_block = static_cast<std::int64_t>(scn_.block_length);

    for (std::size_t k = 0; k < count; ++k) {
        const std::int64_t n = first + static_cast<std::int64_t>(k);
        if (n < 0 || n >= static_cast<std::int64_t>(total_)) continue;
        double v = clean_sample(sensor, n);
        if (snr_noise) {
            const auto b = static_cast<std::size_t>(n / n_block);
            auto it = sigma_cache.find(b);
            if (it == sigma_cache.end()) it = sigma_cache.emplace(b, noise_sigma(sensor, b)).first;
            v += it->second * snr_rng.gaussian(n);
        }
        if (floor_sigma > 0.0) v += floor_sigma * floor_rng.gaussian(n);
        out[k] = v;
    }
    return out;
}

SampleBlock Simulator::block(std::size_t sensor, std::size_t block_index) const {
    if (block_index >= block_count()) throw DimensionError("block index out of range");
    const std::size_t n = scn_.block_length;
    const auto first = static_cast<std::int64_t>(block_index * n);
    SampleBlock b;
    b.sensor_id = sensor;
    b.block_index = block_index;
    b.start_time = static_cast<double>(first) / scn_.sample_rate;
    if (sensor == 0) {
        const auto origin = static_cast<std::int64_t>((n + 1) / 2);
        b.extended = samples(sensor, first - origin, n + 2 * static_cast<std::size_t>(origin));
        b.samples.assign(b.extended.begin() + origin, b.extended.begin() + origin + static_cast<std::int64_t>(n));
    } else {
        b.samples = samples(sensor, first, n);
    }
    return b;
}

std::vector<SampleBlock> Simulator::sample_blocks(std::size_t sensor) const {
    std::vector<SampleBlock> out;
    out.reserve(block_count());
    for (std::size_t b = 0; b < block_count(); ++b) out.push_back(block(sensor, b));
    return out;
}

}  // namespace cstdoa
