// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cstdoa {

/// De-interleaved PCM audio, samples scaled to [-1, 1).
struct PcmAudio {
    double sample_rate = 0.0;
    std::vector<std::vector<double>> channels;

    std::size_t channel_count() const { return channels.size(); }
    std::size_t frames() const { return channels.empty() ? 0 : channels.front().size(); }
};

/// 16-bit PCM RIFF/WAVE (plain PCM or WAVE_FORMAT_EXTENSIBLE with a PCM
/// subformat). Anything else throws FormatError.
PcmAudio read_wav16(const std::string& path);

/// Headerless little-endian interleaved 16-bit samples at a declared rate.
PcmAudio read_raw16(const std::string& path, double sample_rate, std::size_t channels = 1);

/// Writes 16-bit PCM WAV; samples are clipped to [-1, 1].
void write_wav16(const std::string& path, const PcmAudio& audio);

}  // namespace cstdoa
