// SPDX-License-Identifier: Apache-2.0
#include "cstdoa/audio_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cstdoa/error.hpp"

namespace cstdoa {

namespace {

std::vector<unsigned char> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open audio file '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t le32(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

void put16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>(v >> 8));
}

PcmAudio deinterleave(const unsigned char* data, std::size_t bytes, std::size_t channels,
                      double rate) {
    PcmAudio audio;
    audio.sample_rate = rate;
    const std::size_t frames = bytes / (2 * channels);
    audio.channels.assign(channels, std::vector<double>(frames));
    for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t c = 0; c < channels; ++c) {
            const auto v = static_cast<std::int16_t>(le16(data + 2 * (f * channels + c)));
            audio.channels[c][f] = static_cast<double>(v) / 32768.0;
        }
    }
    return audio;
}

// KSDATAFORMAT_SUBTYPE_PCM
constexpr std::array<unsigned char, 16> kPcmSubformat = {0x01, 0x00, 0x00, 0x00, 0x00, 0x00,
                                                          0x10, 0x00, 0x80, 0x00, 0x00, 0xaa,
                                                          0x00, 0x38, 0x9b, 0x71};

}  // namespace

PcmAudio read_wav16(const std::string& path) {
    const auto bytes = slurp(path);
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw FormatError("'" + path + "' is not a RIFF/WAVE file");
    }
    std::size_t pos = 12;
    bool have_fmt = false;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        const std::uint32_t size = le32(chunk + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size < 16 || body + size > bytes.size()) throw FormatError("truncated fmt chunk");
            std::uint16_t format = le16(bytes.data() + body);
            channels = le16(bytes.data() + body + 2);
            rate = le32(bytes.data() + body + 4);
            const std::uint16_t bits = le16(bytes.data() + body + 14);
            if (format == 0xFFFE) {
                if (size < 40 ||
                    !std::equal(kPcmSubformat.begin(), kPcmSubformat.end(), bytes.data() + body + 24)) {
                    throw FormatError("'" + path + "': extensible WAV without PCM subformat");
                }
                format = 1;
            }
            if (format != 1) throw FormatError("'" + path + "': only PCM WAV is supported");
            if (bits != 16) {
                throw FormatError("'" + path + "': " + std::to_string(bits) +
                                  "-bit samples, only 16-bit PCM is supported");
            }
            if (channels == 0 || rate == 0) throw FormatError("'" + path + "': bad fmt chunk");
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            if (!have_fmt) throw FormatError("'" + path + "': data chunk before fmt chunk");
            const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
            return deinterleave(bytes.data() + body, avail, channels, rate);
        }
        pos = body + size + (size & 1u);
    }
    throw FormatError("'" + path + "': no data chunk");
}

PcmAudio read_raw16(const std::string& path, double sample_rate, std::size_t channels) {
    if (!(sample_rate > 0.0)) throw FormatError("raw audio needs a positive sample rate");
    if (channels == 0) throw FormatError("raw audio needs at least one channel");
    const auto bytes = slurp(path);
    return deinterleave(bytes.data(), bytes.size(), channels, sample_rate);
}

void write_wav16(const std::string& path, const PcmAudio& audio) {
    const std::size_t ch = audio.channel_count();
    if (ch == 0) throw FormatError("cannot write WAV without channels");
    const std::size_t frames = audio.frames();
    for (const auto& c : audio.channels) {
        if (c.size() != frames) throw FormatError("channels differ in length");
    }
    const auto rate = static_cast<std::uint32_t>(std::lround(audio.sample_rate));
    const auto data_bytes = static_cast<std::uint32_t>(frames * ch * 2);

    std::vector<unsigned char> out;
    out.reserve(44 + data_bytes);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    put32(out, 36 + data_bytes);
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put32(out, 16);
    put16(out, 1);
    put16(out, static_cast<std::uint16_t>(ch));
    put32(out, rate);
    put32(out, rate * static_cast<std::uint32_t>(ch) * 2);
    put16(out, static_cast<std::uint16_t>(ch * 2));
    put16(out, 16);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    put32(out, data_bytes);
    for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t c = 0; c < ch; ++c) {
            const double v = std::clamp(audio.channels[c][f], -1.0, 1.0);
            const auto q = static_cast<std::int16_t>(
                std::clamp<long>(std::lround(v * 32768.0), -32768, 32767));
            put16(out, static_cast<std::uint16_t>(q));
        }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot write '" + path + "'");
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

}  // namespace cstdoa
