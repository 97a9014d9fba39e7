#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "aed/errors.hpp"
#include "aed/io.hpp"

namespace aed {

/// A mono audio waveform. Samples are dimensionless amplitudes in [-1, 1].
struct Recording {
    std::string id;
    std::vector<float> samples;
    int sample_rate = 0;

    double duration_s() const {
        return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
    }
};

namespace wav_detail {

struct FmtChunk {
    std::uint16_t format = 0;  // 1 = integer PCM, 3 = IEEE float, 0xfffe = extensible
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits = 0;
};

inline std::int32_t read_i24(const unsigned char* p) {
    std::int32_t v = static_cast<std::int32_t>(p[0]) | (static_cast<std::int32_t>(p[1]) << 8) |
                     (static_cast<std::int32_t>(p[2]) << 16);
    if (v & 0x800000) v |= ~0xffffff;  // sign extend
    return v;
}

}  // namespace wav_detail

/// Reads a PCM WAV file (8/16/24-bit integer or 32-bit float, any channel
/// count). Multichannel input is averaged to mono; integer samples are scaled
/// to [-1, 1] by the type's full-scale divisor (e.g. 1/32768 for 16-bit).
inline Recording load_wav(const std::filesystem::path& path) {
    auto is = open_in(path, true);
    char riff[4], wave[4];
    bin::read_bytes(is, riff, 4);
    auto total = bin::read_pod<std::uint32_t>(is);
    (void)total;
    bin::read_bytes(is, wave, 4);
    if (std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0)
        throw data_error("not a RIFF/WAVE file: " + path.string());

    wav_detail::FmtChunk fmt;
    std::vector<unsigned char> data;
    bool have_fmt = false, have_data = false;
    while (is && !(have_fmt && have_data)) {
        char tag[4];
        is.read(tag, 4);
        if (!is) break;
        auto size = bin::read_pod<std::uint32_t>(is);
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            std::vector<unsigned char> raw(size);
            bin::read_bytes(is, raw.data(), size);
            if (size < 16) throw data_error("malformed fmt chunk: " + path.string());
            std::memcpy(&fmt.format, raw.data() + 0, 2);
            std::memcpy(&fmt.channels, raw.data() + 2, 2);
            std::memcpy(&fmt.sample_rate, raw.data() + 4, 4);
            std::memcpy(&fmt.bits, raw.data() + 14, 2);
            if (fmt.format == 0xfffe && size >= 26) {
                // WAVE_FORMAT_EXTENSIBLE: actual format is the first two
                // bytes of the subformat GUID.
                std::memcpy(&fmt.format, raw.data() + 24, 2);
            }
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            data.resize(size);
            bin::read_bytes(is, data.data(), size);
            have_data = true;
        } else {
            is.seekg(size + (size & 1), std::ios::cur);  // chunks are word-aligned
        }
    }
    if (!have_fmt || !have_data) throw data_error("missing fmt/data chunk: " + path.string());
    if (fmt.format != 1 && fmt.format != 3)
        throw data_error("unsupported WAV encoding (expected PCM or float): " + path.string());
    if (fmt.channels == 0 || fmt.sample_rate == 0) throw data_error("malformed WAV header: " + path.string());

    const std::size_t bytes_per = fmt.bits / 8;
    if (fmt.format == 1 && fmt.bits != 8 && fmt.bits != 16 && fmt.bits != 24)
        throw data_error("unsupported PCM bit depth: " + path.string());
    if (fmt.format == 3 && fmt.bits != 32) throw data_error("unsupported float bit depth: " + path.string());

    const std::size_t n_frames = data.size() / (bytes_per * fmt.channels);
    if (n_frames == 0) throw data_error("zero-length audio: " + path.string());

    Recording rec;
    rec.id = path.stem().string();
    rec.sample_rate = static_cast<int>(fmt.sample_rate);
    rec.samples.resize(n_frames);
    const double ch_scale = 1.0 / fmt.channels;
    for (std::size_t f = 0; f < n_frames; ++f) {
        double acc = 0.0;
        for (std::size_t c = 0; c < fmt.channels; ++c) {
            const unsigned char* p = data.data() + (f * fmt.channels + c) * bytes_per;
            double v = 0.0;
            switch (fmt.bits) {
                case 8: v = (static_cast<int>(p[0]) - 128) / 128.0; break;
                case 16: {
                    std::int16_t s;
                    std::memcpy(&s, p, 2);
                    v = s / 32768.0;
                    break;
                }
                case 24: v = wav_detail::read_i24(p) / 8388608.0; break;
                case 32: {
                    float s;
                    std::memcpy(&s, p, 4);
                    v = s;
                    break;
                }
            }
            acc += v;
        }
        rec.samples[f] = static_cast<float>(acc * ch_scale);
    }
    return rec;
}

/// Writes a mono 16-bit PCM WAV file. Samples are clamped to [-1, 1].
inline void save_wav(const std::filesystem::path& path, const Recording& rec) {
    auto os = open_out(path, true);
    const std::uint32_t n = static_cast<std::uint32_t>(rec.samples.size());
    const std::uint32_t data_bytes = n * 2;
    bin::write_bytes(os, "RIFF", 4);
    bin::write_pod<std::uint32_t>(os, 36 + data_bytes);
    bin::write_bytes(os, "WAVE", 4);
    bin::write_bytes(os, "fmt ", 4);
    bin::write_pod<std::uint32_t>(os, 16);
    bin::write_pod<std::uint16_t>(os, 1);  // integer PCM
    bin::write_pod<std::uint16_t>(os, 1);  // mono
    bin::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(rec.sample_rate));
    bin::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(rec.sample_rate) * 2);
    bin::write_pod<std::uint16_t>(os, 2);
    bin::write_pod<std::uint16_t>(os, 16);
    bin::write_bytes(os, "data", 4);
    bin::write_pod<std::uint32_t>(os, data_bytes);
    for (float x : rec.samples) {
        double v = std::clamp(static_cast<double>(x), -1.0, 1.0) * 32768.0;
        auto s = static_cast<std::int32_t>(std::lrint(v));
        s = std::clamp(s, -32768, 32767);
        bin::write_pod<std::int16_t>(os, static_cast<std::int16_t>(s));
    }
}

/// Band-limited resampling by direct evaluation of a Hann-windowed sinc
/// kernel. Content above min(source, target)/2 is filtered out; identical
/// rates return the input unchanged. Output length is round(n * target/src),
/// which keeps the duration within one sample period of the input.
inline Recording resample(const Recording& r, int target_rate) {
    if (target_rate <= 0) throw config_error("resample: target rate must be positive");
    if (r.sample_rate <= 0 || r.samples.empty()) throw data_error("resample: empty recording");
    if (target_rate == r.sample_rate) return r;

    const double src = r.sample_rate;
    const double tgt = target_rate;
    const std::size_t n_in = r.samples.size();
    const auto n_out = static_cast<std::size_t>(std::llround(static_cast<double>(n_in) * tgt / src));

    // Normalized cutoff in input-sample units; 2c = 1 when upsampling.
    const double c = 0.5 * std::min(1.0, tgt / src);
    const double half_width = 32.0 / (2.0 * c);
    const auto w = static_cast<std::ptrdiff_t>(std::ceil(half_width));

    Recording out;
    out.id = r.id;
    out.sample_rate = target_rate;
    out.samples.resize(n_out);
    const double pi = 3.14159265358979323846;
    for (std::size_t j = 0; j < n_out; ++j) {
        const double t = static_cast<double>(j) * src / tgt;
        const auto k0 = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(t)) - w);
        const auto k1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n_in) - 1,
                                                 static_cast<std::ptrdiff_t>(std::floor(t)) + w);
        double acc = 0.0;
        for (std::ptrdiff_t k = k0; k <= k1; ++k) {
            const double u = static_cast<double>(k) - t;
            double sinc = (u == 0.0) ? 1.0 : std::sin(2.0 * pi * c * u) / (2.0 * pi * c * u);
            const double win = 0.5 * (1.0 + std::cos(pi * u / half_width));
            acc += r.samples[static_cast<std::size_t>(k)] * 2.0 * c * sinc * win;
        }
        out.samples[j] = static_cast<float>(acc);
    }
    return out;
}

}  // namespace aed
