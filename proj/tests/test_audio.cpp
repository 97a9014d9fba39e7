#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "aed/audio.hpp"
#include "aed/transforms.hpp"
#include "oracles.hpp"

using namespace aed;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "aed_audio_tests";
    fs::create_directories(dir);
    return dir;
}

// Raw WAV writer for crafting fixture files with arbitrary formats.
void write_raw_wav(const fs::path& path, std::uint16_t format, std::uint16_t channels,
                   std::uint32_t rate, std::uint16_t bits, const std::vector<unsigned char>& payload) {
    std::ofstream os(path, std::ios::binary);
    auto u32 = [&](std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
    auto u16 = [&](std::uint16_t v) { os.write(reinterpret_cast<const char*>(&v), 2); };
    os.write("RIFF", 4);
    u32(36 + static_cast<std::uint32_t>(payload.size()));
    os.write("WAVE", 4);
    os.write("fmt ", 4);
    u32(16);
    u16(format);
    u16(channels);
    u32(rate);
    u32(rate * channels * bits / 8);
    u16(static_cast<std::uint16_t>(channels * bits / 8));
    u16(bits);
    os.write("data", 4);
    u32(static_cast<std::uint32_t>(payload.size()));
    os.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
}

std::vector<unsigned char> le16(std::initializer_list<std::int16_t> vals) {
    std::vector<unsigned char> out;
    for (auto v : vals) {
        out.push_back(static_cast<unsigned char>(v & 0xff));
        out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    }
    return out;
}

}  // namespace

TEST_CASE("16-bit PCM scaling", "[audio]") {
    const auto path = temp_dir() / "mono16.wav";
    write_raw_wav(path, 1, 1, 8000, 16, le16({0, 16384, -16384}));
    auto rec = load_wav(path);
    REQUIRE(rec.sample_rate == 8000);
    REQUIRE(rec.samples.size() == 3);
    REQUIRE(rec.samples[0] == 0.0f);
    REQUIRE(rec.samples[1] == 0.5f);
    REQUIRE(rec.samples[2] == -0.5f);
}

TEST_CASE("stereo downmix averages channels", "[audio]") {
    const auto path = temp_dir() / "stereo_float.wav";
    std::vector<unsigned char> payload(8);
    const float left = 1.0f, right = 0.0f;
    std::memcpy(payload.data(), &left, 4);
    std::memcpy(payload.data() + 4, &right, 4);
    write_raw_wav(path, 3, 2, 8000, 32, payload);
    auto rec = load_wav(path);
    REQUIRE(rec.samples.size() == 1);
    REQUIRE(rec.samples[0] == 0.5f);
}

TEST_CASE("8-bit and 24-bit scaling", "[audio]") {
    {
        const auto path = temp_dir() / "mono8.wav";
        write_raw_wav(path, 1, 1, 8000, 8, {128, 192, 64});
        auto rec = load_wav(path);
        REQUIRE(rec.samples[0] == 0.0f);
        REQUIRE(rec.samples[1] == 0.5f);
        REQUIRE(rec.samples[2] == -0.5f);
    }
    {
        const auto path = temp_dir() / "mono24.wav";
        // 4194304 = 2^22 -> 0.5 after /2^23; null; -2^22
        std::vector<unsigned char> payload{0x00, 0x00, 0x40, 0x00, 0x00, 0x00, 0x00, 0x00, 0xc0};
        write_raw_wav(path, 1, 1, 8000, 24, payload);
        auto rec = load_wav(path);
        REQUIRE(rec.samples[0] == 0.5f);
        REQUIRE(rec.samples[1] == 0.0f);
        REQUIRE(rec.samples[2] == -0.5f);
    }
}

TEST_CASE("one second at 8 kHz has 8000 samples", "[audio]") {
    const auto path = temp_dir() / "sec.wav";
    Recording rec;
    rec.id = "sec";
    rec.sample_rate = 8000;
    rec.samples.assign(8000, 0.25f);
    save_wav(path, rec);
    auto loaded = load_wav(path);
    REQUIRE(loaded.samples.size() == 8000);
    REQUIRE(loaded.sample_rate == 8000);
    REQUIRE(loaded.id == "sec");
}

TEST_CASE("save/load round trip stays within quantization", "[audio]") {
    const auto path = temp_dir() / "round.wav";
    Recording rec;
    rec.id = "round";
    rec.sample_rate = 8000;
    rec.samples = oracles::make_tone(440.0, 4000, 8000, 0.7);
    save_wav(path, rec);
    auto loaded = load_wav(path);
    REQUIRE(loaded.samples.size() == rec.samples.size());
    for (std::size_t i = 0; i < rec.samples.size(); ++i)
        REQUIRE(std::abs(loaded.samples[i] - rec.samples[i]) <= 1.0f / 32768.0f);
}

TEST_CASE("malformed inputs are rejected", "[audio]") {
    const auto dir = temp_dir();
    REQUIRE_THROWS_AS(load_wav(dir / "missing.wav"), data_error);

    const auto garbage = dir / "garbage.wav";
    std::ofstream(garbage, std::ios::binary) << "not a wav at all";
    REQUIRE_THROWS_AS(load_wav(garbage), data_error);

    const auto empty = dir / "empty.wav";
    write_raw_wav(empty, 1, 1, 8000, 16, {});
    REQUIRE_THROWS_AS(load_wav(empty), data_error);

    const auto alaw = dir / "alaw.wav";
    write_raw_wav(alaw, 6, 1, 8000, 8, {1, 2, 3});
    REQUIRE_THROWS_AS(load_wav(alaw), data_error);
}

TEST_CASE("resample identity and length arithmetic", "[audio]") {
    Recording rec;
    rec.id = "r";
    rec.sample_rate = 8000;
    rec.samples = oracles::make_tone(500.0, 8000, 8000);

    auto same = resample(rec, 8000);
    REQUIRE(same.samples == rec.samples);

    Recording at16k;
    at16k.id = "r16";
    at16k.sample_rate = 16000;
    at16k.samples = oracles::make_tone(500.0, 16000, 16000);
    auto down = resample(at16k, 8000);
    REQUIRE(down.samples.size() == 8000);
    REQUIRE(down.sample_rate == 8000);
}

TEST_CASE("resampled tone keeps its spectral peak", "[audio]") {
    Recording at16k;
    at16k.id = "tone16";
    at16k.sample_rate = 16000;
    at16k.samples = oracles::make_tone(1000.0, 32000, 16000);
    auto down = resample(at16k, 8000);

    auto img = stft_spectrogram(down, 256);
    // column-mean argmax row
    std::vector<double> mean(img.rows, 0.0);
    for (std::size_t r = 0; r < img.rows; ++r)
        for (std::size_t c = 0; c < img.cols; ++c) mean[r] += img.at(r, c);
    const auto arg = static_cast<std::size_t>(std::max_element(mean.begin(), mean.end()) - mean.begin());
    // 1000 Hz sits at one-sided bin 64, slice index 63 after the DC drop
    REQUIRE(arg >= 62);
    REQUIRE(arg <= 64);
    REQUIRE(img.freq_axis[63] == 1000.0);
}

TEST_CASE("double resample round trip preserves a tone peak", "[audio]") {
    Recording rec;
    rec.id = "rt";
    rec.sample_rate = 8000;
    rec.samples = oracles::make_tone(650.0, 16000, 8000);
    auto up = resample(rec, 12000);
    auto back = resample(up, 8000);

    auto img_a = stft_spectrogram(rec, 256);
    auto img_b = stft_spectrogram(back, 256);
    auto peak_row = [](const TimeFrequencyImage& img) {
        std::vector<double> mean(img.rows, 0.0);
        for (std::size_t r = 0; r < img.rows; ++r)
            for (std::size_t c = 0; c < img.cols; ++c) mean[r] += img.at(r, c);
        return static_cast<std::size_t>(std::max_element(mean.begin(), mean.end()) - mean.begin());
    };
    const auto pa = peak_row(img_a);
    const auto pb = peak_row(img_b);
    REQUIRE((pa > pb ? pa - pb : pb - pa) <= 1);
}
