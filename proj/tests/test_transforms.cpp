#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "aed/fft.hpp"
#include "aed/rng.hpp"
#include "aed/transforms.hpp"
#include "oracles.hpp"

using namespace aed;
using Catch::Approx;

namespace {

std::size_t column_mean_argmax(const TimeFrequencyImage& img) {
    std::vector<double> mean(img.rows, 0.0);
    for (std::size_t r = 0; r < img.rows; ++r)
        for (std::size_t c = 0; c < img.cols; ++c) mean[r] += img.at(r, c);
    return static_cast<std::size_t>(std::max_element(mean.begin(), mean.end()) - mean.begin());
}

Recording tone_recording(double hz, double seconds, double amp = 0.5) {
    Recording rec;
    rec.id = "tone";
    rec.sample_rate = 8000;
    rec.samples = oracles::make_tone(hz, static_cast<std::size_t>(seconds * 8000), 8000, amp);
    return rec;
}

}  // namespace

TEST_CASE("bump window closed-form fixtures", "[bump]") {
    const double mu = 5.0, sigma = 0.6;
    REQUIRE(bump_wavelet_fourier(mu, mu, sigma) == 1.0);
    REQUIRE(bump_wavelet_fourier(mu + 2.0 * sigma, mu, sigma) == 0.0);
    REQUIRE(bump_wavelet_fourier(mu - 2.0 * sigma, mu, sigma) == 0.0);
    REQUIRE(bump_wavelet_fourier(mu + sigma, mu, sigma) == 0.0);  // support boundary
    REQUIRE(bump_wavelet_fourier(mu - sigma, mu, sigma) == 0.0);
    // u^2 = 1/2 => exp(1 - 2) = e^-1
    REQUIRE(bump_wavelet_fourier(mu + sigma / std::sqrt(2.0), mu, sigma) ==
            Approx(std::exp(-1.0)).epsilon(0).margin(1e-12));
    REQUIRE(bump_wavelet_fourier(mu - sigma / std::sqrt(2.0), mu, sigma) ==
            Approx(std::exp(-1.0)).epsilon(0).margin(1e-12));
}

TEST_CASE("bump window bounds and support", "[bump]") {
    const double mu = 5.0, sigma = 0.6;
    for (int i = 0; i <= 1000; ++i) {
        const double x = mu - 2.0 * sigma + 4.0 * sigma * i / 1000.0;
        const double v = bump_wavelet_fourier(x, mu, sigma);
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
        if (std::abs(x - mu) >= sigma) REQUIRE(v == 0.0);
        if (v == 1.0) REQUIRE(x == Approx(mu).margin(1e-9));
    }
}

TEST_CASE("wavelet bank pins the band endpoints", "[bank]") {
    auto bank = scales_for_band(2, 100.0, 400.0, 5.0, 0.6, 8000);
    REQUIRE(bank.center_freqs == std::vector<double>{100.0, 400.0});

    // centre frequency formula: mu * F_s / (2 pi s); s = 10 -> 636.6197724 Hz
    const double f = 5.0 * 8000.0 / (2.0 * 3.14159265358979323846 * 10.0);
    REQUIRE(f == Approx(636.6197723675814).margin(1e-9));

    auto big = scales_for_band(256, 20.0, 4000.0, 5.0, 0.6, 8000);
    REQUIRE(big.center_freqs.size() == 256);
    REQUIRE(big.center_freqs.front() == 20.0);
    REQUIRE(big.center_freqs.back() == 4000.0);
    const double ratio0 = big.center_freqs[1] / big.center_freqs[0];
    for (std::size_t i = 1; i + 1 < big.center_freqs.size(); ++i)
        REQUIRE(big.center_freqs[i + 1] / big.center_freqs[i] == Approx(ratio0).margin(1e-9));
    // scales and frequencies are consistent and monotone
    for (std::size_t i = 0; i < big.scales.size(); ++i) {
        const double back = 5.0 * 8000.0 / (2.0 * 3.14159265358979323846 * big.scales[i]);
        REQUIRE(back == Approx(big.center_freqs[i]).epsilon(1e-12));
        if (i > 0) {
            REQUIRE(big.center_freqs[i] > big.center_freqs[i - 1]);
            REQUIRE(big.scales[i] < big.scales[i - 1]);
        }
    }
}

TEST_CASE("wavelet bank rejects invalid bands", "[bank]") {
    REQUIRE_THROWS_AS(scales_for_band(16, 0.0, 400.0, 5.0, 0.6, 8000), config_error);
    REQUIRE_THROWS_AS(scales_for_band(16, 500.0, 400.0, 5.0, 0.6, 8000), config_error);
    REQUIRE_THROWS_AS(scales_for_band(16, 20.0, 4001.0, 5.0, 0.6, 8000), config_error);
    REQUIRE_THROWS_AS(scales_for_band(16, 20.0, 400.0, 0.5, 0.6, 8000), config_error);
}

TEST_CASE("scalogram of a pure tone peaks at the right scale", "[cwt]") {
    auto bank = scales_for_band(256, 20.0, 4000.0, 5.0, 0.6, 8000);
    auto img = cwt_scalogram(tone_recording(650.0, 1.5), bank);
    REQUIRE(img.kind == TfKind::cwt);
    REQUIRE(img.rows == 256);
    REQUIRE(img.cols == 46);  // floor(12000 / 256)
    REQUIRE(img.frame_rate == Approx(31.25));

    const auto arg = column_mean_argmax(img);
    std::size_t nearest = 0;
    for (std::size_t r = 1; r < img.rows; ++r)
        if (std::abs(img.freq_axis[r] - 650.0) < std::abs(img.freq_axis[nearest] - 650.0)) nearest = r;
    REQUIRE((arg > nearest ? arg - nearest : nearest - arg) <= 1);
}

TEST_CASE("scalogram of silence is the log floor everywhere", "[cwt]") {
    Recording rec;
    rec.id = "zero";
    rec.sample_rate = 8000;
    rec.samples.assign(4096, 0.0f);
    auto bank = scales_for_band(64, 20.0, 4000.0, 5.0, 0.6, 8000);
    auto img = cwt_scalogram(rec, bank);
    const double expected = std::log(1e-10);
    for (double v : img.values) REQUIRE(v == expected);
    for (std::size_t r = 0; r < img.rows; ++r)
        for (std::size_t c = 1; c < img.cols; ++c) REQUIRE(img.at(r, c) == img.at(r, 0));
}

TEST_CASE("scalogram rejects too-short input", "[cwt]") {
    Recording rec;
    rec.id = "short";
    rec.sample_rate = 8000;
    rec.samples.assign(100, 0.1f);
    auto bank = scales_for_band(256, 20.0, 4000.0, 5.0, 0.6, 8000);
    REQUIRE_THROWS_AS(cwt_scalogram(rec, bank), data_error);
}

TEST_CASE("doubling the amplitude shifts log rows by log 2", "[cwt]") {
    auto bank = scales_for_band(64, 100.0, 2000.0, 5.0, 0.6, 8000);
    auto img1 = cwt_scalogram(tone_recording(650.0, 1.0, 0.4), bank);
    auto img2 = cwt_scalogram(tone_recording(650.0, 1.0, 0.8), bank);
    const double log2 = std::log(2.0);
    std::size_t checked = 0;
    for (std::size_t i = 0; i < img1.values.size(); ++i) {
        if (img1.values[i] < std::log(1e-4)) continue;  // floor no longer negligible
        REQUIRE(img2.values[i] - img1.values[i] == Approx(log2).margin(1e-6));
        ++checked;
    }
    REQUIRE(checked > 0);
}

TEST_CASE("stft layout and tone bin", "[stft]") {
    auto img = stft_spectrogram(tone_recording(1000.0, 2.0), 256);
    REQUIRE(img.kind == TfKind::stft);
    REQUIRE(img.rows == 256);
    REQUIRE(img.frame_rate == 31.25);
    REQUIRE(img.freq_axis[0] == Approx(15.625));
    REQUIRE(img.freq_axis[255] == Approx(4000.0));
    // 10 columns at 31.25 Hz span 320 ms
    REQUIRE(10.0 / img.frame_rate == Approx(0.320));
    // 1000 Hz lands on one-sided bin 64 = slice index 63
    REQUIRE(column_mean_argmax(img) == 63);
    REQUIRE(img.freq_axis[63] == 1000.0);
}

TEST_CASE("per-frame Parseval identity", "[stft]") {
    Rng rng(31);
    Recording rec;
    rec.id = "noise";
    rec.sample_rate = 8000;
    rec.samples.resize(4096);
    for (auto& s : rec.samples) s = static_cast<float>(rng.uniform(-1.0, 1.0));

    const std::size_t h1 = 256;
    Fft fft(2 * h1);
    for (std::size_t start : {std::size_t{0}, std::size_t{256}, std::size_t{1024}}) {
        auto frame = stft_frame_spectrum(rec.samples, start, h1, fft);
        double spec_energy = 0.0;
        for (const auto& v : frame.spectrum) spec_energy += std::norm(v);
        double time_energy = 0.0;
        for (double v : frame.windowed) time_energy += v * v;
        REQUIRE(std::abs(spec_energy - 512.0 * time_energy) <= 1e-6 * spec_energy);
    }
}

TEST_CASE("stft of a hop-shifted signal is a column shift", "[stft]") {
    Rng rng(57);
    Recording rec;
    rec.id = "noise";
    rec.sample_rate = 8000;
    rec.samples.resize(8192);
    for (auto& s : rec.samples) s = static_cast<float>(rng.uniform(-1.0, 1.0));

    Recording shifted;
    shifted.id = "shifted";
    shifted.sample_rate = 8000;
    shifted.samples.assign(rec.samples.begin() + 256, rec.samples.end());

    auto img = stft_spectrogram(rec, 256);
    auto img2 = stft_spectrogram(shifted, 256);
    REQUIRE(img2.cols == img.cols - 1);
    for (std::size_t r = 0; r < img.rows; ++r)
        for (std::size_t c = 0; c < img2.cols; ++c)
            REQUIRE(img2.at(r, c) == Approx(img.at(r, c + 1)).margin(1e-9));
}

TEST_CASE("stft rejects too-short input", "[stft]") {
    Recording rec;
    rec.id = "short";
    rec.sample_rate = 8000;
    rec.samples.assign(511, 0.1f);
    REQUIRE_THROWS_AS(stft_spectrogram(rec, 256), data_error);
}

TEST_CASE("standardization", "[standardize]") {
    TimeFrequencyImage img;
    img.rows = 1;
    img.cols = 2;
    img.frame_rate = 1.0;
    img.freq_axis = {100.0};

    SECTION("constant image hits the zero-variance guard") {
        img.values = {3.0, 3.0};
        auto [out, stats] = standardize(img);
        REQUIRE(stats.stdev == 1.0);
        REQUIRE(out.values == std::vector<double>{0.0, 0.0});
    }
    SECTION("two-point standardization") {
        img.values = {0.0, 2.0};
        auto [out, stats] = standardize(img);
        REQUIRE(stats.mean == 1.0);
        REQUIRE(stats.stdev == 1.0);
        REQUIRE(out.values == std::vector<double>{-1.0, 1.0});
    }
    SECTION("train stats applied to a shifted image") {
        img.values = {0.0, 2.0};
        auto [out, stats] = standardize(img);
        TimeFrequencyImage test = img;
        test.values = {0.5, 2.5};  // shifted by 0.5
        auto applied = standardize(test, stats);
        const double mean = (applied.values[0] + applied.values[1]) / 2.0;
        REQUIRE(mean == Approx(0.5 / stats.stdev).margin(1e-12));
    }
}

TEST_CASE("patch slicing", "[patches]") {
    TimeFrequencyImage img;
    img.rows = 4;
    img.cols = 46;
    img.frame_rate = 31.25;
    img.freq_axis = {1, 2, 3, 4};
    img.values.resize(img.rows * img.cols);
    for (std::size_t r = 0; r < img.rows; ++r)
        for (std::size_t c = 0; c < img.cols; ++c) img.at(r, c) = static_cast<double>(r * 100 + c);

    FrameLabels fl;
    fl.frame_rate = 31.25;
    fl.labels.assign(46, 0);
    for (std::size_t c = 0; c < 5; ++c) fl.labels[c] = 1;  // first patch gets a 5-5 tie

    SECTION("counts and the tie rule") {
        auto ds = slice_patches(img, 10, fl, "rec");
        REQUIRE(ds.size() == 4);  // 46 / 10, 6 columns dropped
        REQUIRE(ds.rows == 4);
        REQUIRE(ds.cols == 10);
        REQUIRE(ds.label(0) == 1);  // tie resolves to 1
        REQUIRE(ds.label(1) == 0);
        // one-hot rows sum to 1
        for (std::size_t i = 0; i < ds.size(); ++i)
            REQUIRE(ds.labels_onehot[2 * i] + ds.labels_onehot[2 * i + 1] == 1.0f);
        // patch content matches the image window
        REQUIRE(ds.patch(1)[0 * 10 + 0] == static_cast<float>(img.at(0, 10)));
        REQUIRE(ds.patch(1)[3 * 10 + 9] == static_cast<float>(img.at(3, 19)));
        REQUIRE(ds.meta[1].start_frame == 10);
    }
    SECTION("w1 = 1 keeps every column with its frame label") {
        auto ds = slice_patches(img, 1, fl, "rec");
        REQUIRE(ds.size() == 46);
        for (std::size_t i = 0; i < ds.size(); ++i) REQUIRE(ds.label(i) == fl.labels[i]);
    }
    SECTION("w1 wider than the image yields an empty dataset") {
        auto ds = slice_patches(img, 100, fl, "rec");
        REQUIRE(ds.size() == 0);
    }
    SECTION("label length mismatch is an error") {
        FrameLabels bad;
        bad.labels.assign(45, 0);
        REQUIRE_THROWS_AS(slice_patches(img, 10, bad, "rec"), data_error);
    }
}

TEST_CASE("patch appending is order-stable across recordings", "[patches]") {
    auto make_img = [](std::size_t cols, double base) {
        TimeFrequencyImage img;
        img.rows = 2;
        img.cols = cols;
        img.frame_rate = 31.25;
        img.freq_axis = {1, 2};
        img.values.assign(img.rows * cols, base);
        return img;
    };
    FrameLabels fl1{std::vector<std::uint8_t>(25, 0), 31.25};
    FrameLabels fl2{std::vector<std::uint8_t>(17, 1), 31.25};

    auto a = slice_patches(make_img(25, 1.0), 10, fl1, "a");
    auto b = slice_patches(make_img(17, 2.0), 10, fl2, "b");
    PatchDataset all;
    append_patches(all, a);
    append_patches(all, b);
    REQUIRE(all.size() == 25 / 10 + 17 / 10);  // sum of floor(T/w1)
    REQUIRE(all.recording_ids == std::vector<std::string>{"a", "b"});
    REQUIRE(all.meta[0].recording == 0);
    REQUIRE(all.meta[2].recording == 1);
    REQUIRE(all.patch(2)[0] == 2.0f);
    REQUIRE(all.label(2) == 1);
}

TEST_CASE("time-frequency container round trip", "[io]") {
    auto bank = scales_for_band(32, 100.0, 2000.0, 5.0, 0.6, 8000);
    auto img = cwt_scalogram(tone_recording(650.0, 0.5), bank);

    auto dir = std::filesystem::temp_directory_path() / "aed_tfi_test";
    std::filesystem::create_directories(dir);
    write_tfi(dir / "img.bin", img);
    auto back = read_tfi(dir / "img.bin");
    REQUIRE(back.kind == img.kind);
    REQUIRE(back.rows == img.rows);
    REQUIRE(back.cols == img.cols);
    REQUIRE(back.frame_rate == img.frame_rate);
    REQUIRE(back.freq_axis == img.freq_axis);
    // payload is stored as 32-bit floats
    REQUIRE(back.values.size() == img.values.size());
    for (std::size_t i = 0; i < img.values.size(); ++i)
        REQUIRE(back.values[i] == static_cast<double>(static_cast<float>(img.values[i])));

    write_tfi_csv(dir / "img.csv", img);
    REQUIRE(std::filesystem::file_size(dir / "img.csv") > 0);
}
