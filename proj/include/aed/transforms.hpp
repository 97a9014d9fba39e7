#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "aed/audio.hpp"
#include "aed/errors.hpp"
#include "aed/fft.hpp"
#include "aed/io.hpp"
#include "aed/labels.hpp"

namespace aed {

enum class TfKind : std::uint8_t { stft = 0, cwt = 1 };

inline const char* to_string(TfKind k) { return k == TfKind::stft ? "stft" : "cwt"; }

/// A log-magnitude time-frequency image: `rows` frequency bins (ascending
/// freq_axis) by `cols` frames at `frame_rate` = F_s / h1.
struct TimeFrequencyImage {
    TfKind kind = TfKind::stft;
    std::size_t rows = 0;
    std::size_t cols = 0;
    double frame_rate = 0.0;
    std::vector<double> freq_axis;  // rows entries, strictly increasing, Hz
    std::vector<double> values;     // rows*cols, row-major

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Bump wavelet in the Fourier domain, evaluated at the scaled frequency
/// x = s*omega: exp(1 - 1/(1 - u^2)) with u = (x - mu)/sigma inside the
/// support |u| < 1, exactly 0 outside. Total and continuous.
inline double bump_wavelet_fourier(double x, double mu, double sigma) {
    const double u = (x - mu) / sigma;
    const double u2 = u * u;
    if (u2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u2));
}

/// Bump-wavelet filterbank: one scale per output row, log-spaced centre
/// frequencies mu*F_s/(2*pi*s) spanning [f_min, f_max] exactly at the
/// endpoints. Stored in ascending frequency order.
struct WaveletBank {
    double mu = 5.0;
    double sigma = 0.6;
    int sample_rate = 8000;
    std::vector<double> scales;        // descending, matches ascending centre freqs
    std::vector<double> center_freqs;  // ascending, Hz
};

inline WaveletBank scales_for_band(std::size_t h1, double f_min, double f_max, double mu, double sigma,
                                   int sample_rate) {
    if (!(mu > sigma && sigma > 0.0)) throw config_error("wavelet bank: require mu > sigma > 0");
    if (!(f_min > 0.0 && f_min < f_max && f_max <= sample_rate / 2.0))
        throw config_error("wavelet bank: invalid frequency band");
    if (h1 < 2) throw config_error("wavelet bank: need at least two scales");
    WaveletBank bank;
    bank.mu = mu;
    bank.sigma = sigma;
    bank.sample_rate = sample_rate;
    bank.scales.resize(h1);
    bank.center_freqs.resize(h1);
    const double two_pi = 2.0 * 3.14159265358979323846;
    const double ratio = std::log(f_max / f_min);
    for (std::size_t i = 0; i < h1; ++i) {
        const double f = f_min * std::exp(ratio * static_cast<double>(i) / static_cast<double>(h1 - 1));
        bank.center_freqs[i] = f;
        bank.scales[i] = mu * sample_rate / (two_pi * f);
    }
    bank.center_freqs.front() = f_min;  // pin the endpoints exactly
    bank.center_freqs.back() = f_max;
    bank.scales.front() = mu * sample_rate / (two_pi * f_min);
    bank.scales.back() = mu * sample_rate / (two_pi * f_max);
    return bank;
}

constexpr double kLogFloor = 1e-10;

/// Continuous wavelet scalogram. Per scale s the coefficients are
/// IFFT(FFT(x) .* Psi(s*omega)) over the angular frequency grid
/// omega_k = 2*pi*k/n (the bump window is real, so conjugation is a no-op);
/// the signal is zero-padded to the next power of two and the padded tail is
/// discarded. Coefficient magnitudes are mean-pooled over consecutive blocks
/// of h1 samples, which decimates time to the frame rate F_s/h1, then floored
/// and logged.
inline TimeFrequencyImage cwt_scalogram(const Recording& rec, const WaveletBank& bank) {
    const std::size_t h1 = bank.scales.size();
    const std::size_t n = rec.samples.size();
    if (rec.sample_rate != bank.sample_rate) throw config_error("cwt: recording rate does not match bank");
    if (n < h1) throw data_error("cwt: recording shorter than h1 samples");

    const std::size_t n_fft = Fft::next_pow2(n);
    Fft fft(n_fft);
    std::vector<std::complex<double>> spectrum(n_fft, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) spectrum[i] = rec.samples[i];
    fft.forward(spectrum);

    TimeFrequencyImage img;
    img.kind = TfKind::cwt;
    img.rows = h1;
    img.cols = n / h1;
    img.frame_rate = static_cast<double>(rec.sample_rate) / static_cast<double>(h1);
    img.freq_axis = bank.center_freqs;
    img.values.resize(img.rows * img.cols);

    const double two_pi = 2.0 * 3.14159265358979323846;
    std::vector<std::complex<double>> buf(n_fft);
    for (std::size_t row = 0; row < h1; ++row) {
        const double s = bank.scales[row];
        // Support of the bump in bin units: s*omega in (mu-sigma, mu+sigma).
        const double k_lo_f = (bank.mu - bank.sigma) / s * n_fft / two_pi;
        const double k_hi_f = (bank.mu + bank.sigma) / s * n_fft / two_pi;
        const auto k_lo = static_cast<std::size_t>(std::max(0.0, std::floor(k_lo_f)));
        const auto k_hi = std::min(n_fft - 1, static_cast<std::size_t>(std::max(0.0, std::ceil(k_hi_f))));
        std::fill(buf.begin(), buf.end(), std::complex<double>{0.0, 0.0});
        for (std::size_t k = k_lo; k <= k_hi; ++k) {
            const double w = bump_wavelet_fourier(s * two_pi * static_cast<double>(k) / n_fft, bank.mu, bank.sigma);
            if (w != 0.0) buf[k] = spectrum[k] * w;
        }
        fft.inverse(buf);
        for (std::size_t c = 0; c < img.cols; ++c) {
            double acc = 0.0;
            for (std::size_t i = c * h1; i < (c + 1) * h1; ++i) acc += std::abs(buf[i]);
            img.at(row, c) = std::log(kLogFloor + acc / static_cast<double>(h1));
        }
    }
    return img;
}

/// One STFT analysis frame: the Hann-windowed samples and their full
/// two-sided spectrum. Exposed so the Parseval identity can be checked on
/// the exact frames the spectrogram consumes.
struct StftFrame {
    std::vector<double> windowed;                // 2*h1 samples
    std::vector<std::complex<double>> spectrum;  // 2*h1 bins
};

inline StftFrame stft_frame_spectrum(std::span<const float> samples, std::size_t start, std::size_t h1,
                                     const Fft& fft) {
    const std::size_t win = 2 * h1;
    StftFrame frame;
    frame.windowed.resize(win);
    frame.spectrum.resize(win);
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (std::size_t i = 0; i < win; ++i) {
        const double w = 0.5 * (1.0 - std::cos(two_pi * static_cast<double>(i) / win));
        frame.windowed[i] = w * samples[start + i];
        frame.spectrum[i] = frame.windowed[i];
    }
    fft.forward(frame.spectrum);
    return frame;
}

/// STFT spectrogram: Hann window of 2*h1 samples, hop h1 (half-overlap), so
/// the frame rate is F_s/h1. Keeps the h1 one-sided bins k = 1..h1 (DC
/// dropped), log-magnitude with the 1e-10 floor.
inline TimeFrequencyImage stft_spectrogram(const Recording& rec, std::size_t h1) {
    const std::size_t win = 2 * h1;
    const std::size_t n = rec.samples.size();
    if (n < win) throw data_error("stft: recording shorter than the analysis window");

    Fft fft(win);
    TimeFrequencyImage img;
    img.kind = TfKind::stft;
    img.rows = h1;
    img.cols = (n - win) / h1 + 1;
    img.frame_rate = static_cast<double>(rec.sample_rate) / static_cast<double>(h1);
    img.freq_axis.resize(h1);
    for (std::size_t k = 0; k < h1; ++k)
        img.freq_axis[k] = static_cast<double>(k + 1) * rec.sample_rate / static_cast<double>(win);
    img.values.resize(img.rows * img.cols);

    for (std::size_t c = 0; c < img.cols; ++c) {
        auto frame = stft_frame_spectrum(rec.samples, c * h1, h1, fft);
        for (std::size_t k = 0; k < h1; ++k)
            img.at(k, c) = std::log(kLogFloor + std::abs(frame.spectrum[k + 1]));
    }
    return img;
}

/// Global scalar standardization statistics over a set of images.
struct Standardization {
    double mean = 0.0;
    double stdev = 1.0;
};

inline Standardization fit_standardization(const std::vector<const TimeFrequencyImage*>& imgs) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto* img : imgs) {
        for (double v : img->values) sum += v;
        n += img->values.size();
    }
    if (n == 0) throw data_error("standardize: no values");
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto* img : imgs)
        for (double v : img->values) ss += (v - mean) * (v - mean);
    double stdev = std::sqrt(ss / static_cast<double>(n));
    if (stdev == 0.0) stdev = 1.0;  // zero-variance guard
    return {mean, stdev};
}

inline TimeFrequencyImage standardize(TimeFrequencyImage img, const Standardization& stats) {
    for (auto& v : img.values) v = (v - stats.mean) / stats.stdev;
    return img;
}

/// No-stats form: fits on the image itself and returns the stats for reuse
/// at test time.
inline std::pair<TimeFrequencyImage, Standardization> standardize(TimeFrequencyImage img) {
    auto stats = fit_standardization({&img});
    return {standardize(std::move(img), stats), stats};
}

struct PatchMeta {
    std::int32_t recording = 0;    // index into recording_ids
    std::int32_t start_frame = 0;  // first image column of the patch
};

/// Fixed-width single-channel patches with one-hot labels; the unit of
/// prediction for the neural classifiers.
struct PatchDataset {
    std::size_t rows = 0;  // h1
    std::size_t cols = 0;  // w1
    std::vector<float> patches;        // size()*rows*cols, row-major per patch
    std::vector<float> labels_onehot;  // size()*2, [1,0] = class 0, [0,1] = class 1
    std::vector<PatchMeta> meta;
    std::vector<std::string> recording_ids;

    std::size_t size() const { return meta.size(); }
    const float* patch(std::size_t i) const { return patches.data() + i * rows * cols; }
    int label(std::size_t i) const { return labels_onehot[2 * i + 1] > 0.5f ? 1 : 0; }
};

/// Slices an image into non-overlapping windows of w1 consecutive columns
/// starting at column 0; the trailing remainder is dropped. A patch is
/// labelled 1 when at least half of its frame labels are 1 (ties go to 1).
inline PatchDataset slice_patches(const TimeFrequencyImage& img, std::size_t w1, const FrameLabels& fl,
                                  const std::string& recording_id) {
    if (w1 == 0) throw config_error("slice_patches: w1 must be positive");
    if (fl.labels.size() != img.cols) throw data_error("slice_patches: frame labels do not match image");
    PatchDataset ds;
    ds.rows = img.rows;
    ds.cols = w1;
    ds.recording_ids.push_back(recording_id);
    const std::size_t n = img.cols / w1;
    ds.patches.resize(n * img.rows * w1);
    ds.labels_onehot.resize(n * 2);
    ds.meta.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        const std::size_t c0 = p * w1;
        float* dst = ds.patches.data() + p * img.rows * w1;
        for (std::size_t r = 0; r < img.rows; ++r)
            for (std::size_t c = 0; c < w1; ++c) dst[r * w1 + c] = static_cast<float>(img.at(r, c0 + c));
        std::size_t ones = 0;
        for (std::size_t c = 0; c < w1; ++c) ones += fl.labels[c0 + c];
        const bool positive = 2 * ones >= w1;
        ds.labels_onehot[2 * p] = positive ? 0.0f : 1.0f;
        ds.labels_onehot[2 * p + 1] = positive ? 1.0f : 0.0f;
        ds.meta[p] = PatchMeta{0, static_cast<std::int32_t>(c0)};
    }
    return ds;
}

/// Appends `src` to `dst` (order-stable), remapping recording indices.
inline void append_patches(PatchDataset& dst, const PatchDataset& src) {
    if (dst.size() == 0 && dst.rows == 0) {
        dst.rows = src.rows;
        dst.cols = src.cols;
    }
    if (dst.rows != src.rows || dst.cols != src.cols)
        throw data_error("append_patches: patch shape mismatch");
    const auto base = static_cast<std::int32_t>(dst.recording_ids.size());
    dst.recording_ids.insert(dst.recording_ids.end(), src.recording_ids.begin(), src.recording_ids.end());
    dst.patches.insert(dst.patches.end(), src.patches.begin(), src.patches.end());
    dst.labels_onehot.insert(dst.labels_onehot.end(), src.labels_onehot.begin(), src.labels_onehot.end());
    for (const auto& m : src.meta)
        dst.meta.push_back(PatchMeta{m.recording + base, m.start_frame});
}

// --- serialization -------------------------------------------------------

inline void write_tfi(const std::filesystem::path& path, const TimeFrequencyImage& img) {
    auto os = open_out(path, true);
    bin::write_bytes(os, "AEDTFIMG", 8);
    bin::write_pod<std::uint32_t>(os, 1);
    bin::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(img.kind));
    bin::write_pod<std::uint64_t>(os, img.rows);
    bin::write_pod<std::uint64_t>(os, img.cols);
    bin::write_pod<double>(os, img.frame_rate);
    bin::write_vec(os, img.freq_axis);
    std::vector<float> payload(img.values.begin(), img.values.end());  // container payload is f32
    bin::write_vec(os, payload);
}

inline TimeFrequencyImage read_tfi(const std::filesystem::path& path) {
    auto is = open_in(path, true);
    char magic[8];
    bin::read_bytes(is, magic, 8);
    if (std::string_view(magic, 8) != "AEDTFIMG") throw data_error("not a time-frequency container: " + path.string());
    if (bin::read_pod<std::uint32_t>(is) != 1) throw data_error("unsupported container version: " + path.string());
    TimeFrequencyImage img;
    img.kind = static_cast<TfKind>(bin::read_pod<std::uint8_t>(is));
    img.rows = bin::read_pod<std::uint64_t>(is);
    img.cols = bin::read_pod<std::uint64_t>(is);
    img.frame_rate = bin::read_pod<double>(is);
    img.freq_axis = bin::read_vec<double>(is);
    auto payload = bin::read_vec<float>(is);
    img.values.assign(payload.begin(), payload.end());
    if (img.freq_axis.size() != img.rows || img.values.size() != img.rows * img.cols)
        throw data_error("corrupt time-frequency container: " + path.string());
    return img;
}

/// CSV for plotting: first column the frequency axis, one column per frame.
inline void write_tfi_csv(const std::filesystem::path& path, const TimeFrequencyImage& img) {
    CsvWriter csv(path);
    std::vector<std::string> header{"freq_hz"};
    for (std::size_t c = 0; c < img.cols; ++c) header.push_back("t" + std::to_string(c));
    csv.row(header);
    for (std::size_t r = 0; r < img.rows; ++r) {
        std::vector<std::string> row{fmt_g(img.freq_axis[r])};
        for (std::size_t c = 0; c < img.cols; ++c) row.push_back(fmt_g(img.at(r, c), 7));
        csv.row(row);
    }
}

}  // namespace aed
