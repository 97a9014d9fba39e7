#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "aed/audio.hpp"
#include "aed/errors.hpp"
#include "aed/fft.hpp"
#include "aed/io.hpp"
#include "aed/transforms.hpp"

namespace aed {

/// Layout of the 304-dimensional hand-crafted frame feature vector:
/// 256 STFT magnitude bins + 26 log mel-band energies + 13 MFCCs + 9 scalars.
struct FeatureSegment {
    const char* name;
    std::size_t offset;
    std::size_t size;
};

inline constexpr std::array<FeatureSegment, 12> kFeatureLayout{{
    {"stft_slice", 0, 256},
    {"mel_cepstrum_slice", 256, 26},
    {"mfcc", 282, 13},
    {"zcr", 295, 1},
    {"energy_entropy", 296, 1},
    {"spectral_entropy", 297, 1},
    {"flux", 298, 1},
    {"rolloff", 299, 1},
    {"centroid", 300, 1},
    {"spread", 301, 1},
    {"entropy", 302, 1},
    {"energy", 303, 1},
}};

inline constexpr std::size_t kFeatureDim = 304;

/// Row-major sample matrix used for the baseline classifiers.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double* row(std::size_t r) { return values.data() + r * cols; }
    const double* row(std::size_t r) const { return values.data() + r * cols; }
};

// --- scalar feature conventions -------------------------------------------
// All are total: a zero-mass input maps to 0.

/// Shannon entropy (bits) of `mass` normalized to a distribution.
inline double mass_entropy_bits(std::span<const double> mass) {
    double total = 0.0;
    for (double v : mass) total += v;
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double v : mass) {
        const double p = v / total;
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

/// First and second weighted moments of `weights` along `axis`
/// (centroid and spread, in axis units).
inline std::pair<double, double> weighted_centroid_spread(std::span<const double> weights,
                                                          std::span<const double> axis) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) return {0.0, 0.0};
    double c = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) c += axis[i] * weights[i];
    c /= total;
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double d = axis[i] - c;
        s += d * d * weights[i];
    }
    return {c, std::sqrt(s / total)};
}

/// Axis value below which `frac` of the total mass lies (first index where
/// the running sum reaches frac * total).
inline double rolloff_point(std::span<const double> mass, std::span<const double> axis, double frac) {
    double total = 0.0;
    for (double v : mass) total += v;
    if (total <= 0.0) return 0.0;
    double acc = 0.0;
    std::size_t k = 0;
    for (; k < mass.size(); ++k) {
        acc += mass[k];
        if (acc >= frac * total) break;
    }
    return axis[std::min(k, axis.size() - 1)];
}

/// Orthonormal DCT-II of the log mel energies, coefficients 1..13.
inline std::vector<double> mfcc_from_mel(std::span<const double> mel_log, std::size_t n_coeffs = 13) {
    const double pi = 3.14159265358979323846;
    const auto n = static_cast<double>(mel_log.size());
    std::vector<double> out(n_coeffs, 0.0);
    for (std::size_t j = 1; j <= n_coeffs; ++j) {
        double acc = 0.0;
        for (std::size_t b = 0; b < mel_log.size(); ++b)
            acc += mel_log[b] * std::cos(pi * static_cast<double>(j) * (static_cast<double>(b) + 0.5) / n);
        out[j - 1] = acc * std::sqrt(2.0 / n);
    }
    return out;
}

/// Per-frame feature extraction aligned with the STFT framing (512-sample
/// Hann window, hop 256). Spectral features come from the windowed frame's
/// one-sided magnitude with the DC bin dropped; time-domain features (zero
/// crossings, energies, sample entropy) use the raw frame.
///
/// Conventions for silent input: entropy, spectral entropy, centroid, spread
/// and rolloff are all 0 when the relevant mass is 0, so every dimension is
/// finite on arbitrary finite frames.
class FeatureExtractor {
public:
    explicit FeatureExtractor(std::size_t h1 = 256, int sample_rate = 8000)
        : h1_(h1), sample_rate_(sample_rate), fft_(2 * h1) {
        build_mel_bank();
    }

    std::size_t frame_size() const { return 2 * h1_; }

    struct FrameResult {
        std::vector<double> features;    // kFeatureDim
        std::vector<double> norm_slice;  // sum-normalized magnitude slice, for the next frame's flux
    };

    /// Extracts one frame starting at sample `start`. `prev_norm_slice` is
    /// the previous frame's normalized spectrum (flux is 0 when null).
    FrameResult extract(std::span<const float> samples, std::size_t start,
                        const std::vector<double>* prev_norm_slice) const {
        const std::size_t win = frame_size();
        if (start + win > samples.size()) throw data_error("feature frame exceeds recording");

        auto frame = stft_frame_spectrum(samples, start, h1_, fft_);
        std::vector<double> mag(h1_);      // one-sided slice, DC dropped
        std::vector<double> power(h1_ + 1);  // one-sided including DC, for the mel bank
        power[0] = std::norm(frame.spectrum[0]);
        for (std::size_t k = 0; k < h1_; ++k) {
            mag[k] = std::abs(frame.spectrum[k + 1]);
            power[k + 1] = std::norm(frame.spectrum[k + 1]);
        }

        FrameResult res;
        res.features.assign(kFeatureDim, 0.0);
        double* f = res.features.data();

        // stft_slice
        for (std::size_t k = 0; k < h1_; ++k) f[k] = mag[k];

        // mel_cepstrum_slice: log mel-band energies of the power spectrum.
        std::vector<double> mel_log(kNumMel);
        for (std::size_t m = 0; m < kNumMel; ++m) {
            double e = 0.0;
            for (const auto& [bin, w] : mel_bank_[m]) e += w * power[bin];
            mel_log[m] = std::log(e + kLogFloor);
            f[256 + m] = mel_log[m];
        }

        auto mfcc = mfcc_from_mel(mel_log, kNumMfcc);
        std::copy(mfcc.begin(), mfcc.end(), f + 282);

        // zcr: fraction of adjacent raw-sample pairs with a sign change.
        std::size_t crossings = 0;
        for (std::size_t i = start + 1; i < start + win; ++i)
            if (static_cast<double>(samples[i - 1]) * samples[i] < 0.0) ++crossings;
        f[295] = static_cast<double>(crossings) / static_cast<double>(win - 1);

        // energy entropy over 8 equal sub-blocks of the raw frame.
        {
            const std::size_t block = win / 8;
            std::array<double, 8> e{};
            for (std::size_t b = 0; b < 8; ++b) {
                double acc = 0.0;
                for (std::size_t i = 0; i < block; ++i) {
                    const double x = samples[start + b * block + i];
                    acc += x * x;
                }
                e[b] = acc;
            }
            f[296] = mass_entropy_bits(std::span<const double>(e.data(), 8));
        }

        // spectral entropy of the normalized power slice.
        f[297] = mass_entropy_bits(std::span<const double>(power.data() + 1, h1_));

        // flux: squared distance between consecutive sum-normalized magnitude slices.
        double mag_total = 0.0;
        for (double m : mag) mag_total += m;
        res.norm_slice.assign(h1_, 0.0);
        if (mag_total > 0.0)
            for (std::size_t k = 0; k < h1_; ++k) res.norm_slice[k] = mag[k] / mag_total;
        if (prev_norm_slice != nullptr) {
            double flux = 0.0;
            for (std::size_t k = 0; k < h1_; ++k) {
                const double d = res.norm_slice[k] - (*prev_norm_slice)[k];
                flux += d * d;
            }
            f[298] = flux;
        }

        // rolloff, centroid and spread over the slice, in normalized frequency.
        std::vector<double> norm_freqs(h1_);
        for (std::size_t k = 0; k < h1_; ++k) norm_freqs[k] = bin_freq(k) / nyquist();
        f[299] = rolloff_point(std::span<const double>(power.data() + 1, h1_), norm_freqs, 0.90);
        const auto [centroid, spread] = weighted_centroid_spread(mag, norm_freqs);
        f[300] = centroid;
        f[301] = spread;

        // Shannon entropy of normalized |x| over the raw frame.
        {
            std::vector<double> absx(win);
            for (std::size_t i = 0; i < win; ++i) absx[i] = std::abs(samples[start + i]);
            f[302] = mass_entropy_bits(absx);
        }

        // log mean-square energy.
        {
            double acc = 0.0;
            for (std::size_t i = start; i < start + win; ++i) {
                const double x = samples[i];
                acc += x * x;
            }
            f[303] = std::log(acc / static_cast<double>(win) + kLogFloor);
        }
        return res;
    }

    /// Feature matrix for every STFT-aligned frame of a recording.
    FeatureMatrix extract_sequence(const Recording& rec) const {
        const std::size_t win = frame_size();
        if (rec.samples.size() < win) throw data_error("recording shorter than the feature frame");
        const std::size_t n_frames = (rec.samples.size() - win) / h1_ + 1;
        FeatureMatrix m;
        m.rows = n_frames;
        m.cols = kFeatureDim;
        m.values.resize(n_frames * kFeatureDim);
        std::vector<double> prev;
        for (std::size_t t = 0; t < n_frames; ++t) {
            auto res = extract(rec.samples, t * h1_, t == 0 ? nullptr : &prev);
            std::copy(res.features.begin(), res.features.end(), m.row(t));
            prev = std::move(res.norm_slice);
        }
        return m;
    }

private:
    static constexpr std::size_t kNumMel = 26;
    static constexpr std::size_t kNumMfcc = 13;
    static constexpr double kPi = 3.14159265358979323846;

    double nyquist() const { return sample_rate_ / 2.0; }
    double bin_freq(std::size_t slice_idx) const {
        // slice index k corresponds to FFT bin k+1 of the 2*h1-point transform
        return static_cast<double>(slice_idx + 1) * sample_rate_ / static_cast<double>(2 * h1_);
    }

    void build_mel_bank() {
        auto to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
        auto from_mel = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
        const double mel_hi = to_mel(nyquist());
        std::vector<double> edges(kNumMel + 2);
        for (std::size_t i = 0; i < edges.size(); ++i)
            edges[i] = from_mel(mel_hi * static_cast<double>(i) / (kNumMel + 1));
        mel_bank_.assign(kNumMel, {});
        for (std::size_t m = 0; m < kNumMel; ++m) {
            const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
            for (std::size_t k = 0; k <= h1_; ++k) {
                const double fHz = static_cast<double>(k) * sample_rate_ / static_cast<double>(2 * h1_);
                double w = 0.0;
                if (fHz > lo && fHz < mid)
                    w = (fHz - lo) / (mid - lo);
                else if (fHz >= mid && fHz < hi)
                    w = (hi - fHz) / (hi - mid);
                if (w > 0.0) mel_bank_[m].emplace_back(k, w);
            }
        }
    }

    std::size_t h1_;
    int sample_rate_;
    Fft fft_;
    std::vector<std::vector<std::pair<std::size_t, double>>> mel_bank_;
};

/// Writes a feature matrix with the `segment.index` header convention.
inline void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m) {
    CsvWriter csv(path);
    std::vector<std::string> header;
    for (const auto& seg : kFeatureLayout)
        for (std::size_t i = 0; i < seg.size; ++i)
            header.push_back(std::string(seg.name) + "." + std::to_string(i));
    csv.row(header);
    for (std::size_t r = 0; r < m.rows; ++r) {
        std::vector<std::string> row;
        row.reserve(m.cols);
        for (std::size_t c = 0; c < m.cols; ++c) row.push_back(fmt_g(m.row(r)[c], 8));
        csv.row(row);
    }
}

}  // namespace aed
