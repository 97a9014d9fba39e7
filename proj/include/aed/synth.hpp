#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "aed/audio.hpp"
#include "aed/errors.hpp"
#include "aed/io.hpp"
#include "aed/labels.hpp"
#include "aed/rng.hpp"

namespace aed {

/// Parameters of the synthetic stand-in corpus: coloured noise (white noise
/// plus a narrowband hum) with a harmonic stack switched on during labelled
/// intervals.
struct SynthConfig {
    int n_recordings = 57;
    double duration_s = 10.0;
    double tone_fundamental_hz = 650.0;
    int n_harmonics = 3;  // partial count including the fundamental
    double harmonic_decay = 0.5;
    double snr_db = 10.0;
    double noise_hum_hz = 300.0;
    double event_duty = 0.4;
    std::uint64_t seed = 1;

    bool operator==(const SynthConfig&) const = default;

    void validate(int sample_rate) const {
        if (n_recordings <= 0) throw config_error("synth: n_recordings must be positive");
        if (duration_s <= 0.0) throw config_error("synth: duration must be positive");
        if (!(event_duty > 0.0 && event_duty < 1.0)) throw config_error("synth: event_duty must be in (0,1)");
        if (tone_fundamental_hz >= sample_rate / 2.0)
            throw config_error("synth: fundamental must be below Nyquist");
        if (n_harmonics < 1) throw config_error("synth: need at least one partial");
        if (harmonic_decay <= 0.0) throw config_error("synth: harmonic_decay must be positive");
    }
};

constexpr double kLabelRateHz = 10.0;

namespace synth_detail {

/// Event schedule at the label rate. Alternating off/on runs with geometric
/// lengths; on-ticks are filled until the duty quota round(duty*n) is met,
/// so every recording carries close to the requested class balance.
inline std::vector<std::uint8_t> make_schedule(std::size_t n_ticks, double duty, Rng& rng) {
    const double mean_on = 16.0;  // ticks; 1.6 s at 10 Hz
    const double mean_off = mean_on * (1.0 - duty) / duty;
    auto geometric = [&](double mean) {
        // Geometric with the given mean, at least 1.
        double u = rng.uniform();
        while (u <= 0.0) u = rng.uniform();
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log(u) / std::log(1.0 - 1.0 / mean))));
    };
    std::vector<std::uint8_t> ticks(n_ticks, 0);
    auto quota = static_cast<std::size_t>(std::llround(duty * static_cast<double>(n_ticks)));
    quota = std::min(std::max<std::size_t>(quota, 1), n_ticks);
    std::size_t pos = rng.bernoulli(duty) ? 0 : std::min(n_ticks, geometric(mean_off));
    std::size_t placed = 0;
    while (pos < n_ticks && placed < quota) {
        std::size_t run = std::min({geometric(mean_on), quota - placed, n_ticks - pos});
        for (std::size_t i = 0; i < run; ++i) ticks[pos + i] = 1;
        placed += run;
        pos += run + geometric(mean_off);
    }
    return ticks;
}

/// Piecewise-linear control curve in [-1,1] with one knot every `knot_s`
/// seconds; drives the slow tone frequency jitter.
struct SlowCurve {
    std::vector<double> knots;
    double knot_rate;

    static SlowCurve make(double duration_s, double knot_s, Rng& rng) {
        SlowCurve c;
        c.knot_rate = 1.0 / knot_s;
        const auto n = static_cast<std::size_t>(std::ceil(duration_s / knot_s)) + 2;
        c.knots.resize(n);
        for (auto& k : c.knots) k = rng.uniform(-1.0, 1.0);
        return c;
    }

    double at(double t_s) const {
        const double x = t_s * knot_rate;
        const auto i = std::min(static_cast<std::size_t>(x), knots.size() - 2);
        const double frac = x - static_cast<double>(i);
        return knots[i] + (knots[i + 1] - knots[i]) * frac;
    }
};

}  // namespace synth_detail

/// Generates the seeded synthetic corpus. Each recording is white noise plus
/// a hum tone, with the labelled harmonic stack gated on during event ticks
/// (10 ms cosine ramps at the edges avoid broadband gate clicks). The tone
/// frequency carries slow random jitter of up to +-3%. Fully deterministic
/// given cfg.seed.
inline std::vector<std::pair<Recording, LabelTrack>> synth_corpus(const SynthConfig& cfg, int sample_rate) {
    cfg.validate(sample_rate);
    const double pi = 3.14159265358979323846;
    const auto n_samples = static_cast<std::size_t>(std::llround(cfg.duration_s * sample_rate));
    const auto n_ticks = static_cast<std::size_t>(std::llround(cfg.duration_s * kLabelRateHz));
    const auto tick_len = static_cast<std::size_t>(std::llround(sample_rate / kLabelRateHz));

    // Fixed fundamental amplitude; noise level follows from the SNR.
    const double a0 = 0.25;
    double sig_power = 0.0;
    for (int h = 0; h < cfg.n_harmonics; ++h) {
        const double a = a0 * std::pow(cfg.harmonic_decay, h);
        sig_power += a * a / 2.0;
    }
    const double noise_power = sig_power / std::pow(10.0, cfg.snr_db / 10.0);
    const double hum_amp = std::sqrt(noise_power);          // hum carries half the noise power
    const double white_sigma = std::sqrt(noise_power / 2.0);

    std::vector<std::pair<Recording, LabelTrack>> corpus;
    corpus.reserve(static_cast<std::size_t>(cfg.n_recordings));
    for (int rec_i = 0; rec_i < cfg.n_recordings; ++rec_i) {
        Rng rng(derive_seed(cfg.seed, "synth", static_cast<std::uint64_t>(rec_i)));

        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "rec%03d", rec_i);

        auto ticks = synth_detail::make_schedule(n_ticks, cfg.event_duty, rng);
        auto jitter = synth_detail::SlowCurve::make(cfg.duration_s, 0.2, rng);
        const double hum_phase = rng.uniform(0.0, 2.0 * pi);
        const double tone_phase = rng.uniform(0.0, 2.0 * pi);

        // Sample-level gate envelope with cosine ramps.
        const auto ramp = static_cast<std::size_t>(sample_rate / 100);  // 10 ms
        std::vector<float> gate(n_samples, 0.0f);
        for (std::size_t k = 0; k < n_ticks; ++k) {
            if (!ticks[k]) continue;
            const std::size_t lo = k * tick_len;
            const std::size_t hi = std::min(n_samples, lo + tick_len);
            for (std::size_t i = lo; i < hi; ++i) gate[i] = 1.0f;
        }
        std::vector<float> env(gate);
        for (std::size_t i = 1; i < n_samples; ++i) {
            if (gate[i - 1] < gate[i]) {  // rising edge at i
                for (std::size_t j = 0; j < ramp && i + j < n_samples && gate[i + j] > 0.5f; ++j)
                    env[i + j] = std::min(env[i + j], static_cast<float>(0.5 * (1.0 - std::cos(pi * (j + 1) / ramp))));
            } else if (gate[i - 1] > gate[i]) {  // falling edge at i
                for (std::size_t j = 0; j < ramp && i >= j + 1 && gate[i - 1 - j] > 0.5f; ++j)
                    env[i - 1 - j] = std::min(env[i - 1 - j], static_cast<float>(0.5 * (1.0 - std::cos(pi * (j + 1) / ramp))));
            }
        }

        Recording rec;
        rec.id = idbuf;
        rec.sample_rate = sample_rate;
        rec.samples.resize(n_samples);
        double phase = tone_phase;  // integrated fundamental phase
        for (std::size_t i = 0; i < n_samples; ++i) {
            const double t = static_cast<double>(i) / sample_rate;
            const double f_inst = cfg.tone_fundamental_hz * (1.0 + 0.03 * jitter.at(t));
            phase += 2.0 * pi * f_inst / sample_rate;
            double x = white_sigma * rng.normal();
            x += hum_amp * std::sin(2.0 * pi * cfg.noise_hum_hz * t + hum_phase);
            if (env[i] > 0.0f) {
                double tone = 0.0;
                for (int h = 0; h < cfg.n_harmonics; ++h)
                    tone += a0 * std::pow(cfg.harmonic_decay, h) * std::sin((h + 1) * phase);
                x += env[i] * tone;
            }
            rec.samples[i] = static_cast<float>(std::clamp(x, -1.0, 1.0));
        }

        LabelTrack track;
        track.recording_id = rec.id;
        track.rate = kLabelRateHz;
        track.labels = std::move(ticks);
        corpus.emplace_back(std::move(rec), std::move(track));
    }
    return corpus;
}

/// Recording-level split: a seeded permutation of the corpus indices dealt
/// into disjoint train/test sets.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_corpus(std::size_t corpus_size, std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
    if (n_train + n_test > corpus_size) throw config_error("split_corpus: not enough recordings");
    std::vector<std::size_t> order(corpus_size);
    for (std::size_t i = 0; i < corpus_size; ++i) order[i] = i;
    Rng rng(derive_seed(seed, "split"));
    rng.shuffle(order);
    std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                  order.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
    return {train, test};
}

/// Writes WAVs, the label CSV and a manifest into `dir`.
inline void write_corpus(const std::filesystem::path& dir,
                         const std::vector<std::pair<Recording, LabelTrack>>& corpus, const SynthConfig& cfg,
                         int sample_rate) {
    std::filesystem::create_directories(dir);
    std::vector<LabelTrack> tracks;
    tracks.reserve(corpus.size());
    for (const auto& [rec, track] : corpus) {
        save_wav(dir / (rec.id + ".wav"), rec);
        tracks.push_back(track);
    }
    write_label_csv(dir / "labels.csv", tracks);

    auto os = open_out(dir / "manifest.txt");
    os << "# synthetic corpus manifest\n";
    os << "seed = " << cfg.seed << "\n";
    os << "sample_rate = " << sample_rate << "\n";
    os << "n_recordings = " << cfg.n_recordings << "\n";
    os << "duration_s = " << fmt_g(cfg.duration_s) << "\n";
    os << "tone_fundamental_hz = " << fmt_g(cfg.tone_fundamental_hz) << "\n";
    os << "n_harmonics = " << cfg.n_harmonics << "\n";
    os << "harmonic_decay = " << fmt_g(cfg.harmonic_decay) << "\n";
    os << "snr_db = " << fmt_g(cfg.snr_db) << "\n";
    os << "noise_hum_hz = " << fmt_g(cfg.noise_hum_hz) << "\n";
    os << "event_duty = " << fmt_g(cfg.event_duty) << "\n";
    os << "recordings:\n";
    for (const auto& [rec, track] : corpus) os << "  " << rec.id << ".wav\n";
}

/// Loads every WAV listed in the label CSV of a corpus directory, resampling
/// to `target_rate` when needed.
inline std::vector<std::pair<Recording, LabelTrack>> read_corpus(const std::filesystem::path& dir,
                                                                 int target_rate) {
    auto tracks = read_label_csv(dir / "labels.csv");
    if (tracks.empty()) throw data_error("corpus has no labelled recordings: " + dir.string());
    std::vector<std::pair<Recording, LabelTrack>> corpus;
    corpus.reserve(tracks.size());
    for (auto& t : tracks) {
        auto rec = load_wav(dir / (t.recording_id + ".wav"));
        if (rec.sample_rate != target_rate) rec = resample(rec, target_rate);
        corpus.emplace_back(std::move(rec), std::move(t));
    }
    return corpus;
}

}  // namespace aed
