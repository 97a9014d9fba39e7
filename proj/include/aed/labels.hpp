#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aed/errors.hpp"
#include "aed/io.hpp"

namespace aed {

/// Binary presence labels attached to one recording, at a fixed rate
/// (10 Hz for both the annotation convention and the synthetic corpus).
struct LabelTrack {
    std::string recording_id;
    std::vector<std::uint8_t> labels;  // values in {0,1}
    double rate = 0.0;                 // Hz
};

/// Labels aligned one-per-column with a time-frequency image.
struct FrameLabels {
    std::vector<std::uint8_t> labels;
    double frame_rate = 0.0;  // Hz
};

/// Zero-order-hold upsampling of a label track to the spectral frame rate:
/// frame k takes the label at source index floor(k * rate / frame_rate),
/// clamped to the last label. Output length is exactly n_frames.
inline FrameLabels upsample_labels(const LabelTrack& t, double frame_rate, std::size_t n_frames) {
    if (t.labels.empty()) throw data_error("upsample_labels: empty label track");
    if (t.rate <= 0.0 || frame_rate <= 0.0) throw config_error("upsample_labels: rates must be positive");
    FrameLabels fl;
    fl.frame_rate = frame_rate;
    fl.labels.resize(n_frames);
    const std::size_t last = t.labels.size() - 1;
    for (std::size_t k = 0; k < n_frames; ++k) {
        auto idx = static_cast<std::size_t>(std::floor(static_cast<double>(k) * t.rate / frame_rate));
        fl.labels[k] = t.labels[std::min(idx, last)];
    }
    return fl;
}

inline std::size_t count_transitions_01(const std::vector<std::uint8_t>& labels) {
    std::size_t n = 0;
    for (std::size_t i = 1; i < labels.size(); ++i)
        if (labels[i - 1] == 0 && labels[i] == 1) ++n;
    return n;
}

/// Writes label tracks as `recording_id,rate_hz,labels` with the labels as a
/// compact 0/1 string.
inline void write_label_csv(const std::filesystem::path& path, const std::vector<LabelTrack>& tracks) {
    CsvWriter csv(path);
    csv.row({"recording_id", "rate_hz", "labels"});
    for (const auto& t : tracks) {
        std::string s(t.labels.size(), '0');
        for (std::size_t i = 0; i < t.labels.size(); ++i)
            if (t.labels[i]) s[i] = '1';
        csv.row({t.recording_id, fmt_g(t.rate), s});
    }
}

/// Reads label CSVs in either accepted schema:
///   recording_id,rate_hz,labels       compact 0/1 string per row
///   recording_id,start_s,end_s        label-1 interval rows, materialized at
///                                     `interval_rate` (tick k is 1 when the
///                                     tick center (k+0.5)/rate falls inside
///                                     any interval)
/// Interval tracks are sized by `duration_s` when positive, otherwise by the
/// latest interval end.
inline std::vector<LabelTrack> read_label_csv(const std::filesystem::path& path, double interval_rate = 10.0,
                                              double duration_s = 0.0) {
    auto is = open_in(path);
    std::string line;
    if (!std::getline(is, line)) throw data_error("empty label csv: " + path.string());
    auto header = split_csv_line(line);
    bool compact;
    if (header.size() == 3 && header[1] == "rate_hz" && header[2] == "labels") {
        compact = true;
    } else if (header.size() == 3 && header[1] == "start_s" && header[2] == "end_s") {
        compact = false;
    } else {
        throw data_error("unrecognized label csv header: " + path.string());
    }

    std::vector<LabelTrack> tracks;
    auto find_track = [&](const std::string& id) -> LabelTrack& {
        for (auto& t : tracks)
            if (t.recording_id == id) return t;
        tracks.push_back(LabelTrack{id, {}, interval_rate});
        return tracks.back();
    };

    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 3) throw data_error("malformed label csv row: " + path.string());
        if (compact) {
            LabelTrack t;
            t.recording_id = cells[0];
            t.rate = std::stod(cells[1]);
            t.labels.reserve(cells[2].size());
            for (char c : cells[2]) {
                if (c != '0' && c != '1') throw data_error("label string must be 0/1: " + path.string());
                t.labels.push_back(static_cast<std::uint8_t>(c - '0'));
            }
            if (t.labels.empty()) throw data_error("empty label string: " + path.string());
            tracks.push_back(std::move(t));
        } else {
            auto& t = find_track(cells[0]);
            const double start = std::stod(cells[1]);
            const double end = std::stod(cells[2]);
            if (end < start) throw data_error("interval with end < start: " + path.string());
            const double last = duration_s > 0.0 ? duration_s : end;
            const auto need = static_cast<std::size_t>(std::ceil(last * interval_rate));
            if (t.labels.size() < need) t.labels.resize(need, 0);
            for (std::size_t k = 0; k < t.labels.size(); ++k) {
                const double center = (static_cast<double>(k) + 0.5) / interval_rate;
                if (center >= start && center < end) t.labels[k] = 1;
            }
        }
    }
    return tracks;
}

}  // namespace aed
