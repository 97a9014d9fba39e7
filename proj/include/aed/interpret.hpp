#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <vector>

#include "aed/errors.hpp"
#include "aed/io.hpp"
#include "aed/svgplot.hpp"
#include "aed/transforms.hpp"

namespace aed {

/// Learned class spectra: the per-class ensemble average over patches and
/// patch columns, standardized to zero mean and unit variance per spectrum.
/// Test spectra come from the top-scored patches, train spectra from the
/// labelled patches.
struct ClassSpectra {
    std::vector<double> freq_axis;                  // h1
    std::vector<double> test_spectrum[2];           // per class
    std::vector<double> train_spectrum[2];
    bool test_constant[2] = {false, false};         // zero-variance guard hit
    bool train_constant[2] = {false, false};
};

namespace interpret_detail {

/// Mean over the selected patches and their columns, per frequency row.
inline std::vector<double> ensemble_mean(const PatchDataset& ds, const std::vector<std::size_t>& sel) {
    std::vector<double> mean(ds.rows, 0.0);
    if (sel.empty()) throw data_error("class_spectra: no qualifying patches");
    for (std::size_t idx : sel) {
        const float* p = ds.patch(idx);
        for (std::size_t r = 0; r < ds.rows; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < ds.cols; ++c) acc += p[r * ds.cols + c];
            mean[r] += acc / static_cast<double>(ds.cols);
        }
    }
    for (auto& v : mean) v /= static_cast<double>(sel.size());
    return mean;
}

/// Standardize in place; returns true when the spectrum was constant (left
/// as zeros).
inline bool standardize_spectrum(std::vector<double>& s) {
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    double ss = 0.0;
    for (double v : s) ss += (v - mean) * (v - mean);
    const double stdev = std::sqrt(ss / static_cast<double>(s.size()));
    if (stdev == 0.0) {
        std::fill(s.begin(), s.end(), 0.0);
        return true;
    }
    for (auto& v : s) v = (v - mean) / stdev;
    return false;
}

}  // namespace interpret_detail

/// Eq.-style interpretability spectra. `scores` holds per-patch class
/// probabilities (N x 2) over the test set; for each class the
/// ceil(top_frac * N) highest-scored test patches are averaged. Train
/// spectra average the labelled training patches of each class.
inline ClassSpectra class_spectra(const std::vector<float>& scores, const PatchDataset& test,
                                  const PatchDataset& train, const std::vector<double>& freq_axis,
                                  double top_frac = 0.10) {
    if (test.size() == 0) throw data_error("class_spectra: empty test set");
    if (scores.size() != test.size() * 2) throw data_error("class_spectra: score shape mismatch");
    if (!(top_frac > 0.0 && top_frac <= 1.0)) throw config_error("class_spectra: top_frac in (0,1]");

    ClassSpectra out;
    out.freq_axis = freq_axis;
    const auto n_top = static_cast<std::size_t>(
        std::ceil(top_frac * static_cast<double>(test.size())));

    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> order(test.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return scores[2 * a + cls] > scores[2 * b + cls];
        });
        order.resize(std::min(n_top, order.size()));
        out.test_spectrum[cls] = interpret_detail::ensemble_mean(test, order);
        out.test_constant[cls] = interpret_detail::standardize_spectrum(out.test_spectrum[cls]);

        std::vector<std::size_t> labelled;
        for (std::size_t i = 0; i < train.size(); ++i)
            if (train.label(i) == cls) labelled.push_back(i);
        out.train_spectrum[cls] = interpret_detail::ensemble_mean(train, labelled);
        out.train_constant[cls] = interpret_detail::standardize_spectrum(out.train_spectrum[cls]);
    }
    return out;
}

/// Frequency (Hz) of the largest spectrum entry.
inline double spectrum_peak_hz(const std::vector<double>& spectrum, const std::vector<double>& freq_axis) {
    const auto arg = static_cast<std::size_t>(
        std::max_element(spectrum.begin(), spectrum.end()) - spectrum.begin());
    return freq_axis[arg];
}

inline void write_spectra_csv(const std::filesystem::path& path, const ClassSpectra& s) {
    CsvWriter csv(path);
    csv.row({"freq_hz", "x0_test", "x0_train", "x1_test", "x1_train"});
    for (std::size_t r = 0; r < s.freq_axis.size(); ++r)
        csv.row({fmt_g(s.freq_axis[r]), fmt_g(s.test_spectrum[0][r]), fmt_g(s.train_spectrum[0][r]),
                 fmt_g(s.test_spectrum[1][r]), fmt_g(s.train_spectrum[1][r])});
}

inline void write_spectra_svg(const std::filesystem::path& path, const ClassSpectra& s) {
    SvgLinePlot plot("Learned class spectra", "frequency (Hz)", "standardized amplitude");
    plot.set_x_log(true);
    plot.add_series("class 0 test", s.freq_axis, s.test_spectrum[0], "#1f77b4");
    plot.add_series("class 0 train", s.freq_axis, s.train_spectrum[0], "#17becf");
    plot.add_series("class 1 test", s.freq_axis, s.test_spectrum[1], "#d62728");
    plot.add_series("class 1 train", s.freq_axis, s.train_spectrum[1], "#ff7f0e");
    plot.write(path);
}

}  // namespace aed
