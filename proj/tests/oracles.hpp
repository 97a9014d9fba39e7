#pragma once

// Independent reference implementations used to pin expected values in the
// tests. Deliberately naive: quadratic DFT, exhaustive pairwise counting,
// full-sort medians. They must stay independent of the library code paths
// they check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace oracles {

/// O(n^2) DFT, X_k = sum x_n e^{-2 pi i k n / N}.
inline std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t m = 0; m < n; ++m) {
            const double ang = -two_pi * static_cast<double>(k) * static_cast<double>(m) / static_cast<double>(n);
            acc += x[m] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

/// ROC area by exhaustive pairwise counting over all positive x negative
/// pairs, ties worth one half.
inline double brute_roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

/// Average precision by an exhaustive sweep over the distinct score values:
/// AP = sum over thresholds of (delta recall) * precision.
inline double brute_average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::vector<double> distinct(scores);
    std::sort(distinct.begin(), distinct.end(), std::greater<>());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::size_t n_pos = 0;
    for (int v : labels) n_pos += v == 1 ? 1 : 0;
    double ap = 0.0;
    double prev_recall = 0.0;
    for (double thr : distinct) {
        std::size_t tp = 0, fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= thr) (labels[i] == 1 ? tp : fp)++;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

/// Sliding median via a full sort of each replicate-padded window.
inline std::vector<double> naive_median_filter(const std::vector<double>& x, std::size_t kernel) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(kernel) / 2;
    std::vector<double> out(x.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        std::vector<double> win;
        for (std::ptrdiff_t o = -half; o <= half; ++o) {
            const std::ptrdiff_t j = std::min(std::max<std::ptrdiff_t>(i + o, 0), n - 1);
            win.push_back(x[static_cast<std::size_t>(j)]);
        }
        std::sort(win.begin(), win.end());
        out[static_cast<std::size_t>(i)] = win[win.size() / 2];
    }
    return out;
}

/// Pure sine at the given frequency.
inline std::vector<float> make_tone(double freq_hz, std::size_t n, int sample_rate, double amp = 0.5) {
    std::vector<float> x(n);
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (std::size_t i = 0; i < n; ++i)
        x[i] = static_cast<float>(amp * std::sin(two_pi * freq_hz * static_cast<double>(i) / sample_rate));
    return x;
}

}  // namespace oracles
