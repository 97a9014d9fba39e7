#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "aed/errors.hpp"

namespace aed {

/// Threshold metrics at a fixed operating point. When a class is absent the
/// corresponding rate is undefined; it is reported as 1 with the matching
/// `*_defined` flag cleared.
struct ConfusionMetrics {
    double f1 = 0.0;
    double tpr = 1.0;
    double tnr = 1.0;
    bool tpr_defined = false;
    bool tnr_defined = false;
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline ConfusionMetrics confusion_metrics(const std::vector<double>& scores, const std::vector<int>& labels,
                                          double threshold = 0.5) {
    if (scores.empty() || scores.size() != labels.size()) throw data_error("confusion_metrics: bad input");
    ConfusionMetrics m;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        if (labels[i] == 1)
            pred ? ++m.tp : ++m.fn;
        else
            pred ? ++m.fp : ++m.tn;
    }
    const double prec = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
    if (m.tp + m.fn > 0) {
        m.tpr = static_cast<double>(m.tp) / (m.tp + m.fn);
        m.tpr_defined = true;
    }
    if (m.tn + m.fp > 0) {
        m.tnr = static_cast<double>(m.tn) / (m.tn + m.fp);
        m.tnr_defined = true;
    }
    const double rec = m.tpr_defined ? m.tpr : 0.0;
    m.f1 = prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    return m;
}

/// ROC area as the Mann-Whitney statistic P(score+ > score-) + 0.5 P(tie),
/// computed with midrank averaging over ties.
inline double roc_area(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty()) throw data_error("roc_area: bad input");
    std::size_t n_pos = 0, n_neg = 0;
    for (int v : labels) (v == 1 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) throw data_error("roc_area: both classes required");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t t = i; t <= j; ++t)
            if (labels[order[t]] == 1) rank_sum_pos += midrank;
        i = j + 1;
    }
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

/// Average precision: positives in descending-score order contribute their
/// precision-at-rank, averaged over the total positives (step integral, no
/// interpolation). Ties are handled pessimistically: equal-scored negatives
/// are ranked ahead of positives.
inline double pr_area(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty()) throw data_error("pr_area: bad input");
    std::size_t n_pos = 0;
    for (int v : labels) n_pos += v == 1 ? 1 : 0;
    if (n_pos == 0) throw data_error("pr_area: at least one positive required");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return labels[a] < labels[b];  // negatives first within a tie
    });
    double ap = 0.0;
    std::size_t tp = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        if (labels[order[r]] == 1) {
            ++tp;
            ap += static_cast<double>(tp) / static_cast<double>(r + 1);
        }
    }
    return ap / static_cast<double>(n_pos);
}

struct CurvePoint {
    double x = 0.0;  // FPR for ROC, recall for PR
    double y = 0.0;  // TPR for ROC, precision for PR
    double threshold = 0.0;
};

/// ROC curve points from a descending threshold sweep over distinct scores,
/// with the (0,0) and (1,1) endpoints.
inline std::vector<CurvePoint> roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::size_t n_pos = 0, n_neg = 0;
    for (int v : labels) (v == 1 ? n_pos : n_neg)++;
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<CurvePoint> pts;
    pts.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double thr = scores[order[i]];
        while (i < order.size() && scores[order[i]] == thr) {
            labels[order[i]] == 1 ? ++tp : ++fp;
            ++i;
        }
        pts.push_back({n_neg ? static_cast<double>(fp) / n_neg : 0.0,
                       n_pos ? static_cast<double>(tp) / n_pos : 0.0, thr});
    }
    return pts;
}

/// PR curve points (recall, precision) at each distinct threshold.
inline std::vector<CurvePoint> pr_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::size_t n_pos = 0;
    for (int v : labels) n_pos += v == 1 ? 1 : 0;
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<CurvePoint> pts;
    pts.push_back({0.0, 1.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double thr = scores[order[i]];
        while (i < order.size() && scores[order[i]] == thr) {
            labels[order[i]] == 1 ? ++tp : ++fp;
            ++i;
        }
        pts.push_back({n_pos ? static_cast<double>(tp) / n_pos : 0.0,
                       tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0, thr});
    }
    return pts;
}

/// Sliding median with replicate padding. The kernel spans
/// round(kernel_s * frame_rate) frames, reduced to the next odd length
/// (minimum 1); output length equals input length.
inline std::vector<double> median_filter(const std::vector<double>& scores, double kernel_s,
                                         double frame_rate) {
    if (scores.empty()) throw data_error("median_filter: empty input");
    auto len = static_cast<std::ptrdiff_t>(std::llround(kernel_s * frame_rate));
    if (len % 2 == 0) --len;
    if (len < 1) len = 1;
    if (len == 1) return scores;

    const auto n = static_cast<std::ptrdiff_t>(scores.size());
    const std::ptrdiff_t half = len / 2;
    std::vector<double> out(scores.size());
    std::vector<double> window(static_cast<std::size_t>(len));
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t o = -half; o <= half; ++o) {
            const std::ptrdiff_t j = std::clamp<std::ptrdiff_t>(i + o, 0, n - 1);
            window[static_cast<std::size_t>(o + half)] = scores[static_cast<std::size_t>(j)];
        }
        auto mid = window.begin() + half;
        std::nth_element(window.begin(), mid, window.end());
        out[static_cast<std::size_t>(i)] = *mid;
    }
    return out;
}

/// Effective median kernel length for a given score rate (exposed so reports
/// can record it).
inline std::size_t median_kernel_length(double kernel_s, double frame_rate) {
    auto len = static_cast<std::ptrdiff_t>(std::llround(kernel_s * frame_rate));
    if (len % 2 == 0) --len;
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(len, 1));
}

/// Full evaluation report: threshold metrics, ranking areas, curves, counts.
struct EvalReport {
    ConfusionMetrics confusion;
    double roc = 0.0;
    double pr = 0.0;
    std::vector<CurvePoint> roc_points;
    std::vector<CurvePoint> pr_points;
    std::size_t n_pos = 0, n_neg = 0;
};

inline EvalReport build_report(const std::vector<double>& scores, const std::vector<int>& labels,
                               double threshold = 0.5) {
    EvalReport r;
    r.confusion = confusion_metrics(scores, labels, threshold);
    for (int v : labels) (v == 1 ? r.n_pos : r.n_neg)++;
    if (r.n_pos > 0 && r.n_neg > 0) {
        r.roc = roc_area(scores, labels);
        r.pr = pr_area(scores, labels);
    } else {
        r.roc = 1.0;
        r.pr = 1.0;
    }
    r.roc_points = roc_curve(scores, labels);
    r.pr_points = pr_curve(scores, labels);
    return r;
}

}  // namespace aed
