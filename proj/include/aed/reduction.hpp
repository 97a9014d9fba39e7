#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "aed/baselines.hpp"
#include "aed/errors.hpp"
#include "aed/features.hpp"
#include "aed/linalg.hpp"

namespace aed {

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

/// Top-N principal axes of mean-centered data. Components are orthonormal
/// rows with a deterministic sign convention: the entry of largest magnitude
/// (first on ties) is positive.
struct PcaModel {
    std::vector<double> mean;        // d
    std::vector<double> components;  // n_components x d, row-major
    std::size_t n_components = 0;
    std::size_t dim = 0;
    std::vector<double> explained;   // eigenvalues for the retained axes

    const double* component(std::size_t i) const { return components.data() + i * dim; }
};

/// The PCA dimension grid 0.8^n * 304 (round half up), n = 0..12.
inline std::vector<std::size_t> pca_grid_dims(std::size_t full_dim = kFeatureDim) {
    std::vector<std::size_t> dims;
    for (int n = 0; n <= 12; ++n)
        dims.push_back(static_cast<std::size_t>(
            std::llround(std::pow(0.8, n) * static_cast<double>(full_dim))));
    return dims;
}

inline PcaModel pca_fit(const FeatureMatrix& X, std::size_t n_components) {
    if (X.rows == 0) throw data_error("pca_fit: empty data");
    if (n_components == 0 || n_components > std::min(X.rows, X.cols))
        throw config_error("pca_fit: retained dimension out of range");
    // Mean-centered data has rank at most rows-1; more components than that
    // are not defined.
    if (X.rows > 1 && n_components > std::min(X.rows - 1, X.cols))
        throw config_error("pca_fit: retained dimension exceeds data rank");

    PcaModel m;
    m.dim = X.cols;
    m.n_components = n_components;
    m.mean.assign(X.cols, 0.0);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t j = 0; j < X.cols; ++j) m.mean[j] += X.row(i)[j];
    for (auto& v : m.mean) v /= static_cast<double>(X.rows);

    // Covariance (up to the 1/n factor, which does not change the axes).
    std::vector<double> cov(X.cols * X.cols, 0.0);
    std::vector<double> centered(X.cols);
    for (std::size_t i = 0; i < X.rows; ++i) {
        for (std::size_t j = 0; j < X.cols; ++j) centered[j] = X.row(i)[j] - m.mean[j];
        for (std::size_t a = 0; a < X.cols; ++a) {
            const double ca = centered[a];
            if (ca == 0.0) continue;
            double* row = cov.data() + a * X.cols;
            for (std::size_t bcol = a; bcol < X.cols; ++bcol) row[bcol] += ca * centered[bcol];
        }
    }
    for (std::size_t a = 0; a < X.cols; ++a)
        for (std::size_t bcol = 0; bcol < a; ++bcol) cov[a * X.cols + bcol] = cov[bcol * X.cols + a];

    auto eig = jacobi_eigh(std::move(cov), X.cols);
    m.components.resize(n_components * X.cols);
    m.explained.resize(n_components);
    for (std::size_t i = 0; i < n_components; ++i) {
        m.explained[i] = eig.values[i] / static_cast<double>(X.rows);
        const double* src = eig.vectors.data() + i * X.cols;
        std::size_t arg = 0;
        for (std::size_t j = 1; j < X.cols; ++j)
            if (std::abs(src[j]) > std::abs(src[arg])) arg = j;
        const double sign = src[arg] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < X.cols; ++j) m.components[i * X.cols + j] = sign * src[j];
    }
    return m;
}

inline std::vector<double> pca_transform(const PcaModel& m, const double* x) {
    std::vector<double> out(m.n_components, 0.0);
    for (std::size_t i = 0; i < m.n_components; ++i) {
        const double* c = m.component(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < m.dim; ++j) acc += c[j] * (x[j] - m.mean[j]);
        out[i] = acc;
    }
    return out;
}

/// Back-projection of a transformed vector (reconstruction tests).
inline std::vector<double> pca_inverse(const PcaModel& m, const std::vector<double>& z) {
    std::vector<double> out(m.mean);
    for (std::size_t i = 0; i < m.n_components; ++i) {
        const double* c = m.component(i);
        for (std::size_t j = 0; j < m.dim; ++j) out[j] += z[i] * c[j];
    }
    return out;
}

inline FeatureMatrix pca_transform_all(const PcaModel& m, const FeatureMatrix& X) {
    FeatureMatrix out;
    out.rows = X.rows;
    out.cols = m.n_components;
    out.values.resize(out.rows * out.cols);
    for (std::size_t i = 0; i < X.rows; ++i) {
        auto z = pca_transform(m, X.row(i));
        std::copy(z.begin(), z.end(), out.row(i));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Recursive feature elimination
// ---------------------------------------------------------------------------

/// Surviving feature indices (sorted) plus the elimination order, earliest
/// removed first.
struct RfeModel {
    std::vector<std::size_t> selected;
    std::vector<std::size_t> ranking;  // eliminated features in removal order
};

/// The RFE dimension grid 304 - 8m, m = 0..35.
inline std::vector<std::size_t> rfe_grid_dims(std::size_t full_dim = kFeatureDim) {
    std::vector<std::size_t> dims;
    for (int m = 0; m <= 35; ++m) dims.push_back(full_dim - 8 * static_cast<std::size_t>(m));
    return dims;
}

/// Guyon-style RFE: repeatedly trains a linear SVM (C = 1) on the surviving
/// features and drops the `step` features with the smallest squared weight
/// until `target` survive. Constant features carry zero weight and fall out
/// first.
inline RfeModel rfe_select(const FeatureMatrix& X, const std::vector<int>& y, std::size_t step,
                           std::size_t target) {
    if (X.rows == 0 || X.rows != y.size()) throw data_error("rfe_select: bad training data");
    if (target > X.cols) throw config_error("rfe_select: target exceeds dimension");
    if ((X.cols - target) % step != 0)
        throw config_error("rfe_select: target must be reachable in whole elimination steps");

    RfeModel model;
    std::vector<std::size_t> surviving(X.cols);
    for (std::size_t i = 0; i < X.cols; ++i) surviving[i] = i;

    SvmConfig svm_cfg;
    svm_cfg.kernel = SvmKernel::linear;
    svm_cfg.C = 1.0;

    while (surviving.size() > target) {
        FeatureMatrix sub;
        sub.rows = X.rows;
        sub.cols = surviving.size();
        sub.values.resize(sub.rows * sub.cols);
        for (std::size_t i = 0; i < X.rows; ++i)
            for (std::size_t j = 0; j < surviving.size(); ++j)
                sub.row(i)[j] = X.row(i)[surviving[j]];

        auto svm = svm_fit(sub, y, svm_cfg);
        auto w = svm.linear_weights();
        std::vector<std::size_t> order(surviving.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return w[a] * w[a] < w[b] * w[b]; });

        std::vector<std::size_t> drop(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(step));
        std::sort(drop.begin(), drop.end());
        for (std::size_t d : drop) model.ranking.push_back(surviving[d]);
        for (auto it = drop.rbegin(); it != drop.rend(); ++it)
            surviving.erase(surviving.begin() + static_cast<std::ptrdiff_t>(*it));
    }
    model.selected = surviving;
    std::sort(model.selected.begin(), model.selected.end());
    return model;
}

inline FeatureMatrix rfe_transform_all(const RfeModel& m, const FeatureMatrix& X) {
    FeatureMatrix out;
    out.rows = X.rows;
    out.cols = m.selected.size();
    out.values.resize(out.rows * out.cols);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t j = 0; j < m.selected.size(); ++j) out.row(i)[j] = X.row(i)[m.selected[j]];
    return out;
}

// ---------------------------------------------------------------------------
// Per-dimension scaler for the baseline pipeline
// ---------------------------------------------------------------------------

/// Per-feature standardization fit on training data; the RBF kernel and the
/// RFE ranking model need features on comparable scales.
struct FeatureScaler {
    std::vector<double> mean;
    std::vector<double> stdev;  // zero-variance dims recorded as 1

    static FeatureScaler fit(const FeatureMatrix& X) {
        FeatureScaler s;
        s.mean.assign(X.cols, 0.0);
        s.stdev.assign(X.cols, 0.0);
        for (std::size_t i = 0; i < X.rows; ++i)
            for (std::size_t j = 0; j < X.cols; ++j) s.mean[j] += X.row(i)[j];
        for (auto& v : s.mean) v /= static_cast<double>(X.rows);
        for (std::size_t i = 0; i < X.rows; ++i)
            for (std::size_t j = 0; j < X.cols; ++j) {
                const double d = X.row(i)[j] - s.mean[j];
                s.stdev[j] += d * d;
            }
        for (auto& v : s.stdev) {
            v = std::sqrt(v / static_cast<double>(X.rows));
            if (v == 0.0) v = 1.0;
        }
        return s;
    }

    FeatureMatrix apply(const FeatureMatrix& X) const {
        FeatureMatrix out = X;
        for (std::size_t i = 0; i < X.rows; ++i)
            for (std::size_t j = 0; j < X.cols; ++j)
                out.row(i)[j] = (X.row(i)[j] - mean[j]) / stdev[j];
        return out;
    }
};

}  // namespace aed
