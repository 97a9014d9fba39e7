#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "aed/errors.hpp"
#include "aed/features.hpp"
#include "aed/rng.hpp"

namespace aed {

// ---------------------------------------------------------------------------
// Gaussian naive Bayes
// ---------------------------------------------------------------------------

/// Per-class feature Gaussians with a variance floor for constant features.
struct NbModel {
    std::array<double, 2> priors{};
    std::vector<double> mean;  // 2 x d
    std::vector<double> var;   // 2 x d, floored
    std::size_t dim = 0;

    static constexpr double kVarFloor = 1e-9;
};

inline NbModel nb_fit(const FeatureMatrix& X, const std::vector<int>& y) {
    if (X.rows == 0 || X.rows != y.size()) throw data_error("nb_fit: bad training data");
    std::array<std::size_t, 2> counts{};
    for (int label : y) counts[static_cast<std::size_t>(label)]++;
    if (counts[0] == 0 || counts[1] == 0) throw data_error("nb_fit: need samples from both classes");

    NbModel m;
    m.dim = X.cols;
    m.mean.assign(2 * X.cols, 0.0);
    m.var.assign(2 * X.cols, 0.0);
    m.priors = {static_cast<double>(counts[0]) / X.rows, static_cast<double>(counts[1]) / X.rows};
    for (std::size_t i = 0; i < X.rows; ++i) {
        const auto c = static_cast<std::size_t>(y[i]);
        for (std::size_t j = 0; j < X.cols; ++j) m.mean[c * X.cols + j] += X.row(i)[j];
    }
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t j = 0; j < X.cols; ++j) m.mean[c * X.cols + j] /= static_cast<double>(counts[c]);
    for (std::size_t i = 0; i < X.rows; ++i) {
        const auto c = static_cast<std::size_t>(y[i]);
        for (std::size_t j = 0; j < X.cols; ++j) {
            const double d = X.row(i)[j] - m.mean[c * X.cols + j];
            m.var[c * X.cols + j] += d * d;
        }
    }
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t j = 0; j < X.cols; ++j)
            m.var[c * X.cols + j] =
                std::max(m.var[c * X.cols + j] / static_cast<double>(counts[c]), NbModel::kVarFloor);
    return m;
}

inline std::array<double, 2> nb_predict(const NbModel& m, const double* x) {
    std::array<double, 2> logp{};
    for (std::size_t c = 0; c < 2; ++c) {
        double acc = std::log(m.priors[c]);
        for (std::size_t j = 0; j < m.dim; ++j) {
            const double v = m.var[c * m.dim + j];
            const double d = x[j] - m.mean[c * m.dim + j];
            acc += -0.5 * std::log(2.0 * 3.14159265358979323846 * v) - d * d / (2.0 * v);
        }
        logp[c] = acc;
    }
    const double mx = std::max(logp[0], logp[1]);
    const double e0 = std::exp(logp[0] - mx);
    const double e1 = std::exp(logp[1] - mx);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

// ---------------------------------------------------------------------------
// Random forest
// ---------------------------------------------------------------------------

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::array<double, 2> frac{};  // leaf class fractions
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    std::int32_t root = 0;

    const std::array<double, 2>& predict(const double* x) const {
        std::size_t i = static_cast<std::size_t>(root);
        while (nodes[i].feature >= 0)
            i = x[nodes[i].feature] <= nodes[i].threshold ? static_cast<std::size_t>(nodes[i].left)
                                                          : static_cast<std::size_t>(nodes[i].right);
        return nodes[i].frac;
    }
};

struct RfConfig {
    std::size_t n_trees = 100;
    std::size_t min_split = 2;  // nodes smaller than this become leaves
};

struct RfModel {
    std::vector<DecisionTree> trees;
    std::vector<std::uint64_t> tree_seeds;
};

namespace rf_detail {

struct TreeBuilder {
    const FeatureMatrix& X;
    const std::vector<int>& y;
    std::size_t min_split;
    std::size_t mtry;
    Rng& rng;
    DecisionTree& tree;

    std::int32_t build(std::vector<std::size_t>& idx) {
        std::array<double, 2> counts{};
        for (std::size_t i : idx) counts[static_cast<std::size_t>(y[i])] += 1.0;
        const double n = static_cast<double>(idx.size());

        auto make_leaf = [&]() {
            TreeNode leaf;
            leaf.frac = {counts[0] / n, counts[1] / n};
            tree.nodes.push_back(leaf);
            return static_cast<std::int32_t>(tree.nodes.size() - 1);
        };
        if (counts[0] == 0.0 || counts[1] == 0.0 || idx.size() < min_split) return make_leaf();

        // Sample mtry candidate features without replacement.
        std::vector<std::size_t> feats(X.cols);
        std::iota(feats.begin(), feats.end(), 0);
        for (std::size_t i = 0; i < mtry; ++i)
            std::swap(feats[i], feats[i + rng.uniform_index(X.cols - i)]);
        feats.resize(mtry);

        // Best split among the sampled features by weighted child Gini
        // impurity; first candidate wins ties. Zero-gain splits are allowed
        // (an impure node still shrinks), so trees grow to purity.
        double best_score = std::numeric_limits<double>::infinity();
        std::size_t best_feat = 0;
        double best_thr = 0.0;
        bool found = false;
        std::vector<std::pair<double, int>> vals(idx.size());
        for (std::size_t fi = 0; fi < mtry; ++fi) {
            const std::size_t feat = feats[fi];
            for (std::size_t i = 0; i < idx.size(); ++i)
                vals[i] = {X.row(idx[i])[feat], y[idx[i]]};
            std::sort(vals.begin(), vals.end());
            std::array<double, 2> left{};
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                left[static_cast<std::size_t>(vals[i].second)] += 1.0;
                if (vals[i].first == vals[i + 1].first) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = n - nl;
                const double gl = 1.0 - (left[0] * left[0] + left[1] * left[1]) / (nl * nl);
                const double r0 = counts[0] - left[0];
                const double r1 = counts[1] - left[1];
                const double gr = 1.0 - (r0 * r0 + r1 * r1) / (nr * nr);
                const double score = nl * gl + nr * gr;
                if (!found || score < best_score - 1e-12) {
                    found = true;
                    best_score = score;
                    best_feat = feat;
                    best_thr = 0.5 * (vals[i].first + vals[i + 1].first);
                }
            }
        }
        if (!found) return make_leaf();  // all sampled features constant here

        std::vector<std::size_t> li, ri;
        for (std::size_t i : idx)
            (X.row(i)[best_feat] <= best_thr ? li : ri).push_back(i);

        const auto left_id = build(li);
        const auto right_id = build(ri);
        TreeNode node;
        node.feature = static_cast<std::int32_t>(best_feat);
        node.threshold = best_thr;
        node.left = left_id;
        node.right = right_id;
        tree.nodes.push_back(node);
        return static_cast<std::int32_t>(tree.nodes.size() - 1);
    }
};

}  // namespace rf_detail

/// Single decision tree grown to purity (or node size < min_split) with
/// mtry-feature subsampling per node.
inline DecisionTree tree_fit(const FeatureMatrix& X, const std::vector<int>& y, std::size_t min_split,
                             std::size_t mtry, std::uint64_t seed) {
    if (X.rows == 0 || X.rows != y.size()) throw data_error("tree_fit: bad training data");
    DecisionTree tree;
    Rng rng(seed);
    std::vector<std::size_t> idx(X.rows);
    std::iota(idx.begin(), idx.end(), 0);
    rf_detail::TreeBuilder builder{X, y, min_split, mtry, rng, tree};
    tree.root = builder.build(idx);
    return tree;
}

/// Bootstrap-aggregated trees with sqrt(d) feature subsampling and Gini
/// splits, grown to purity.
inline RfModel rf_fit(const FeatureMatrix& X, const std::vector<int>& y, const RfConfig& cfg,
                      std::uint64_t seed) {
    if (X.rows == 0 || X.rows != y.size()) throw data_error("rf_fit: bad training data");
    RfModel model;
    model.trees.resize(cfg.n_trees);
    model.tree_seeds.resize(cfg.n_trees);
    const auto mtry = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(X.cols)))));
    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        model.tree_seeds[t] = derive_seed(seed, "rf_tree", t);
        Rng rng(model.tree_seeds[t]);
        std::vector<std::size_t> boot(X.rows);
        for (auto& b : boot) b = rng.uniform_index(X.rows);
        std::sort(boot.begin(), boot.end());
        rf_detail::TreeBuilder builder{X, y, cfg.min_split, mtry, rng, model.trees[t]};
        model.trees[t].root = builder.build(boot);
    }
    return model;
}

inline std::array<double, 2> rf_predict(const RfModel& m, const double* x) {
    std::array<double, 2> acc{};
    for (const auto& tree : m.trees) {
        const auto& f = tree.predict(x);
        acc[0] += f[0];
        acc[1] += f[1];
    }
    const double n = static_cast<double>(m.trees.size());
    return {acc[0] / n, acc[1] / n};
}

// ---------------------------------------------------------------------------
// SVM with SMO
// ---------------------------------------------------------------------------

enum class SvmKernel : std::uint8_t { linear = 0, rbf = 1 };

struct SvmConfig {
    double C = 1.0;
    double gamma = 1.0;  // RBF width; ignored for the linear kernel
    SvmKernel kernel = SvmKernel::rbf;
    double tol = 1e-3;               // KKT tolerance
    std::size_t max_steps = 400000;  // successful pair updates before giving up
};

struct SvmModel {
    SvmConfig cfg;
    std::vector<double> sv;    // n_sv x dim
    std::vector<double> coef;  // alpha_i * y_i per support vector
    std::size_t dim = 0;
    double bias = 0.0;
    double platt_a = -1.0;
    double platt_b = 0.0;
    bool converged = true;

    double kernel(const double* u, const double* v) const {
        if (cfg.kernel == SvmKernel::linear) {
            double acc = 0.0;
            for (std::size_t j = 0; j < dim; ++j) acc += u[j] * v[j];
            return acc;
        }
        double d2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = u[j] - v[j];
            d2 += d * d;
        }
        return std::exp(-cfg.gamma * d2);
    }

    double decision(const double* x) const {
        double acc = bias;
        for (std::size_t i = 0; i < coef.size(); ++i) acc += coef[i] * kernel(sv.data() + i * dim, x);
        return acc;
    }

    std::array<double, 2> predict_proba(const double* x) const {
        const double f = decision(x);
        const double t = platt_a * f + platt_b;
        const double p1 = t >= 0.0 ? std::exp(-t) / (1.0 + std::exp(-t)) : 1.0 / (1.0 + std::exp(t));
        return {1.0 - p1, p1};
    }

    /// Weight vector of a linear model (used by RFE for feature ranking).
    std::vector<double> linear_weights() const {
        std::vector<double> w(dim, 0.0);
        for (std::size_t i = 0; i < coef.size(); ++i)
            for (std::size_t j = 0; j < dim; ++j) w[j] += coef[i] * sv[i * dim + j];
        return w;
    }
};

namespace smo_detail {

/// Platt's sequential minimal optimization with the usual first/second
/// choice heuristics, made fully deterministic (no randomized sweeps).
/// Convention: decision u_i = sum_j alpha_j y_j K(ij) - b, err_i = u_i - y_i.
struct Trainer {
    const FeatureMatrix& X;
    const std::vector<double>& y;  // +-1
    SvmConfig cfg;
    std::vector<double> alpha;
    std::vector<double> err;
    double b = 0.0;
    std::size_t steps = 0;

    double kern(std::size_t i, std::size_t j) const {
        if (cfg.kernel == SvmKernel::linear) {
            double acc = 0.0;
            for (std::size_t k = 0; k < X.cols; ++k) acc += X.row(i)[k] * X.row(j)[k];
            return acc;
        }
        double d2 = 0.0;
        for (std::size_t k = 0; k < X.cols; ++k) {
            const double d = X.row(i)[k] - X.row(j)[k];
            d2 += d * d;
        }
        return std::exp(-cfg.gamma * d2);
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double a1_old = alpha[i1], a2_old = alpha[i2];
        const double y1 = y[i1], y2 = y[i2];
        const double e1 = err[i1], e2 = err[i2];
        const double s = y1 * y2;
        double lo, hi;
        if (s < 0.0) {
            lo = std::max(0.0, a2_old - a1_old);
            hi = std::min(cfg.C, cfg.C + a2_old - a1_old);
        } else {
            lo = std::max(0.0, a1_old + a2_old - cfg.C);
            hi = std::min(cfg.C, a1_old + a2_old);
        }
        if (lo >= hi) return false;
        const double k11 = kern(i1, i1), k12 = kern(i1, i2), k22 = kern(i2, i2);
        const double eta = k11 + k22 - 2.0 * k12;
        double a2;
        if (eta > 0.0) {
            a2 = a2_old + y2 * (e1 - e2) / eta;
            a2 = std::clamp(a2, lo, hi);
        } else {
            // Flat direction: evaluate the dual objective at both clip ends.
            const double f1 = y1 * (e1 + b) - a1_old * k11 - s * a2_old * k12;
            const double f2 = y2 * (e2 + b) - a2_old * k22 - s * a1_old * k12;
            const double l1 = a1_old + s * (a2_old - lo);
            const double h1 = a1_old + s * (a2_old - hi);
            const double obj_lo =
                l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
            const double obj_hi =
                h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if (obj_lo < obj_hi - 1e-12)
                a2 = lo;
            else if (obj_lo > obj_hi + 1e-12)
                a2 = hi;
            else
                return false;
        }
        if (std::abs(a2 - a2_old) < 1e-12 * (a2 + a2_old + 1e-12)) return false;
        const double a1 = a1_old + s * (a2_old - a2);

        const double b_old = b;
        const double b1 = e1 + y1 * (a1 - a1_old) * k11 + y2 * (a2 - a2_old) * k12 + b_old;
        const double b2 = e2 + y1 * (a1 - a1_old) * k12 + y2 * (a2 - a2_old) * k22 + b_old;
        if (a1 > 0.0 && a1 < cfg.C)
            b = b1;
        else if (a2 > 0.0 && a2 < cfg.C)
            b = b2;
        else
            b = 0.5 * (b1 + b2);

        alpha[i1] = a1;
        alpha[i2] = a2;
        const double d1 = y1 * (a1 - a1_old);
        const double d2 = y2 * (a2 - a2_old);
        for (std::size_t i = 0; i < X.rows; ++i)
            err[i] += d1 * kern(i1, i) + d2 * kern(i2, i) - (b - b_old);
        ++steps;
        return true;
    }

    bool examine(std::size_t i2) {
        const double y2 = y[i2], a2 = alpha[i2], e2 = err[i2];
        const double r2 = e2 * y2;
        if ((r2 < -cfg.tol && a2 < cfg.C) || (r2 > cfg.tol && a2 > 0.0)) {
            std::size_t best = i2;
            double best_gap = -1.0;
            for (std::size_t i = 0; i < X.rows; ++i) {
                if (alpha[i] <= 0.0 || alpha[i] >= cfg.C) continue;
                const double gap = std::abs(err[i] - e2);
                if (gap > best_gap) {
                    best_gap = gap;
                    best = i;
                }
            }
            if (best != i2 && take_step(best, i2)) return true;
            for (std::size_t i = 0; i < X.rows; ++i) {
                if (alpha[i] <= 0.0 || alpha[i] >= cfg.C) continue;
                if (take_step(i, i2)) return true;
            }
            for (std::size_t i = 0; i < X.rows; ++i)
                if (take_step(i, i2)) return true;
        }
        return false;
    }

    bool run() {
        alpha.assign(X.rows, 0.0);
        err.resize(X.rows);
        for (std::size_t i = 0; i < X.rows; ++i) err[i] = -y[i];
        bool examine_all = true;
        std::size_t changed = 1;
        std::size_t outer = 0;
        const std::size_t outer_cap = 4 * X.rows + 10000;
        while ((changed > 0 || examine_all) && steps < cfg.max_steps && outer < outer_cap) {
            changed = 0;
            if (examine_all) {
                for (std::size_t i = 0; i < X.rows; ++i) changed += examine(i) ? 1 : 0;
            } else {
                for (std::size_t i = 0; i < X.rows; ++i)
                    if (alpha[i] > 0.0 && alpha[i] < cfg.C) changed += examine(i) ? 1 : 0;
            }
            if (examine_all)
                examine_all = false;
            else if (changed == 0)
                examine_all = true;
            ++outer;
        }
        return steps < cfg.max_steps && outer < outer_cap;
    }
};

/// Sigmoid fit on decision values (Platt scaling with smoothed targets),
/// solved by a damped Newton iteration.
inline std::pair<double, double> fit_platt(const std::vector<double>& f, const std::vector<int>& y) {
    std::size_t n_pos = 0, n_neg = 0;
    for (int v : y) (v == 1 ? n_pos : n_neg)++;
    const double hi = (static_cast<double>(n_pos) + 1.0) / (static_cast<double>(n_pos) + 2.0);
    const double lo = 1.0 / (static_cast<double>(n_neg) + 2.0);
    const std::size_t n = f.size();
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = y[i] == 1 ? hi : lo;

    double a = 0.0, b = std::log((static_cast<double>(n_neg) + 1.0) / (static_cast<double>(n_pos) + 1.0));
    auto objective = [&](double aa, double bb) {
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = aa * f[i] + bb;
            obj += z >= 0.0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
        }
        return obj;
    };
    double obj = objective(a, b);
    for (int iter = 0; iter < 100; ++iter) {
        double g1 = 0.0, g2 = 0.0, h11 = 1e-12, h22 = 1e-12, h12 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = a * f[i] + b;
            const double p = z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
            const double d1 = t[i] - p;
            const double d2 = p * (1.0 - p);
            g1 += f[i] * d1;
            g2 += d1;
            h11 += f[i] * f[i] * d2;
            h22 += d2;
            h12 += f[i] * d2;
        }
        if (std::abs(g1) < 1e-10 && std::abs(g2) < 1e-10) break;
        const double det = h11 * h22 - h12 * h12;
        const double da = -(h22 * g1 - h12 * g2) / det;
        const double db = -(-h12 * g1 + h11 * g2) / det;
        double step = 1.0;
        bool moved = false;
        while (step >= 1e-10) {
            const double cand = objective(a + step * da, b + step * db);
            if (cand < obj + 1e-4 * step * (g1 * da + g2 * db)) {
                a += step * da;
                b += step * db;
                obj = cand;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    return {a, b};
}

}  // namespace smo_detail

/// Trains a soft-margin SVM by sequential minimal optimization to the KKT
/// tolerance in `cfg`, then fits Platt scaling on the training decision
/// values so the classifier exposes the shared probability interface.
/// Also returns the full dual vector for feasibility audits.
inline std::pair<SvmModel, std::vector<double>> svm_fit_with_alpha(const FeatureMatrix& X,
                                                                   const std::vector<int>& y,
                                                                   const SvmConfig& cfg) {
    if (X.rows == 0 || X.rows != y.size()) throw data_error("svm_fit: bad training data");
    bool has0 = false, has1 = false;
    for (int v : y) (v == 1 ? has1 : has0) = true;
    if (!has0 || !has1) throw data_error("svm_fit: need samples from both classes");

    std::vector<double> ypm(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ypm[i] = y[i] == 1 ? 1.0 : -1.0;
    smo_detail::Trainer trainer{X, ypm, cfg};
    const bool converged = trainer.run();

    SvmModel model;
    model.cfg = cfg;
    model.dim = X.cols;
    model.converged = converged;
    model.bias = -trainer.b;
    for (std::size_t i = 0; i < X.rows; ++i) {
        if (trainer.alpha[i] <= 0.0) continue;
        model.coef.push_back(trainer.alpha[i] * ypm[i]);
        model.sv.insert(model.sv.end(), X.row(i), X.row(i) + X.cols);
    }
    std::vector<double> decisions(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) decisions[i] = model.decision(X.row(i));
    auto [a, b] = smo_detail::fit_platt(decisions, y);
    model.platt_a = a;
    model.platt_b = b;
    return {model, trainer.alpha};
}

inline SvmModel svm_fit(const FeatureMatrix& X, const std::vector<int>& y, const SvmConfig& cfg) {
    return svm_fit_with_alpha(X, y, cfg).first;
}

/// Maximum KKT violation of the trained dual over the training set: alpha=0
/// points must have margin >= 1, bound points <= 1, free points == 1, all
/// within the reported value.
inline double svm_kkt_violation(const SvmModel& m, const FeatureMatrix& X, const std::vector<int>& y,
                                const std::vector<double>& alpha) {
    double worst = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        const double yf = (y[i] == 1 ? 1.0 : -1.0) * m.decision(X.row(i));
        const double a = alpha[i];
        if (a < m.cfg.C) worst = std::max(worst, 1.0 - yf);
        if (a > 0.0) worst = std::max(worst, yf - 1.0);
    }
    return std::max(worst, 0.0);
}

}  // namespace aed
