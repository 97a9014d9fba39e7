#pragma once

#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "aed/baselines.hpp"
#include "aed/errors.hpp"
#include "aed/io.hpp"
#include "aed/labels.hpp"
#include "aed/metrics.hpp"
#include "aed/nn.hpp"
#include "aed/reduction.hpp"
#include "aed/rng.hpp"
#include "aed/transforms.hpp"

namespace aed {

// ---------------------------------------------------------------------------
// Hyperparameter grids
// ---------------------------------------------------------------------------

struct CnnGridPoint {
    std::size_t k, n_k, n_d;
};

inline std::vector<CnnGridPoint> cnn_grid() {
    std::vector<CnnGridPoint> grid;
    for (std::size_t k : {2, 3, 4, 5})
        for (std::size_t nk : {8, 16, 32})
            for (std::size_t nd : {16, 64, 128, 256}) grid.push_back({k, nk, nd});
    return grid;
}

struct MlpGridPoint {
    std::size_t w1, l, m;
};

inline std::vector<MlpGridPoint> mlp_grid() {
    std::vector<MlpGridPoint> grid;
    for (std::size_t w1 : {1, 10})
        for (std::size_t l : {8, 256, 1028, 2056})
            for (std::size_t m : {64, 512, 1024}) grid.push_back({w1, l, m});
    return grid;
}

enum class ReductionKind : std::uint8_t { none = 0, pca = 1, rfe = 2 };

struct BaselineGridPoint {
    ReductionKind reduction;
    std::size_t dim;  // retained dimension
    int grid_index;   // n for PCA, m for RFE
};

/// The 13 PCA dims followed by the 36 RFE dims.
inline std::vector<BaselineGridPoint> baseline_grid() {
    std::vector<BaselineGridPoint> grid;
    auto pca = pca_grid_dims();
    for (std::size_t i = 0; i < pca.size(); ++i)
        grid.push_back({ReductionKind::pca, pca[i], static_cast<int>(i)});
    auto rfe = rfe_grid_dims();
    for (std::size_t i = 0; i < rfe.size(); ++i)
        grid.push_back({ReductionKind::rfe, rfe[i], static_cast<int>(i)});
    return grid;
}

// ---------------------------------------------------------------------------
// Folds
// ---------------------------------------------------------------------------

/// Recording-level folds: a seeded shuffle of the recordings dealt
/// round-robin, redrawn (up to a cap) until every fold's validation side
/// contains both classes. pos/neg are per-recording sample counts at the
/// granularity being validated.
inline std::vector<std::vector<std::size_t>> make_recording_folds(const std::vector<std::size_t>& pos,
                                                                  const std::vector<std::size_t>& neg,
                                                                  std::size_t n_folds, std::uint64_t seed) {
    const std::size_t n_rec = pos.size();
    if (n_folds < 2 || n_folds > n_rec) throw config_error("crossval: fold count must be in [2, n_recordings]");
    for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
        std::vector<std::size_t> order(n_rec);
        std::iota(order.begin(), order.end(), 0);
        Rng rng(derive_seed(seed, "folds", attempt));
        rng.shuffle(order);
        std::vector<std::vector<std::size_t>> folds(n_folds);
        for (std::size_t i = 0; i < n_rec; ++i) folds[i % n_folds].push_back(order[i]);
        bool ok = true;
        for (const auto& fold : folds) {
            std::size_t p = 0, n = 0;
            for (std::size_t r : fold) {
                p += pos[r];
                n += neg[r];
            }
            if (p == 0 || n == 0) {
                ok = false;
                break;
            }
        }
        if (ok) return folds;
    }
    throw data_error("crossval: could not stratify folds (a class is too rare)");
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct GridRow {
    std::string name;
    double mean_score = 0.0;
    std::size_t param_count = 0;
};

struct GridResult {
    std::vector<GridRow> rows;  // enumeration order
    std::size_t best_index = 0;

    void pick_best() {
        best_index = 0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto& cand = rows[i];
            const auto& best = rows[best_index];
            if (cand.mean_score > best.mean_score ||
                (cand.mean_score == best.mean_score && cand.param_count < best.param_count))
                best_index = i;
        }
    }
};

/// Ranked CSV with the winner marked.
inline void write_grid_csv(const std::filesystem::path& path, const GridResult& result) {
    std::vector<std::size_t> order(result.rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (result.rows[a].mean_score != result.rows[b].mean_score)
            return result.rows[a].mean_score > result.rows[b].mean_score;
        return result.rows[a].param_count < result.rows[b].param_count;
    });
    CsvWriter csv(path);
    csv.row({"rank", "point", "mean_pr_area", "param_count", "best"});
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto& row = result.rows[order[r]];
        csv.row({std::to_string(r + 1), row.name, fmt_g(row.mean_score), std::to_string(row.param_count),
                 order[r] == result.best_index ? "1" : "0"});
    }
}

// ---------------------------------------------------------------------------
// Harness
// ---------------------------------------------------------------------------

/// Transformed (not yet standardized) material for one recording.
struct RecordingData {
    std::string id;
    TimeFrequencyImage image;
    LabelTrack track;
};

namespace cv_detail {

inline FrameLabels frame_labels_for(const RecordingData& rec) {
    return upsample_labels(rec.track, rec.image.frame_rate, rec.image.cols);
}

/// Patch datasets for the given recordings with standardization fit on the
/// `fit_stats` subset (train side of a fold, or everything).
inline PatchDataset assemble_patches(const std::vector<RecordingData>& recs,
                                     const std::vector<std::size_t>& subset, std::size_t w1,
                                     const Standardization& stats) {
    PatchDataset all;
    for (std::size_t r : subset) {
        auto img = standardize(recs[r].image, stats);
        auto fl = frame_labels_for(recs[r]);
        auto ds = slice_patches(img, w1, fl, recs[r].id);
        append_patches(all, ds);
    }
    return all;
}

inline Standardization stats_over(const std::vector<RecordingData>& recs,
                                  const std::vector<std::size_t>& subset) {
    std::vector<const TimeFrequencyImage*> imgs;
    for (std::size_t r : subset) imgs.push_back(&recs[r].image);
    return fit_standardization(imgs);
}

inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
patch_counts(const std::vector<RecordingData>& recs, std::size_t w1) {
    std::vector<std::size_t> pos(recs.size(), 0), neg(recs.size(), 0);
    for (std::size_t r = 0; r < recs.size(); ++r) {
        auto fl = frame_labels_for(recs[r]);
        const std::size_t n = recs[r].image.cols / w1;
        for (std::size_t p = 0; p < n; ++p) {
            std::size_t ones = 0;
            for (std::size_t c = 0; c < w1; ++c) ones += fl.labels[p * w1 + c];
            (2 * ones >= w1 ? pos[r] : neg[r])++;
        }
    }
    return {pos, neg};
}

template <typename Spec>
double fold_score_nn(const Spec& spec, const std::vector<RecordingData>& recs,
                     const std::vector<std::vector<std::size_t>>& folds, std::size_t fold_i, std::size_t w1,
                     const TrainConfig& base_cfg, std::uint64_t run_seed) {
    std::vector<std::size_t> train_recs;
    for (std::size_t f = 0; f < folds.size(); ++f)
        if (f != fold_i) train_recs.insert(train_recs.end(), folds[f].begin(), folds[f].end());
    std::sort(train_recs.begin(), train_recs.end());

    auto stats = stats_over(recs, train_recs);
    auto train_ds = assemble_patches(recs, train_recs, w1, stats);
    auto val_ds = assemble_patches(recs, folds[fold_i], w1, stats);

    TrainConfig cfg = base_cfg;
    cfg.seed = run_seed;
    auto model = train(spec, train_ds, cfg);
    auto probs = predict(model, val_ds);
    std::vector<double> scores(val_ds.size());
    std::vector<int> labels(val_ds.size());
    for (std::size_t i = 0; i < val_ds.size(); ++i) {
        scores[i] = probs[2 * i + 1];
        labels[i] = val_ds.label(i);
    }
    return pr_area(scores, labels);
}

}  // namespace cv_detail

/// Cross-validated grid search for the CNN family at fixed patch width w1.
/// Scores are mean validation PR areas over recording-level folds.
inline GridResult crossval_cnn(const std::vector<RecordingData>& recs, std::size_t w1,
                               const std::vector<CnnGridPoint>& grid, std::size_t n_folds,
                               const TrainConfig& cfg, std::uint64_t seed) {
    if (grid.empty()) throw config_error("crossval: empty grid");
    auto [pos, neg] = cv_detail::patch_counts(recs, w1);
    auto folds = make_recording_folds(pos, neg, n_folds, seed);
    const std::size_t h1 = recs.front().image.rows;

    GridResult result;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const auto& pt = grid[gi];
        CnnSpec spec;
        spec.h1 = h1;
        spec.w1 = w1;
        spec.k = pt.k;
        spec.n_k = pt.n_k;
        spec.n_d = pt.n_d;
        double sum = 0.0;
        for (std::size_t f = 0; f < folds.size(); ++f)
            sum += cv_detail::fold_score_nn(spec, recs, folds, f, w1, cfg,
                                            derive_seed(seed, "cv_cnn", gi * folds.size() + f));
        char name[96];
        std::snprintf(name, sizeof(name), "k=%zu N_k=%zu N_d=%zu", pt.k, pt.n_k, pt.n_d);
        result.rows.push_back({name, sum / static_cast<double>(folds.size()), spec.param_count()});
    }
    result.pick_best();
    return result;
}

/// Cross-validated grid search for the MLP family; w1 is part of the grid.
inline GridResult crossval_mlp(const std::vector<RecordingData>& recs,
                               const std::vector<MlpGridPoint>& grid, std::size_t n_folds,
                               const TrainConfig& cfg, std::uint64_t seed) {
    if (grid.empty()) throw config_error("crossval: empty grid");
    const std::size_t h1 = recs.front().image.rows;
    GridResult result;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const auto& pt = grid[gi];
        auto [pos, neg] = cv_detail::patch_counts(recs, pt.w1);
        auto folds = make_recording_folds(pos, neg, n_folds, seed);
        MlpSpec spec;
        spec.input_dim = h1 * pt.w1;
        spec.l = pt.l;
        spec.m = pt.m;
        double sum = 0.0;
        for (std::size_t f = 0; f < folds.size(); ++f)
            sum += cv_detail::fold_score_nn(spec, recs, folds, f, pt.w1, cfg,
                                            derive_seed(seed, "cv_mlp", gi * folds.size() + f));
        char name[96];
        std::snprintf(name, sizeof(name), "w1=%zu L=%zu M=%zu", pt.w1, pt.l, pt.m);
        result.rows.push_back({name, sum / static_cast<double>(folds.size()), spec.param_count()});
    }
    result.pick_best();
    return result;
}

enum class BaselineFamily : std::uint8_t { nb = 0, rf = 1, svm = 2 };

inline const char* to_string(BaselineFamily f) {
    switch (f) {
        case BaselineFamily::nb: return "nb";
        case BaselineFamily::rf: return "rf";
        default: return "svm";
    }
}

struct BaselineCvOptions {
    BaselineFamily family = BaselineFamily::nb;
    RfConfig rf;
    std::vector<double> svm_c{0.1, 1.0, 10.0};
    std::vector<double> svm_gamma_scale{1.0, 10.0};  // gamma = scale / dim
};

/// Cross-validated reduction (and, for the SVM, C/gamma) grid for a baseline
/// family on per-frame features.
inline GridResult crossval_baseline(const std::vector<FeatureMatrix>& feats,
                                    const std::vector<FrameLabels>& labels,
                                    const std::vector<BaselineGridPoint>& grid,
                                    const BaselineCvOptions& opts, std::size_t n_folds,
                                    std::uint64_t seed) {
    if (grid.empty()) throw config_error("crossval: empty grid");
    if (feats.size() != labels.size() || feats.empty()) throw data_error("crossval: bad baseline inputs");
    std::vector<std::size_t> pos(feats.size(), 0), neg(feats.size(), 0);
    for (std::size_t r = 0; r < feats.size(); ++r)
        for (auto v : labels[r].labels) (v ? pos[r] : neg[r])++;
    auto folds = make_recording_folds(pos, neg, n_folds, seed);

    struct HyperPoint {
        double c = 1.0, gamma_scale = 1.0;
    };
    std::vector<HyperPoint> hypers{{1.0, 1.0}};
    if (opts.family == BaselineFamily::svm) {
        hypers.clear();
        for (double c : opts.svm_c)
            for (double gs : opts.svm_gamma_scale) hypers.push_back({c, gs});
    }

    auto fold_sets = [&](std::size_t fold_i) {
        std::vector<std::size_t> train_recs;
        for (std::size_t f = 0; f < folds.size(); ++f)
            if (f != fold_i) train_recs.insert(train_recs.end(), folds[f].begin(), folds[f].end());
        std::sort(train_recs.begin(), train_recs.end());
        return train_recs;
    };
    auto gather = [&](const std::vector<std::size_t>& recs_idx, FeatureMatrix& X, std::vector<int>& y) {
        X.rows = 0;
        X.cols = feats.front().cols;
        X.values.clear();
        y.clear();
        for (std::size_t r : recs_idx) {
            X.values.insert(X.values.end(), feats[r].values.begin(), feats[r].values.end());
            X.rows += feats[r].rows;
            for (auto v : labels[r].labels) y.push_back(v);
        }
    };

    GridResult result;
    std::size_t run = 0;
    for (const auto& pt : grid) {
        for (const auto& hp : hypers) {
            double sum = 0.0;
            for (std::size_t f = 0; f < folds.size(); ++f) {
                FeatureMatrix Xtr, Xva;
                std::vector<int> ytr, yva;
                gather(fold_sets(f), Xtr, ytr);
                gather(folds[f], Xva, yva);

                auto scaler = FeatureScaler::fit(Xtr);
                Xtr = scaler.apply(Xtr);
                Xva = scaler.apply(Xva);
                if (pt.reduction == ReductionKind::pca) {
                    auto pca = pca_fit(Xtr, pt.dim);
                    Xtr = pca_transform_all(pca, Xtr);
                    Xva = pca_transform_all(pca, Xva);
                } else if (pt.reduction == ReductionKind::rfe && pt.dim < Xtr.cols) {
                    auto rfe = rfe_select(Xtr, ytr, 8, pt.dim);
                    Xtr = rfe_transform_all(rfe, Xtr);
                    Xva = rfe_transform_all(rfe, Xva);
                }

                std::vector<double> scores(Xva.rows);
                switch (opts.family) {
                    case BaselineFamily::nb: {
                        auto nb = nb_fit(Xtr, ytr);
                        for (std::size_t i = 0; i < Xva.rows; ++i) scores[i] = nb_predict(nb, Xva.row(i))[1];
                        break;
                    }
                    case BaselineFamily::rf: {
                        auto rf = rf_fit(Xtr, ytr, opts.rf, derive_seed(seed, "cv_rf", run * folds.size() + f));
                        for (std::size_t i = 0; i < Xva.rows; ++i) scores[i] = rf_predict(rf, Xva.row(i))[1];
                        break;
                    }
                    case BaselineFamily::svm: {
                        SvmConfig sc;
                        sc.C = hp.c;
                        sc.gamma = hp.gamma_scale / static_cast<double>(Xtr.cols);
                        auto svm = svm_fit(Xtr, ytr, sc);
                        for (std::size_t i = 0; i < Xva.rows; ++i)
                            scores[i] = svm.predict_proba(Xva.row(i))[1];
                        break;
                    }
                }
                sum += pr_area(scores, yva);
            }
            char name[128];
            if (opts.family == BaselineFamily::svm)
                std::snprintf(name, sizeof(name), "%s %s=%d dim=%zu C=%g gamma=%g/d", to_string(opts.family),
                              pt.reduction == ReductionKind::pca ? "pca n" : "rfe m", pt.grid_index, pt.dim,
                              hp.c, hp.gamma_scale);
            else
                std::snprintf(name, sizeof(name), "%s %s=%d dim=%zu", to_string(opts.family),
                              pt.reduction == ReductionKind::pca ? "pca n" : "rfe m", pt.grid_index, pt.dim);
            result.rows.push_back({name, sum / static_cast<double>(folds.size()), pt.dim});
            ++run;
        }
    }
    result.pick_best();
    return result;
}

}  // namespace aed
