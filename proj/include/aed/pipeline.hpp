#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aed/baselines.hpp"
#include "aed/config.hpp"
#include "aed/crossval.hpp"
#include "aed/errors.hpp"
#include "aed/features.hpp"
#include "aed/interpret.hpp"
#include "aed/io.hpp"
#include "aed/metrics.hpp"
#include "aed/model_io.hpp"
#include "aed/nn.hpp"
#include "aed/reduction.hpp"
#include "aed/svgplot.hpp"
#include "aed/synth.hpp"
#include "aed/transforms.hpp"

namespace aed {

// ---------------------------------------------------------------------------
// Run directory
// ---------------------------------------------------------------------------

struct RunPaths {
    std::filesystem::path out, models, reports, curves, spectra, corpus;

    static RunPaths make(const PipelineConfig& cfg) {
        RunPaths p;
        p.out = cfg.out_dir;
        p.models = p.out / "models";
        p.reports = p.out / "reports";
        p.curves = p.out / "curves";
        p.spectra = p.out / "spectra";
        p.corpus = cfg.corpus_path();
        std::filesystem::create_directories(p.out);
        std::filesystem::create_directories(p.models);
        std::filesystem::create_directories(p.reports);
        std::filesystem::create_directories(p.curves);
        std::filesystem::create_directories(p.spectra);
        return p;
    }

    std::filesystem::path model_file() const { return models / "model.bin"; }
    std::filesystem::path history_file() const { return models / "model_history.csv"; }
};

/// Advisory exclusive lock on the output directory; released when the
/// process exits or the object is destroyed.
class RunLock {
public:
    explicit RunLock(const std::filesystem::path& out_dir) {
        std::filesystem::create_directories(out_dir);
        const auto lock_path = out_dir / ".lock";
        fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ < 0) throw data_error("cannot open lock file: " + lock_path.string());
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            fd_ = -1;
            throw data_error("output directory is locked by another run: " + out_dir.string());
        }
    }
    ~RunLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    int fd_ = -1;
};

inline void write_run_manifest(const RunPaths& paths, const PipelineConfig& cfg) {
    auto os = open_out(paths.out / "run_manifest.txt");
    os << "# run manifest\n";
    os << "config_hash = " << config_hash(cfg) << "\n\n";
    os << serialize_config(cfg);
}

// ---------------------------------------------------------------------------
// Shared preparation
// ---------------------------------------------------------------------------

/// The transform recipe actually applied, taken either from the config (at
/// train time) or from a persisted model (at eval/predict time).
struct TransformRecipe {
    TfKind kind = TfKind::cwt;
    std::size_t h1 = 256;
    std::size_t w1 = 10;
    double mu = 5.0, sigma = 0.6, f_min = 20.0, f_max = 4000.0;
    int sample_rate = 8000;

    static TransformRecipe from_config(const PipelineConfig& cfg) {
        return {cfg.tf_kind(), cfg.h1, cfg.w1, cfg.wavelet_mu, cfg.wavelet_sigma,
                cfg.f_min, cfg.f_max, cfg.sample_rate};
    }
    static TransformRecipe from_bundle(const ModelBundle& m) {
        return {m.tf_kind, m.h1, m.w1, m.wavelet_mu, m.wavelet_sigma, m.f_min, m.f_max, m.sample_rate};
    }

    TimeFrequencyImage apply(const Recording& rec) const {
        if (kind == TfKind::stft) return stft_spectrogram(rec, h1);
        auto bank = scales_for_band(h1, f_min, f_max, mu, sigma, sample_rate);
        return cwt_scalogram(rec, bank);
    }
};

inline std::vector<RecordingData> to_recording_data(std::vector<std::pair<Recording, LabelTrack>>& corpus,
                                                    const std::vector<std::size_t>& subset,
                                                    const TransformRecipe& recipe) {
    std::vector<RecordingData> out;
    out.reserve(subset.size());
    for (std::size_t i : subset) {
        RecordingData rd;
        rd.id = corpus[i].first.id;
        rd.image = recipe.apply(corpus[i].first);
        rd.track = corpus[i].second;
        out.push_back(std::move(rd));
    }
    return out;
}

/// Loads the corpus directory and splits it at recording level with the run
/// seed. The same config therefore reproduces the same split in every
/// command.
struct SplitCorpus {
    std::vector<std::pair<Recording, LabelTrack>> recordings;
    std::vector<std::size_t> train, test;
};

inline SplitCorpus load_split_corpus(const PipelineConfig& cfg) {
    SplitCorpus sc;
    sc.recordings = read_corpus(cfg.corpus_path(), cfg.sample_rate);
    if (cfg.n_train + cfg.n_test > sc.recordings.size())
        throw data_error("corpus smaller than the requested train/test split");
    auto [train, test] = split_corpus(sc.recordings.size(), cfg.n_train, cfg.n_test, cfg.seed);
    sc.train = std::move(train);
    sc.test = std::move(test);
    return sc;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

inline std::filesystem::path run_synth(const PipelineConfig& cfg) {
    cfg.validate();
    auto paths = RunPaths::make(cfg);
    RunLock lock(paths.out);
    auto corpus = synth_corpus(cfg.synth, cfg.sample_rate);
    write_corpus(paths.corpus, corpus, cfg.synth, cfg.sample_rate);
    write_run_manifest(paths, cfg);
    return paths.corpus;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

namespace pipeline_detail {

/// Standardized, sliced patch datasets for a recording subset; stats are fit
/// on the subset unless provided.
struct NnData {
    PatchDataset patches;
    Standardization stats;
};

inline NnData make_patches(std::vector<RecordingData>& recs, std::size_t w1,
                           std::optional<Standardization> stats_in) {
    NnData out;
    if (stats_in) {
        out.stats = *stats_in;
    } else {
        std::vector<const TimeFrequencyImage*> imgs;
        for (const auto& r : recs) imgs.push_back(&r.image);
        out.stats = fit_standardization(imgs);
    }
    for (auto& r : recs) {
        auto img = standardize(r.image, out.stats);
        auto fl = upsample_labels(r.track, img.frame_rate, img.cols);
        auto ds = slice_patches(img, w1, fl, r.id);
        append_patches(out.patches, ds);
    }
    return out;
}

/// Per-frame features for the baseline path, with the per-recording frame
/// labels. kind selects the raw STFT slice segment or the full 304 dims.
struct BaselineData {
    std::vector<FeatureMatrix> per_recording;
    std::vector<FrameLabels> labels;
    FeatureMatrix stacked;
    std::vector<int> stacked_labels;
    std::vector<std::size_t> recording_of_frame;
};

inline FeatureMatrix select_segment(const FeatureMatrix& full, BaselineFeatureKind kind) {
    if (kind == BaselineFeatureKind::f10) return full;
    FeatureMatrix out;
    out.rows = full.rows;
    out.cols = kFeatureLayout[0].size;  // stft_slice
    out.values.resize(out.rows * out.cols);
    for (std::size_t r = 0; r < full.rows; ++r)
        std::copy(full.row(r), full.row(r) + out.cols, out.row(r));
    return out;
}

inline BaselineData make_baseline_data(std::vector<std::pair<Recording, LabelTrack>>& corpus,
                                       const std::vector<std::size_t>& subset, std::size_t h1,
                                       int sample_rate, BaselineFeatureKind kind) {
    BaselineData out;
    FeatureExtractor extractor(h1, sample_rate);
    const double frame_rate = static_cast<double>(sample_rate) / static_cast<double>(h1);
    for (std::size_t idx : subset) {
        auto full = extractor.extract_sequence(corpus[idx].first);
        auto feats = select_segment(full, kind);
        auto fl = upsample_labels(corpus[idx].second, frame_rate, feats.rows);
        out.stacked.cols = feats.cols;
        out.stacked.rows += feats.rows;
        out.stacked.values.insert(out.stacked.values.end(), feats.values.begin(), feats.values.end());
        for (auto v : fl.labels) out.stacked_labels.push_back(v);
        for (std::size_t f = 0; f < feats.rows; ++f) out.recording_of_frame.push_back(out.per_recording.size());
        out.per_recording.push_back(std::move(feats));
        out.labels.push_back(std::move(fl));
    }
    return out;
}

}  // namespace pipeline_detail

struct TrainOutcome {
    std::filesystem::path model_path;
    std::string summary;
};

inline TrainOutcome run_train(const PipelineConfig& cfg) {
    cfg.validate();
    auto paths = RunPaths::make(cfg);
    RunLock lock(paths.out);
    auto sc = load_split_corpus(cfg);
    const auto family = cfg.model_family();

    ModelBundle bundle;
    bundle.family = family;
    bundle.seed = cfg.seed;
    bundle.tf_kind = cfg.tf_kind();
    bundle.h1 = cfg.h1;
    bundle.w1 = cfg.w1;
    bundle.wavelet_mu = cfg.wavelet_mu;
    bundle.wavelet_sigma = cfg.wavelet_sigma;
    bundle.f_min = cfg.f_min;
    bundle.f_max = cfg.f_max;
    bundle.sample_rate = cfg.sample_rate;

    std::ostringstream summary;
    if (family == ModelFamily::cnn || family == ModelFamily::mlp) {
        auto recipe = TransformRecipe::from_config(cfg);
        auto train_recs = to_recording_data(sc.recordings, sc.train, recipe);
        auto data = pipeline_detail::make_patches(train_recs, cfg.w1, std::nullopt);
        bundle.stats = data.stats;

        TrainConfig tc = cfg.train;
        tc.seed = derive_seed(cfg.seed, "train_cmd");
        if (family == ModelFamily::cnn) {
            CnnSpec spec;
            spec.h1 = cfg.h1;
            spec.w1 = cfg.w1;
            spec.k = cfg.cnn_k;
            spec.n_k = cfg.cnn_n_k;
            spec.n_d = cfg.cnn_n_d;
            spec.dropout_p = cfg.dropout_p;
            bundle.nn = train(spec, data.patches, tc);
        } else {
            MlpSpec spec;
            spec.input_dim = cfg.h1 * cfg.w1;
            spec.l = cfg.mlp_l;
            spec.m = cfg.mlp_m;
            spec.dropout_p = cfg.dropout_p;
            bundle.nn = train(spec, data.patches, tc);
        }
        const auto& hist = bundle.nn->history;
        const auto& best = hist.epochs[hist.best_epoch];
        write_history_csv(paths.history_file(), hist);
        summary << "trained " << cfg.family << "-" << cfg.transform_kind << " on " << data.patches.size()
                << " patches; best epoch " << hist.best_epoch + 1 << "/" << hist.epochs.size()
                << " val_acc " << fmt_g(best.val_acc, 6) << " val_loss " << fmt_g(best.val_loss, 6);
    } else {
        bundle.feature_kind = cfg.feature_kind();
        auto data = pipeline_detail::make_baseline_data(sc.recordings, sc.train, cfg.h1, cfg.sample_rate,
                                                        bundle.feature_kind);
        bundle.scaler = FeatureScaler::fit(data.stacked);
        auto X = bundle.scaler.apply(data.stacked);
        bundle.reduction = cfg.model_reduction();
        if (bundle.reduction == ModelReduction::pca) {
            bundle.pca = pca_fit(X, cfg.reduction_dim);
            X = pca_transform_all(*bundle.pca, X);
        } else if (bundle.reduction == ModelReduction::rfe) {
            if (cfg.reduction_dim < X.cols) {
                bundle.rfe = rfe_select(X, data.stacked_labels, 8, cfg.reduction_dim);
                X = rfe_transform_all(*bundle.rfe, X);
            } else {
                RfeModel identity;
                identity.selected.resize(X.cols);
                std::iota(identity.selected.begin(), identity.selected.end(), 0);
                bundle.rfe = std::move(identity);
            }
        }
        if (family == ModelFamily::nb) {
            bundle.nb = nb_fit(X, data.stacked_labels);
        } else if (family == ModelFamily::rf) {
            RfConfig rc;
            rc.n_trees = cfg.rf_trees;
            bundle.rf = rf_fit(X, data.stacked_labels, rc, derive_seed(cfg.seed, "rf"));
        } else {
            SvmConfig scg;
            scg.C = cfg.svm_c;
            scg.gamma = cfg.svm_gamma > 0.0 ? cfg.svm_gamma : 1.0 / static_cast<double>(X.cols);
            bundle.svm = svm_fit(X, data.stacked_labels, scg);
            if (!bundle.svm->converged) summary << "[warning: SMO hit its iteration cap] ";
        }
        summary << "trained " << cfg.family << " on " << X.rows << " frames (" << X.cols << " dims)";
    }

    save_model(paths.model_file(), bundle);
    write_run_manifest(paths, cfg);
    return {paths.model_file(), summary.str()};
}

// ---------------------------------------------------------------------------
// scoring (shared by eval / predict / visualize)
// ---------------------------------------------------------------------------

namespace pipeline_detail {

/// Scores per sample (patch or frame) for a recording subset, grouped per
/// recording in subset order.
struct Scored {
    std::vector<std::vector<double>> scores;  // per recording
    std::vector<std::vector<int>> labels;
    std::vector<std::string> ids;
    double score_rate = 0.0;  // Hz of the score sequence
    // Patch-level extras for the neural path:
    PatchDataset patches;
    std::vector<float> probs;  // patches x 2
};

inline Scored score_neural(ModelBundle& bundle, std::vector<std::pair<Recording, LabelTrack>>& corpus,
                           const std::vector<std::size_t>& subset) {
    auto recipe = TransformRecipe::from_bundle(bundle);
    Scored out;
    auto recs = to_recording_data(corpus, subset, recipe);
    auto data = make_patches(recs, bundle.w1, bundle.stats);
    out.patches = std::move(data.patches);
    out.probs = predict(*bundle.nn, out.patches);
    out.score_rate = recs.empty() ? 0.0
                                  : recs.front().image.frame_rate / static_cast<double>(bundle.w1);

    std::size_t i = 0;
    while (i < out.patches.size()) {
        const auto rec_idx = out.patches.meta[i].recording;
        std::vector<double> s;
        std::vector<int> l;
        while (i < out.patches.size() && out.patches.meta[i].recording == rec_idx) {
            s.push_back(out.probs[2 * i + 1]);
            l.push_back(out.patches.label(i));
            ++i;
        }
        out.scores.push_back(std::move(s));
        out.labels.push_back(std::move(l));
        out.ids.push_back(out.patches.recording_ids[static_cast<std::size_t>(rec_idx)]);
    }
    return out;
}

inline Scored score_baseline(const ModelBundle& bundle, std::vector<std::pair<Recording, LabelTrack>>& corpus,
                             const std::vector<std::size_t>& subset) {
    Scored out;
    auto data = make_baseline_data(corpus, subset, bundle.h1, bundle.sample_rate, bundle.feature_kind);
    out.score_rate = static_cast<double>(bundle.sample_rate) / static_cast<double>(bundle.h1);
    for (std::size_t r = 0; r < data.per_recording.size(); ++r) {
        auto X = bundle.scaler.apply(data.per_recording[r]);
        if (bundle.reduction == ModelReduction::pca) X = pca_transform_all(*bundle.pca, X);
        if (bundle.reduction == ModelReduction::rfe) X = rfe_transform_all(*bundle.rfe, X);
        std::vector<double> s(X.rows);
        for (std::size_t i = 0; i < X.rows; ++i) {
            switch (bundle.family) {
                case ModelFamily::nb: s[i] = nb_predict(*bundle.nb, X.row(i))[1]; break;
                case ModelFamily::rf: s[i] = rf_predict(*bundle.rf, X.row(i))[1]; break;
                case ModelFamily::svm: s[i] = bundle.svm->predict_proba(X.row(i))[1]; break;
                default: throw data_error("score_baseline: not a baseline model");
            }
        }
        out.scores.push_back(std::move(s));
        std::vector<int> l(data.labels[r].labels.begin(), data.labels[r].labels.end());
        out.labels.push_back(std::move(l));
        out.ids.push_back(corpus[subset[r]].first.id);
    }
    return out;
}

inline Scored score_subset(ModelBundle& bundle, std::vector<std::pair<Recording, LabelTrack>>& corpus,
                           const std::vector<std::size_t>& subset) {
    return bundle.is_neural() ? score_neural(bundle, corpus, subset)
                              : score_baseline(bundle, corpus, subset);
}

inline std::vector<double> concat(const std::vector<std::vector<double>>& parts) {
    std::vector<double> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

inline std::vector<int> concat_int(const std::vector<std::vector<int>>& parts) {
    std::vector<int> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

/// Median filter applied within each recording's score sequence.
inline std::vector<std::vector<double>> filter_per_recording(const std::vector<std::vector<double>>& scores,
                                                             double kernel_s, double rate) {
    std::vector<std::vector<double>> out;
    out.reserve(scores.size());
    for (const auto& s : scores) out.push_back(median_filter(s, kernel_s, rate));
    return out;
}

inline void write_report_csv(const std::filesystem::path& path, const EvalReport& r, double threshold,
                             std::size_t median_len) {
    CsvWriter csv(path);
    csv.row({"f1", "tpr", "tnr", "roc_area", "pr_area", "n_pos", "n_neg", "threshold", "median_kernel",
             "tpr_defined", "tnr_defined"});
    csv.row({fmt_g(r.confusion.f1), fmt_g(r.confusion.tpr), fmt_g(r.confusion.tnr), fmt_g(r.roc),
             fmt_g(r.pr), std::to_string(r.n_pos), std::to_string(r.n_neg), fmt_g(threshold),
             std::to_string(median_len), r.confusion.tpr_defined ? "1" : "0",
             r.confusion.tnr_defined ? "1" : "0"});
}

inline void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& pts,
                            const char* xname, const char* yname) {
    CsvWriter csv(path);
    csv.row({xname, yname, "threshold"});
    for (const auto& p : pts) csv.row({fmt_g(p.x), fmt_g(p.y), fmt_g(p.threshold)});
}

}  // namespace pipeline_detail

struct EvalOutcome {
    EvalReport unfiltered;
    EvalReport filtered;
    std::size_t median_len = 0;
    std::string summary;
};

inline EvalOutcome run_eval(const PipelineConfig& cfg, const std::filesystem::path& model_path) {
    cfg.validate();
    auto paths = RunPaths::make(cfg);
    RunLock lock(paths.out);
    auto bundle = load_model(model_path);
    if (bundle.is_neural() && bundle.tf_kind != cfg.tf_kind())
        throw config_error("transform kind mismatch between the model file and the config");

    auto sc = load_split_corpus(cfg);
    auto scored = pipeline_detail::score_subset(bundle, sc.recordings, sc.test);

    auto flat_scores = pipeline_detail::concat(scored.scores);
    auto flat_labels = pipeline_detail::concat_int(scored.labels);
    auto filtered = pipeline_detail::filter_per_recording(scored.scores, cfg.median_kernel_s, scored.score_rate);
    auto flat_filtered = pipeline_detail::concat(filtered);

    EvalOutcome out;
    out.unfiltered = build_report(flat_scores, flat_labels, cfg.threshold);
    out.filtered = build_report(flat_filtered, flat_labels, cfg.threshold);
    out.median_len = median_kernel_length(cfg.median_kernel_s, scored.score_rate);

    pipeline_detail::write_report_csv(paths.reports / "report_unfiltered.csv", out.unfiltered, cfg.threshold, 1);
    pipeline_detail::write_report_csv(paths.reports / "report_filtered.csv", out.filtered, cfg.threshold,
                                      out.median_len);
    pipeline_detail::write_curve_csv(paths.curves / "roc_unfiltered.csv", out.unfiltered.roc_points, "fpr", "tpr");
    pipeline_detail::write_curve_csv(paths.curves / "pr_unfiltered.csv", out.unfiltered.pr_points, "recall",
                                     "precision");
    pipeline_detail::write_curve_csv(paths.curves / "roc_filtered.csv", out.filtered.roc_points, "fpr", "tpr");
    pipeline_detail::write_curve_csv(paths.curves / "pr_filtered.csv", out.filtered.pr_points, "recall",
                                     "precision");

    {
        SvgLinePlot plot("ROC", "false positive rate", "true positive rate");
        std::vector<double> x, y;
        for (const auto& p : out.unfiltered.roc_points) {
            x.push_back(p.x);
            y.push_back(p.y);
        }
        plot.add_series("unfiltered", x, y, "#1f77b4");
        x.clear();
        y.clear();
        for (const auto& p : out.filtered.roc_points) {
            x.push_back(p.x);
            y.push_back(p.y);
        }
        plot.add_series("median filtered", x, y, "#d62728");
        plot.write(paths.curves / "roc.svg");
    }
    {
        SvgLinePlot plot("Precision-recall", "recall", "precision");
        std::vector<double> x, y;
        for (const auto& p : out.unfiltered.pr_points) {
            x.push_back(p.x);
            y.push_back(p.y);
        }
        plot.add_series("unfiltered", x, y, "#1f77b4");
        x.clear();
        y.clear();
        for (const auto& p : out.filtered.pr_points) {
            x.push_back(p.x);
            y.push_back(p.y);
        }
        plot.add_series("median filtered", x, y, "#d62728");
        plot.write(paths.curves / "pr.svg");
    }
    {
        // classifier output panel: score and target per sample index
        SvgLinePlot plot("Classifier output over the test set", "sample index", "score / target");
        std::vector<double> xs(flat_scores.size());
        std::iota(xs.begin(), xs.end(), 0.0);
        std::vector<double> targets(flat_labels.begin(), flat_labels.end());
        plot.add_series("target", xs, targets, "#1f77b4");
        plot.add_series("score", xs, flat_scores, "#2ca02c");
        plot.add_series("filtered score", xs, flat_filtered, "#d62728");
        plot.write(paths.curves / "scores.svg");
    }

    std::ostringstream ss;
    ss << "test " << (bundle.is_neural() ? "patches" : "frames") << ": " << flat_scores.size()
       << "; unfiltered F1 " << fmt_g(out.unfiltered.confusion.f1, 6) << " PR " << fmt_g(out.unfiltered.pr, 6)
       << " ROC " << fmt_g(out.unfiltered.roc, 6) << "; filtered PR " << fmt_g(out.filtered.pr, 6) << " ROC "
       << fmt_g(out.filtered.roc, 6);
    out.summary = ss.str();
    write_run_manifest(paths, cfg);
    return out;
}

inline std::filesystem::path run_predict(const PipelineConfig& cfg, const std::filesystem::path& model_path,
                                         const std::filesystem::path& wav_path) {
    cfg.validate();
    auto paths = RunPaths::make(cfg);
    RunLock lock(paths.out);
    auto bundle = load_model(model_path);

    auto rec = load_wav(wav_path);
    if (rec.sample_rate != bundle.sample_rate) rec = resample(rec, bundle.sample_rate);
    // Dummy all-zero labels: prediction needs none, but the shared slicing
    // path expects a track.
    LabelTrack track;
    track.recording_id = rec.id;
    track.rate = kLabelRateHz;
    track.labels.assign(static_cast<std::size_t>(std::ceil(rec.duration_s() * kLabelRateHz)), 0);
    std::vector<std::pair<Recording, LabelTrack>> corpus;
    corpus.emplace_back(std::move(rec), std::move(track));
    std::vector<std::size_t> subset{0};

    auto scored = pipeline_detail::score_subset(bundle, corpus, subset);
    auto filtered = pipeline_detail::filter_per_recording(scored.scores, cfg.median_kernel_s, scored.score_rate);

    const auto out_path = paths.reports / (corpus[0].first.id + "_predictions.csv");
    CsvWriter csv(out_path);
    csv.row({"recording_id", "index", "time_s", "score", "score_filtered"});
    for (std::size_t i = 0; i < scored.scores[0].size(); ++i)
        csv.row({corpus[0].first.id, std::to_string(i),
                 fmt_g(static_cast<double>(i) / scored.score_rate, 8), fmt_g(scored.scores[0][i]),
                 fmt_g(filtered[0][i])});
    write_run_manifest(paths, cfg);
    return out_path;
}

// ---------------------------------------------------------------------------
// crossval
// ---------------------------------------------------------------------------

inline GridResult run_crossval(const PipelineConfig& cfg) {
    cfg.validate();
    auto paths = RunPaths::make(cfg);
    RunLock lock(paths.out);
    auto sc = load_split_corpus(cfg);
    const auto family = cfg.model_family();

    GridResult result;
    if (family == ModelFamily::cnn || family == ModelFamily::mlp) {
        auto recipe = TransformRecipe::from_config(cfg);
        auto recs = to_recording_data(sc.recordings, sc.train, recipe);
        TrainConfig tc = cfg.train;
        if (family == ModelFamily::cnn) {
            auto grid = cnn_grid();
            if (cfg.cv_max_points > 0 && grid.size() > cfg.cv_max_points) grid.resize(cfg.cv_max_points);
            result = crossval_cnn(recs, cfg.w1, grid, cfg.cv_folds, tc, cfg.seed);
        } else {
            auto grid = mlp_grid();
            if (cfg.cv_max_points > 0 && grid.size() > cfg.cv_max_points) grid.resize(cfg.cv_max_points);
            result = crossval_mlp(recs, grid, cfg.cv_folds, tc, cfg.seed);
        }
    } else {
        auto data = pipeline_detail::make_baseline_data(sc.recordings, sc.train, cfg.h1, cfg.sample_rate,
                                                        cfg.feature_kind());
        BaselineCvOptions opts;
        opts.family = family == ModelFamily::nb   ? BaselineFamily::nb
                      : family == ModelFamily::rf ? BaselineFamily::rf
                                                  : BaselineFamily::svm;
        opts.rf.n_trees = cfg.rf_trees;
        auto grid = baseline_grid();
        if (cfg.cv_max_points > 0 && grid.size() > cfg.cv_max_points) grid.resize(cfg.cv_max_points);
        result = crossval_baseline(data.per_recording, data.labels, grid, opts, cfg.cv_folds, cfg.seed);
    }

    write_grid_csv(paths.reports / "crossval_grid.csv", result);
    write_run_manifest(paths, cfg);
    return result;
}

// ---------------------------------------------------------------------------
// visualize
// ---------------------------------------------------------------------------

struct VisualizeOutcome {
    ClassSpectra spectra;
    std::filesystem::path csv_path;
};

inline VisualizeOutcome run_visualize(const PipelineConfig& cfg, const std::filesystem::path& model_path) {
    cfg.validate();
    auto paths = RunPaths::make(cfg);
    RunLock lock(paths.out);
    auto bundle = load_model(model_path);
    if (!bundle.is_neural())
        throw config_error("visualize requires a neural model (class spectra come from patch scores)");

    auto sc = load_split_corpus(cfg);
    auto recipe = TransformRecipe::from_bundle(bundle);

    auto test_recs = to_recording_data(sc.recordings, sc.test, recipe);
    if (test_recs.empty()) throw data_error("visualize: empty test split");
    auto test_data = pipeline_detail::make_patches(test_recs, bundle.w1, bundle.stats);
    auto train_recs = to_recording_data(sc.recordings, sc.train, recipe);
    auto train_data = pipeline_detail::make_patches(train_recs, bundle.w1, bundle.stats);

    auto probs = predict(*bundle.nn, test_data.patches);
    const auto& freq_axis = test_recs.front().image.freq_axis;
    VisualizeOutcome out;
    out.spectra = class_spectra(probs, test_data.patches, train_data.patches, freq_axis, cfg.top_frac);
    out.csv_path = paths.spectra / "class_spectra.csv";
    write_spectra_csv(out.csv_path, out.spectra);
    write_spectra_svg(paths.spectra / "class_spectra.svg", out.spectra);
    write_run_manifest(paths, cfg);
    return out;
}

}  // namespace aed
