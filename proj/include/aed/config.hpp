#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "aed/errors.hpp"
#include "aed/io.hpp"
#include "aed/rng.hpp"
#include "aed/synth.hpp"
#include "aed/nn.hpp"

namespace aed {

enum class ModelFamily : std::uint8_t { cnn = 0, mlp = 1, nb = 2, rf = 3, svm = 4 };

inline const char* to_string(ModelFamily f) {
    switch (f) {
        case ModelFamily::cnn: return "cnn";
        case ModelFamily::mlp: return "mlp";
        case ModelFamily::nb: return "nb";
        case ModelFamily::rf: return "rf";
        default: return "svm";
    }
}

inline ModelFamily model_family_from(const std::string& s) {
    if (s == "cnn") return ModelFamily::cnn;
    if (s == "mlp") return ModelFamily::mlp;
    if (s == "nb") return ModelFamily::nb;
    if (s == "rf") return ModelFamily::rf;
    if (s == "svm") return ModelFamily::svm;
    throw config_error("unknown model family: " + s);
}

/// Feature source for the baseline classifiers: the raw STFT magnitude slice
/// or the full 304-dimensional hand-crafted vector.
enum class BaselineFeatureKind : std::uint8_t { stft_slice = 0, f10 = 1 };

enum class ModelReduction : std::uint8_t { none = 0, pca = 1, rfe = 2 };

/// Everything one pipeline run needs, grouped into the config file sections.
struct PipelineConfig {
    // [run]
    std::uint64_t seed = 1;

    // [corpus]
    int sample_rate = 8000;
    SynthConfig synth;
    std::size_t n_train = 37;
    std::size_t n_test = 20;

    // [transform]
    std::string transform_kind = "cwt";  // cwt | stft
    std::size_t h1 = 256;
    std::size_t w1 = 10;
    double wavelet_mu = 5.0;
    double wavelet_sigma = 0.6;
    double f_min = 20.0;
    double f_max = 4000.0;

    // [model]
    std::string family = "cnn";
    std::size_t cnn_k = 5;
    std::size_t cnn_n_k = 32;
    std::size_t cnn_n_d = 128;
    std::size_t mlp_l = 2056;
    std::size_t mlp_m = 64;
    double dropout_p = 0.5;
    std::string baseline_features = "stft_slice";  // stft_slice | f10
    std::string reduction = "none";                // none | pca | rfe
    std::size_t reduction_dim = 304;
    std::size_t rf_trees = 100;
    double svm_c = 1.0;
    double svm_gamma = 0.0;  // 0 selects 1/dim

    // [train]
    TrainConfig train;

    // [eval]
    double threshold = 0.5;
    double median_kernel_s = 1.0;
    double top_frac = 0.10;

    // [crossval]
    std::size_t cv_folds = 10;
    std::size_t cv_max_points = 0;  // 0 = whole grid

    // [paths]
    std::string out_dir = "runs/default";
    std::string corpus_dir;  // empty: <out_dir>/corpus

    bool operator==(const PipelineConfig&) const = default;

    std::filesystem::path corpus_path() const {
        return corpus_dir.empty() ? std::filesystem::path(out_dir) / "corpus"
                                  : std::filesystem::path(corpus_dir);
    }

    TfKind tf_kind() const {
        if (transform_kind == "cwt") return TfKind::cwt;
        if (transform_kind == "stft") return TfKind::stft;
        throw config_error("unknown transform kind: " + transform_kind);
    }

    ModelFamily model_family() const { return model_family_from(family); }

    BaselineFeatureKind feature_kind() const {
        if (baseline_features == "stft_slice") return BaselineFeatureKind::stft_slice;
        if (baseline_features == "f10") return BaselineFeatureKind::f10;
        throw config_error("unknown baseline feature kind: " + baseline_features);
    }

    ModelReduction model_reduction() const {
        if (reduction == "none") return ModelReduction::none;
        if (reduction == "pca") return ModelReduction::pca;
        if (reduction == "rfe") return ModelReduction::rfe;
        throw config_error("unknown reduction: " + reduction);
    }

    void validate() const {
        if (sample_rate <= 0) throw config_error("config: sample_rate must be positive");
        if (h1 < 2) throw config_error("config: h1 must be at least 2");
        if (w1 == 0) throw config_error("config: w1 must be positive");
        if (!(f_min > 0.0 && f_min < f_max && f_max <= sample_rate / 2.0))
            throw config_error("config: invalid wavelet band");
        if (!(wavelet_mu > wavelet_sigma && wavelet_sigma > 0.0))
            throw config_error("config: require mu > sigma > 0");
        if (!(threshold >= 0.0 && threshold <= 1.0)) throw config_error("config: threshold in [0,1]");
        if (!(top_frac > 0.0 && top_frac <= 1.0)) throw config_error("config: top_frac in (0,1]");
        if (median_kernel_s < 0.0) throw config_error("config: median kernel must be non-negative");
        if (cv_folds < 2) throw config_error("config: need at least 2 folds");
        tf_kind();
        model_family();
        feature_kind();
        model_reduction();
        train.validate();
        synth.validate(sample_rate);
    }
};

namespace config_detail {

enum class FieldType { u64, sz, i32, f64, str };

struct Field {
    const char* section;
    const char* key;
    FieldType type;
    void* ptr;
};

inline std::vector<Field> registry(PipelineConfig& c) {
    using FT = FieldType;
    return {
        {"run", "seed", FT::u64, &c.seed},
        {"corpus", "sample_rate", FT::i32, &c.sample_rate},
        {"corpus", "n_recordings", FT::i32, &c.synth.n_recordings},
        {"corpus", "duration_s", FT::f64, &c.synth.duration_s},
        {"corpus", "tone_fundamental_hz", FT::f64, &c.synth.tone_fundamental_hz},
        {"corpus", "n_harmonics", FT::i32, &c.synth.n_harmonics},
        {"corpus", "harmonic_decay", FT::f64, &c.synth.harmonic_decay},
        {"corpus", "snr_db", FT::f64, &c.synth.snr_db},
        {"corpus", "noise_hum_hz", FT::f64, &c.synth.noise_hum_hz},
        {"corpus", "event_duty", FT::f64, &c.synth.event_duty},
        {"corpus", "n_train", FT::sz, &c.n_train},
        {"corpus", "n_test", FT::sz, &c.n_test},
        {"transform", "kind", FT::str, &c.transform_kind},
        {"transform", "h1", FT::sz, &c.h1},
        {"transform", "w1", FT::sz, &c.w1},
        {"transform", "mu", FT::f64, &c.wavelet_mu},
        {"transform", "sigma", FT::f64, &c.wavelet_sigma},
        {"transform", "f_min", FT::f64, &c.f_min},
        {"transform", "f_max", FT::f64, &c.f_max},
        {"model", "family", FT::str, &c.family},
        {"model", "k", FT::sz, &c.cnn_k},
        {"model", "n_k", FT::sz, &c.cnn_n_k},
        {"model", "n_d", FT::sz, &c.cnn_n_d},
        {"model", "mlp_l", FT::sz, &c.mlp_l},
        {"model", "mlp_m", FT::sz, &c.mlp_m},
        {"model", "dropout_p", FT::f64, &c.dropout_p},
        {"model", "features", FT::str, &c.baseline_features},
        {"model", "reduction", FT::str, &c.reduction},
        {"model", "reduction_dim", FT::sz, &c.reduction_dim},
        {"model", "rf_trees", FT::sz, &c.rf_trees},
        {"model", "svm_c", FT::f64, &c.svm_c},
        {"model", "svm_gamma", FT::f64, &c.svm_gamma},
        {"train", "batch_size", FT::sz, &c.train.batch_size},
        {"train", "max_epochs", FT::sz, &c.train.max_epochs},
        {"train", "optimizer", FT::str, &c.train.optimizer},
        {"train", "learning_rate", FT::f64, &c.train.learning_rate},
        {"train", "early_stop_patience", FT::sz, &c.train.early_stop_patience},
        {"train", "val_fraction", FT::f64, &c.train.val_fraction},
        {"eval", "threshold", FT::f64, &c.threshold},
        {"eval", "median_kernel_s", FT::f64, &c.median_kernel_s},
        {"eval", "top_frac", FT::f64, &c.top_frac},
        {"crossval", "folds", FT::sz, &c.cv_folds},
        {"crossval", "max_points", FT::sz, &c.cv_max_points},
        {"paths", "out_dir", FT::str, &c.out_dir},
        {"paths", "corpus_dir", FT::str, &c.corpus_dir},
    };
}

inline std::string field_to_string(const Field& f) {
    switch (f.type) {
        case FieldType::u64: return std::to_string(*static_cast<std::uint64_t*>(f.ptr));
        case FieldType::sz: return std::to_string(*static_cast<std::size_t*>(f.ptr));
        case FieldType::i32: return std::to_string(*static_cast<int*>(f.ptr));
        case FieldType::f64: return fmt_g(*static_cast<double*>(f.ptr), 17);
        case FieldType::str: return *static_cast<std::string*>(f.ptr);
    }
    return {};
}

inline void field_from_string(const Field& f, const std::string& raw) {
    try {
        switch (f.type) {
            case FieldType::u64: *static_cast<std::uint64_t*>(f.ptr) = std::stoull(raw); break;
            case FieldType::sz: *static_cast<std::size_t*>(f.ptr) = static_cast<std::size_t>(std::stoull(raw)); break;
            case FieldType::i32: *static_cast<int*>(f.ptr) = std::stoi(raw); break;
            case FieldType::f64: *static_cast<double*>(f.ptr) = std::stod(raw); break;
            case FieldType::str: *static_cast<std::string*>(f.ptr) = raw; break;
        }
    } catch (const std::exception&) {
        throw config_error(std::string("bad value for ") + f.section + "." + f.key + ": " + raw);
    }
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return {};
    return s.substr(a, b - a + 1);
}

}  // namespace config_detail

/// Canonical serialization: sections and keys in registry order, `#`
/// comments absent, one `key = value` per line.
inline std::string serialize_config(const PipelineConfig& cfg) {
    auto copy = cfg;
    auto fields = config_detail::registry(copy);
    std::ostringstream os;
    const char* current = "";
    for (const auto& f : fields) {
        if (std::string_view(current) != f.section) {
            if (*current) os << "\n";
            os << "[" << f.section << "]\n";
            current = f.section;
        }
        os << f.key << " = " << config_detail::field_to_string(f) << "\n";
    }
    return os.str();
}

inline PipelineConfig parse_config(const std::string& text) {
    PipelineConfig cfg;
    auto fields = config_detail::registry(cfg);
    std::istringstream is(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = config_detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw config_error("config line " + std::to_string(line_no) + ": bad section");
            section = line.substr(1, line.size() - 2);
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = config_detail::trim(line.substr(0, eq));
        const std::string value = config_detail::trim(line.substr(eq + 1));
        bool found = false;
        for (const auto& f : fields) {
            if (section == f.section && key == f.key) {
                config_detail::field_from_string(f, value);
                found = true;
                break;
            }
        }
        if (!found)
            throw config_error("config line " + std::to_string(line_no) + ": unknown key " + section + "." + key);
    }
    return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

/// Applies one `section.key=value` override.
inline void apply_override(PipelineConfig& cfg, const std::string& spec) {
    auto eq = spec.find('=');
    auto dot = spec.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw config_error("override must be section.key=value: " + spec);
    const std::string section = spec.substr(0, dot);
    const std::string key = spec.substr(dot + 1, eq - dot - 1);
    const std::string value = spec.substr(eq + 1);
    auto fields = config_detail::registry(cfg);
    for (const auto& f : fields) {
        if (section == f.section && key == f.key) {
            config_detail::field_from_string(f, value);
            return;
        }
    }
    throw config_error("unknown config key: " + section + "." + key);
}

inline std::string config_hash(const PipelineConfig& cfg) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a64(serialize_config(cfg))));
    return buf;
}

}  // namespace aed
