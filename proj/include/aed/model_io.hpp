#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include "aed/baselines.hpp"
#include "aed/config.hpp"
#include "aed/io.hpp"
#include "aed/nn.hpp"
#include "aed/reduction.hpp"
#include "aed/transforms.hpp"

namespace aed {

/// Everything a model file carries: the transform recipe the model was
/// trained against, standardization/scaling state, and the learned
/// parameters. Format: "AEDMODEL" magic, u32 version, then the fields in
/// declared order (little-endian, 32-bit floats for network tensors).
struct ModelBundle {
    ModelFamily family = ModelFamily::cnn;
    std::uint64_t seed = 0;

    // transform recipe
    TfKind tf_kind = TfKind::cwt;
    std::size_t h1 = 256;
    std::size_t w1 = 10;
    double wavelet_mu = 5.0;
    double wavelet_sigma = 0.6;
    double f_min = 20.0;
    double f_max = 4000.0;
    int sample_rate = 8000;

    // neural path
    Standardization stats;
    std::optional<TrainedModel> nn;

    // baseline path
    BaselineFeatureKind feature_kind = BaselineFeatureKind::stft_slice;
    FeatureScaler scaler;
    ModelReduction reduction = ModelReduction::none;
    std::optional<PcaModel> pca;
    std::optional<RfeModel> rfe;
    std::optional<NbModel> nb;
    std::optional<RfModel> rf;
    std::optional<SvmModel> svm;

    bool is_neural() const { return family == ModelFamily::cnn || family == ModelFamily::mlp; }
};

namespace model_io_detail {

inline void write_tensors(std::ostream& os, const std::vector<const std::vector<float>*>& tensors) {
    for (const auto* t : tensors) bin::write_vec(os, *t);
}

inline void read_tensors(std::istream& is, const std::vector<std::vector<float>*>& tensors) {
    for (auto* t : tensors) {
        auto v = bin::read_vec<float>(is);
        if (v.size() != t->size()) throw data_error("model file: tensor shape mismatch");
        *t = std::move(v);
    }
}

}  // namespace model_io_detail

inline void save_model(const std::filesystem::path& path, const ModelBundle& m) {
    auto os = open_out(path, true);
    bin::write_bytes(os, "AEDMODEL", 8);
    bin::write_pod<std::uint32_t>(os, 1);
    bin::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(m.family));
    bin::write_pod<std::uint64_t>(os, m.seed);
    bin::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(m.tf_kind));
    bin::write_pod<std::uint64_t>(os, m.h1);
    bin::write_pod<std::uint64_t>(os, m.w1);
    bin::write_pod<double>(os, m.wavelet_mu);
    bin::write_pod<double>(os, m.wavelet_sigma);
    bin::write_pod<double>(os, m.f_min);
    bin::write_pod<double>(os, m.f_max);
    bin::write_pod<std::int32_t>(os, m.sample_rate);

    if (m.is_neural()) {
        if (!m.nn) throw data_error("save_model: missing network");
        bin::write_pod<double>(os, m.stats.mean);
        bin::write_pod<double>(os, m.stats.stdev);
        const auto& model = *m.nn;
        bin::write_pod<std::uint64_t>(os, model.seed);
        if (m.family == ModelFamily::cnn) {
            const auto& net = std::get<CnnNet<float>>(model.net);
            bin::write_pod<std::uint64_t>(os, net.spec.k);
            bin::write_pod<std::uint64_t>(os, net.spec.n_k);
            bin::write_pod<std::uint64_t>(os, net.spec.n_d);
            bin::write_pod<double>(os, net.spec.dropout_p);
            model_io_detail::write_tensors(
                os, {&net.kernels, &net.conv_bias, &net.w1, &net.b1, &net.w2, &net.b2});
        } else {
            const auto& net = std::get<MlpNet<float>>(model.net);
            bin::write_pod<std::uint64_t>(os, net.spec.input_dim);
            bin::write_pod<std::uint64_t>(os, net.spec.l);
            bin::write_pod<std::uint64_t>(os, net.spec.m);
            bin::write_pod<double>(os, net.spec.dropout_p);
            model_io_detail::write_tensors(os, {&net.w1, &net.b1, &net.w2, &net.b2, &net.w3, &net.b3});
        }
        // training history
        bin::write_pod<std::uint64_t>(os, model.history.epochs.size());
        bin::write_pod<std::uint64_t>(os, model.history.best_epoch);
        for (const auto& e : model.history.epochs) {
            bin::write_pod<double>(os, e.train_loss);
            bin::write_pod<double>(os, e.train_acc);
            bin::write_pod<double>(os, e.val_loss);
            bin::write_pod<double>(os, e.val_acc);
        }
        return;
    }

    bin::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(m.feature_kind));
    bin::write_vec(os, m.scaler.mean);
    bin::write_vec(os, m.scaler.stdev);
    bin::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(m.reduction));
    if (m.reduction == ModelReduction::pca) {
        if (!m.pca) throw data_error("save_model: missing PCA state");
        bin::write_pod<std::uint64_t>(os, m.pca->n_components);
        bin::write_pod<std::uint64_t>(os, m.pca->dim);
        bin::write_vec(os, m.pca->mean);
        bin::write_vec(os, m.pca->components);
        bin::write_vec(os, m.pca->explained);
    } else if (m.reduction == ModelReduction::rfe) {
        if (!m.rfe) throw data_error("save_model: missing RFE state");
        std::vector<std::uint64_t> sel(m.rfe->selected.begin(), m.rfe->selected.end());
        std::vector<std::uint64_t> rank(m.rfe->ranking.begin(), m.rfe->ranking.end());
        bin::write_vec(os, sel);
        bin::write_vec(os, rank);
    }

    switch (m.family) {
        case ModelFamily::nb: {
            if (!m.nb) throw data_error("save_model: missing NB state");
            bin::write_pod<std::uint64_t>(os, m.nb->dim);
            bin::write_pod<double>(os, m.nb->priors[0]);
            bin::write_pod<double>(os, m.nb->priors[1]);
            bin::write_vec(os, m.nb->mean);
            bin::write_vec(os, m.nb->var);
            break;
        }
        case ModelFamily::rf: {
            if (!m.rf) throw data_error("save_model: missing RF state");
            bin::write_pod<std::uint64_t>(os, m.rf->trees.size());
            for (std::size_t t = 0; t < m.rf->trees.size(); ++t) {
                bin::write_pod<std::uint64_t>(os, m.rf->tree_seeds[t]);
                const auto& tree = m.rf->trees[t];
                bin::write_pod<std::int32_t>(os, tree.root);
                bin::write_pod<std::uint64_t>(os, tree.nodes.size());
                for (const auto& n : tree.nodes) {
                    bin::write_pod<std::int32_t>(os, n.feature);
                    bin::write_pod<double>(os, n.threshold);
                    bin::write_pod<std::int32_t>(os, n.left);
                    bin::write_pod<std::int32_t>(os, n.right);
                    bin::write_pod<double>(os, n.frac[0]);
                    bin::write_pod<double>(os, n.frac[1]);
                }
            }
            break;
        }
        case ModelFamily::svm: {
            if (!m.svm) throw data_error("save_model: missing SVM state");
            bin::write_pod<double>(os, m.svm->cfg.C);
            bin::write_pod<double>(os, m.svm->cfg.gamma);
            bin::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(m.svm->cfg.kernel));
            bin::write_pod<double>(os, m.svm->cfg.tol);
            bin::write_pod<std::uint64_t>(os, m.svm->dim);
            bin::write_pod<double>(os, m.svm->bias);
            bin::write_pod<double>(os, m.svm->platt_a);
            bin::write_pod<double>(os, m.svm->platt_b);
            bin::write_pod<std::uint8_t>(os, m.svm->converged ? 1 : 0);
            bin::write_vec(os, m.svm->coef);
            bin::write_vec(os, m.svm->sv);
            break;
        }
        default: throw data_error("save_model: not a baseline family");
    }
}

inline ModelBundle load_model(const std::filesystem::path& path) {
    auto is = open_in(path, true);
    char magic[8];
    bin::read_bytes(is, magic, 8);
    if (std::string_view(magic, 8) != "AEDMODEL") throw data_error("not a model file: " + path.string());
    if (bin::read_pod<std::uint32_t>(is) != 1) throw data_error("unsupported model version: " + path.string());

    ModelBundle m;
    m.family = static_cast<ModelFamily>(bin::read_pod<std::uint8_t>(is));
    m.seed = bin::read_pod<std::uint64_t>(is);
    m.tf_kind = static_cast<TfKind>(bin::read_pod<std::uint8_t>(is));
    m.h1 = bin::read_pod<std::uint64_t>(is);
    m.w1 = bin::read_pod<std::uint64_t>(is);
    m.wavelet_mu = bin::read_pod<double>(is);
    m.wavelet_sigma = bin::read_pod<double>(is);
    m.f_min = bin::read_pod<double>(is);
    m.f_max = bin::read_pod<double>(is);
    m.sample_rate = bin::read_pod<std::int32_t>(is);

    if (m.is_neural()) {
        m.stats.mean = bin::read_pod<double>(is);
        m.stats.stdev = bin::read_pod<double>(is);
        const auto net_seed = bin::read_pod<std::uint64_t>(is);
        if (m.family == ModelFamily::cnn) {
            CnnSpec spec;
            spec.h1 = m.h1;
            spec.w1 = m.w1;
            spec.k = bin::read_pod<std::uint64_t>(is);
            spec.n_k = bin::read_pod<std::uint64_t>(is);
            spec.n_d = bin::read_pod<std::uint64_t>(is);
            spec.dropout_p = bin::read_pod<double>(is);
            TrainedModel tm{CnnNet<float>(spec), {}, {}, net_seed};
            auto& net = std::get<CnnNet<float>>(tm.net);
            model_io_detail::read_tensors(is,
                                          {&net.kernels, &net.conv_bias, &net.w1, &net.b1, &net.w2, &net.b2});
            m.nn = std::move(tm);
        } else {
            MlpSpec spec;
            spec.input_dim = bin::read_pod<std::uint64_t>(is);
            spec.l = bin::read_pod<std::uint64_t>(is);
            spec.m = bin::read_pod<std::uint64_t>(is);
            spec.dropout_p = bin::read_pod<double>(is);
            TrainedModel tm{MlpNet<float>(spec), {}, {}, net_seed};
            auto& net = std::get<MlpNet<float>>(tm.net);
            model_io_detail::read_tensors(is, {&net.w1, &net.b1, &net.w2, &net.b2, &net.w3, &net.b3});
            m.nn = std::move(tm);
        }
        const auto n_epochs = bin::read_pod<std::uint64_t>(is);
        m.nn->history.best_epoch = bin::read_pod<std::uint64_t>(is);
        m.nn->history.epochs.resize(n_epochs);
        for (auto& e : m.nn->history.epochs) {
            e.train_loss = bin::read_pod<double>(is);
            e.train_acc = bin::read_pod<double>(is);
            e.val_loss = bin::read_pod<double>(is);
            e.val_acc = bin::read_pod<double>(is);
        }
        return m;
    }

    m.feature_kind = static_cast<BaselineFeatureKind>(bin::read_pod<std::uint8_t>(is));
    m.scaler.mean = bin::read_vec<double>(is);
    m.scaler.stdev = bin::read_vec<double>(is);
    m.reduction = static_cast<ModelReduction>(bin::read_pod<std::uint8_t>(is));
    if (m.reduction == ModelReduction::pca) {
        PcaModel pca;
        pca.n_components = bin::read_pod<std::uint64_t>(is);
        pca.dim = bin::read_pod<std::uint64_t>(is);
        pca.mean = bin::read_vec<double>(is);
        pca.components = bin::read_vec<double>(is);
        pca.explained = bin::read_vec<double>(is);
        m.pca = std::move(pca);
    } else if (m.reduction == ModelReduction::rfe) {
        auto sel = bin::read_vec<std::uint64_t>(is);
        auto rank = bin::read_vec<std::uint64_t>(is);
        RfeModel rfe;
        rfe.selected.assign(sel.begin(), sel.end());
        rfe.ranking.assign(rank.begin(), rank.end());
        m.rfe = std::move(rfe);
    }

    switch (m.family) {
        case ModelFamily::nb: {
            NbModel nb;
            nb.dim = bin::read_pod<std::uint64_t>(is);
            nb.priors[0] = bin::read_pod<double>(is);
            nb.priors[1] = bin::read_pod<double>(is);
            nb.mean = bin::read_vec<double>(is);
            nb.var = bin::read_vec<double>(is);
            m.nb = std::move(nb);
            break;
        }
        case ModelFamily::rf: {
            RfModel rf;
            const auto n_trees = bin::read_pod<std::uint64_t>(is);
            rf.trees.resize(n_trees);
            rf.tree_seeds.resize(n_trees);
            for (std::size_t t = 0; t < n_trees; ++t) {
                rf.tree_seeds[t] = bin::read_pod<std::uint64_t>(is);
                rf.trees[t].root = bin::read_pod<std::int32_t>(is);
                const auto n_nodes = bin::read_pod<std::uint64_t>(is);
                rf.trees[t].nodes.resize(n_nodes);
                for (auto& n : rf.trees[t].nodes) {
                    n.feature = bin::read_pod<std::int32_t>(is);
                    n.threshold = bin::read_pod<double>(is);
                    n.left = bin::read_pod<std::int32_t>(is);
                    n.right = bin::read_pod<std::int32_t>(is);
                    n.frac[0] = bin::read_pod<double>(is);
                    n.frac[1] = bin::read_pod<double>(is);
                }
            }
            m.rf = std::move(rf);
            break;
        }
        case ModelFamily::svm: {
            SvmModel svm;
            svm.cfg.C = bin::read_pod<double>(is);
            svm.cfg.gamma = bin::read_pod<double>(is);
            svm.cfg.kernel = static_cast<SvmKernel>(bin::read_pod<std::uint8_t>(is));
            svm.cfg.tol = bin::read_pod<double>(is);
            svm.dim = bin::read_pod<std::uint64_t>(is);
            svm.bias = bin::read_pod<double>(is);
            svm.platt_a = bin::read_pod<double>(is);
            svm.platt_b = bin::read_pod<double>(is);
            svm.converged = bin::read_pod<std::uint8_t>(is) != 0;
            svm.coef = bin::read_vec<double>(is);
            svm.sv = bin::read_vec<double>(is);
            m.svm = std::move(svm);
            break;
        }
        default: throw data_error("model file: unknown family tag");
    }
    return m;
}

/// Human-readable sidecar with the per-epoch training history.
inline void write_history_csv(const std::filesystem::path& path, const TrainingHistory& h) {
    CsvWriter csv(path);
    csv.row({"epoch", "train_loss", "train_acc", "val_loss", "val_acc", "best"});
    for (std::size_t i = 0; i < h.epochs.size(); ++i) {
        const auto& e = h.epochs[i];
        csv.row({std::to_string(i + 1), fmt_g(e.train_loss), fmt_g(e.train_acc), fmt_g(e.val_loss),
                 fmt_g(e.val_acc), i == h.best_epoch ? "1" : "0"});
    }
}

}  // namespace aed
