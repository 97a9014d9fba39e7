#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "aed/errors.hpp"
#include "aed/linalg.hpp"
#include "aed/rng.hpp"
#include "aed/transforms.hpp"

namespace aed {

// ---------------------------------------------------------------------------
// Layer operations
// ---------------------------------------------------------------------------

/// Valid-mode 2D cross-correlation of a single-channel image with n_k square
/// kernels plus per-filter bias. Output is filter-major: out[f][i][j] at
/// f*(h2*w2) + i*w2 + j, with h2 = h1-k+1, w2 = w1-k+1.
template <typename T>
void conv2d_forward(const T* x, std::size_t h1, std::size_t w1, const T* kernels, std::size_t n_k,
                    std::size_t k, const std::type_identity_t<T>* bias, T* out) {
    if (k > h1 || k > w1) throw config_error("conv2d: kernel larger than input");
    const std::size_t h2 = h1 - k + 1;
    const std::size_t w2 = w1 - k + 1;
    for (std::size_t f = 0; f < n_k; ++f) {
        const T* ker = kernels + f * k * k;
        T* dst = out + f * h2 * w2;
        for (std::size_t i = 0; i < h2; ++i) {
            for (std::size_t j = 0; j < w2; ++j) {
                T acc = bias != nullptr ? bias[f] : T(0);
                for (std::size_t di = 0; di < k; ++di)
                    for (std::size_t dj = 0; dj < k; ++dj)
                        acc += x[(i + di) * w1 + (j + dj)] * ker[di * k + dj];
                dst[i * w2 + j] = acc;
            }
        }
    }
}

/// Affine map followed by an activation: out = phi(W x + b), W is n x m
/// row-major. phi is ReLU when `relu` is set, identity otherwise.
template <typename T>
std::vector<T> dense_forward(const T* x, const T* W, const T* b, std::size_t n, std::size_t m, bool relu) {
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        T acc = b != nullptr ? b[i] : T(0);
        const T* row = W + i * m;
        for (std::size_t j = 0; j < m; ++j) acc += row[j] * x[j];
        out[i] = relu && acc < T(0) ? T(0) : acc;
    }
    return out;
}

/// Softmax cross-entropy over two-class logits for a batch. Probabilities
/// use max-subtraction for stability; loss is the mean negative
/// log-likelihood and the gradient is (prob - onehot)/batch.
template <typename T>
struct SoftmaxResult {
    std::vector<T> probs;    // B x 2
    double loss = 0.0;
    std::vector<T> dlogits;  // B x 2
};

template <typename T>
SoftmaxResult<T> softmax_xent(const T* logits, const T* onehot, std::size_t batch) {
    SoftmaxResult<T> res;
    res.probs.resize(batch * 2);
    res.dlogits.resize(batch * 2);
    double loss = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
        const T l0 = logits[2 * i], l1 = logits[2 * i + 1];
        const T mx = std::max(l0, l1);
        const T e0 = std::exp(l0 - mx), e1 = std::exp(l1 - mx);
        const T z = e0 + e1;
        const T p0 = e0 / z, p1 = e1 / z;
        res.probs[2 * i] = p0;
        res.probs[2 * i + 1] = p1;
        const double pt = onehot[2 * i] > T(0.5) ? static_cast<double>(p0) : static_cast<double>(p1);
        loss -= std::log(std::max(pt, 1e-300));
        res.dlogits[2 * i] = (p0 - onehot[2 * i]) / static_cast<T>(batch);
        res.dlogits[2 * i + 1] = (p1 - onehot[2 * i + 1]) / static_cast<T>(batch);
    }
    res.loss = loss / static_cast<double>(batch);
    return res;
}

/// Inverted dropout: in train mode each unit is zeroed with probability p and
/// survivors are scaled by 1/(1-p); eval mode is the identity.
template <typename T>
std::vector<T> dropout_apply(std::vector<T> x, double p, bool train, Rng& rng) {
    if (!train || p <= 0.0) return x;
    const T scale = static_cast<T>(1.0 / (1.0 - p));
    for (auto& v : x) v = rng.uniform() < p ? T(0) : v * scale;
    return x;
}

// ---------------------------------------------------------------------------
// Specs and models
// ---------------------------------------------------------------------------

struct CnnSpec {
    std::size_t h1 = 256, w1 = 10;
    std::size_t k = 5, n_k = 32, n_d = 128;
    double dropout_p = 0.5;

    std::size_t h2() const { return h1 - k + 1; }
    std::size_t w2() const { return w1 - k + 1; }
    std::size_t flat() const { return h2() * w2() * n_k; }
    std::size_t param_count() const { return n_k * k * k + n_k + n_d * flat() + n_d + 2 * n_d + 2; }

    void validate() const {
        if (k == 0 || k > std::min(h1, w1)) throw config_error("cnn spec: kernel must fit the input");
        if (n_k == 0 || n_d == 0) throw config_error("cnn spec: filter and dense counts must be positive");
        if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw config_error("cnn spec: dropout_p in [0,1)");
    }
};

struct MlpSpec {
    std::size_t input_dim = 2560;  // h1 * w1
    std::size_t l = 2056, m = 64;
    double dropout_p = 0.5;

    std::size_t param_count() const { return l * input_dim + l + m * l + m + 2 * m + 2; }

    void validate() const {
        if (input_dim == 0 || l == 0 || m == 0) throw config_error("mlp spec: dimensions must be positive");
        if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw config_error("mlp spec: dropout_p in [0,1)");
    }
};

template <typename T>
struct Grads {
    std::vector<std::vector<T>> tensors;

    void init_like(const std::vector<std::vector<T>*>& params) {
        tensors.clear();
        for (const auto* p : params) tensors.emplace_back(p->size(), T(0));
    }
    void zero() {
        for (auto& t : tensors) std::fill(t.begin(), t.end(), T(0));
    }
};

namespace nn_detail {

template <typename T>
void he_uniform(std::vector<T>& w, std::size_t fan_in, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (auto& v : w) v = static_cast<T>(rng.uniform(-limit, limit));
}

}  // namespace nn_detail

/// Single conv layer + ReLU + dense + ReLU + dropout + dense-2 + softmax.
/// Batches are processed through an im2col buffer so the heavy lifting is
/// plain GEMM. Scratch buffers persist across calls; instances are not
/// shareable between threads.
template <typename T>
class CnnNet {
public:
    CnnSpec spec;
    std::vector<T> kernels, conv_bias;  // n_k x k*k, n_k
    std::vector<T> w1, b1;              // n_d x flat, n_d
    std::vector<T> w2, b2;              // 2 x n_d, 2

    explicit CnnNet(const CnnSpec& s) : spec(s) {
        spec.validate();
        kernels.assign(spec.n_k * spec.k * spec.k, T(0));
        conv_bias.assign(spec.n_k, T(0));
        w1.assign(spec.n_d * spec.flat(), T(0));
        b1.assign(spec.n_d, T(0));
        w2.assign(2 * spec.n_d, T(0));
        b2.assign(2, T(0));
    }

    void init_params(Rng& rng) {
        nn_detail::he_uniform(kernels, spec.k * spec.k, rng);
        nn_detail::he_uniform(w1, spec.flat(), rng);
        nn_detail::he_uniform(w2, spec.n_d, rng);
    }

    std::vector<std::vector<T>*> params() {
        return {&kernels, &conv_bias, &w1, &b1, &w2, &b2};
    }
    std::vector<const std::vector<T>*> params() const {
        return {&kernels, &conv_bias, &w1, &b1, &w2, &b2};
    }

    /// Forward pass; fills probs (B x 2). `dropout_rng` non-null selects
    /// train mode for the dropout layer.
    void forward(const T* X, std::size_t B, std::vector<T>& probs, Rng* dropout_rng) {
        run(X, nullptr, B, nullptr, dropout_rng, &probs, [](double, std::size_t) {});
    }

    /// Forward + backward on one batch; accumulates into zeroed grads and
    /// returns {mean loss, correct predictions}.
    std::pair<double, std::size_t> loss_grad(const T* X, const T* Y, std::size_t B, Grads<T>& g,
                                             Rng* dropout_rng) {
        double loss = 0.0;
        std::size_t correct = 0;
        run(X, Y, B, &g, dropout_rng, nullptr, [&](double l, std::size_t c) {
            loss = l;
            correct = c;
        });
        return {loss, correct};
    }

    std::pair<double, std::size_t> loss_only(const T* X, const T* Y, std::size_t B) {
        double loss = 0.0;
        std::size_t correct = 0;
        run(X, Y, B, nullptr, nullptr, nullptr, [&](double l, std::size_t c) {
            loss = l;
            correct = c;
        });
        return {loss, correct};
    }

private:
    // One fused pass. `g` non-null requests backward; labels Y required then.
    template <typename Report>
    void run(const T* X, const T* Y, std::size_t B, Grads<T>* g, Rng* dropout_rng,
             std::vector<T>* probs_out, Report report) {
        const std::size_t hw = spec.h2() * spec.w2();
        const std::size_t kk = spec.k * spec.k;
        const std::size_t flat = spec.flat();

        cols_.assign(B * hw * kk, T(0));
        z1_.assign(B * flat, T(0));
        for (std::size_t s = 0; s < B; ++s) {
            const T* x = X + s * spec.h1 * spec.w1;
            T* c = cols_.data() + s * hw * kk;
            for (std::size_t i = 0; i < spec.h2(); ++i)
                for (std::size_t j = 0; j < spec.w2(); ++j) {
                    T* row = c + (i * spec.w2() + j) * kk;
                    for (std::size_t di = 0; di < spec.k; ++di)
                        for (std::size_t dj = 0; dj < spec.k; ++dj)
                            row[di * spec.k + dj] = x[(i + di) * spec.w1 + (j + dj)];
                }
            // position-major feature maps: z1[p*n_k + f]
            gemm_a_bt_accumulate(hw, spec.n_k, kk, c, kernels.data(), z1_.data() + s * flat);
        }
        for (std::size_t s = 0; s < B; ++s) {
            T* z = z1_.data() + s * flat;
            for (std::size_t p = 0; p < hw; ++p)
                for (std::size_t f = 0; f < spec.n_k; ++f) z[p * spec.n_k + f] += conv_bias[f];
        }
        a1_.assign(z1_.begin(), z1_.end());
        for (auto& v : a1_)
            if (v < T(0)) v = T(0);

        z2_.assign(B * spec.n_d, T(0));
        gemm_a_bt_accumulate(B, spec.n_d, flat, a1_.data(), w1.data(), z2_.data());
        for (std::size_t s = 0; s < B; ++s)
            for (std::size_t i = 0; i < spec.n_d; ++i) z2_[s * spec.n_d + i] += b1[i];
        a2_.assign(z2_.begin(), z2_.end());
        for (auto& v : a2_)
            if (v < T(0)) v = T(0);

        const bool train_mode = dropout_rng != nullptr && spec.dropout_p > 0.0;
        mask_.assign(B * spec.n_d, T(1));
        if (train_mode) {
            const T scale = static_cast<T>(1.0 / (1.0 - spec.dropout_p));
            for (auto& mv : mask_) mv = dropout_rng->uniform() < spec.dropout_p ? T(0) : scale;
            for (std::size_t i = 0; i < a2_.size(); ++i) a2_[i] *= mask_[i];
        }

        logits_.assign(B * 2, T(0));
        gemm_a_bt_accumulate(B, 2, spec.n_d, a2_.data(), w2.data(), logits_.data());
        for (std::size_t s = 0; s < B; ++s) {
            logits_[s * 2] += b2[0];
            logits_[s * 2 + 1] += b2[1];
        }

        if (Y == nullptr) {
            auto sm = softmax_xent(logits_.data(), logits_.data(), B);  // labels unused for probs
            if (probs_out != nullptr) *probs_out = std::move(sm.probs);
            return;
        }
        auto sm = softmax_xent(logits_.data(), Y, B);
        std::size_t correct = 0;
        for (std::size_t s = 0; s < B; ++s) {
            const bool pred1 = sm.probs[2 * s + 1] >= sm.probs[2 * s];
            const bool true1 = Y[2 * s + 1] > T(0.5);
            if (pred1 == true1) ++correct;
        }
        if (probs_out != nullptr) *probs_out = sm.probs;
        report(sm.loss, correct);
        if (g == nullptr) return;

        // backward
        auto& dlog = sm.dlogits;  // B x 2
        auto& dW2 = g->tensors[4];
        auto& db2 = g->tensors[5];
        gemm_at_b_accumulate(2, spec.n_d, B, dlog.data(), a2_.data(), dW2.data());
        for (std::size_t s = 0; s < B; ++s) {
            db2[0] += dlog[2 * s];
            db2[1] += dlog[2 * s + 1];
        }
        da2_.assign(B * spec.n_d, T(0));
        gemm_accumulate(B, spec.n_d, 2, dlog.data(), w2.data(), da2_.data());
        for (std::size_t i = 0; i < da2_.size(); ++i) {
            da2_[i] *= mask_[i];                      // dropout backward
            if (z2_[i] <= T(0)) da2_[i] = T(0);       // ReLU backward
        }
        auto& dW1 = g->tensors[2];
        auto& db1 = g->tensors[3];
        gemm_at_b_accumulate(spec.n_d, flat, B, da2_.data(), a1_.data(), dW1.data());
        for (std::size_t s = 0; s < B; ++s)
            for (std::size_t i = 0; i < spec.n_d; ++i) db1[i] += da2_[s * spec.n_d + i];
        da1_.assign(B * flat, T(0));
        gemm_accumulate(B, flat, spec.n_d, da2_.data(), w1.data(), da1_.data());
        for (std::size_t i = 0; i < da1_.size(); ++i)
            if (z1_[i] <= T(0)) da1_[i] = T(0);

        auto& dK = g->tensors[0];
        auto& dcb = g->tensors[1];
        for (std::size_t s = 0; s < B; ++s) {
            const T* dz = da1_.data() + s * flat;  // hw x n_k
            gemm_at_b_accumulate(spec.n_k, kk, hw, dz, cols_.data() + s * hw * kk, dK.data());
            for (std::size_t p = 0; p < hw; ++p)
                for (std::size_t f = 0; f < spec.n_k; ++f) dcb[f] += dz[p * spec.n_k + f];
        }
    }

    std::vector<T> cols_, z1_, a1_, z2_, a2_, mask_, logits_, da2_, da1_;
};

/// Two hidden ReLU layers + dropout + dense-2 + softmax, on flattened patches.
template <typename T>
class MlpNet {
public:
    MlpSpec spec;
    std::vector<T> w1, b1;  // L x D, L
    std::vector<T> w2, b2;  // M x L, M
    std::vector<T> w3, b3;  // 2 x M, 2

    explicit MlpNet(const MlpSpec& s) : spec(s) {
        spec.validate();
        w1.assign(spec.l * spec.input_dim, T(0));
        b1.assign(spec.l, T(0));
        w2.assign(spec.m * spec.l, T(0));
        b2.assign(spec.m, T(0));
        w3.assign(2 * spec.m, T(0));
        b3.assign(2, T(0));
    }

    void init_params(Rng& rng) {
        nn_detail::he_uniform(w1, spec.input_dim, rng);
        nn_detail::he_uniform(w2, spec.l, rng);
        nn_detail::he_uniform(w3, spec.m, rng);
    }

    std::vector<std::vector<T>*> params() { return {&w1, &b1, &w2, &b2, &w3, &b3}; }
    std::vector<const std::vector<T>*> params() const { return {&w1, &b1, &w2, &b2, &w3, &b3}; }

    void forward(const T* X, std::size_t B, std::vector<T>& probs, Rng* dropout_rng) {
        run(X, nullptr, B, nullptr, dropout_rng, &probs, [](double, std::size_t) {});
    }

    std::pair<double, std::size_t> loss_grad(const T* X, const T* Y, std::size_t B, Grads<T>& g,
                                             Rng* dropout_rng) {
        double loss = 0.0;
        std::size_t correct = 0;
        run(X, Y, B, &g, dropout_rng, nullptr, [&](double l, std::size_t c) {
            loss = l;
            correct = c;
        });
        return {loss, correct};
    }

    std::pair<double, std::size_t> loss_only(const T* X, const T* Y, std::size_t B) {
        double loss = 0.0;
        std::size_t correct = 0;
        run(X, Y, B, nullptr, nullptr, nullptr, [&](double l, std::size_t c) {
            loss = l;
            correct = c;
        });
        return {loss, correct};
    }

private:
    template <typename Report>
    void run(const T* X, const T* Y, std::size_t B, Grads<T>* g, Rng* dropout_rng,
             std::vector<T>* probs_out, Report report) {
        const std::size_t D = spec.input_dim, L = spec.l, M = spec.m;
        z1_.assign(B * L, T(0));
        gemm_a_bt_accumulate(B, L, D, X, w1.data(), z1_.data());
        for (std::size_t s = 0; s < B; ++s)
            for (std::size_t i = 0; i < L; ++i) z1_[s * L + i] += b1[i];
        a1_.assign(z1_.begin(), z1_.end());
        for (auto& v : a1_)
            if (v < T(0)) v = T(0);

        z2_.assign(B * M, T(0));
        gemm_a_bt_accumulate(B, M, L, a1_.data(), w2.data(), z2_.data());
        for (std::size_t s = 0; s < B; ++s)
            for (std::size_t i = 0; i < M; ++i) z2_[s * M + i] += b2[i];
        a2_.assign(z2_.begin(), z2_.end());
        for (auto& v : a2_)
            if (v < T(0)) v = T(0);

        const bool train_mode = dropout_rng != nullptr && spec.dropout_p > 0.0;
        mask_.assign(B * M, T(1));
        if (train_mode) {
            const T scale = static_cast<T>(1.0 / (1.0 - spec.dropout_p));
            for (auto& mv : mask_) mv = dropout_rng->uniform() < spec.dropout_p ? T(0) : scale;
            for (std::size_t i = 0; i < a2_.size(); ++i) a2_[i] *= mask_[i];
        }

        logits_.assign(B * 2, T(0));
        gemm_a_bt_accumulate(B, 2, M, a2_.data(), w3.data(), logits_.data());
        for (std::size_t s = 0; s < B; ++s) {
            logits_[s * 2] += b3[0];
            logits_[s * 2 + 1] += b3[1];
        }

        if (Y == nullptr) {
            auto sm = softmax_xent(logits_.data(), logits_.data(), B);
            if (probs_out != nullptr) *probs_out = std::move(sm.probs);
            return;
        }
        auto sm = softmax_xent(logits_.data(), Y, B);
        std::size_t correct = 0;
        for (std::size_t s = 0; s < B; ++s) {
            const bool pred1 = sm.probs[2 * s + 1] >= sm.probs[2 * s];
            if (pred1 == (Y[2 * s + 1] > T(0.5))) ++correct;
        }
        if (probs_out != nullptr) *probs_out = sm.probs;
        report(sm.loss, correct);
        if (g == nullptr) return;

        auto& dlog = sm.dlogits;
        auto& dW3 = g->tensors[4];
        auto& db3 = g->tensors[5];
        gemm_at_b_accumulate(2, M, B, dlog.data(), a2_.data(), dW3.data());
        for (std::size_t s = 0; s < B; ++s) {
            db3[0] += dlog[2 * s];
            db3[1] += dlog[2 * s + 1];
        }
        da2_.assign(B * M, T(0));
        gemm_accumulate(B, M, 2, dlog.data(), w3.data(), da2_.data());
        for (std::size_t i = 0; i < da2_.size(); ++i) {
            da2_[i] *= mask_[i];
            if (z2_[i] <= T(0)) da2_[i] = T(0);
        }
        auto& dW2 = g->tensors[2];
        auto& db2g = g->tensors[3];
        gemm_at_b_accumulate(M, L, B, da2_.data(), a1_.data(), dW2.data());
        for (std::size_t s = 0; s < B; ++s)
            for (std::size_t i = 0; i < M; ++i) db2g[i] += da2_[s * M + i];
        da1_.assign(B * L, T(0));
        gemm_accumulate(B, L, M, da2_.data(), w2.data(), da1_.data());
        for (std::size_t i = 0; i < da1_.size(); ++i)
            if (z1_[i] <= T(0)) da1_[i] = T(0);
        auto& dW1 = g->tensors[0];
        auto& db1g = g->tensors[1];
        gemm_at_b_accumulate(L, D, B, da1_.data(), X, dW1.data());
        for (std::size_t s = 0; s < B; ++s)
            for (std::size_t i = 0; i < L; ++i) db1g[i] += da1_[s * L + i];
    }

    std::vector<T> z1_, a1_, z2_, a2_, mask_, logits_, da2_, da1_;
};

// ---------------------------------------------------------------------------
// Optimizers and the training loop
// ---------------------------------------------------------------------------

struct TrainConfig {
    std::size_t batch_size = 256;
    std::size_t max_epochs = 20;
    std::string optimizer = "adam";  // adam | sgd
    double learning_rate = 1e-3;
    std::size_t early_stop_patience = 5;
    double val_fraction = 0.1;
    std::uint64_t seed = 1;

    bool operator==(const TrainConfig&) const = default;

    void validate() const {
        if (batch_size == 0) throw config_error("train: batch_size must be positive");
        if (max_epochs == 0) throw config_error("train: need at least one epoch");
        if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw config_error("train: val_fraction in (0,1)");
        if (optimizer != "adam" && optimizer != "sgd") throw config_error("train: unknown optimizer");
        if (learning_rate < 0.0) throw config_error("train: negative learning rate");
    }
};

template <typename T>
class Optimizer {
public:
    Optimizer(const TrainConfig& cfg, const std::vector<std::vector<T>*>& params) : cfg_(cfg) {
        if (cfg.optimizer == "adam") {
            m_.resize(params.size());
            v_.resize(params.size());
            for (std::size_t i = 0; i < params.size(); ++i) {
                m_[i].assign(params[i]->size(), T(0));
                v_[i].assign(params[i]->size(), T(0));
            }
        }
    }

    void step(const std::vector<std::vector<T>*>& params, const Grads<T>& g) {
        const auto lr = static_cast<T>(cfg_.learning_rate);
        if (cfg_.optimizer == "sgd") {
            for (std::size_t i = 0; i < params.size(); ++i) {
                auto& p = *params[i];
                for (std::size_t j = 0; j < p.size(); ++j) p[j] -= lr * g.tensors[i][j];
            }
            return;
        }
        ++t_;
        const T beta1 = T(0.9), beta2 = T(0.999), eps = T(1e-8);
        const T bc1 = T(1) - static_cast<T>(std::pow(0.9, t_));
        const T bc2 = T(1) - static_cast<T>(std::pow(0.999, t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto& p = *params[i];
            for (std::size_t j = 0; j < p.size(); ++j) {
                const T gr = g.tensors[i][j];
                m_[i][j] = beta1 * m_[i][j] + (T(1) - beta1) * gr;
                v_[i][j] = beta2 * v_[i][j] + (T(1) - beta2) * gr * gr;
                const T mh = m_[i][j] / bc1;
                const T vh = v_[i][j] / bc2;
                p[j] -= lr * mh / (std::sqrt(vh) + eps);
            }
        }
    }

private:
    TrainConfig cfg_;
    int t_ = 0;
    std::vector<std::vector<T>> m_, v_;
};

struct EpochStats {
    double train_loss = 0.0, train_acc = 0.0;
    double val_loss = 0.0, val_acc = 0.0;
};

struct TrainingHistory {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;  // 0-based index into epochs
};

namespace nn_detail {

/// Stratified validation split: per class, the last round(frac*n_c) of a
/// seeded shuffle go to validation (at least one sample of each class stays
/// in training).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split(const PatchDataset& data, double frac, std::uint64_t seed) {
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < data.size(); ++i) by_class[data.label(i)].push_back(i);
    if (by_class[0].empty() || by_class[1].empty())
        throw data_error("train: both classes must be present");
    Rng rng(derive_seed(seed, "val_split"));
    std::vector<std::size_t> train_idx, val_idx;
    for (auto& cls : by_class) {
        rng.shuffle(cls);
        auto n_val = static_cast<std::size_t>(std::llround(frac * static_cast<double>(cls.size())));
        n_val = std::min(n_val, cls.size() - 1);
        for (std::size_t i = 0; i < cls.size(); ++i)
            (i < cls.size() - n_val ? train_idx : val_idx).push_back(cls[i]);
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
    return {train_idx, val_idx};
}

template <typename Net, typename T>
std::pair<double, double> evaluate(Net& net, const PatchDataset& data,
                                   const std::vector<std::size_t>& idx, std::size_t batch_size,
                                   std::vector<T>& xbuf, std::vector<T>& ybuf) {
    if (idx.empty()) return {0.0, 0.0};
    const std::size_t dim = data.rows * data.cols;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < idx.size(); start += batch_size) {
        const std::size_t B = std::min(batch_size, idx.size() - start);
        xbuf.resize(B * dim);
        ybuf.resize(B * 2);
        for (std::size_t s = 0; s < B; ++s) {
            const float* src = data.patch(idx[start + s]);
            for (std::size_t j = 0; j < dim; ++j) xbuf[s * dim + j] = static_cast<T>(src[j]);
            ybuf[s * 2] = static_cast<T>(data.labels_onehot[2 * idx[start + s]]);
            ybuf[s * 2 + 1] = static_cast<T>(data.labels_onehot[2 * idx[start + s] + 1]);
        }
        auto [loss, corr] = net.loss_only(xbuf.data(), ybuf.data(), B);
        loss_sum += loss * static_cast<double>(B);
        correct += corr;
    }
    return {loss_sum / static_cast<double>(idx.size()),
            static_cast<double>(correct) / static_cast<double>(idx.size())};
}

/// Mini-batch training with epoch-end validation and early stopping on
/// validation accuracy; restores the best-epoch parameters on return.
template <typename Net, typename T>
TrainingHistory train_network(Net& net, const PatchDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.size() == 0) throw data_error("train: empty dataset");
    const std::size_t dim = data.rows * data.cols;

    auto [train_idx, val_idx] = stratified_split(data, cfg.val_fraction, cfg.seed);
    {
        bool has0 = false, has1 = false;
        for (std::size_t i : train_idx) (data.label(i) == 1 ? has1 : has0) = true;
        if (!has0 || !has1) throw data_error("train: a class is empty after the validation split");
    }

    Rng init_rng(derive_seed(cfg.seed, "init"));
    net.init_params(init_rng);
    Rng train_rng(derive_seed(cfg.seed, "train"));

    auto params = net.params();
    Optimizer<T> opt(cfg, params);
    Grads<T> grads;
    grads.init_like(params);

    TrainingHistory history;
    std::vector<std::vector<T>> best_params;
    double best_val_acc = -1.0;
    std::size_t since_best = 0;
    std::vector<T> xbuf, ybuf;

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        train_rng.shuffle(train_idx);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
            const std::size_t B = std::min(cfg.batch_size, train_idx.size() - start);
            xbuf.resize(B * dim);
            ybuf.resize(B * 2);
            for (std::size_t s = 0; s < B; ++s) {
                const std::size_t i = train_idx[start + s];
                const float* src = data.patch(i);
                for (std::size_t j = 0; j < dim; ++j) xbuf[s * dim + j] = static_cast<T>(src[j]);
                ybuf[s * 2] = static_cast<T>(data.labels_onehot[2 * i]);
                ybuf[s * 2 + 1] = static_cast<T>(data.labels_onehot[2 * i + 1]);
            }
            grads.zero();
            auto [loss, corr] = net.loss_grad(xbuf.data(), ybuf.data(), B, grads, &train_rng);
            loss_sum += loss * static_cast<double>(B);
            correct += corr;
            opt.step(params, grads);
        }

        EpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(train_idx.size());
        stats.train_acc = static_cast<double>(correct) / static_cast<double>(train_idx.size());
        auto [vl, va] = evaluate<Net, T>(net, data, val_idx, cfg.batch_size, xbuf, ybuf);
        stats.val_loss = vl;
        stats.val_acc = va;
        history.epochs.push_back(stats);

        if (stats.val_acc > best_val_acc) {
            best_val_acc = stats.val_acc;
            history.best_epoch = epoch;
            best_params.clear();
            for (const auto* p : params) best_params.push_back(*p);
            since_best = 0;
        } else {
            ++since_best;
            if (since_best >= cfg.early_stop_patience) break;
        }
    }

    for (std::size_t i = 0; i < params.size(); ++i) *params[i] = best_params[i];
    return history;
}

}  // namespace nn_detail

/// A trained network with its config, history and root seed.
struct TrainedModel {
    std::variant<CnnNet<float>, MlpNet<float>> net;
    TrainingHistory history;
    TrainConfig train_cfg;
    std::uint64_t seed = 0;

    bool is_cnn() const { return std::holds_alternative<CnnNet<float>>(net); }
};

inline TrainedModel train(const CnnSpec& spec, const PatchDataset& data, const TrainConfig& cfg) {
    if (data.rows != spec.h1 || data.cols != spec.w1)
        throw data_error("train: dataset patch shape does not match the CNN spec");
    TrainedModel m{CnnNet<float>(spec), {}, cfg, cfg.seed};
    m.history = nn_detail::train_network<CnnNet<float>, float>(std::get<CnnNet<float>>(m.net), data, cfg);
    return m;
}

inline TrainedModel train(const MlpSpec& spec, const PatchDataset& data, const TrainConfig& cfg) {
    if (data.rows * data.cols != spec.input_dim)
        throw data_error("train: dataset patch size does not match the MLP input dimension");
    TrainedModel m{MlpNet<float>(spec), {}, cfg, cfg.seed};
    m.history = nn_detail::train_network<MlpNet<float>, float>(std::get<MlpNet<float>>(m.net), data, cfg);
    return m;
}

/// Per-patch class probabilities in eval mode (dropout off); rows sum to 1.
inline std::vector<float> predict(TrainedModel& model, const PatchDataset& data) {
    const std::size_t dim = data.rows * data.cols;
    std::vector<float> probs(data.size() * 2);
    std::vector<float> xbuf;
    const std::size_t batch = 256;
    std::vector<float> batch_probs;
    for (std::size_t start = 0; start < data.size(); start += batch) {
        const std::size_t B = std::min(batch, data.size() - start);
        xbuf.assign(data.patch(start), data.patch(start) + B * dim);
        std::visit(
            [&](auto& net) {
                if constexpr (std::is_same_v<std::decay_t<decltype(net)>, CnnNet<float>>) {
                    if (data.rows != net.spec.h1 || data.cols != net.spec.w1)
                        throw data_error("predict: patch shape does not match the model");
                } else {
                    if (dim != net.spec.input_dim)
                        throw data_error("predict: patch size does not match the model");
                }
                net.forward(xbuf.data(), B, batch_probs, nullptr);
            },
            model.net);
        std::copy(batch_probs.begin(), batch_probs.end(), probs.begin() + static_cast<std::ptrdiff_t>(2 * start));
    }
    return probs;
}

}  // namespace aed
