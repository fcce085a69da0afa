#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ddx/ml/train_config.hpp"
#include "ddx/ml/vocabulary.hpp"
#include "ddx/rng.hpp"

namespace ddx {

// Temporal-convolution classifier: embedding, three conv(kernel 3, stride 1,
// zero same-padding) + ReLU layers, flatten, then dropout|fc|ReLU and
// dropout|fc|softmax. Defaults give the reference stack
// 200x50 -> 200x256 -> 200x128 -> 200x64 -> 12800 -> 180 -> K.
struct ConvNetConfig {
    int seq_len = 200;
    int embed_dim = 50;
    std::array<int, 3> filters{256, 128, 64};
    int kernel = 3;
    int fc_hidden = 180;
    double dropout = 0.5;
    int vocab_size = 0; // |Z|; embedding holds vocab_size + 1 rows (row 0 = pad)
    int n_classes = 0;

    int flat_dim() const { return seq_len * filters[2]; }
    void validate() const;

    nlohmann::json to_json() const;
    static ConvNetConfig from_json(const nlohmann::json& j); // rejects unknown keys
};

template <typename S>
struct ConvNetT {
    ConvNetConfig cfg;
    std::vector<S> embedding; // (V+1) x E, row-major
    std::array<std::vector<S>, 3> conv_w; // [l]: C_out x (kernel * C_in)
    std::array<std::vector<S>, 3> conv_b; // [l]: C_out
    std::vector<S> fc1_w; // H x flat_dim
    std::vector<S> fc1_b; // H
    std::vector<S> fc2_w; // K x H
    std::vector<S> fc2_b; // K

    std::vector<std::vector<S>*> param_groups() {
        return {&embedding, &conv_w[0], &conv_b[0], &conv_w[1], &conv_b[1],
                &conv_w[2], &conv_b[2], &fc1_w,     &fc1_b,     &fc2_w,    &fc2_b};
    }
    std::vector<const std::vector<S>*> param_groups() const {
        return {&embedding, &conv_w[0], &conv_b[0], &conv_w[1], &conv_b[1],
                &conv_w[2], &conv_b[2], &fc1_w,     &fc1_b,     &fc2_w,    &fc2_b};
    }
    std::size_t n_params() const {
        std::size_t n = 0;
        for (const auto* g : param_groups()) n += g->size();
        return n;
    }
};

using ConvNet = ConvNetT<float>;
using ConvNetD = ConvNetT<double>;

// Glorot-uniform conv/fc weights, uniform(-0.05, 0.05) embeddings, zero
// biases; fill order is fixed so (config, seed) pins every parameter.
template <typename S>
ConvNetT<S> init_convnet(const ConvNetConfig& cfg, std::uint64_t seed);

template <typename S>
struct ConvActivations {
    std::vector<S> embedded;                 // seq x E
    std::array<std::vector<S>, 3> conv_out;  // post-ReLU, seq x C_l
    std::vector<S> mask_flat;                // dropout factors, flat_dim (train mode)
    std::vector<S> flat_dropped;             // flat_dim
    std::vector<S> fc1_out;                  // post-ReLU, H
    std::vector<S> mask_fc1;                 // dropout factors, H (train mode)
    std::vector<S> fc1_dropped;              // H
    std::vector<double> probs;               // K

    // (layer name, shape) trace in forward order.
    std::vector<std::pair<std::string, std::vector<int>>> shape_trace(const ConvNetConfig& cfg) const;
};

// rng is only consumed in train mode (dropout masks).
template <typename S>
void convnet_forward(const ConvNetT<S>& model, const std::vector<int>& token_ids, bool train_mode,
                     Rng* rng, ConvActivations<S>& acts);

template <typename S>
std::vector<double> convnet_predict(const ConvNetT<S>& model, const std::vector<int>& token_ids);

template <typename S>
struct ConvGrads {
    std::vector<S> embedding;
    std::array<std::vector<S>, 3> conv_w;
    std::array<std::vector<S>, 3> conv_b;
    std::vector<S> fc1_w, fc1_b, fc2_w, fc2_b;

    explicit ConvGrads(const ConvNetT<S>& model);
    void zero();
    void add(const ConvGrads& other);

    std::vector<std::vector<S>*> param_groups() {
        return {&embedding, &conv_w[0], &conv_b[0], &conv_w[1], &conv_b[1],
                &conv_w[2], &conv_b[2], &fc1_w,     &fc1_b,     &fc2_w,    &fc2_b};
    }
};

// NLL backprop for one example; gradients accumulate (+=). Forward activations
// must come from the same (model, token_ids, mode) call. Returns the NLL.
template <typename S>
double convnet_backward(const ConvNetT<S>& model, const std::vector<int>& token_ids, int label,
                        const ConvActivations<S>& acts, ConvGrads<S>& grads);

double convnet_top1(const ConvNet& model, const EncodedDataset& data);

struct ConvTrainResult {
    ConvNet model;
    TrainReport report;
};

// Per-epoch data provider; epoch -1 must return the reference encoding used
// for shape checks. Providers re-encode when augmentation is on.
using EpochDataFn = std::function<const EncodedDataset&(int epoch)>;

ConvTrainResult convnet_train(const EncodedDataset& train, const EncodedDataset& val,
                              const ConvNetConfig& arch, const TrainConfig& config);

ConvTrainResult convnet_train_provider(const EpochDataFn& provider, const EncodedDataset& val,
                                       const ConvNetConfig& arch, const TrainConfig& config);

// Dataset-level wrapper handling the noise-augment and token-shuffle paths:
// with noise_augment = n, every training case gains up to n prevalent-pool
// findings before encoding, fresh each epoch.
ConvTrainResult convnet_train_cases(const Dataset& train, const Dataset& val,
                                    const KnowledgeBase& kb, const Vocabulary& vocab,
                                    const LabelMap& labels, const std::vector<int>& pool,
                                    const ConvNetConfig& arch, const TrainConfig& config);

} // namespace ddx
