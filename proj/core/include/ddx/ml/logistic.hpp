#pragma once

#include <vector>

#include "ddx/ml/train_config.hpp"
#include "ddx/ml/vocabulary.hpp"

namespace ddx {

// Multiclass logistic regression over binary token bags. Parameters are
// class-major: weights[k * n_features + f].
template <typename S>
struct LRModelT {
    int n_classes = 0;
    int n_features = 0;
    std::vector<S> weights; // K x F
    std::vector<S> bias;    // K
    double lambda = 0.01;

    std::vector<std::vector<S>*> param_groups() { return {&weights, &bias}; }
    std::vector<const std::vector<S>*> param_groups() const { return {&weights, &bias}; }
};

using LRModel = LRModelT<float>;
using LRModelD = LRModelT<double>;

template <typename S>
LRModelT<S> make_lr_model(int n_classes, int n_features, double lambda);

// Softmax class probabilities for one encoded sequence; sums to 1.
template <typename S>
std::vector<double> lr_predict(const LRModelT<S>& model, const std::vector<int>& token_ids);

// Per-example objective NLL(sample) + lambda * |W|^2 and its gradient,
// accumulated into grad_w / grad_b. Returns the NLL part.
template <typename S>
double lr_example_gradient(const LRModelT<S>& model, const std::vector<int>& active, int label,
                           std::vector<S>& grad_w, std::vector<S>& grad_b);

// Minibatch SGD on NLL + L2; returns the parameters at the best validation
// top-1. Throws Error("diverged") when the loss leaves the finite range.
LRModel lr_train(const EncodedDataset& train, const EncodedDataset& val, double lambda,
                 const TrainConfig& config, TrainReport* report = nullptr);

double lr_top1(const LRModel& model, const EncodedDataset& data);

} // namespace ddx
