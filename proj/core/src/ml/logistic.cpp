#include "ddx/ml/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ddx/rng.hpp"

namespace ddx {

template <typename S>
LRModelT<S> make_lr_model(int n_classes, int n_features, double lambda) {
    if (n_classes < 2) fail("config", "logistic regression needs at least 2 classes");
    if (n_features < 1) fail("config", "logistic regression needs at least 1 feature");
    LRModelT<S> m;
    m.n_classes = n_classes;
    m.n_features = n_features;
    m.lambda = lambda;
    m.weights.assign(static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(n_features), S(0));
    m.bias.assign(static_cast<std::size_t>(n_classes), S(0));
    return m;
}

namespace {

template <typename S>
std::vector<double> softmax_logits(const LRModelT<S>& model, const std::vector<int>& active) {
    std::vector<double> logits(static_cast<std::size_t>(model.n_classes));
    for (int k = 0; k < model.n_classes; ++k) {
        const S* row = model.weights.data() +
                       static_cast<std::size_t>(k) * static_cast<std::size_t>(model.n_features);
        double z = static_cast<double>(model.bias[static_cast<std::size_t>(k)]);
        for (int f : active) z += static_cast<double>(row[f]);
        logits[static_cast<std::size_t>(k)] = z;
    }
    double mx = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double& z : logits) {
        z = std::exp(z - mx);
        total += z;
    }
    for (double& z : logits) z /= total;
    return logits;
}

} // namespace

template <typename S>
std::vector<double> lr_predict(const LRModelT<S>& model, const std::vector<int>& token_ids) {
    std::vector<int> active = active_features(token_ids);
    for (int f : active) {
        if (f >= model.n_features) fail("shape_mismatch", "token id exceeds the model feature space");
    }
    return softmax_logits(model, active);
}

template <typename S>
double lr_example_gradient(const LRModelT<S>& model, const std::vector<int>& active, int label,
                           std::vector<S>& grad_w, std::vector<S>& grad_b) {
    std::vector<double> probs = softmax_logits(model, active);
    for (int k = 0; k < model.n_classes; ++k) {
        double delta = probs[static_cast<std::size_t>(k)] - (k == label ? 1.0 : 0.0);
        grad_b[static_cast<std::size_t>(k)] += static_cast<S>(delta);
        S* row = grad_w.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(model.n_features);
        for (int f : active) row[f] += static_cast<S>(delta);
    }
    return -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-300));
}

double lr_top1(const LRModel& model, const EncodedDataset& data) {
    if (data.items.empty()) return 0.0;
    long long hits = 0;
    for (const EncodedCase& e : data.items) {
        std::vector<double> p = lr_predict(model, e.token_ids);
        int best = 0;
        for (int k = 1; k < model.n_classes; ++k) {
            if (p[static_cast<std::size_t>(k)] > p[static_cast<std::size_t>(best)]) best = k;
        }
        if (best == e.label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.items.size());
}

LRModel lr_train(const EncodedDataset& train, const EncodedDataset& val, double lambda,
                 const TrainConfig& config, TrainReport* report) {
    config.validate();
    if (train.n_classes < 2) fail("config", "training set must cover at least 2 classes");
    if (train.items.empty()) fail("empty_request", "training set is empty");

    LRModel model = make_lr_model<float>(train.n_classes, train.vocab_size, lambda);
    std::vector<float> vel_w(model.weights.size(), 0.0f), vel_b(model.bias.size(), 0.0f);
    std::vector<float> grad_w(model.weights.size()), grad_b(model.bias.size());

    std::vector<std::vector<int>> active(train.items.size());
    for (std::size_t i = 0; i < train.items.size(); ++i)
        active[i] = active_features(train.items[i].token_ids);

    LRModel best = model;
    double best_val = -1.0;
    int best_epoch = -1;
    double last_finite_loss = 0.0;

    std::vector<std::size_t> order(train.items.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const float mu = static_cast<float>(config.momentum);
    const float lr = static_cast<float>(config.learning_rate);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng = Rng::derive(config.seed, 0x5F0 + static_cast<std::uint64_t>(epoch));
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t n_seen = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::fill(grad_w.begin(), grad_w.end(), 0.0f);
            std::fill(grad_b.begin(), grad_b.end(), 0.0f);
            double batch_loss = 0.0;
            for (std::size_t i = start; i < end; ++i) {
                const EncodedCase& e = train.items[order[i]];
                batch_loss += lr_example_gradient(model, active[order[i]], e.label, grad_w, grad_b);
            }
            auto inv = static_cast<float>(1.0 / static_cast<double>(end - start));
            // mean NLL gradient plus the L2 term on weights (bias unregularized)
            const auto two_lambda = static_cast<float>(2.0 * lambda);
            for (std::size_t p = 0; p < grad_w.size(); ++p) {
                float g = grad_w[p] * inv + two_lambda * model.weights[p];
                vel_w[p] = mu * vel_w[p] + g;
                model.weights[p] -= lr * (g + mu * vel_w[p]);
            }
            for (std::size_t p = 0; p < grad_b.size(); ++p) {
                float g = grad_b[p] * inv;
                vel_b[p] = mu * vel_b[p] + g;
                model.bias[p] -= lr * (g + mu * vel_b[p]);
            }
            double mean_loss = batch_loss / static_cast<double>(end - start);
            if (!std::isfinite(mean_loss))
                fail("diverged", "training loss left the finite range; last finite loss " +
                                     std::to_string(last_finite_loss));
            last_finite_loss = mean_loss;
            epoch_loss += batch_loss;
            n_seen += end - start;
        }

        double val_top1 = val.items.empty() ? 0.0 : lr_top1(model, val);
        if (report) {
            report->epoch_loss.push_back(epoch_loss / static_cast<double>(n_seen));
            report->epoch_val_top1.push_back(val_top1);
        }
        if (val_top1 > best_val) {
            best_val = val_top1;
            best = model;
            best_epoch = epoch;
        }
    }
    if (report) {
        report->best_epoch = best_epoch;
        report->best_val_top1 = best_val;
    }
    return val.items.empty() ? model : best;
}

template LRModelT<float> make_lr_model<float>(int, int, double);
template LRModelT<double> make_lr_model<double>(int, int, double);
template std::vector<double> lr_predict<float>(const LRModelT<float>&, const std::vector<int>&);
template std::vector<double> lr_predict<double>(const LRModelT<double>&, const std::vector<int>&);
template double lr_example_gradient<float>(const LRModelT<float>&, const std::vector<int>&, int,
                                           std::vector<float>&, std::vector<float>&);
template double lr_example_gradient<double>(const LRModelT<double>&, const std::vector<int>&, int,
                                            std::vector<double>&, std::vector<double>&);

} // namespace ddx
