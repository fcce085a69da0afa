#include "ddx/ml/gradient_check.hpp"

#include <algorithm>
#include <cmath>

namespace ddx {

namespace {

double rel_err(double a, double n) {
    double denom = std::max(std::abs(a) + std::abs(n), 1e-8);
    return std::abs(a - n) / denom;
}

// Generic loop: analytic grads must already be laid out group-by-group in the
// same order as params; loss() re-evaluates the objective at the current
// parameter values.
template <typename LossFn>
double max_relative_error(std::vector<std::vector<double>*> params,
                          std::vector<const std::vector<double>*> grads, double epsilon,
                          const LossFn& loss) {
    double worst = 0.0;
    for (std::size_t g = 0; g < params.size(); ++g) {
        std::vector<double>& theta = *params[g];
        const std::vector<double>& analytic = *grads[g];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            double saved = theta[i];
            theta[i] = saved + epsilon;
            double up = loss();
            theta[i] = saved - epsilon;
            double down = loss();
            theta[i] = saved;
            double numeric = (up - down) / (2.0 * epsilon);
            worst = std::max(worst, rel_err(analytic[i], numeric));
        }
    }
    return worst;
}

} // namespace

double gradient_check_lr(const LRModelD& model_in, const EncodedCase& sample, double epsilon) {
    LRModelD model = model_in;
    std::vector<int> active = active_features(sample.token_ids);

    std::vector<double> grad_w(model.weights.size(), 0.0), grad_b(model.bias.size(), 0.0);
    lr_example_gradient(model, active, sample.label, grad_w, grad_b);
    for (std::size_t i = 0; i < model.weights.size(); ++i)
        grad_w[i] += 2.0 * model.lambda * model.weights[i];

    auto loss = [&]() {
        std::vector<double> p = lr_predict(model, sample.token_ids);
        double l2 = 0.0;
        for (double w : model.weights) l2 += w * w;
        return -std::log(p[static_cast<std::size_t>(sample.label)]) + model.lambda * l2;
    };
    return max_relative_error({&model.weights, &model.bias}, {&grad_w, &grad_b}, epsilon, loss);
}

double gradient_check_convnet(const ConvNetD& model_in, const EncodedCase& sample, double epsilon) {
    ConvNetD model = model_in;
    ConvActivations<double> acts;
    convnet_forward(model, sample.token_ids, false, nullptr, acts);
    ConvGrads<double> grads(model);
    convnet_backward(model, sample.token_ids, sample.label, acts, grads);

    auto loss = [&]() {
        ConvActivations<double> a;
        convnet_forward(model, sample.token_ids, false, nullptr, a);
        return -std::log(a.probs[static_cast<std::size_t>(sample.label)]);
    };
    std::vector<std::vector<double>*> params = model.param_groups();
    auto grad_groups = grads.param_groups();
    std::vector<const std::vector<double>*> gs(grad_groups.begin(), grad_groups.end());
    return max_relative_error(params, gs, epsilon, loss);
}

double gradient_check(ModelKind kind, std::uint64_t seed, double epsilon) {
    Rng rng = Rng::derive(seed, 0x6C);
    if (kind == ModelKind::lr) {
        if (epsilon <= 0.0) epsilon = 1e-6;
        LRModelD model = make_lr_model<double>(3, 5, 0.01);
        for (auto& w : model.weights) w = rng.uniform(-1.0, 1.0);
        for (auto& b : model.bias) b = rng.uniform(-0.5, 0.5);
        EncodedCase sample;
        sample.token_ids = {1, 3, 4, 0, 0}; // features 0, 2, 3
        sample.label = static_cast<int>(rng.below(3));
        return gradient_check_lr(model, sample, epsilon);
    }
    if (epsilon <= 0.0) epsilon = 1e-5;
    ConvNetConfig cfg;
    cfg.seq_len = 8;
    cfg.embed_dim = 4;
    cfg.filters = {6, 4, 3};
    cfg.fc_hidden = 10;
    cfg.vocab_size = 9;
    cfg.n_classes = 3;
    ConvNetD model = init_convnet<double>(cfg, seed);
    EncodedCase sample;
    sample.token_ids.assign(static_cast<std::size_t>(cfg.seq_len), 0);
    for (int t = 0; t < 5; ++t)
        sample.token_ids[static_cast<std::size_t>(t)] = 1 + static_cast<int>(rng.below(9));
    sample.label = static_cast<int>(rng.below(3));
    return gradient_check_convnet(model, sample, epsilon);
}

} // namespace ddx
