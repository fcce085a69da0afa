#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

#include "ddx/errors.hpp"

namespace ddx {

// Shared optimizer settings for both learned models. Nesterov momentum SGD;
// defaults follow the reference training recipe, batch size scales down at
// desk scale.
struct TrainConfig {
    int batch_size = 1024;
    double learning_rate = 0.1;
    double momentum = 0.9;
    int epochs = 10;
    std::uint64_t seed = 1;
    double lambda = 0.01;       // L2 coefficient (logistic regression only)
    int noise_augment = 0;      // prevalent findings injected per case per epoch
    bool shuffle_tokens = false; // per-epoch token order augmentation

    void validate() const {
        if (batch_size < 1) fail("config", "batch_size must be >= 1");
        if (!(learning_rate > 0.0)) fail("config", "learning_rate must be positive");
        if (!(momentum >= 0.0 && momentum < 1.0)) fail("config", "momentum must be in [0,1)");
        if (epochs < 1) fail("config", "epochs must be >= 1");
        if (lambda < 0.0) fail("config", "lambda must be non-negative");
        if (noise_augment < 0) fail("config", "noise_augment must be >= 0");
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["batch_size"] = batch_size;
        j["learning_rate"] = learning_rate;
        j["momentum"] = momentum;
        j["epochs"] = epochs;
        j["seed"] = seed;
        j["lambda"] = lambda;
        j["noise_augment"] = noise_augment;
        j["shuffle_tokens"] = shuffle_tokens;
        return j;
    }

    static TrainConfig from_json(const nlohmann::json& j) { // rejects unknown keys
        static const std::vector<std::string> allowed = {
            "batch_size", "learning_rate", "momentum", "epochs",
            "seed",       "lambda",        "noise_augment", "shuffle_tokens"};
        if (!j.is_object()) fail("config", "train config must be a JSON object");
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool known = false;
            for (const auto& k : allowed) known = known || k == it.key();
            if (!known) fail("config", "unknown train config key '" + it.key() + "'");
        }
        TrainConfig c;
        if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
        if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
        if (j.contains("momentum")) c.momentum = j.at("momentum").get<double>();
        if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
        if (j.contains("noise_augment")) c.noise_augment = j.at("noise_augment").get<int>();
        if (j.contains("shuffle_tokens")) c.shuffle_tokens = j.at("shuffle_tokens").get<bool>();
        c.validate();
        return c;
    }
};

struct TrainReport {
    std::vector<double> epoch_loss;     // mean train loss per epoch
    std::vector<double> epoch_val_top1;
    int best_epoch = -1;
    double best_val_top1 = 0.0;
};

} // namespace ddx
