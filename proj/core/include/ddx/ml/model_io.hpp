#pragma once

#include <string>

#include "json.hpp"

#include "ddx/ml/convnet.hpp"
#include "ddx/ml/gradient_check.hpp"
#include "ddx/ml/logistic.hpp"

namespace ddx {

// Versioned binary model file: magic "DDXMDL1\n", little-endian u64 metadata
// length, JSON metadata (kind, shapes, config), then raw float32 tensors in
// param-group order.
void save_lr_model(const LRModel& model, const std::string& path,
                   const nlohmann::json& extra_meta = nlohmann::json::object());
void save_convnet_model(const ConvNet& model, const std::string& path,
                        const nlohmann::json& extra_meta = nlohmann::json::object());

ModelKind peek_model_kind(const std::string& path);
LRModel load_lr_model(const std::string& path);
ConvNet load_convnet_model(const std::string& path);

} // namespace ddx
