#pragma once

#include <cstdint>

#include "ddx/ml/convnet.hpp"
#include "ddx/ml/logistic.hpp"

namespace ddx {

enum class ModelKind { lr, convnet };

// Central-difference verification of the analytic gradients, double precision,
// dropout off. Returns the max relative error over all parameters. The LR
// objective is NLL + lambda * |W|^2; the convnet objective is the plain NLL.
double gradient_check_lr(const LRModelD& model, const EncodedCase& sample, double epsilon = 1e-6);
double gradient_check_convnet(const ConvNetD& model, const EncodedCase& sample,
                              double epsilon = 1e-5);

// Convenience wrapper over seed-built small instances (random parameters and
// a random sample).
double gradient_check(ModelKind kind, std::uint64_t seed, double epsilon = 0.0);

} // namespace ddx
