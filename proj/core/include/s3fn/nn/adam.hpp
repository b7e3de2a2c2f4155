#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "s3fn/nn/tensor.hpp"

namespace s3fn::nn {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t step_count = 0;
  // One entry per layer; weights followed by biases.
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

AdamState make_adam_state(std::span<const LayerParams> params, double beta1 = 0.9, double beta2 = 0.999,
                          double epsilon = 1e-8);

/// Bias-corrected Adam update of `params` in place.
void adam_step(std::span<LayerParams> params, std::span<const LayerParams> grads, AdamState& state, double lr);

}  // namespace s3fn::nn
