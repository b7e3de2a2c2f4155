#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "s3fn/nn/tensor.hpp"
#include "s3fn/random.hpp"

namespace s3fn::nn {

// 3x3x3 convolution, stride 1, zero "same" padding on height, width and depth.
Tensor4 conv3d_forward(const Tensor4& input, const LayerParams& params);

struct ConvGradients {
  Tensor4 input;       // empty when not requested
  LayerParams params;  // dL/dW, dL/db
};
ConvGradients conv3d_backward(const Tensor4& input, const LayerParams& params, const Tensor4& grad_output,
                              bool want_input_grad = true);

/// Effective per-axis window: min(window, dim). Axes shorter than the window
/// collapse to one cell instead of vanishing; leftover cells are truncated.
std::array<std::size_t, 3> pool_windows(const std::array<std::size_t, 4>& input_dims, std::size_t window);
std::array<std::size_t, 4> pool_output_dims(const std::array<std::size_t, 4>& input_dims, std::size_t window);

Tensor4 avgpool3d_forward(const Tensor4& input, std::size_t window = 2);
Tensor4 avgpool3d_backward(const std::array<std::size_t, 4>& input_dims, std::size_t window,
                           const Tensor4& grad_output);

/// y = W x + b with W stored {out, in} row-major.
std::vector<double> dense_forward(std::span<const double> input, const LayerParams& params);

struct DenseGradients {
  std::vector<double> input;
  LayerParams params;
};
DenseGradients dense_backward(std::span<const double> input, const LayerParams& params,
                              std::span<const double> grad_output);

std::vector<double> relu_forward(std::span<const double> input);
/// Subgradient at zero is zero.
std::vector<double> relu_backward(std::span<const double> pre_activation, std::span<const double> grad_output);

struct DropoutResult {
  std::vector<double> output;
  std::vector<double> mask;  // 0 or 1/(1-rate) per element; all ones in evaluation
};
/// Inverted dropout. Identity when `training` is false (rng untouched).
DropoutResult dropout(std::span<const double> input, double rate, bool training, Rng& rng);
std::vector<double> dropout_backward(std::span<const double> mask, std::span<const double> grad_output);

/// Max-shifted softmax.
std::vector<double> softmax(std::span<const double> logits);

inline constexpr double kProbabilityFloor = 1e-12;

/// -log(probs[label] + 1e-12).
double cross_entropy(std::span<const double> probs, std::size_t label);
/// d CE(softmax(s), label) / ds = probs - onehot(label).
std::vector<double> softmax_cross_entropy_grad(std::span<const double> probs, std::size_t label);

/// (lambda / 2) * sum of squared weights; biases excluded.
double l2_penalty(std::span<const LayerParams> params, double lambda);
/// grads[i].weights += lambda * params[i].weights
void add_l2_gradient(std::span<const LayerParams> params, std::span<LayerParams> grads, double lambda);

}  // namespace s3fn::nn
