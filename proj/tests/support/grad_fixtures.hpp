#pragma once

// Finite-difference fixtures shared by the unit suite and the acceptance gate.

#include <numeric>
#include <span>
#include <vector>

#include "s3fn/model.hpp"
#include "s3fn/nn/grad_check.hpp"
#include "s3fn/nn/layers.hpp"
#include "s3fn/random.hpp"

namespace s3fn::testing {

inline double weighted_sum(std::span<const double> a, std::span<const double> r) {
  return std::inner_product(a.begin(), a.end(), r.begin(), 0.0);
}

/// Max relative error of conv3d gradients (input, weights, bias) for the loss sum(r * conv(x)).
inline double conv_grad_error(const nn::Tensor4& x, const nn::LayerParams& p, const std::vector<double>& r,
                              const nn::ConvGradients& g) {
  double worst = 0.0;
  nn::LossFunction by_input = [&](std::span<const double> v) {
    nn::Tensor4 t = x;
    t.values.assign(v.begin(), v.end());
    return weighted_sum(nn::conv3d_forward(t, p).values, r);
  };
  worst = std::max(worst, nn::grad_check(by_input, x.values, g.input.values));
  nn::LossFunction by_weights = [&](std::span<const double> v) {
    auto q = p;
    q.weights.assign(v.begin(), v.end());
    return weighted_sum(nn::conv3d_forward(x, q).values, r);
  };
  worst = std::max(worst, nn::grad_check(by_weights, p.weights, g.params.weights));
  nn::LossFunction by_bias = [&](std::span<const double> v) {
    auto q = p;
    q.biases.assign(v.begin(), v.end());
    return weighted_sum(nn::conv3d_forward(x, q).values, r);
  };
  return std::max(worst, nn::grad_check(by_bias, p.biases, g.params.biases));
}

inline double dense_grad_error(const std::vector<double>& x, const nn::LayerParams& p, const std::vector<double>& r,
                               const nn::DenseGradients& g) {
  double worst = 0.0;
  nn::LossFunction by_input = [&](std::span<const double> v) { return weighted_sum(nn::dense_forward(v, p), r); };
  worst = std::max(worst, nn::grad_check(by_input, x, g.input));
  nn::LossFunction by_weights = [&](std::span<const double> v) {
    auto q = p;
    q.weights.assign(v.begin(), v.end());
    return weighted_sum(nn::dense_forward(x, q), r);
  };
  worst = std::max(worst, nn::grad_check(by_weights, p.weights, g.params.weights));
  nn::LossFunction by_bias = [&](std::span<const double> v) {
    auto q = p;
    q.biases.assign(v.begin(), v.end());
    return weighted_sum(nn::dense_forward(x, q), r);
  };
  return std::max(worst, nn::grad_check(by_bias, p.biases, g.params.biases));
}

/// Whole backbone (conv-pool-conv-conv-pool-fc-fc-classifier) on a reduced
/// shape, CE loss through softmax, dropout mask held fixed by reseeding.
/// Checks every parameter and every input coordinate.
inline double backbone_grad_error(std::size_t patch_size, std::uint64_t seed) {
  BackboneShape shape;
  shape.filters = {3, 4, 3};
  shape.fc1_units = 6;
  shape.fc2_units = 5;
  shape.patch_size = patch_size;
  const std::size_t bands = 4, classes = 3, label = seed % classes;
  Backbone bb = build_backbone(bands, classes, seed, shape);
  bb.dropout_rate = 0.3;
  Rng rng(seed + 1);
  for (auto& l : bb.layers)
    for (auto& b : l.biases) b = rng.uniform(-0.1, 0.1);
  nn::Tensor4 x(patch_size, patch_size, bands, 1);
  for (auto& v : x.values) v = rng.uniform(-1, 1);

  const auto loss_at = [&](const Backbone& net, const nn::Tensor4& in) {
    Rng mask_rng(seed + 2);
    const auto t = backbone_forward(net, in, true, &mask_rng);
    return nn::cross_entropy(t.probs, label);
  };
  Rng mask_rng(seed + 2);
  const auto trace = backbone_forward(bb, x, true, &mask_rng);
  const auto grads = backbone_backward(bb, trace, nn::softmax_cross_entropy_grad(trace.probs, label), true);

  double worst = 0.0;
  nn::LossFunction by_input = [&](std::span<const double> v) {
    auto t = x;
    t.values.assign(v.begin(), v.end());
    return loss_at(bb, t);
  };
  worst = std::max(worst, nn::grad_check(by_input, x.values, grads.input.values));
  for (std::size_t l = 0; l < bb.layers.size(); ++l) {
    for (bool weights : {true, false}) {
      const auto& point = weights ? bb.layers[l].weights : bb.layers[l].biases;
      const auto& analytic = weights ? grads.layers[l].weights : grads.layers[l].biases;
      nn::LossFunction fn = [&](std::span<const double> v) {
        auto net = bb;
        (weights ? net.layers[l].weights : net.layers[l].biases).assign(v.begin(), v.end());
        return loss_at(net, x);
      };
      worst = std::max(worst, nn::grad_check(fn, point, analytic));
    }
  }
  return worst;
}

}  // namespace s3fn::testing
