#include "s3fn/nn/adam.hpp"

#include <cmath>

#include "s3fn/error.hpp"

namespace s3fn::nn {

AdamState make_adam_state(std::span<const LayerParams> params, double beta1, double beta2, double epsilon) {
  AdamState s;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.epsilon = epsilon;
  for (const auto& p : params) {
    s.first_moment.emplace_back(p.parameter_count(), 0.0);
    s.second_moment.emplace_back(p.parameter_count(), 0.0);
  }
  return s;
}

void adam_step(std::span<LayerParams> params, std::span<const LayerParams> grads, AdamState& state, double lr) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw Error(Errc::shape, "adam: parameter, gradient and state layer counts differ");
  }
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);

  for (std::size_t l = 0; l < params.size(); ++l) {
    auto& p = params[l];
    const auto& g = grads[l];
    if (g.weights.size() != p.weights.size() || g.biases.size() != p.biases.size() ||
        state.first_moment[l].size() != p.parameter_count()) {
      throw Error(Errc::shape, "adam: shape mismatch in layer '" + p.name + "'");
    }
    auto& m = state.first_moment[l];
    auto& v = state.second_moment[l];
    auto update = [&](double& value, double grad, std::size_t i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * grad;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * grad * grad;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    };
    const std::size_t nw = p.weights.size();
    for (std::size_t i = 0; i < nw; ++i) update(p.weights[i], g.weights[i], i);
    for (std::size_t i = 0; i < p.biases.size(); ++i) update(p.biases[i], g.biases[i], nw + i);
  }
}

}  // namespace s3fn::nn
