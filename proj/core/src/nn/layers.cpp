#include "s3fn/nn/layers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "s3fn/error.hpp"

namespace s3fn::nn {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

void check_conv(const Tensor4& input, const LayerParams& params) {
  if (!is_conv(params)) throw Error(Errc::shape, "layer '" + params.name + "' is not a 3x3x3 convolution");
  if (params.shape[3] != input.channels()) {
    throw Error(Errc::shape, "conv '" + params.name + "' expects " + std::to_string(params.shape[3]) +
                                 " input channels, got " + std::to_string(input.channels()));
  }
  if (input.size() == 0) throw Error(Errc::shape, "conv input is empty");
}

// Eigen's GEMM kernels round differently depending on operand alignment, and std::vector gives no
// alignment guarantee, so every product runs on Eigen-owned (aligned) storage.
RowMatrix aligned_copy(const double* data, std::size_t rows, std::size_t cols) {
  return ConstRowMap(data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

// Row p holds the 27*Cin receptive field of output position p, ordered (kh, kw, kd, cin).
RowMatrix im2col(const Tensor4& x) {
  const std::size_t H = x.height(), W = x.width(), D = x.depth(), C = x.channels();
  const std::size_t K = 27 * C;
  RowMatrix col = RowMatrix::Zero(static_cast<Eigen::Index>(H * W * D), static_cast<Eigen::Index>(K));
  std::size_t p = 0;
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t w = 0; w < W; ++w) {
      for (std::size_t d = 0; d < D; ++d, ++p) {
        double* row = col.data() + p * K;
        for (std::size_t kh = 0; kh < 3; ++kh) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(h + kh) - 1;
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
          for (std::size_t kw = 0; kw < 3; ++kw) {
            const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(w + kw) - 1;
            if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W)) continue;
            for (std::size_t kd = 0; kd < 3; ++kd) {
              const std::ptrdiff_t id = static_cast<std::ptrdiff_t>(d + kd) - 1;
              if (id < 0 || id >= static_cast<std::ptrdiff_t>(D)) continue;
              const double* src = x.values.data() + x.offset(ih, iw, id, 0);
              std::copy(src, src + C, row + ((kh * 3 + kw) * 3 + kd) * C);
            }
          }
        }
      }
    }
  }
  return col;
}

void col2im_add(const RowMatrix& col, Tensor4& dx) {
  const std::size_t H = dx.height(), W = dx.width(), D = dx.depth(), C = dx.channels();
  const std::size_t K = 27 * C;
  std::size_t p = 0;
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t w = 0; w < W; ++w) {
      for (std::size_t d = 0; d < D; ++d, ++p) {
        const double* row = col.data() + p * K;
        for (std::size_t kh = 0; kh < 3; ++kh) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(h + kh) - 1;
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
          for (std::size_t kw = 0; kw < 3; ++kw) {
            const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(w + kw) - 1;
            if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W)) continue;
            for (std::size_t kd = 0; kd < 3; ++kd) {
              const std::ptrdiff_t id = static_cast<std::ptrdiff_t>(d + kd) - 1;
              if (id < 0 || id >= static_cast<std::ptrdiff_t>(D)) continue;
              double* dst = dx.values.data() + dx.offset(ih, iw, id, 0);
              const double* src = row + ((kh * 3 + kw) * 3 + kd) * C;
              for (std::size_t c = 0; c < C; ++c) dst[c] += src[c];
            }
          }
        }
      }
    }
  }
}

void check_dense(std::size_t input_size, const LayerParams& params) {
  if (params.shape.size() != 2) throw Error(Errc::shape, "layer '" + params.name + "' is not dense");
  if (params.shape[1] != input_size) {
    throw Error(Errc::shape, "dense '" + params.name + "' expects " + std::to_string(params.shape[1]) +
                                 " inputs, got " + std::to_string(input_size));
  }
}

}  // namespace

Tensor4 conv3d_forward(const Tensor4& input, const LayerParams& params) {
  check_conv(input, params);
  const std::size_t K = 27 * input.channels();
  const std::size_t F = params.shape[4];
  const RowMatrix col = im2col(input);
  RowMatrix y = col * aligned_copy(params.weights.data(), K, F);
  y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(params.biases.data(), static_cast<Eigen::Index>(F));
  Tensor4 out(input.height(), input.width(), input.depth(), F);
  std::copy(y.data(), y.data() + y.size(), out.values.begin());
  return out;
}

ConvGradients conv3d_backward(const Tensor4& input, const LayerParams& params, const Tensor4& grad_output,
                              bool want_input_grad) {
  check_conv(input, params);
  const std::size_t P = input.height() * input.width() * input.depth();
  const std::size_t K = 27 * input.channels();
  const std::size_t F = params.shape[4];
  if (grad_output.dims != std::array<std::size_t, 4>{input.height(), input.width(), input.depth(), F}) {
    throw Error(Errc::shape, "conv gradient has shape " + shape_string(grad_output.dims));
  }
  const RowMatrix col = im2col(input);
  const RowMatrix dy = aligned_copy(grad_output.values.data(), P, F);

  ConvGradients g;
  g.params = zeros_like(params);
  const RowMatrix dw = col.transpose() * dy;
  std::copy(dw.data(), dw.data() + dw.size(), g.params.weights.begin());
  const Eigen::RowVectorXd db = dy.colwise().sum();
  std::copy(db.data(), db.data() + db.size(), g.params.biases.begin());

  if (want_input_grad) {
    const RowMatrix dcol = dy * aligned_copy(params.weights.data(), K, F).transpose();
    g.input = Tensor4(input.height(), input.width(), input.depth(), input.channels());
    col2im_add(dcol, g.input);
  }
  return g;
}

std::array<std::size_t, 3> pool_windows(const std::array<std::size_t, 4>& dims, std::size_t window) {
  if (window == 0) throw Error(Errc::parameter, "pool window must be >= 1");
  if (window > dims[0] && window > dims[1] && window > dims[2]) {
    throw Error(Errc::shape, "pool window " + std::to_string(window) + " exceeds every dimension of " +
                                 shape_string(dims));
  }
  return {std::min(window, dims[0]), std::min(window, dims[1]), std::min(window, dims[2])};
}

std::array<std::size_t, 4> pool_output_dims(const std::array<std::size_t, 4>& dims, std::size_t window) {
  const auto k = pool_windows(dims, window);
  return {dims[0] / k[0], dims[1] / k[1], dims[2] / k[2], dims[3]};
}

Tensor4 avgpool3d_forward(const Tensor4& input, std::size_t window) {
  const auto k = pool_windows(input.dims, window);
  const auto od = pool_output_dims(input.dims, window);
  Tensor4 out(od[0], od[1], od[2], od[3]);
  const double scale = 1.0 / static_cast<double>(k[0] * k[1] * k[2]);
  const std::size_t C = input.channels();
  for (std::size_t h = 0; h < od[0]; ++h) {
    for (std::size_t w = 0; w < od[1]; ++w) {
      for (std::size_t d = 0; d < od[2]; ++d) {
        double* dst = out.values.data() + out.offset(h, w, d, 0);
        for (std::size_t a = 0; a < k[0]; ++a) {
          for (std::size_t b = 0; b < k[1]; ++b) {
            for (std::size_t e = 0; e < k[2]; ++e) {
              const double* src = input.values.data() + input.offset(h * k[0] + a, w * k[1] + b, d * k[2] + e, 0);
              for (std::size_t c = 0; c < C; ++c) dst[c] += src[c];
            }
          }
        }
        for (std::size_t c = 0; c < C; ++c) dst[c] *= scale;
      }
    }
  }
  return out;
}

Tensor4 avgpool3d_backward(const std::array<std::size_t, 4>& input_dims, std::size_t window,
                           const Tensor4& grad_output) {
  const auto k = pool_windows(input_dims, window);
  const auto od = pool_output_dims(input_dims, window);
  if (grad_output.dims != od) throw Error(Errc::shape, "pool gradient has shape " + shape_string(grad_output.dims));
  Tensor4 dx(input_dims[0], input_dims[1], input_dims[2], input_dims[3]);
  const double scale = 1.0 / static_cast<double>(k[0] * k[1] * k[2]);
  const std::size_t C = input_dims[3];
  for (std::size_t h = 0; h < od[0]; ++h) {
    for (std::size_t w = 0; w < od[1]; ++w) {
      for (std::size_t d = 0; d < od[2]; ++d) {
        const double* src = grad_output.values.data() + grad_output.offset(h, w, d, 0);
        for (std::size_t a = 0; a < k[0]; ++a) {
          for (std::size_t b = 0; b < k[1]; ++b) {
            for (std::size_t e = 0; e < k[2]; ++e) {
              double* dst = dx.values.data() + dx.offset(h * k[0] + a, w * k[1] + b, d * k[2] + e, 0);
              for (std::size_t c = 0; c < C; ++c) dst[c] += src[c] * scale;
            }
          }
        }
      }
    }
  }
  return dx;
}

std::vector<double> dense_forward(std::span<const double> input, const LayerParams& params) {
  check_dense(input.size(), params);
  const std::size_t out_n = params.shape[0], in_n = params.shape[1];
  std::vector<double> y(params.biases);
  for (std::size_t o = 0; o < out_n; ++o) {
    const double* w = params.weights.data() + o * in_n;
    double sum = 0.0;
    for (std::size_t i = 0; i < in_n; ++i) sum += w[i] * input[i];
    y[o] += sum;
  }
  return y;
}

DenseGradients dense_backward(std::span<const double> input, const LayerParams& params,
                              std::span<const double> grad_output) {
  check_dense(input.size(), params);
  if (grad_output.size() != params.shape[0]) throw Error(Errc::shape, "dense gradient length mismatch");
  const std::size_t out_n = params.shape[0], in_n = params.shape[1];

  DenseGradients g;
  g.params = zeros_like(params);
  g.params.biases.assign(grad_output.begin(), grad_output.end());
  g.input.assign(in_n, 0.0);
  for (std::size_t o = 0; o < out_n; ++o) {
    const double dy = grad_output[o];
    const double* w = params.weights.data() + o * in_n;
    double* gw = g.params.weights.data() + o * in_n;
    for (std::size_t i = 0; i < in_n; ++i) {
      gw[i] = dy * input[i];
      g.input[i] += w[i] * dy;
    }
  }
  return g;
}

std::vector<double> relu_forward(std::span<const double> input) {
  std::vector<double> out(input.size());
  std::transform(input.begin(), input.end(), out.begin(), [](double v) { return v > 0.0 ? v : 0.0; });
  return out;
}

std::vector<double> relu_backward(std::span<const double> pre_activation, std::span<const double> grad_output) {
  if (pre_activation.size() != grad_output.size()) throw Error(Errc::shape, "relu gradient length mismatch");
  std::vector<double> out(grad_output.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pre_activation[i] > 0.0 ? grad_output[i] : 0.0;
  return out;
}

DropoutResult dropout(std::span<const double> input, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error(Errc::parameter, "dropout rate must lie in [0, 1)");
  DropoutResult r;
  r.output.assign(input.begin(), input.end());
  r.mask.assign(input.size(), 1.0);
  if (!training || rate == 0.0) return r;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < input.size(); ++i) {
    r.mask[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    r.output[i] = input[i] * r.mask[i];
  }
  return r;
}

std::vector<double> dropout_backward(std::span<const double> mask, std::span<const double> grad_output) {
  if (mask.size() != grad_output.size()) throw Error(Errc::shape, "dropout gradient length mismatch");
  std::vector<double> out(mask.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask[i] * grad_output[i];
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

double cross_entropy(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size()) {
    throw Error(Errc::index, "label " + std::to_string(label) + " out of range for " + std::to_string(probs.size()) +
                                 " classes");
  }
  return -std::log(probs[label] + kProbabilityFloor);
}

std::vector<double> softmax_cross_entropy_grad(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size()) throw Error(Errc::index, "label out of range");
  std::vector<double> g(probs.begin(), probs.end());
  g[label] -= 1.0;
  return g;
}

double l2_penalty(std::span<const LayerParams> params, double lambda) {
  if (lambda < 0.0) throw Error(Errc::parameter, "L2 coefficient must be >= 0");
  double sum = 0.0;
  for (const auto& p : params) {
    for (double w : p.weights) sum += w * w;
  }
  return 0.5 * lambda * sum;
}

void add_l2_gradient(std::span<const LayerParams> params, std::span<LayerParams> grads, double lambda) {
  if (params.size() != grads.size()) throw Error(Errc::shape, "parameter / gradient layer count mismatch");
  for (std::size_t l = 0; l < params.size(); ++l) {
    if (params[l].weights.size() != grads[l].weights.size()) throw Error(Errc::shape, "weight gradient length mismatch");
    for (std::size_t i = 0; i < params[l].weights.size(); ++i) grads[l].weights[i] += lambda * params[l].weights[i];
  }
}

}  // namespace s3fn::nn
