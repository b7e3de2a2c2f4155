#include "s3fn/nn/tensor.hpp"

#include "s3fn/error.hpp"

namespace s3fn::nn {

std::string shape_string(const std::array<std::size_t, 4>& dims) {
  return std::to_string(dims[0]) + "x" + std::to_string(dims[1]) + "x" + std::to_string(dims[2]) + "x" +
         std::to_string(dims[3]);
}

LayerParams make_conv_params(std::string name, std::size_t in_channels, std::size_t filters) {
  if (in_channels == 0 || filters == 0) throw Error(Errc::parameter, "conv layer needs channels and filters");
  LayerParams p;
  p.name = std::move(name);
  p.shape = {3, 3, 3, in_channels, filters};
  p.weights.assign(27 * in_channels * filters, 0.0);
  p.biases.assign(filters, 0.0);
  return p;
}

LayerParams make_dense_params(std::string name, std::size_t in, std::size_t out) {
  if (in == 0 || out == 0) throw Error(Errc::parameter, "dense layer needs non-zero sizes");
  LayerParams p;
  p.name = std::move(name);
  p.shape = {out, in};
  p.weights.assign(in * out, 0.0);
  p.biases.assign(out, 0.0);
  return p;
}

LayerParams zeros_like(const LayerParams& p) {
  LayerParams z;
  z.name = p.name;
  z.shape = p.shape;
  z.weights.assign(p.weights.size(), 0.0);
  z.biases.assign(p.biases.size(), 0.0);
  return z;
}

bool is_conv(const LayerParams& p) { return p.shape.size() == 5; }

std::size_t fan_in(const LayerParams& p) {
  if (is_conv(p)) return 27 * p.shape[3];
  if (p.shape.size() == 2) return p.shape[1];
  throw Error(Errc::shape, "layer '" + p.name + "' has an unknown shape");
}

}  // namespace s3fn::nn
