#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace s3fn::nn {

/// Dense 4-d tensor (height, width, depth, channels), row-major with channels fastest.
struct Tensor4 {
  std::array<std::size_t, 4> dims{};
  std::vector<double> values;

  Tensor4() = default;
  Tensor4(std::size_t h, std::size_t w, std::size_t d, std::size_t c, double fill = 0.0)
      : dims{h, w, d, c}, values(h * w * d * c, fill) {}

  std::size_t height() const { return dims[0]; }
  std::size_t width() const { return dims[1]; }
  std::size_t depth() const { return dims[2]; }
  std::size_t channels() const { return dims[3]; }
  std::size_t size() const { return values.size(); }

  std::size_t offset(std::size_t h, std::size_t w, std::size_t d, std::size_t c) const {
    return ((h * dims[1] + w) * dims[2] + d) * dims[3] + c;
  }
  double& at(std::size_t h, std::size_t w, std::size_t d, std::size_t c) { return values[offset(h, w, d, c)]; }
  double at(std::size_t h, std::size_t w, std::size_t d, std::size_t c) const { return values[offset(h, w, d, c)]; }

  bool operator==(const Tensor4&) const = default;
};

std::string shape_string(const std::array<std::size_t, 4>& dims);

/// Trainable weights and biases of one layer.
/// Conv layers: shape = {3, 3, 3, in_channels, filters}, weights laid out in that order.
/// Dense layers: shape = {out, in}, weights row-major.
struct LayerParams {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> weights;
  std::vector<double> biases;

  std::size_t parameter_count() const { return weights.size() + biases.size(); }
  bool operator==(const LayerParams&) const = default;
};

LayerParams make_conv_params(std::string name, std::size_t in_channels, std::size_t filters);
LayerParams make_dense_params(std::string name, std::size_t in, std::size_t out);
/// Same name and shape, all values zero (gradient accumulator).
LayerParams zeros_like(const LayerParams& p);

bool is_conv(const LayerParams& p);
std::size_t fan_in(const LayerParams& p);

}  // namespace s3fn::nn
