#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "s3fn/nn/tensor.hpp"
#include "s3fn/random.hpp"

namespace s3fn::nn {

/// Text checkpoint: header `s3fn-params v1`, then per layer a `[name]` line
/// followed by `shape=`, `weights=` and `biases=` lines. Values use the
/// shortest round-trip decimal form, so save/load is bit-exact.
void save_params(std::span<const LayerParams> layers, const std::filesystem::path& path);
std::vector<LayerParams> load_params(const std::filesystem::path& path);

/// FNV-1a over names, shapes and the bit patterns of every value.
std::uint64_t checksum(std::span<const LayerParams> layers);

/// He-uniform: weights ~ U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)); biases zero.
void he_uniform_init(LayerParams& layer, Rng& rng);

}  // namespace s3fn::nn
