#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "s3fn/cube_io.hpp"
#include "s3fn/random.hpp"

namespace s3fn {

inline constexpr std::size_t kDefaultPatchSize = 32;

/// Square spatial tile carrying all bands. Values are pixel-interleaved:
/// index = (row * size + col) * bands + band, so each pixel spectrum is contiguous.
struct Patch {
  std::size_t size = 0;
  std::size_t bands = 0;
  std::vector<float> values;
  std::size_t image_index = 0;
  std::size_t patch_index = 0;
  std::size_t label = 0;
  // Top-left pixel of the tile in the parent cube.
  std::size_t origin_row = 0;
  std::size_t origin_col = 0;

  std::size_t pixels() const { return size * size; }
  const float* spectrum(std::size_t pixel) const { return values.data() + pixel * bands; }
};

/// Non-overlapping tiles of the top-left floor(H/ps)*ps x floor(W/ps)*ps region,
/// row-major; the remainder border is discarded.
std::vector<Patch> extract_patches(const HsiCube& cube, std::size_t patch_size = kDefaultPatchSize,
                                   std::size_t image_index = 0, std::size_t label = 0);

/// Multiplies every value by one alpha ~ Uniform[lo, hi] drawn from `rng`.
Patch augment_scale(const Patch& patch, Rng& rng, double lo = 0.9, double hi = 1.1);

struct PatchDataset {
  Split split = Split::train;
  std::vector<Patch> patches;
  /// image index -> indices into `patches`
  std::map<std::size_t, std::vector<std::size_t>> per_image_index;
  /// per image: class index and source path (index = image index)
  std::vector<std::size_t> image_labels;
  std::vector<std::filesystem::path> image_paths;

  bool empty() const { return patches.empty(); }
};

/// Loads the cubes of one split and tiles them. An empty result is allowed
/// (a warning is logged). Image indices are positions among the split's entries.
PatchDataset build_patch_dataset(const DatasetManifest& manifest, const LabelSet& labels, Split split,
                                 std::size_t patch_size = kDefaultPatchSize);

}  // namespace s3fn
