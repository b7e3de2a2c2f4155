#include "s3fn/patching.hpp"

#include <iostream>

#include "s3fn/error.hpp"

namespace s3fn {

std::vector<Patch> extract_patches(const HsiCube& cube, std::size_t patch_size, std::size_t image_index,
                                   std::size_t label) {
  validate(cube);
  if (patch_size == 0) throw Error(Errc::parameter, "patch size must be positive");
  if (cube.height < patch_size || cube.width < patch_size) {
    throw Error(Errc::size, "cube " + std::to_string(cube.height) + "x" + std::to_string(cube.width) +
                                " is smaller than one " + std::to_string(patch_size) + "-pixel patch");
  }
  const std::size_t rows = cube.height / patch_size;
  const std::size_t cols = cube.width / patch_size;
  std::vector<Patch> out;
  out.reserve(rows * cols);
  for (std::size_t pr = 0; pr < rows; ++pr) {
    for (std::size_t pc = 0; pc < cols; ++pc) {
      Patch p;
      p.size = patch_size;
      p.bands = cube.bands;
      p.image_index = image_index;
      p.patch_index = pr * cols + pc;
      p.label = label;
      p.origin_row = pr * patch_size;
      p.origin_col = pc * patch_size;
      p.values.resize(patch_size * patch_size * cube.bands);
      for (std::size_t i = 0; i < patch_size; ++i) {
        for (std::size_t j = 0; j < patch_size; ++j) {
          float* dst = p.values.data() + (i * patch_size + j) * cube.bands;
          for (std::size_t c = 0; c < cube.bands; ++c) dst[c] = cube.at(p.origin_row + i, p.origin_col + j, c);
        }
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

Patch augment_scale(const Patch& patch, Rng& rng, double lo, double hi) {
  if (!(lo <= hi)) throw Error(Errc::parameter, "augmentation range requires lo <= hi");
  const double alpha = rng.uniform(lo, hi);
  Patch out = patch;
  for (auto& v : out.values) v = static_cast<float>(v * alpha);
  return out;
}

PatchDataset build_patch_dataset(const DatasetManifest& manifest, const LabelSet& labels, Split split,
                                 std::size_t patch_size) {
  PatchDataset ds;
  ds.split = split;
  for (const auto& entry : manifest.entries) {
    if (entry.split != split) continue;
    const std::size_t label = labels.index_of(entry.label);
    const std::size_t image = ds.image_labels.size();
    ds.image_labels.push_back(label);
    ds.image_paths.push_back(entry.cube_path);
    auto patches = extract_patches(load_cube(entry.cube_path), patch_size, image, label);
    auto& idx = ds.per_image_index[image];
    for (auto& p : patches) {
      idx.push_back(ds.patches.size());
      ds.patches.push_back(std::move(p));
    }
  }
  if (ds.empty()) {
    std::cerr << "warning: split '" << to_string(split) << "' selects no images\n";
  }
  return ds;
}

}  // namespace s3fn
