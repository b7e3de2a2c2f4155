#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "s3fn/cube_io.hpp"

namespace s3fn {

/// Parameters of a synthetic dataset with class-conditioned spectra.
///
/// Pixel spectrum = s * signature[class] + noise, where s ~ 1 + pixel_mix * U(-0.5, 0.5)
/// is a per-pixel intensity jitter and noise is zero-mean Gaussian with
/// per-band standard deviation `noise_sd`. With noise_correlation_bands > 0
/// the noise is correlated across bands with a squared-exponential kernel of
/// that length (smooth, sensor-like); 0 gives independent bands.
struct SynthSpec {
  std::size_t num_classes = 2;
  std::size_t train_per_class = 15;
  std::size_t test_per_class = 5;
  std::size_t val_per_class = 0;
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t bands = 40;
  double separation = 0.3;
  double noise_sd = 0.05;
  double noise_correlation_bands = 6.0;
  double pixel_mix = 0.0;
  std::uint64_t seed = 7;
  std::vector<std::string> class_names;           // default class_0, class_1, ...
  std::vector<std::vector<double>> signatures;    // default default_signatures(...)

  void validate() const;
  std::vector<std::string> names() const;
};

/// Keys mirror the SynthSpec fields; `class_names` is comma-separated and
/// `signature.<k>` overrides one class curve.
SynthSpec load_synth_spec(const std::filesystem::path& path);
std::string describe(const SynthSpec& spec);

/// Smooth curves in [0, 1]: a 0.15 baseline plus two Gaussian bumps (amplitude
/// 0.7) inside each class's own slice of the band range. Throws
/// Errc::parameter when the requested pairwise separation delta * sqrt(C)
/// cannot be met for this (U, C).
std::vector<std::vector<double>> default_signatures(std::size_t classes, std::size_t bands, double separation);

/// Row-major C x C factor L with L L^T equal to the noise correlation matrix.
std::vector<double> noise_factor(std::size_t bands, double correlation_bands);

HsiCube generate_cube(const SynthSpec& spec, std::span<const double> signature, std::span<const double> factor,
                      std::uint64_t seed);

struct GeneratedDataset {
  DatasetManifest manifest;
  LabelSet labels;
  std::filesystem::path manifest_path;
  std::vector<std::vector<double>> signatures;
};

/// Writes out_dir/cubes/<split>_<class>_<k>.hsc, out_dir/manifest.csv and
/// out_dir/synth.meta. Each cube uses the seed derive_seed(seed, cube index).
GeneratedDataset generate_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir);

}  // namespace s3fn
