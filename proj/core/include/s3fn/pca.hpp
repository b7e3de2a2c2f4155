#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "s3fn/patching.hpp"

namespace s3fn {

/// Spectral PCA fitted on pooled pixel spectra.
struct PcaModel {
  std::size_t bands = 0;          // C
  std::size_t reduced_bands = 0;  // C'
  std::vector<double> mean;       // length C
  std::vector<double> components; // C' x C row-major, orthonormal rows
  std::vector<double> variance_ratios;  // length C, non-increasing, sums to 1

  const double* component(std::size_t k) const { return components.data() + k * bands; }
  bool operator==(const PcaModel&) const = default;
};

/// 32x32xC' projection of a patch; pixel-interleaved like Patch.
struct ReducedPatch {
  std::size_t size = 0;
  std::size_t bands = 0;
  std::vector<double> values;
  std::size_t image_index = 0;
  std::size_t patch_index = 0;
  std::size_t label = 0;
};

/// Fits on every pixel of every patch (one row per pixel spectrum).
PcaModel fit_pca(std::span<const Patch> train_patches, double variance_target = 0.99);

/// Same fit on an explicit row-major (rows x bands) matrix of spectra.
PcaModel fit_pca_matrix(std::span<const double> rows, std::size_t row_count, std::size_t bands,
                        double variance_target = 0.99);

/// Smallest k with cumulative ratio >= target (C when rounding keeps every prefix short).
std::size_t select_components(std::span<const double> variance_ratios, double variance_target);

ReducedPatch transform(const PcaModel& model, const Patch& patch);
/// Projects one spectrum of length C into `out` (length C').
void transform_spectrum(const PcaModel& model, std::span<const double> spectrum, std::span<double> out);

struct ExplainedVariance {
  std::vector<double> ratios;
  std::vector<double> cumulative;
};
ExplainedVariance explained_variance(const PcaModel& model);

void save_pca(const PcaModel& model, const std::filesystem::path& path);
PcaModel load_pca(const std::filesystem::path& path);

}  // namespace s3fn
