#include "s3fn/pca.hpp"

#include <cmath>
#include <sstream>

#include "s3fn/error.hpp"
#include "s3fn/linalg.hpp"
#include "s3fn/text.hpp"

namespace s3fn {
namespace {

// Accumulates mean then centered scatter in two passes over the rows.
template <typename RowAt>
PcaModel fit_from_rows(std::size_t row_count, std::size_t bands, double variance_target, RowAt row_at) {
  if (!(variance_target > 0.0 && variance_target <= 1.0)) {
    throw Error(Errc::parameter, "variance target must lie in (0, 1]");
  }
  if (bands == 0) throw Error(Errc::shape, "PCA needs at least one band");
  if (row_count < 2) throw Error(Errc::degenerate, "PCA needs at least 2 pixel spectra");

  PcaModel model;
  model.bands = bands;
  model.mean.assign(bands, 0.0);
  for (std::size_t r = 0; r < row_count; ++r) {
    const auto* row = row_at(r);
    for (std::size_t c = 0; c < bands; ++c) model.mean[c] += row[c];
  }
  for (auto& m : model.mean) m /= static_cast<double>(row_count);

  std::vector<double> cov(bands * bands, 0.0);
  std::vector<double> centered(bands);
  for (std::size_t r = 0; r < row_count; ++r) {
    const auto* row = row_at(r);
    for (std::size_t c = 0; c < bands; ++c) centered[c] = row[c] - model.mean[c];
    for (std::size_t i = 0; i < bands; ++i) {
      const double ci = centered[i];
      double* dst = cov.data() + i * bands;
      for (std::size_t j = i; j < bands; ++j) dst[j] += ci * centered[j];
    }
  }
  const double denom = static_cast<double>(row_count - 1);
  for (std::size_t i = 0; i < bands; ++i) {
    for (std::size_t j = i; j < bands; ++j) {
      cov[i * bands + j] /= denom;
      cov[j * bands + i] = cov[i * bands + j];
    }
  }

  const auto eig = symmetric_eigen(cov, bands);
  double total = 0.0;
  for (double v : eig.values) total += std::max(v, 0.0);
  if (!(total > 0.0)) throw Error(Errc::degenerate, "training spectra have zero total variance");

  model.variance_ratios.resize(bands);
  for (std::size_t k = 0; k < bands; ++k) model.variance_ratios[k] = std::max(eig.values[k], 0.0) / total;
  model.reduced_bands = select_components(model.variance_ratios, variance_target);

  model.components.assign(eig.vectors.begin(), eig.vectors.begin() + static_cast<std::ptrdiff_t>(model.reduced_bands * bands));
  for (std::size_t k = 0; k < model.reduced_bands; ++k) {
    double* row = model.components.data() + k * bands;
    std::size_t arg = 0;
    for (std::size_t c = 1; c < bands; ++c) {
      if (std::abs(row[c]) > std::abs(row[arg])) arg = c;
    }
    if (row[arg] < 0.0) {
      for (std::size_t c = 0; c < bands; ++c) row[c] = -row[c];
    }
  }
  return model;
}

}  // namespace

std::size_t select_components(std::span<const double> variance_ratios, double variance_target) {
  double cumulative = 0.0;
  for (std::size_t k = 0; k < variance_ratios.size(); ++k) {
    cumulative += variance_ratios[k];
    if (cumulative >= variance_target) return k + 1;
  }
  return variance_ratios.size();
}

PcaModel fit_pca(std::span<const Patch> train_patches, double variance_target) {
  if (train_patches.empty()) throw Error(Errc::degenerate, "PCA needs at least one training patch");
  const std::size_t bands = train_patches.front().bands;
  const std::size_t per_patch = train_patches.front().pixels();
  for (const auto& p : train_patches) {
    if (p.bands != bands || p.pixels() != per_patch) throw Error(Errc::shape, "training patches differ in shape");
  }
  std::vector<double> row(bands);
  return fit_from_rows(train_patches.size() * per_patch, bands, variance_target, [&](std::size_t r) {
    const float* src = train_patches[r / per_patch].spectrum(r % per_patch);
    for (std::size_t c = 0; c < bands; ++c) row[c] = src[c];
    return row.data();
  });
}

PcaModel fit_pca_matrix(std::span<const double> rows, std::size_t row_count, std::size_t bands,
                        double variance_target) {
  if (rows.size() != row_count * bands) throw Error(Errc::shape, "PCA input is not rows x bands");
  return fit_from_rows(row_count, bands, variance_target,
                       [&](std::size_t r) { return rows.data() + r * bands; });
}

void transform_spectrum(const PcaModel& model, std::span<const double> spectrum, std::span<double> out) {
  if (spectrum.size() != model.bands || out.size() != model.reduced_bands) {
    throw Error(Errc::shape, "spectrum has " + std::to_string(spectrum.size()) + " bands, PCA model expects " +
                                 std::to_string(model.bands));
  }
  for (std::size_t k = 0; k < model.reduced_bands; ++k) {
    const double* axis = model.component(k);
    double acc = 0.0;
    for (std::size_t c = 0; c < model.bands; ++c) acc += axis[c] * (spectrum[c] - model.mean[c]);
    out[k] = acc;
  }
}

ReducedPatch transform(const PcaModel& model, const Patch& patch) {
  if (patch.bands != model.bands) {
    throw Error(Errc::shape, "patch has " + std::to_string(patch.bands) + " bands, PCA model expects " +
                                 std::to_string(model.bands));
  }
  ReducedPatch out;
  out.size = patch.size;
  out.bands = model.reduced_bands;
  out.image_index = patch.image_index;
  out.patch_index = patch.patch_index;
  out.label = patch.label;
  out.values.resize(patch.pixels() * model.reduced_bands);
  std::vector<double> spectrum(model.bands);
  for (std::size_t px = 0; px < patch.pixels(); ++px) {
    const float* src = patch.spectrum(px);
    for (std::size_t c = 0; c < model.bands; ++c) spectrum[c] = src[c];
    transform_spectrum(model, spectrum,
                       std::span<double>(out.values.data() + px * model.reduced_bands, model.reduced_bands));
  }
  return out;
}

ExplainedVariance explained_variance(const PcaModel& model) {
  ExplainedVariance ev;
  ev.ratios = model.variance_ratios;
  ev.cumulative.resize(ev.ratios.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < ev.ratios.size(); ++k) {
    acc += ev.ratios[k];
    ev.cumulative[k] = acc;
  }
  return ev;
}

void save_pca(const PcaModel& model, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "s3fn-pca v1\n";
  os << "C=" << model.bands << " Cprime=" << model.reduced_bands << "\n";
  os << text::join(model.mean) << "\n";
  for (std::size_t k = 0; k < model.reduced_bands; ++k) {
    os << text::join(std::span<const double>(model.component(k), model.bands)) << "\n";
  }
  os << text::join(model.variance_ratios) << "\n";
  text::write_file(path, os.str());
}

PcaModel load_pca(const std::filesystem::path& path) {
  const auto lines = text::read_lines(path);
  if (lines.size() < 2 || lines[0] != "s3fn-pca v1") throw Error(Errc::format, path.string() + ": not an s3fn-pca v1 file");
  PcaModel model;
  {
    const auto fields = text::split(lines[1], ' ');
    if (fields.size() != 2 || !fields[0].starts_with("C=") || !fields[1].starts_with("Cprime=")) {
      throw Error(Errc::format, path.string() + ": malformed dimension line");
    }
    model.bands = static_cast<std::size_t>(text::parse_int(fields[0].substr(2)));
    model.reduced_bands = static_cast<std::size_t>(text::parse_int(fields[1].substr(7)));
  }
  if (model.bands == 0 || model.reduced_bands == 0 || model.reduced_bands > model.bands) {
    throw Error(Errc::format, path.string() + ": invalid C / Cprime");
  }
  if (lines.size() < 4 + model.reduced_bands) throw Error(Errc::truncation, path.string() + ": missing rows");
  model.mean = text::parse_doubles(lines[2]);
  for (std::size_t k = 0; k < model.reduced_bands; ++k) {
    const auto row = text::parse_doubles(lines[3 + k]);
    if (row.size() != model.bands) throw Error(Errc::format, path.string() + ": component row length mismatch");
    model.components.insert(model.components.end(), row.begin(), row.end());
  }
  model.variance_ratios = text::parse_doubles(lines[3 + model.reduced_bands]);
  if (model.mean.size() != model.bands || model.variance_ratios.size() != model.bands) {
    throw Error(Errc::format, path.string() + ": mean / ratio length mismatch");
  }
  return model;
}

}  // namespace s3fn
