#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace s3fn {

/// One hyperspectral image. Values are band-sequential:
/// index = band * height * width + row * width + col.
struct HsiCube {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t bands = 0;
  std::vector<float> values;

  HsiCube() = default;
  HsiCube(std::size_t h, std::size_t w, std::size_t c, float fill = 0.0f)
      : height(h), width(w), bands(c), values(h * w * c, fill) {}

  float& at(std::size_t row, std::size_t col, std::size_t band) {
    return values[(band * height + row) * width + col];
  }
  float at(std::size_t row, std::size_t col, std::size_t band) const {
    return values[(band * height + row) * width + col];
  }

  bool operator==(const HsiCube&) const = default;
};

/// Throws Errc::validation (dims, length) or Errc::data (non-finite).
void validate(const HsiCube& cube);

enum class Split { train, test, val };

std::string to_string(Split split);
Split parse_split(std::string_view token);

struct ManifestEntry {
  std::filesystem::path cube_path;  // resolved against the manifest directory
  std::string label;
  Split split = Split::train;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

/// Ordered class names; position is the class index.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t index) const { return names_.at(index); }
  /// Class index of `name`, or size() when absent.
  std::size_t find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  bool operator==(const LabelSet&) const = default;

 private:
  std::vector<std::string> names_;
};

struct SpectralCurve {
  std::vector<double> means;
};

HsiCube load_cube(const std::filesystem::path& path);
void save_cube(const HsiCube& cube, const std::filesystem::path& path);

struct LoadedManifest {
  DatasetManifest manifest;
  LabelSet labels;
};

/// Label order is the first appearance order in the file.
LoadedManifest load_manifest(const std::filesystem::path& path);
/// Paths are written relative to the manifest directory when possible.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

SpectralCurve mean_reflectance(const HsiCube& cube);

/// Two-column CSV without header, one row per band: band index, mean reflectance.
void write_curve(const SpectralCurve& curve, const std::filesystem::path& path);

LabelSet load_labels(const std::filesystem::path& path);
void save_labels(const LabelSet& labels, const std::filesystem::path& path);

}  // namespace s3fn
