#include "s3fn/cube_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "s3fn/error.hpp"
#include "s3fn/text.hpp"

namespace s3fn {
namespace {

constexpr std::array<char, 4> kMagic{'H', 'S', 'C', '1'};
constexpr std::size_t kHeaderBytes = 16;

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_u32(char* dst, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) dst[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
}

std::uint32_t get_u32(const char* src) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(src[i])) << (8 * i);
  return v;
}

}  // namespace

void validate(const HsiCube& cube) {
  if (cube.height == 0 || cube.width == 0 || cube.bands == 0) {
    throw Error(Errc::validation, "cube dimensions must be >= 1 (got " + std::to_string(cube.height) + "x" +
                                      std::to_string(cube.width) + "x" + std::to_string(cube.bands) + ")");
  }
  if (cube.values.size() != cube.height * cube.width * cube.bands) {
    throw Error(Errc::validation, "cube value count does not match H*W*C");
  }
  for (std::size_t i = 0; i < cube.values.size(); ++i) {
    if (!std::isfinite(cube.values[i])) {
      throw Error(Errc::data, "non-finite reflectance at flat index " + std::to_string(i));
    }
  }
}

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::val: return "val";
  }
  return "train";
}

Split parse_split(std::string_view token) {
  token = text::trim(token);
  if (token == "train") return Split::train;
  if (token == "test") return Split::test;
  if (token == "val") return Split::val;
  throw Error(Errc::parse, "unknown split '" + std::string(token) + "' (expected train, test or val)");
}

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw Error(Errc::validation, "empty class name");
    if (!seen.insert(n).second) throw Error(Errc::validation, "duplicate class name '" + n + "'");
  }
}

std::size_t LabelSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return names_.size();
}

std::size_t LabelSet::index_of(std::string_view name) const {
  const auto i = find(name);
  if (i == names_.size()) throw Error(Errc::validation, "label '" + std::string(name) + "' not in label set");
  return i;
}

HsiCube load_cube(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open cube " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw Error(Errc::format, path.string() + ": missing HSC1 magic");
  }
  HsiCube cube;
  cube.height = get_u32(bytes.data() + 4);
  cube.width = get_u32(bytes.data() + 8);
  cube.bands = get_u32(bytes.data() + 12);
  if (cube.height == 0 || cube.width == 0 || cube.bands == 0) {
    throw Error(Errc::format, path.string() + ": zero dimension in header");
  }
  const std::size_t count = cube.height * cube.width * cube.bands;
  const std::size_t payload = bytes.size() - kHeaderBytes;
  if (payload != count * 4) {
    throw Error(Errc::truncation, path.string() + ": header declares " + std::to_string(count) + " values but payload holds " +
                                      std::to_string(payload) + " bytes");
  }
  cube.values.resize(count);
  const char* src = bytes.data() + kHeaderBytes;
  for (std::size_t i = 0; i < count; ++i) {
    cube.values[i] = std::bit_cast<float>(get_u32(src + 4 * i));
  }
  validate(cube);
  return cube;
}

void save_cube(const HsiCube& cube, const std::filesystem::path& path) {
  validate(cube);
  std::string bytes(kHeaderBytes + 4 * cube.values.size(), '\0');
  std::memcpy(bytes.data(), kMagic.data(), kMagic.size());
  put_u32(bytes.data() + 4, static_cast<std::uint32_t>(cube.height));
  put_u32(bytes.data() + 8, static_cast<std::uint32_t>(cube.width));
  put_u32(bytes.data() + 12, static_cast<std::uint32_t>(cube.bands));
  char* dst = bytes.data() + kHeaderBytes;
  for (std::size_t i = 0; i < cube.values.size(); ++i) {
    put_u32(dst + 4 * i, std::bit_cast<std::uint32_t>(cube.values[i]));
  }
  text::write_file(path, bytes);
}

LoadedManifest load_manifest(const std::filesystem::path& path) {
  const auto lines = text::read_lines(path);
  if (lines.empty() || text::trim(lines[0]) != "cube_path,label,split") {
    throw Error(Errc::format, path.string() + ": expected header 'cube_path,label,split'");
  }
  const auto base = path.parent_path();
  LoadedManifest out;
  std::vector<std::string> names;
  std::set<std::string> seen_paths;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (text::trim(lines[ln]).empty()) continue;
    const auto fields = text::split(lines[ln], ',');
    if (fields.size() != 3) {
      throw Error(Errc::parse, path.string() + ":" + std::to_string(ln + 1) + ": expected 3 comma-separated fields");
    }
    ManifestEntry entry;
    const std::string raw_path(text::trim(fields[0]));
    entry.label = std::string(text::trim(fields[1]));
    entry.split = parse_split(fields[2]);
    if (raw_path.empty() || entry.label.empty()) {
      throw Error(Errc::parse, path.string() + ":" + std::to_string(ln + 1) + ": empty path or label");
    }
    if (!seen_paths.insert(raw_path).second) {
      throw Error(Errc::validation, path.string() + ": duplicate cube path '" + raw_path + "'");
    }
    std::filesystem::path p(raw_path);
    entry.cube_path = p.is_absolute() ? p : base / p;
    if (std::find(names.begin(), names.end(), entry.label) == names.end()) names.push_back(entry.label);
    out.manifest.entries.push_back(std::move(entry));
  }
  if (names.empty()) throw Error(Errc::validation, path.string() + ": manifest has no rows (zero classes)");
  out.labels = LabelSet(std::move(names));
  return out;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  const auto base = path.parent_path();
  std::ostringstream os;
  os << "cube_path,label,split\n";
  for (const auto& e : manifest.entries) {
    auto p = e.cube_path;
    if (!base.empty() && p.is_absolute() == std::filesystem::path(base).is_absolute()) {
      const auto rel = p.lexically_relative(base);
      if (!rel.empty() && *rel.begin() != "..") p = rel;
    }
    const auto ps = p.generic_string();
    if (ps.find(',') != std::string::npos || e.label.find(',') != std::string::npos) {
      throw Error(Errc::validation, "manifest paths and labels must not contain commas");
    }
    os << ps << ',' << e.label << ',' << to_string(e.split) << '\n';
  }
  text::write_file(path, os.str());
}

SpectralCurve mean_reflectance(const HsiCube& cube) {
  validate(cube);
  const std::size_t plane = cube.height * cube.width;
  SpectralCurve curve;
  curve.means.resize(cube.bands);
  for (std::size_t c = 0; c < cube.bands; ++c) {
    double sum = 0.0;
    const float* band = cube.values.data() + c * plane;
    for (std::size_t k = 0; k < plane; ++k) sum += band[k];
    curve.means[c] = sum / static_cast<double>(plane);
  }
  return curve;
}

void write_curve(const SpectralCurve& curve, const std::filesystem::path& path) {
  std::ostringstream os;
  for (std::size_t c = 0; c < curve.means.size(); ++c) {
    os << c << ',' << text::format_double(curve.means[c]) << '\n';
  }
  text::write_file(path, os.str());
}

LabelSet load_labels(const std::filesystem::path& path) {
  std::vector<std::string> names;
  for (const auto& line : text::read_lines(path)) {
    if (!text::trim(line).empty()) names.emplace_back(text::trim(line));
  }
  if (names.empty()) throw Error(Errc::validation, path.string() + ": empty label set");
  return LabelSet(std::move(names));
}

void save_labels(const LabelSet& labels, const std::filesystem::path& path) {
  std::string out;
  for (const auto& n : labels.names()) out += n + "\n";
  text::write_file(path, out);
}

}  // namespace s3fn
