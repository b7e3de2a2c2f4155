#include "s3fn/nn/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "s3fn/error.hpp"
#include "s3fn/text.hpp"

namespace s3fn::nn {
namespace {

std::string_view value_after(std::string_view line, std::string_view key, const std::filesystem::path& path) {
  if (!line.starts_with(key) || line.size() < key.size() + 1 || line[key.size()] != '=') {
    throw Error(Errc::format, path.string() + ": expected '" + std::string(key) + "=' line");
  }
  return line.substr(key.size() + 1);
}

}  // namespace

void save_params(std::span<const LayerParams> layers, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "s3fn-params v1\n";
  os << "layers=" << layers.size() << "\n";
  for (const auto& l : layers) {
    os << "[" << l.name << "]\n";
    os << "shape=";
    for (std::size_t i = 0; i < l.shape.size(); ++i) os << (i ? "," : "") << l.shape[i];
    os << "\nweights=" << text::join(l.weights) << "\n";
    os << "biases=" << text::join(l.biases) << "\n";
  }
  text::write_file(path, os.str());
}

std::vector<LayerParams> load_params(const std::filesystem::path& path) {
  const auto lines = text::read_lines(path);
  if (lines.size() < 2 || lines[0] != "s3fn-params v1") throw Error(Errc::format, path.string() + ": not an s3fn-params v1 file");
  const auto count = static_cast<std::size_t>(text::parse_int(value_after(lines[1], "layers", path)));
  if (lines.size() < 2 + 4 * count) throw Error(Errc::truncation, path.string() + ": fewer layers than declared");
  std::vector<LayerParams> layers;
  for (std::size_t k = 0; k < count; ++k) {
    const std::string_view header = lines[2 + 4 * k];
    if (header.size() < 3 || header.front() != '[' || header.back() != ']') {
      throw Error(Errc::format, path.string() + ": expected [layer] header");
    }
    LayerParams l;
    l.name = std::string(header.substr(1, header.size() - 2));
    for (auto tok : text::split(value_after(lines[3 + 4 * k], "shape", path), ',')) {
      l.shape.push_back(static_cast<std::size_t>(text::parse_int(tok)));
    }
    l.weights = text::parse_doubles(value_after(lines[4 + 4 * k], "weights", path));
    l.biases = text::parse_doubles(value_after(lines[5 + 4 * k], "biases", path));
    std::size_t expected = 1;
    for (auto d : l.shape) expected *= d;
    if (l.shape.empty() || expected != l.weights.size()) {
      throw Error(Errc::format, path.string() + ": layer '" + l.name + "' weight count does not match its shape");
    }
    for (double v : l.weights) {
      if (!std::isfinite(v)) throw Error(Errc::data, path.string() + ": non-finite weight in '" + l.name + "'");
    }
    layers.push_back(std::move(l));
  }
  return layers;
}

std::uint64_t checksum(std::span<const LayerParams> layers) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& l : layers) {
    for (char c : l.name) mix(static_cast<unsigned char>(c));
    for (auto d : l.shape) mix(d);
    for (double w : l.weights) mix(std::bit_cast<std::uint64_t>(w));
    for (double b : l.biases) mix(std::bit_cast<std::uint64_t>(b));
  }
  return h;
}

void he_uniform_init(LayerParams& layer, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in(layer)));
  for (auto& w : layer.weights) w = rng.uniform(-limit, limit);
  std::fill(layer.biases.begin(), layer.biases.end(), 0.0);
}

}  // namespace s3fn::nn
