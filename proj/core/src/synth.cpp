#include "s3fn/synth.hpp"

#include <cmath>
#include <sstream>

#include "s3fn/config.hpp"
#include "s3fn/error.hpp"
#include "s3fn/linalg.hpp"
#include "s3fn/random.hpp"
#include "s3fn/text.hpp"

namespace s3fn {

void SynthSpec::validate() const {
  if (num_classes < 1) throw Error(Errc::config, "synth: num_classes must be >= 1");
  if (height == 0 || width == 0 || bands == 0) throw Error(Errc::config, "synth: cube dimensions must be positive");
  if (train_per_class + test_per_class + val_per_class == 0) throw Error(Errc::config, "synth: no cubes requested");
  if (!(separation > 0.0)) throw Error(Errc::config, "synth: separation must be positive");
  if (!(noise_sd >= 0.0)) throw Error(Errc::config, "synth: noise_sd must be >= 0");
  if (!(noise_correlation_bands >= 0.0)) throw Error(Errc::config, "synth: noise_correlation_bands must be >= 0");
  if (!(pixel_mix >= 0.0 && pixel_mix <= 1.0)) throw Error(Errc::config, "synth: pixel_mix must lie in [0, 1]");
  if (!class_names.empty() && class_names.size() != num_classes) {
    throw Error(Errc::config, "synth: class_names must list num_classes names");
  }
  if (!signatures.empty()) {
    if (signatures.size() != num_classes) throw Error(Errc::config, "synth: signatures must cover every class");
    for (const auto& s : signatures) {
      if (s.size() != bands) throw Error(Errc::config, "synth: signature length must equal bands");
    }
    for (std::size_t a = 0; a < signatures.size(); ++a) {
      for (std::size_t b = a + 1; b < signatures.size(); ++b) {
        if (signatures[a] == signatures[b]) throw Error(Errc::config, "synth: signatures must be pairwise distinct");
      }
    }
  }
}

std::vector<std::string> SynthSpec::names() const {
  if (!class_names.empty()) return class_names;
  std::vector<std::string> out;
  for (std::size_t k = 0; k < num_classes; ++k) out.push_back("class_" + std::to_string(k));
  return out;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  const auto kv = KeyValues::load(path);
  kv.require_known({"num_classes", "train_per_class", "test_per_class", "val_per_class", "height", "width", "bands",
                    "separation", "noise_sd", "noise_correlation_bands", "pixel_mix", "seed", "class_names",
                    "signature."});
  SynthSpec s;
  s.num_classes = kv.get_size("num_classes", s.num_classes);
  s.train_per_class = kv.get_size("train_per_class", s.train_per_class);
  s.test_per_class = kv.get_size("test_per_class", s.test_per_class);
  s.val_per_class = kv.get_size("val_per_class", s.val_per_class);
  s.height = kv.get_size("height", s.height);
  s.width = kv.get_size("width", s.width);
  s.bands = kv.get_size("bands", s.bands);
  s.separation = kv.get_double("separation", s.separation);
  s.noise_sd = kv.get_double("noise_sd", s.noise_sd);
  s.noise_correlation_bands = kv.get_double("noise_correlation_bands", s.noise_correlation_bands);
  s.pixel_mix = kv.get_double("pixel_mix", s.pixel_mix);
  s.seed = kv.get_size("seed", static_cast<std::size_t>(s.seed));
  if (kv.has("class_names")) {
    const auto names = kv.get("class_names", "");
    for (auto n : text::split(names, ',')) s.class_names.emplace_back(text::trim(n));
  }
  bool any_signature = false;
  for (std::size_t k = 0; k < s.num_classes; ++k) any_signature |= kv.has("signature." + std::to_string(k));
  if (any_signature) {
    for (std::size_t k = 0; k < s.num_classes; ++k) {
      const auto key = "signature." + std::to_string(k);
      if (!kv.has(key)) throw Error(Errc::config, "synth: missing " + key);
      try {
        s.signatures.push_back(text::parse_doubles(kv.get(key, "")));
      } catch (const Error& e) {
        throw Error(Errc::config, "synth: " + key + ": " + e.what());
      }
    }
  }
  s.validate();
  return s;
}

std::string describe(const SynthSpec& s) {
  std::ostringstream os;
  os << "num_classes=" << s.num_classes << "\n"
     << "train_per_class=" << s.train_per_class << "\n"
     << "test_per_class=" << s.test_per_class << "\n"
     << "val_per_class=" << s.val_per_class << "\n"
     << "height=" << s.height << "\n"
     << "width=" << s.width << "\n"
     << "bands=" << s.bands << "\n"
     << "separation=" << text::format_double(s.separation) << "\n"
     << "noise_sd=" << text::format_double(s.noise_sd) << "\n"
     << "noise_correlation_bands=" << text::format_double(s.noise_correlation_bands) << "\n"
     << "pixel_mix=" << text::format_double(s.pixel_mix) << "\n"
     << "seed=" << s.seed << "\n";
  const auto names = s.names();
  os << "class_names=";
  for (std::size_t k = 0; k < names.size(); ++k) os << (k ? "," : "") << names[k];
  os << "\n";
  return os.str();
}

std::vector<std::vector<double>> default_signatures(std::size_t classes, std::size_t bands, double separation) {
  if (!(separation > 0.0)) throw Error(Errc::parameter, "separation must be positive");
  if (classes == 0 || bands == 0) throw Error(Errc::parameter, "signatures need classes and bands");
  const double slice = static_cast<double>(bands) / static_cast<double>(classes);
  const double width = std::max(1.0, slice / 4.0);
  std::vector<std::vector<double>> sigs(classes, std::vector<double>(bands));
  for (std::size_t u = 0; u < classes; ++u) {
    const double centers[2] = {(static_cast<double>(u) + 0.25) * slice, (static_cast<double>(u) + 0.75) * slice};
    for (std::size_t c = 0; c < bands; ++c) {
      double v = 0.15;
      for (double mu : centers) {
        const double z = (static_cast<double>(c) - mu) / width;
        v += 0.7 * std::exp(-0.5 * z * z);
      }
      sigs[u][c] = std::clamp(v, 0.0, 1.0);
    }
  }
  const double required = separation * std::sqrt(static_cast<double>(bands));
  for (std::size_t a = 0; a < classes; ++a) {
    for (std::size_t b = a + 1; b < classes; ++b) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < bands; ++c) d2 += (sigs[a][c] - sigs[b][c]) * (sigs[a][c] - sigs[b][c]);
      if (std::sqrt(d2) < required) {
        throw Error(Errc::parameter, "signatures for " + std::to_string(classes) + " classes over " +
                                         std::to_string(bands) + " bands cannot reach separation " +
                                         text::format_double(separation));
      }
    }
  }
  return sigs;
}

std::vector<double> noise_factor(std::size_t bands, double correlation_bands) {
  std::vector<double> factor(bands * bands, 0.0);
  if (correlation_bands <= 0.0) {
    for (std::size_t i = 0; i < bands; ++i) factor[i * bands + i] = 1.0;
    return factor;
  }
  std::vector<double> kernel(bands * bands);
  for (std::size_t i = 0; i < bands; ++i) {
    for (std::size_t j = 0; j < bands; ++j) {
      const double z = (static_cast<double>(i) - static_cast<double>(j)) / correlation_bands;
      kernel[i * bands + j] = std::exp(-0.5 * z * z);
    }
  }
  const auto eig = symmetric_eigen(kernel, bands);
  for (std::size_t i = 0; i < bands; ++i) {
    for (std::size_t k = 0; k < bands; ++k) {
      factor[i * bands + k] = eig.vectors[k * bands + i] * std::sqrt(std::max(eig.values[k], 0.0));
    }
  }
  // Rescale rows so each band's marginal variance is exactly 1.
  for (std::size_t i = 0; i < bands; ++i) {
    double norm = 0.0;
    for (std::size_t k = 0; k < bands; ++k) norm += factor[i * bands + k] * factor[i * bands + k];
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < bands; ++k) factor[i * bands + k] /= norm;
  }
  return factor;
}

HsiCube generate_cube(const SynthSpec& spec, std::span<const double> signature, std::span<const double> factor,
                      std::uint64_t seed) {
  const std::size_t C = spec.bands;
  HsiCube cube(spec.height, spec.width, C);
  Rng rng(seed);
  std::vector<double> z(C);
  for (std::size_t i = 0; i < spec.height; ++i) {
    for (std::size_t j = 0; j < spec.width; ++j) {
      const double scale = 1.0 + spec.pixel_mix * (rng.uniform() - 0.5);
      if (spec.noise_sd > 0.0) {
        for (auto& v : z) v = rng.normal();
      }
      for (std::size_t c = 0; c < C; ++c) {
        double noise = 0.0;
        if (spec.noise_sd > 0.0) {
          for (std::size_t k = 0; k < C; ++k) noise += factor[c * C + k] * z[k];
        }
        cube.at(i, j, c) = static_cast<float>(scale * signature[c] + spec.noise_sd * noise);
      }
    }
  }
  return cube;
}

GeneratedDataset generate_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  GeneratedDataset out;
  out.signatures = spec.signatures.empty() ? default_signatures(spec.num_classes, spec.bands, spec.separation)
                                           : spec.signatures;
  const auto names = spec.names();
  out.labels = LabelSet(names);
  const auto factor = noise_factor(spec.bands, spec.noise_correlation_bands);

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "cubes", ec);
  if (ec) throw Error(Errc::io, "cannot create " + (out_dir / "cubes").string() + ": " + ec.message());

  const std::pair<Split, std::size_t> splits[] = {
      {Split::train, spec.train_per_class}, {Split::test, spec.test_per_class}, {Split::val, spec.val_per_class}};
  std::uint64_t cube_index = 0;
  for (const auto& [split, per_class] : splits) {
    for (std::size_t k = 0; k < per_class; ++k) {
      // Interleave classes so every prefix of the manifest stays balanced.
      for (std::size_t u = 0; u < spec.num_classes; ++u, ++cube_index) {
        const auto file = to_string(split) + "_" + names[u] + "_" + std::to_string(k) + ".hsc";
        const auto cube = generate_cube(spec, out.signatures[u], factor, derive_seed(spec.seed, cube_index));
        save_cube(cube, out_dir / "cubes" / file);
        out.manifest.entries.push_back({out_dir / "cubes" / file, names[u], split});
      }
    }
  }
  out.manifest_path = out_dir / "manifest.csv";
  save_manifest(out.manifest, out.manifest_path);

  std::ostringstream meta;
  meta << describe(spec);
  for (std::size_t u = 0; u < out.signatures.size(); ++u) {
    meta << "signature." << u << "=" << text::join(out.signatures[u]) << "\n";
  }
  text::write_file(out_dir / "synth.meta", meta.str());
  return out;
}

}  // namespace s3fn
