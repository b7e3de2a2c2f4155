#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "s3fn/model.hpp"

namespace s3fn {

/// `key=value` lines; `#` starts a comment, blank lines are ignored.
class KeyValues {
 public:
  static KeyValues parse(std::string_view contents, const std::string& origin = "<string>");
  static KeyValues load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Throws Errc::config for keys not in `allowed` (prefixes ending in '.' match families).
  void require_known(const std::set<std::string>& allowed) const;

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

/// Pipeline configuration; defaults follow the published training setup.
struct RunConfig {
  TrainConfig train;
  std::size_t patch_size = kDefaultPatchSize;
  double variance_target = 0.99;
  RunMode mode = RunMode::full_s3fn;
  std::optional<std::filesystem::path> embeddings_path;
  FeatureTap tap = FeatureTap::fc2;
  std::size_t projection_depth = 1;
  bool normalize_embeddings = false;
  // Stage 2 defaults reuse the Stage 1 schedule unless set.
  std::optional<std::size_t> fuse_epochs;
  std::optional<double> fuse_lr;

  TrainConfig fuse_train() const;
};

/// Applies recognised keys from `kv` on top of `cfg`.
void apply(RunConfig& cfg, const KeyValues& kv);
RunConfig load_run_config(const std::filesystem::path& path);

/// Stable key=value echo used in stage metadata.
std::string describe(const RunConfig& cfg);

}  // namespace s3fn
