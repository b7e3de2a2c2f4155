#include "s3fn/config.hpp"

#include <sstream>

#include "s3fn/error.hpp"
#include "s3fn/text.hpp"

namespace s3fn {

KeyValues KeyValues::parse(std::string_view contents, const std::string& origin) {
  KeyValues kv;
  kv.origin_ = origin;
  std::size_t ln = 0;
  for (auto raw : text::split(contents, '\n')) {
    ++ln;
    auto line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::parse, origin + ":" + std::to_string(ln) + ": expected key=value");
    }
    const auto key = std::string(text::trim(line.substr(0, eq)));
    if (key.empty()) throw Error(Errc::parse, origin + ":" + std::to_string(ln) + ": empty key");
    kv.values_[key] = std::string(text::trim(line.substr(eq + 1)));
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  std::string contents;
  for (const auto& line : text::read_lines(path)) contents += line + "\n";
  return parse(contents, path.string());
}

std::string KeyValues::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return text::parse_double(it->second);
  } catch (const Error&) {
    throw Error(Errc::config, origin_ + ": key '" + key + "' needs a number, got '" + it->second + "'");
  }
}

std::size_t KeyValues::get_size(const std::string& key, std::size_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  long long v = 0;
  try {
    v = text::parse_int(it->second);
  } catch (const Error&) {
    throw Error(Errc::config, origin_ + ": key '" + key + "' needs an integer, got '" + it->second + "'");
  }
  if (v < 0) throw Error(Errc::config, origin_ + ": key '" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw Error(Errc::config, origin_ + ": key '" + key + "' needs true/false, got '" + it->second + "'");
}

void KeyValues::require_known(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (allowed.contains(key)) continue;
    bool family = false;
    for (const auto& a : allowed) {
      if (a.ends_with('.') && key.starts_with(a)) family = true;
    }
    if (!family) throw Error(Errc::config, origin_ + ": unknown key '" + key + "'");
  }
}

TrainConfig RunConfig::fuse_train() const {
  TrainConfig t = train;
  if (fuse_epochs) t.epochs = *fuse_epochs;
  if (fuse_lr) t.lr = *fuse_lr;
  return t;
}

void apply(RunConfig& cfg, const KeyValues& kv) {
  kv.require_known({"epochs", "batch_size", "lr", "lambda", "dropout", "seed", "augment", "augment_lo", "augment_hi",
                    "patch_size", "variance_target", "mode", "embeddings", "feature_tap", "projection_depth",
                    "normalize_embeddings", "fuse_epochs", "fuse_lr"});
  auto& t = cfg.train;
  t.epochs = kv.get_size("epochs", t.epochs);
  t.batch_size = kv.get_size("batch_size", t.batch_size);
  t.lr = kv.get_double("lr", t.lr);
  t.lambda = kv.get_double("lambda", t.lambda);
  t.dropout = kv.get_double("dropout", t.dropout);
  t.seed = kv.get_size("seed", static_cast<std::size_t>(t.seed));
  t.augment = kv.get_bool("augment", t.augment);
  t.augment_lo = kv.get_double("augment_lo", t.augment_lo);
  t.augment_hi = kv.get_double("augment_hi", t.augment_hi);
  cfg.patch_size = kv.get_size("patch_size", cfg.patch_size);
  cfg.variance_target = kv.get_double("variance_target", cfg.variance_target);
  if (kv.has("mode")) cfg.mode = parse_run_mode(kv.get("mode", ""));
  if (kv.has("embeddings")) cfg.embeddings_path = kv.get("embeddings", "");
  if (kv.has("feature_tap")) cfg.tap = parse_feature_tap(kv.get("feature_tap", ""));
  cfg.projection_depth = kv.get_size("projection_depth", cfg.projection_depth);
  cfg.normalize_embeddings = kv.get_bool("normalize_embeddings", cfg.normalize_embeddings);
  if (kv.has("fuse_epochs")) cfg.fuse_epochs = kv.get_size("fuse_epochs", 0);
  if (kv.has("fuse_lr")) cfg.fuse_lr = kv.get_double("fuse_lr", 0.0);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig cfg;
  apply(cfg, KeyValues::load(path));
  return cfg;
}

std::string describe(const RunConfig& cfg) {
  const auto& t = cfg.train;
  std::ostringstream os;
  os << "epochs=" << t.epochs << "\n"
     << "batch_size=" << t.batch_size << "\n"
     << "lr=" << text::format_double(t.lr) << "\n"
     << "lambda=" << text::format_double(t.lambda) << "\n"
     << "dropout=" << text::format_double(t.dropout) << "\n"
     << "seed=" << t.seed << "\n"
     << "augment=" << (t.augment ? "true" : "false") << "\n"
     << "augment_lo=" << text::format_double(t.augment_lo) << "\n"
     << "augment_hi=" << text::format_double(t.augment_hi) << "\n"
     << "patch_size=" << cfg.patch_size << "\n"
     << "variance_target=" << text::format_double(cfg.variance_target) << "\n"
     << "mode=" << to_string(cfg.mode) << "\n"
     << "feature_tap=" << to_string(cfg.tap) << "\n"
     << "projection_depth=" << cfg.projection_depth << "\n"
     << "normalize_embeddings=" << (cfg.normalize_embeddings ? "true" : "false") << "\n"
     << "fuse_epochs=" << cfg.fuse_train().epochs << "\n"
     << "fuse_lr=" << text::format_double(cfg.fuse_train().lr) << "\n";
  return os.str();
}

}  // namespace s3fn
