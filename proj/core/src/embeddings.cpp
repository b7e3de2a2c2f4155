#include "s3fn/embeddings.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "s3fn/error.hpp"
#include "s3fn/random.hpp"
#include "s3fn/text.hpp"

namespace s3fn {

const std::vector<double>* LabelEmbeddingSet::find(std::string_view name) const {
  for (const auto& [n, v] : entries) {
    if (n == name) return &v;
  }
  return nullptr;
}

LabelEmbeddingSet load_embeddings(const std::filesystem::path& path) {
  const auto lines = text::read_lines(path);
  const auto where = [&](std::size_t ln) { return path.string() + ":" + std::to_string(ln + 1) + ": "; };
  if (lines.size() < 3 || lines[0] != "s3fn-embeddings v1") {
    throw Error(Errc::format, path.string() + ": not an s3fn-embeddings v1 file");
  }
  if (!lines[1].starts_with("dim=")) throw Error(Errc::format, where(1) + "expected dim=<d>");
  if (!lines[2].starts_with("source=")) throw Error(Errc::format, where(2) + "expected source=<tag>");

  LabelEmbeddingSet set;
  const auto dim = text::parse_int(std::string_view(lines[1]).substr(4));
  if (dim <= 0) throw Error(Errc::format, where(1) + "dim must be positive");
  set.dim = static_cast<std::size_t>(dim);
  set.source_tag = lines[2].substr(7);

  std::set<std::string> seen;
  for (std::size_t ln = 3; ln < lines.size(); ++ln) {
    if (text::trim(lines[ln]).empty()) continue;
    const auto tab = lines[ln].find('\t');
    if (tab == std::string::npos) throw Error(Errc::format, where(ln) + "expected <class>\\t<values>");
    std::string name = lines[ln].substr(0, tab);
    if (name.empty()) throw Error(Errc::validation, where(ln) + "empty class name");
    auto values = text::parse_doubles(std::string_view(lines[ln]).substr(tab + 1));
    if (values.size() != set.dim) {
      throw Error(Errc::format, where(ln) + "class '" + name + "' has " + std::to_string(values.size()) +
                                    " values, header declares dim=" + std::to_string(set.dim));
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw Error(Errc::data, where(ln) + "non-finite value for class '" + name + "'");
    }
    if (!seen.insert(name).second) throw Error(Errc::validation, where(ln) + "duplicate class '" + name + "'");
    set.entries.emplace_back(std::move(name), std::move(values));
  }
  if (set.entries.empty()) throw Error(Errc::validation, path.string() + ": no class rows");
  return set;
}

void save_embeddings(const LabelEmbeddingSet& set, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "s3fn-embeddings v1\n";
  os << "dim=" << set.dim << "\n";
  os << "source=" << set.source_tag << "\n";
  for (const auto& [name, v] : set.entries) {
    if (v.size() != set.dim) throw Error(Errc::shape, "embedding for '" + name + "' has the wrong length");
    if (name.find('\t') != std::string::npos || name.find('\n') != std::string::npos) {
      throw Error(Errc::validation, "class name '" + name + "' contains a tab or newline");
    }
    os << name << '\t' << text::join(v) << '\n';
  }
  text::write_file(path, os.str());
}

std::vector<std::string> validate_against_labels(const LabelEmbeddingSet& set, const LabelSet& labels) {
  std::vector<std::string> missing;
  for (const auto& n : labels.names()) {
    if (!set.find(n)) missing.push_back(n);
  }
  if (!missing.empty()) {
    std::string msg = "embeddings are missing classes:";
    for (const auto& m : missing) msg += " " + m;
    throw Error(Errc::validation, msg);
  }
  std::vector<std::string> warnings;
  for (const auto& [n, v] : set.entries) {
    if (labels.find(n) == labels.size()) warnings.push_back("embedding class '" + n + "' is not in the label set; ignored");
  }
  return warnings;
}

std::vector<double> embedding_matrix(const LabelEmbeddingSet& set, const LabelSet& labels, bool normalize) {
  validate_against_labels(set, labels);
  std::vector<double> out;
  out.reserve(labels.size() * set.dim);
  for (const auto& n : labels.names()) {
    const auto& v = *set.find(n);
    double scale = 1.0;
    if (normalize) {
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm == 0.0) throw Error(Errc::numeric, "cannot normalize zero embedding for '" + n + "'");
      scale = 1.0 / norm;
    }
    for (double x : v) out.push_back(x * scale);
  }
  return out;
}

LabelEmbeddingSet synth_orthogonal_embeddings(const LabelSet& labels, std::size_t dim, std::uint64_t seed) {
  if (dim < labels.size()) {
    throw Error(Errc::config, "orthogonal embeddings need dim >= number of classes (" + std::to_string(dim) + " < " +
                                  std::to_string(labels.size()) + ")");
  }
  Rng rng(seed);
  LabelEmbeddingSet set;
  set.dim = dim;
  set.source_tag = "synthetic-orthogonal seed=" + std::to_string(seed);
  std::vector<std::vector<double>> basis;
  for (const auto& name : labels.names()) {
    std::vector<double> v(dim);
    // Two Gram-Schmidt passes keep pairwise products at rounding level.
    while (true) {
      for (auto& x : v) x = rng.normal();
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) {
          double dot = 0.0;
          for (std::size_t i = 0; i < dim; ++i) dot += v[i] * b[i];
          for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * b[i];
        }
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 1e-6) {
        for (auto& x : v) x /= norm;
        break;
      }
    }
    basis.push_back(v);
    set.entries.emplace_back(name, std::move(v));
  }
  return set;
}

LabelEmbeddingSet scale_embeddings(LabelEmbeddingSet set, double alpha) {
  for (auto& [n, v] : set.entries) {
    for (auto& x : v) x *= alpha;
  }
  return set;
}

}  // namespace s3fn
