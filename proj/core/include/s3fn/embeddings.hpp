#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "s3fn/cube_io.hpp"

namespace s3fn {

/// Semantic class embeddings, one length-`dim` vector per class name.
struct LabelEmbeddingSet {
  std::size_t dim = 0;
  std::vector<std::pair<std::string, std::vector<double>>> entries;
  std::string source_tag;

  /// nullptr when the class is absent.
  const std::vector<double>* find(std::string_view name) const;
  bool operator==(const LabelEmbeddingSet&) const = default;
};

/// Parses the `s3fn-embeddings v1` text format.
LabelEmbeddingSet load_embeddings(const std::filesystem::path& path);
void save_embeddings(const LabelEmbeddingSet& set, const std::filesystem::path& path);

/// Name-based, order-independent. Throws Errc::validation naming every
/// missing class; returns one warning per extra (unused) class.
std::vector<std::string> validate_against_labels(const LabelEmbeddingSet& set, const LabelSet& labels);

/// U x dim row-major matrix in label order. With `normalize`, rows are scaled to unit norm.
std::vector<double> embedding_matrix(const LabelEmbeddingSet& set, const LabelSet& labels, bool normalize = false);

/// Orthonormal class vectors (Gram-Schmidt of seeded Gaussian draws).
LabelEmbeddingSet synth_orthogonal_embeddings(const LabelSet& labels, std::size_t dim, std::uint64_t seed);

LabelEmbeddingSet scale_embeddings(LabelEmbeddingSet set, double alpha);

}  // namespace s3fn
