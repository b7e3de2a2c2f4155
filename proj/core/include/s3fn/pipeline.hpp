#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "s3fn/config.hpp"
#include "s3fn/metrics.hpp"
#include "s3fn/model.hpp"

// Staged pipeline over a model bundle directory:
//   pca.txt, labels.txt, pca.meta            (pca)
//   backbone.params, pretrain.meta           (pretrain)
//   head.<mode>.params, embeddings.<mode>.txt, fuse.<mode>.meta   (fuse)
//   report.<mode>.txt, report.<mode>.kv, predictions.<mode>.csv, run.<mode>.meta  (eval)
namespace s3fn::pipeline {

struct PcaStage {
  PcaModel pca;
  LabelSet labels;
};
PcaStage run_pca(const std::filesystem::path& manifest, const std::filesystem::path& bundle, const RunConfig& cfg);

PretrainResult run_pretrain(const std::filesystem::path& manifest, const std::filesystem::path& bundle,
                            const RunConfig& cfg);

struct FuseStage {
  bool skipped = false;  // standalone_cnn has no Stage 2
  std::optional<FusionResult> fusion;
  std::vector<std::string> warnings;
};
FuseStage run_fuse(const std::filesystem::path& manifest, const std::filesystem::path& bundle, const RunConfig& cfg);

struct ImagePrediction {
  std::filesystem::path cube_path;
  std::size_t truth = 0;
  ImageClassification result;
};

struct EvalStage {
  EvalReport report;
  std::vector<ImagePrediction> predictions;
};
EvalStage run_eval(const std::filesystem::path& manifest, const std::filesystem::path& bundle, const RunConfig& cfg,
                   Split split = Split::test);

/// Loads the trained model for `cfg.mode` from a bundle.
S3fnModel load_model(const std::filesystem::path& bundle, const RunConfig& cfg);

/// Classifies every image of `split` with an already-loaded model.
EvalStage evaluate(const S3fnModel& model, const DatasetManifest& manifest, Split split);

}  // namespace s3fn::pipeline
