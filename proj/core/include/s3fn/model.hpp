#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "s3fn/cube_io.hpp"
#include "s3fn/embeddings.hpp"
#include "s3fn/nn/layers.hpp"
#include "s3fn/nn/tensor.hpp"
#include "s3fn/patching.hpp"
#include "s3fn/pca.hpp"

namespace s3fn {

/// Layer widths of the 3D-CNN. The defaults are the published architecture;
/// smaller shapes exist for tests.
struct BackboneShape {
  std::array<std::size_t, 3> filters{32, 64, 128};
  std::size_t fc1_units = 128;
  std::size_t fc2_units = 64;
  std::size_t pool_window = 2;
  std::size_t patch_size = kDefaultPatchSize;

  bool operator==(const BackboneShape&) const = default;
};

/// Which activation feeds Stage 2: fc2 (64, default) or fc1 (128).
enum class FeatureTap { fc2, fc1 };
std::string to_string(FeatureTap tap);
FeatureTap parse_feature_tap(std::string_view token);

/// conv(32) -> pool -> conv(64) -> conv(128) -> pool -> flatten ->
/// fc1(128)+relu+dropout -> fc2(64)+relu -> classifier(U)+softmax
struct Backbone {
  BackboneShape shape;
  std::size_t reduced_bands = 0;
  std::size_t num_classes = 0;
  double dropout_rate = 0.5;
  FeatureTap tap = FeatureTap::fc2;
  /// conv1, conv2, conv3, fc1, fc2, classifier
  std::vector<nn::LayerParams> layers;

  enum Layer : std::size_t { conv1, conv2, conv3, fc1, fc2, classifier };

  std::size_t feature_dim() const { return tap == FeatureTap::fc2 ? shape.fc2_units : shape.fc1_units; }
  std::size_t flatten_dim() const;
};

/// He-uniform initialisation from `seed` (one derived stream per layer).
Backbone build_backbone(std::size_t reduced_bands, std::size_t num_classes, std::uint64_t seed,
                        BackboneShape shape = {});

/// Rebuilds a backbone around loaded checkpoint layers, checking every shape.
Backbone backbone_from_layers(std::vector<nn::LayerParams> layers, std::size_t reduced_bands, BackboneShape shape = {});

nn::Tensor4 to_tensor(const ReducedPatch& rp);

/// Every intermediate needed by the backward pass.
struct BackboneTrace {
  nn::Tensor4 input, conv1, relu1, pool1, conv2, relu2, conv3, relu3, pool2;
  std::vector<double> fc1, fc1_act, dropout_mask, dropped, fc2, features, logits, probs;
};

/// `rng` is required when `training` (dropout active) and ignored otherwise.
BackboneTrace backbone_forward(const Backbone& bb, const nn::Tensor4& input, bool training, Rng* rng = nullptr);

struct BackboneGradients {
  std::vector<nn::LayerParams> layers;
  nn::Tensor4 input;  // filled when requested
};
BackboneGradients backbone_backward(const Backbone& bb, const BackboneTrace& trace, std::span<const double> grad_logits,
                                    bool want_input_grad = false);

/// Inference-mode features (fc2 post-ReLU by default, length 64).
std::vector<double> extract_features(const Backbone& bb, const ReducedPatch& rp);

struct ClassProbabilities {
  std::vector<double> scores;
  std::vector<double> probs;
};

/// Stage-1 classifier head used end-to-end (standalone 3D-CNN mode).
ClassProbabilities standalone_probabilities(const Backbone& bb, const ReducedPatch& rp);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 4;
  double lr = 1e-3;
  double lambda = 1e-2;
  double dropout = 0.5;
  std::uint64_t seed = 0;
  bool augment = true;
  double augment_lo = 0.9;
  double augment_hi = 1.1;

  void validate() const;
};

struct LossHistory {
  double initial = 0.0;             // before any update, inference mode
  std::vector<double> epochs;       // mean batch loss per epoch
};

struct PretrainResult {
  Backbone backbone;
  LossHistory history;
  double train_accuracy = 0.0;  // patch-level, inference mode
};

/// Minimises mean CE + L2 over patches with Adam. Augmentation (when enabled)
/// scales raw patches before PCA projection; dropout is active.
PretrainResult pretrain_backbone(Backbone backbone, const PatchDataset& train, const PcaModel& pca,
                                 const TrainConfig& cfg);

/// Projection MLP from backbone features to the embedding dimension.
/// Every layer is dense + ReLU; hidden layers have `embedding_dim` units.
struct FusionHead {
  std::size_t input_dim = 0;
  std::size_t embedding_dim = 0;
  bool normalize_embeddings = false;
  std::vector<nn::LayerParams> layers;
};

FusionHead build_fusion_head(std::size_t feature_dim, std::size_t embedding_dim, std::uint64_t seed, std::size_t depth = 1,
                             bool normalize_embeddings = false);
FusionHead fusion_head_from_layers(std::vector<nn::LayerParams> layers, bool normalize_embeddings = false);

std::vector<double> project(const FusionHead& head, std::span<const double> features);

/// scores[y] = dot(z', e_y) over a U x d row-major embedding matrix.
std::vector<double> alignment_scores(std::span<const double> projected, std::span<const double> embeddings,
                                     std::size_t classes);

struct FusionResult {
  FusionHead head;
  LossHistory history;
  double train_accuracy = 0.0;
};

/// Trains only the projection; `backbone` is read-only and runs in inference mode.
FusionResult train_fusion(const Backbone& backbone, FusionHead head, const PatchDataset& train, const PcaModel& pca,
                          const LabelEmbeddingSet& embeddings, const LabelSet& labels, const TrainConfig& cfg);

ClassProbabilities patch_probabilities(const Backbone& backbone, const FusionHead& head,
                                       std::span<const double> embeddings, std::size_t classes, const ReducedPatch& rp);

/// First index of the maximum.
std::size_t argmax(std::span<const double> values);

struct VoteResult {
  std::size_t predicted = 0;
  std::vector<std::size_t> votes;         // per patch
  std::vector<std::size_t> vote_counts;   // per class
  std::vector<double> summed_probs;       // per class
};

/// Modal patch argmax; ties go to the highest summed probability, then the lowest class index.
VoteResult majority_vote(std::span<const std::vector<double>> patch_probs);

enum class RunMode { standalone_cnn, label_only, full_s3fn };
std::string to_string(RunMode mode);
RunMode parse_run_mode(std::string_view token);

/// Everything needed to classify a cube.
struct S3fnModel {
  RunMode mode = RunMode::full_s3fn;
  PcaModel pca;
  LabelSet labels;
  Backbone backbone;
  std::optional<FusionHead> head;  // absent in standalone mode
  std::vector<double> embeddings;  // U x d, label order
  std::string embedding_source;
};

ClassProbabilities model_patch_probabilities(const S3fnModel& model, const ReducedPatch& rp);

struct ImageClassification {
  std::size_t predicted = 0;
  std::vector<std::size_t> votes;
  std::vector<ClassProbabilities> patch_probs;
};

ImageClassification classify_image(const S3fnModel& model, const HsiCube& cube);

struct FusionOptions {
  std::size_t projection_depth = 1;
  bool normalize_embeddings = false;
};

struct ModeResult {
  S3fnModel model;
  std::optional<FusionResult> fusion;
  std::vector<std::string> warnings;
};

/// Assembles a trained model for one ablation mode from a pretrained backbone.
/// standalone_cnn ignores `embeddings` (with a warning); the fusion modes
/// require them and train a fresh head.
ModeResult run_mode(RunMode mode, const Backbone& pretrained, const PcaModel& pca, const LabelSet& labels,
                    const PatchDataset& train, const LabelEmbeddingSet* embeddings, const TrainConfig& cfg,
                    const FusionOptions& options = {});

}  // namespace s3fn
