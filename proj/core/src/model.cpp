#include "s3fn/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "s3fn/error.hpp"
#include "s3fn/nn/adam.hpp"
#include "s3fn/nn/checkpoint.hpp"

namespace s3fn {
namespace {

using nn::LayerParams;
using nn::Tensor4;

void add_into(LayerParams& acc, const LayerParams& g) {
  for (std::size_t i = 0; i < acc.weights.size(); ++i) acc.weights[i] += g.weights[i];
  for (std::size_t i = 0; i < acc.biases.size(); ++i) acc.biases[i] += g.biases[i];
}

std::vector<LayerParams> zero_grads(const std::vector<LayerParams>& layers) {
  std::vector<LayerParams> g;
  g.reserve(layers.size());
  for (const auto& l : layers) g.push_back(nn::zeros_like(l));
  return g;
}

Tensor4 relu(const Tensor4& t) {
  Tensor4 out;
  out.dims = t.dims;
  out.values = nn::relu_forward(t.values);
  return out;
}

Tensor4 relu_grad(const Tensor4& pre, const Tensor4& grad) {
  Tensor4 out;
  out.dims = pre.dims;
  out.values = nn::relu_backward(pre.values, grad.values);
  return out;
}

void shuffle(std::vector<std::size_t>& order, Rng& rng) {
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
}

void require_finite(double loss, std::string_view stage, std::size_t epoch) {
  if (!std::isfinite(loss)) {
    throw Error(Errc::numeric, std::string(stage) + ": loss became non-finite in epoch " + std::to_string(epoch));
  }
}

void check_labels(const PatchDataset& ds, std::size_t classes) {
  for (const auto& p : ds.patches) {
    if (p.label >= classes) throw Error(Errc::index, "patch label " + std::to_string(p.label) + " >= " + std::to_string(classes));
  }
}

}  // namespace

std::string to_string(FeatureTap tap) { return tap == FeatureTap::fc2 ? "fc2" : "fc1"; }

FeatureTap parse_feature_tap(std::string_view token) {
  if (token == "fc2") return FeatureTap::fc2;
  if (token == "fc1") return FeatureTap::fc1;
  throw Error(Errc::config, "unknown feature tap '" + std::string(token) + "' (expected fc1 or fc2)");
}

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::standalone_cnn: return "standalone_cnn";
    case RunMode::label_only: return "label_only";
    case RunMode::full_s3fn: return "full_s3fn";
  }
  return "full_s3fn";
}

RunMode parse_run_mode(std::string_view token) {
  if (token == "standalone_cnn") return RunMode::standalone_cnn;
  if (token == "label_only") return RunMode::label_only;
  if (token == "full_s3fn") return RunMode::full_s3fn;
  throw Error(Errc::config, "unknown mode '" + std::string(token) + "' (expected standalone_cnn, label_only or full_s3fn)");
}

std::size_t Backbone::flatten_dim() const {
  std::array<std::size_t, 4> dims{shape.patch_size, shape.patch_size, reduced_bands, shape.filters[0]};
  dims = nn::pool_output_dims(dims, shape.pool_window);
  dims[3] = shape.filters[2];
  dims = nn::pool_output_dims(dims, shape.pool_window);
  return dims[0] * dims[1] * dims[2] * dims[3];
}

Backbone build_backbone(std::size_t reduced_bands, std::size_t num_classes, std::uint64_t seed, BackboneShape shape) {
  if (reduced_bands < 1) throw Error(Errc::config, "backbone needs at least one reduced band");
  if (num_classes < 2) throw Error(Errc::config, "backbone needs at least 2 classes");
  Backbone bb;
  bb.shape = shape;
  bb.reduced_bands = reduced_bands;
  bb.num_classes = num_classes;
  bb.layers.push_back(nn::make_conv_params("conv1", 1, shape.filters[0]));
  bb.layers.push_back(nn::make_conv_params("conv2", shape.filters[0], shape.filters[1]));
  bb.layers.push_back(nn::make_conv_params("conv3", shape.filters[1], shape.filters[2]));
  bb.layers.push_back(nn::make_dense_params("fc1", bb.flatten_dim(), shape.fc1_units));
  bb.layers.push_back(nn::make_dense_params("fc2", shape.fc1_units, shape.fc2_units));
  bb.layers.push_back(nn::make_dense_params("classifier", shape.fc2_units, num_classes));
  for (std::size_t l = 0; l < bb.layers.size(); ++l) {
    Rng rng(derive_seed(seed, l));
    nn::he_uniform_init(bb.layers[l], rng);
  }
  return bb;
}

Backbone backbone_from_layers(std::vector<LayerParams> layers, std::size_t reduced_bands, BackboneShape shape) {
  if (layers.size() != 6) throw Error(Errc::format, "backbone checkpoint must hold 6 layers");
  shape.filters = {layers[0].shape.at(4), layers[1].shape.at(4), layers[2].shape.at(4)};
  shape.fc1_units = layers[3].shape.at(0);
  shape.fc2_units = layers[4].shape.at(0);
  Backbone reference = build_backbone(reduced_bands, layers[5].shape.at(0), 0, shape);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].shape != reference.layers[l].shape || layers[l].biases.size() != reference.layers[l].biases.size()) {
      throw Error(Errc::shape, "checkpoint layer '" + layers[l].name + "' does not fit a backbone for C'=" +
                                   std::to_string(reduced_bands));
    }
  }
  reference.layers = std::move(layers);
  return reference;
}

Tensor4 to_tensor(const ReducedPatch& rp) {
  Tensor4 t(rp.size, rp.size, rp.bands, 1);
  t.values = rp.values;
  return t;
}

BackboneTrace backbone_forward(const Backbone& bb, const Tensor4& input, bool training, Rng* rng) {
  if (input.dims != std::array<std::size_t, 4>{bb.shape.patch_size, bb.shape.patch_size, bb.reduced_bands, 1}) {
    throw Error(Errc::shape, "backbone expects a " + std::to_string(bb.shape.patch_size) + "x" +
                                 std::to_string(bb.shape.patch_size) + "x" + std::to_string(bb.reduced_bands) +
                                 " patch, got " + nn::shape_string(input.dims));
  }
  if (training && !rng) throw Error(Errc::parameter, "training-mode forward needs a random source");
  const auto& L = bb.layers;
  BackboneTrace t;
  t.input = input;
  t.conv1 = nn::conv3d_forward(t.input, L[Backbone::conv1]);
  t.relu1 = relu(t.conv1);
  t.pool1 = nn::avgpool3d_forward(t.relu1, bb.shape.pool_window);
  t.conv2 = nn::conv3d_forward(t.pool1, L[Backbone::conv2]);
  t.relu2 = relu(t.conv2);
  t.conv3 = nn::conv3d_forward(t.relu2, L[Backbone::conv3]);
  t.relu3 = relu(t.conv3);
  t.pool2 = nn::avgpool3d_forward(t.relu3, bb.shape.pool_window);
  t.fc1 = nn::dense_forward(t.pool2.values, L[Backbone::fc1]);
  t.fc1_act = nn::relu_forward(t.fc1);
  Rng unused(0);
  auto drop = nn::dropout(t.fc1_act, bb.dropout_rate, training, training ? *rng : unused);
  t.dropout_mask = std::move(drop.mask);
  t.dropped = std::move(drop.output);
  t.fc2 = nn::dense_forward(t.dropped, L[Backbone::fc2]);
  t.features = nn::relu_forward(t.fc2);
  t.logits = nn::dense_forward(t.features, L[Backbone::classifier]);
  t.probs = nn::softmax(t.logits);
  return t;
}

BackboneGradients backbone_backward(const Backbone& bb, const BackboneTrace& t, std::span<const double> grad_logits,
                                    bool want_input_grad) {
  const auto& L = bb.layers;
  BackboneGradients g;
  g.layers.resize(L.size());

  auto head = nn::dense_backward(t.features, L[Backbone::classifier], grad_logits);
  g.layers[Backbone::classifier] = std::move(head.params);
  auto d_fc2 = nn::relu_backward(t.fc2, head.input);
  auto fc2 = nn::dense_backward(t.dropped, L[Backbone::fc2], d_fc2);
  g.layers[Backbone::fc2] = std::move(fc2.params);
  auto d_act1 = nn::dropout_backward(t.dropout_mask, fc2.input);
  auto d_fc1 = nn::relu_backward(t.fc1, d_act1);
  auto fc1 = nn::dense_backward(t.pool2.values, L[Backbone::fc1], d_fc1);
  g.layers[Backbone::fc1] = std::move(fc1.params);

  Tensor4 d_pool2;
  d_pool2.dims = t.pool2.dims;
  d_pool2.values = std::move(fc1.input);
  auto d_relu3 = nn::avgpool3d_backward(t.relu3.dims, bb.shape.pool_window, d_pool2);
  auto conv3 = nn::conv3d_backward(t.relu2, L[Backbone::conv3], relu_grad(t.conv3, d_relu3));
  g.layers[Backbone::conv3] = std::move(conv3.params);
  auto conv2 = nn::conv3d_backward(t.pool1, L[Backbone::conv2], relu_grad(t.conv2, conv3.input));
  g.layers[Backbone::conv2] = std::move(conv2.params);
  auto d_relu1 = nn::avgpool3d_backward(t.relu1.dims, bb.shape.pool_window, conv2.input);
  auto conv1 = nn::conv3d_backward(t.input, L[Backbone::conv1], relu_grad(t.conv1, d_relu1), want_input_grad);
  g.layers[Backbone::conv1] = std::move(conv1.params);
  if (want_input_grad) g.input = std::move(conv1.input);
  return g;
}

std::vector<double> extract_features(const Backbone& bb, const ReducedPatch& rp) {
  auto t = backbone_forward(bb, to_tensor(rp), false);
  return bb.tap == FeatureTap::fc2 ? std::move(t.features) : std::move(t.fc1_act);
}

ClassProbabilities standalone_probabilities(const Backbone& bb, const ReducedPatch& rp) {
  auto t = backbone_forward(bb, to_tensor(rp), false);
  return {std::move(t.logits), std::move(t.probs)};
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw Error(Errc::config, "batch size must be positive");
  if (!(lr > 0.0)) throw Error(Errc::config, "learning rate must be positive");
  if (!(lambda >= 0.0)) throw Error(Errc::config, "L2 coefficient must be non-negative");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(Errc::config, "dropout must lie in [0, 1)");
  if (!(augment_lo <= augment_hi)) throw Error(Errc::config, "augmentation range requires lo <= hi");
}

PretrainResult pretrain_backbone(Backbone backbone, const PatchDataset& train, const PcaModel& pca,
                                 const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw Error(Errc::data, "pretraining needs at least one training patch");
  if (pca.reduced_bands != backbone.reduced_bands) throw Error(Errc::shape, "PCA C' differs from the backbone input depth");
  check_labels(train, backbone.num_classes);
  backbone.dropout_rate = cfg.dropout;

  std::vector<ReducedPatch> reduced;
  reduced.reserve(train.patches.size());
  for (const auto& p : train.patches) reduced.push_back(transform(pca, p));

  PretrainResult result;
  auto eval_loss = [&](double& accuracy) {
    double ce = 0.0;
    std::size_t correct = 0;
    for (const auto& rp : reduced) {
      const auto t = backbone_forward(backbone, to_tensor(rp), false);
      ce += nn::cross_entropy(t.probs, rp.label);
      correct += argmax(t.probs) == rp.label;
    }
    accuracy = static_cast<double>(correct) / static_cast<double>(reduced.size());
    return ce / static_cast<double>(reduced.size()) + nn::l2_penalty(backbone.layers, cfg.lambda);
  };
  double accuracy = 0.0;
  result.history.initial = eval_loss(accuracy);

  Rng rng(derive_seed(cfg.seed, 101));
  auto adam = nn::make_adam_state(backbone.layers);
  std::vector<std::size_t> order(train.patches.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double inv_n = 1.0 / static_cast<double>(end - start);
      auto grads = zero_grads(backbone.layers);
      double ce = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        ReducedPatch rp = cfg.augment ? transform(pca, augment_scale(train.patches[idx], rng, cfg.augment_lo, cfg.augment_hi))
                                      : reduced[idx];
        const auto trace = backbone_forward(backbone, to_tensor(rp), true, &rng);
        ce += nn::cross_entropy(trace.probs, rp.label);
        auto dlogits = nn::softmax_cross_entropy_grad(trace.probs, rp.label);
        for (auto& v : dlogits) v *= inv_n;
        const auto g = backbone_backward(backbone, trace, dlogits);
        for (std::size_t l = 0; l < grads.size(); ++l) add_into(grads[l], g.layers[l]);
      }
      const double loss = ce * inv_n + nn::l2_penalty(backbone.layers, cfg.lambda);
      require_finite(loss, "pretrain", epoch);
      nn::add_l2_gradient(backbone.layers, grads, cfg.lambda);
      nn::adam_step(backbone.layers, grads, adam, cfg.lr);
      epoch_loss += loss;
      ++batches;
    }
    result.history.epochs.push_back(epoch_loss / static_cast<double>(batches));
  }
  eval_loss(accuracy);
  result.train_accuracy = accuracy;
  result.backbone = std::move(backbone);
  return result;
}

FusionHead build_fusion_head(std::size_t feature_dim, std::size_t embedding_dim, std::uint64_t seed, std::size_t depth,
                             bool normalize_embeddings) {
  if (depth < 1) throw Error(Errc::config, "projection depth must be >= 1");
  FusionHead head;
  head.input_dim = feature_dim;
  head.embedding_dim = embedding_dim;
  head.normalize_embeddings = normalize_embeddings;
  std::size_t in = feature_dim;
  for (std::size_t l = 0; l < depth; ++l) {
    head.layers.push_back(nn::make_dense_params("proj" + std::to_string(l + 1), in, embedding_dim));
    Rng rng(derive_seed(seed, 1000 + l));
    nn::he_uniform_init(head.layers.back(), rng);
    in = embedding_dim;
  }
  return head;
}

FusionHead fusion_head_from_layers(std::vector<LayerParams> layers, bool normalize_embeddings) {
  if (layers.empty()) throw Error(Errc::format, "fusion head checkpoint holds no layers");
  FusionHead head;
  head.input_dim = layers.front().shape.at(1);
  head.embedding_dim = layers.back().shape.at(0);
  head.normalize_embeddings = normalize_embeddings;
  for (std::size_t l = 1; l < layers.size(); ++l) {
    if (layers[l].shape.at(1) != layers[l - 1].shape.at(0)) throw Error(Errc::shape, "fusion head layers do not chain");
  }
  head.layers = std::move(layers);
  return head;
}

namespace {

struct HeadTrace {
  std::vector<std::vector<double>> inputs;  // input to each layer
  std::vector<std::vector<double>> pre;     // pre-activation of each layer
  std::vector<double> output;
};

HeadTrace head_forward(const FusionHead& head, std::span<const double> features) {
  if (features.size() != head.input_dim) {
    throw Error(Errc::shape, "projection expects " + std::to_string(head.input_dim) + " features, got " +
                                 std::to_string(features.size()));
  }
  HeadTrace t;
  std::vector<double> x(features.begin(), features.end());
  for (const auto& layer : head.layers) {
    t.inputs.push_back(x);
    t.pre.push_back(nn::dense_forward(x, layer));
    x = nn::relu_forward(t.pre.back());
  }
  t.output = std::move(x);
  return t;
}

}  // namespace

std::vector<double> project(const FusionHead& head, std::span<const double> features) {
  return head_forward(head, features).output;
}

std::vector<double> alignment_scores(std::span<const double> projected, std::span<const double> embeddings,
                                     std::size_t classes) {
  if (classes == 0 || embeddings.size() != classes * projected.size()) {
    throw Error(Errc::shape, "embedding matrix does not match projection dimension " + std::to_string(projected.size()));
  }
  const std::size_t d = projected.size();
  std::vector<double> scores(classes, 0.0);
  for (std::size_t y = 0; y < classes; ++y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) acc += projected[i] * embeddings[y * d + i];
    scores[y] = acc;
  }
  return scores;
}

FusionResult train_fusion(const Backbone& backbone, FusionHead head, const PatchDataset& train, const PcaModel& pca,
                          const LabelEmbeddingSet& embeddings, const LabelSet& labels, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw Error(Errc::data, "fusion training needs at least one training patch");
  if (labels.size() != backbone.num_classes) throw Error(Errc::validation, "label set size differs from the backbone class count");
  check_labels(train, labels.size());
  validate_against_labels(embeddings, labels);
  if (embeddings.dim != head.embedding_dim) {
    throw Error(Errc::shape, "embedding dim " + std::to_string(embeddings.dim) + " differs from projection output " +
                                 std::to_string(head.embedding_dim));
  }
  if (head.input_dim != backbone.feature_dim()) throw Error(Errc::shape, "projection input differs from backbone feature size");
  const std::size_t U = labels.size();
  const std::size_t d = head.embedding_dim;
  const auto E = embedding_matrix(embeddings, labels, head.normalize_embeddings);

  auto features_of = [&](const Patch& p) { return extract_features(backbone, transform(pca, p)); };
  std::vector<std::vector<double>> cached;
  cached.reserve(train.patches.size());
  for (const auto& p : train.patches) cached.push_back(features_of(p));

  FusionResult result;
  auto eval_loss = [&](double& accuracy) {
    double ce = 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < cached.size(); ++i) {
      const auto probs = nn::softmax(alignment_scores(project(head, cached[i]), E, U));
      ce += nn::cross_entropy(probs, train.patches[i].label);
      correct += argmax(probs) == train.patches[i].label;
    }
    accuracy = static_cast<double>(correct) / static_cast<double>(cached.size());
    return ce / static_cast<double>(cached.size()) + nn::l2_penalty(head.layers, cfg.lambda);
  };
  double accuracy = 0.0;
  result.history.initial = eval_loss(accuracy);

  Rng rng(derive_seed(cfg.seed, 202));
  auto adam = nn::make_adam_state(head.layers);
  std::vector<std::size_t> order(train.patches.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double inv_n = 1.0 / static_cast<double>(end - start);
      auto grads = zero_grads(head.layers);
      double ce = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        const auto& patch = train.patches[idx];
        const auto features =
            cfg.augment ? features_of(augment_scale(patch, rng, cfg.augment_lo, cfg.augment_hi)) : cached[idx];
        const auto trace = head_forward(head, features);
        const auto probs = nn::softmax(alignment_scores(trace.output, E, U));
        ce += nn::cross_entropy(probs, patch.label);
        auto ds = nn::softmax_cross_entropy_grad(probs, patch.label);
        std::vector<double> dz(d, 0.0);
        for (std::size_t y = 0; y < U; ++y) {
          for (std::size_t i = 0; i < d; ++i) dz[i] += ds[y] * inv_n * E[y * d + i];
        }
        for (std::size_t l = head.layers.size(); l-- > 0;) {
          const auto dpre = nn::relu_backward(trace.pre[l], dz);
          auto g = nn::dense_backward(trace.inputs[l], head.layers[l], dpre);
          add_into(grads[l], g.params);
          dz = std::move(g.input);
        }
      }
      const double loss = ce * inv_n + nn::l2_penalty(head.layers, cfg.lambda);
      require_finite(loss, "fuse", epoch);
      nn::add_l2_gradient(head.layers, grads, cfg.lambda);
      nn::adam_step(head.layers, grads, adam, cfg.lr);
      epoch_loss += loss;
      ++batches;
    }
    result.history.epochs.push_back(epoch_loss / static_cast<double>(batches));
  }
  eval_loss(accuracy);
  result.train_accuracy = accuracy;
  result.head = std::move(head);
  return result;
}

ClassProbabilities patch_probabilities(const Backbone& backbone, const FusionHead& head,
                                       std::span<const double> embeddings, std::size_t classes, const ReducedPatch& rp) {
  ClassProbabilities cp;
  cp.scores = alignment_scores(project(head, extract_features(backbone, rp)), embeddings, classes);
  cp.probs = nn::softmax(cp.scores);
  return cp;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::shape, "argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

VoteResult majority_vote(std::span<const std::vector<double>> patch_probs) {
  if (patch_probs.empty()) throw Error(Errc::size, "majority vote needs at least one patch");
  const std::size_t U = patch_probs.front().size();
  VoteResult r;
  r.vote_counts.assign(U, 0);
  r.summed_probs.assign(U, 0.0);
  for (const auto& probs : patch_probs) {
    if (probs.size() != U) throw Error(Errc::shape, "patch probability vectors differ in length");
    const std::size_t vote = argmax(probs);
    r.votes.push_back(vote);
    ++r.vote_counts[vote];
    for (std::size_t y = 0; y < U; ++y) r.summed_probs[y] += probs[y];
  }
  const std::size_t top = *std::max_element(r.vote_counts.begin(), r.vote_counts.end());
  bool found = false;
  for (std::size_t y = 0; y < U; ++y) {
    if (r.vote_counts[y] != top) continue;
    if (!found || r.summed_probs[y] > r.summed_probs[r.predicted]) {
      r.predicted = y;
      found = true;
    }
  }
  return r;
}

ClassProbabilities model_patch_probabilities(const S3fnModel& model, const ReducedPatch& rp) {
  if (model.mode == RunMode::standalone_cnn || !model.head) return standalone_probabilities(model.backbone, rp);
  return patch_probabilities(model.backbone, *model.head, model.embeddings, model.labels.size(), rp);
}

ImageClassification classify_image(const S3fnModel& model, const HsiCube& cube) {
  const auto patches = extract_patches(cube, model.backbone.shape.patch_size);
  ImageClassification out;
  std::vector<std::vector<double>> probs;
  for (const auto& p : patches) {
    out.patch_probs.push_back(model_patch_probabilities(model, transform(model.pca, p)));
    probs.push_back(out.patch_probs.back().probs);
  }
  auto vote = majority_vote(probs);
  out.predicted = vote.predicted;
  out.votes = std::move(vote.votes);
  return out;
}

ModeResult run_mode(RunMode mode, const Backbone& pretrained, const PcaModel& pca, const LabelSet& labels,
                    const PatchDataset& train, const LabelEmbeddingSet* embeddings, const TrainConfig& cfg,
                    const FusionOptions& options) {
  ModeResult r;
  r.model.mode = mode;
  r.model.pca = pca;
  r.model.labels = labels;
  r.model.backbone = pretrained;
  if (mode == RunMode::standalone_cnn) {
    if (embeddings) r.warnings.push_back("standalone_cnn mode ignores the embedding file");
    return r;
  }
  if (!embeddings) throw Error(Errc::config, to_string(mode) + " mode requires a label-embedding file");
  r.warnings = validate_against_labels(*embeddings, labels);
  auto head = build_fusion_head(pretrained.feature_dim(), embeddings->dim, derive_seed(cfg.seed, 303),
                                options.projection_depth, options.normalize_embeddings);
  auto fused = train_fusion(pretrained, std::move(head), train, pca, *embeddings, labels, cfg);
  r.model.head = fused.head;
  r.model.embeddings = embedding_matrix(*embeddings, labels, options.normalize_embeddings);
  r.model.embedding_source = embeddings->source_tag;
  r.fusion = std::move(fused);
  return r;
}

}  // namespace s3fn
