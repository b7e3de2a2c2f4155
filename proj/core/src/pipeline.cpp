#include "s3fn/pipeline.hpp"

#include <iostream>
#include <sstream>

#include "s3fn/error.hpp"
#include "s3fn/nn/checkpoint.hpp"
#include "s3fn/text.hpp"

namespace s3fn::pipeline {
namespace fs = std::filesystem;

namespace {

void require_artifact(const fs::path& path, std::string_view producer) {
  if (!fs::exists(path)) {
    throw Error(Errc::config, "missing " + path.string() + "; run `s3fn " + std::string(producer) + "` first");
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
}

std::string history_lines(const LossHistory& h) {
  std::ostringstream os;
  os << "initial_loss=" << text::format_double(h.initial) << "\n";
  os << "epoch_losses=" << text::join(h.epochs) << "\n";
  return os.str();
}

LoadedManifest checked_manifest(const fs::path& manifest, const fs::path& bundle) {
  auto loaded = load_manifest(manifest);
  const auto labels_path = bundle / "labels.txt";
  if (fs::exists(labels_path)) {
    const auto stored = load_labels(labels_path);
    for (const auto& n : loaded.labels.names()) {
      if (stored.find(n) == stored.size()) throw Error(Errc::validation, "manifest label '" + n + "' was not seen by `s3fn pca`");
    }
    loaded.labels = stored;
  }
  return loaded;
}

std::string mode_file(std::string_view stem, RunMode mode, std::string_view ext) {
  return std::string(stem) + "." + to_string(mode) + ext.data();
}

}  // namespace

PcaStage run_pca(const fs::path& manifest, const fs::path& bundle, const RunConfig& cfg) {
  ensure_dir(bundle);
  const auto loaded = load_manifest(manifest);
  const auto train = build_patch_dataset(loaded.manifest, loaded.labels, Split::train, cfg.patch_size);
  if (train.empty()) throw Error(Errc::data, "manifest has no training images");
  PcaStage out{fit_pca(train.patches, cfg.variance_target), loaded.labels};
  save_pca(out.pca, bundle / "pca.txt");
  save_labels(out.labels, bundle / "labels.txt");

  const auto ev = explained_variance(out.pca);
  std::ostringstream meta;
  meta << "stage=pca\n" << describe(cfg);
  meta << "bands=" << out.pca.bands << "\n";
  meta << "reduced_bands=" << out.pca.reduced_bands << "\n";
  meta << "train_images=" << train.image_labels.size() << "\n";
  meta << "train_patches=" << train.patches.size() << "\n";
  meta << "cumulative_variance=" << text::join(ev.cumulative) << "\n";
  text::write_file(bundle / "pca.meta", meta.str());
  return out;
}

PretrainResult run_pretrain(const fs::path& manifest, const fs::path& bundle, const RunConfig& cfg) {
  require_artifact(bundle / "pca.txt", "pca");
  const auto pca = load_pca(bundle / "pca.txt");
  const auto loaded = checked_manifest(manifest, bundle);
  const auto train = build_patch_dataset(loaded.manifest, loaded.labels, Split::train, cfg.patch_size);

  BackboneShape shape;
  shape.patch_size = cfg.patch_size;
  auto backbone = build_backbone(pca.reduced_bands, loaded.labels.size(), derive_seed(cfg.train.seed, 11), shape);
  auto result = pretrain_backbone(std::move(backbone), train, pca, cfg.train);
  nn::save_params(result.backbone.layers, bundle / "backbone.params");

  std::ostringstream meta;
  meta << "stage=pretrain\n" << describe(cfg);
  meta << "reduced_bands=" << pca.reduced_bands << "\n";
  meta << "classes=" << loaded.labels.size() << "\n";
  meta << "train_patches=" << train.patches.size() << "\n";
  meta << history_lines(result.history);
  meta << "train_patch_accuracy=" << text::format_double(result.train_accuracy) << "\n";
  meta << "backbone_checksum=" << nn::checksum(result.backbone.layers) << "\n";
  text::write_file(bundle / "pretrain.meta", meta.str());
  return result;
}

namespace {

Backbone load_backbone(const fs::path& bundle, const RunConfig& cfg, const PcaModel& pca) {
  require_artifact(bundle / "backbone.params", "pretrain");
  BackboneShape shape;
  shape.patch_size = cfg.patch_size;
  auto bb = backbone_from_layers(nn::load_params(bundle / "backbone.params"), pca.reduced_bands, shape);
  bb.dropout_rate = cfg.train.dropout;
  bb.tap = cfg.tap;
  return bb;
}

}  // namespace

FuseStage run_fuse(const fs::path& manifest, const fs::path& bundle, const RunConfig& cfg) {
  require_artifact(bundle / "pca.txt", "pca");
  const auto pca = load_pca(bundle / "pca.txt");
  const auto backbone = load_backbone(bundle, cfg, pca);
  FuseStage out;
  const auto meta_path = bundle / mode_file("fuse", cfg.mode, ".meta");
  if (cfg.mode == RunMode::standalone_cnn) {
    out.skipped = true;
    if (cfg.embeddings_path) out.warnings.push_back("standalone_cnn mode ignores the embedding file");
    text::write_file(meta_path, "stage=fuse\nmode=standalone_cnn\nskipped=true\n");
    return out;
  }
  if (!cfg.embeddings_path) {
    throw Error(Errc::config, to_string(cfg.mode) + " mode requires --embeddings <file>");
  }
  const auto loaded = checked_manifest(manifest, bundle);
  const auto embeddings = load_embeddings(*cfg.embeddings_path);
  const auto train = build_patch_dataset(loaded.manifest, loaded.labels, Split::train, cfg.patch_size);

  const auto before = nn::checksum(backbone.layers);
  auto mode = run_mode(cfg.mode, backbone, pca, loaded.labels, train, &embeddings, cfg.fuse_train(),
                       {cfg.projection_depth, cfg.normalize_embeddings});
  const auto after = nn::checksum(mode.model.backbone.layers);
  if (before != after) throw Error(Errc::numeric, "backbone changed during fusion training");
  out.warnings = std::move(mode.warnings);
  out.fusion = std::move(mode.fusion);

  nn::save_params(out.fusion->head.layers, bundle / mode_file("head", cfg.mode, ".params"));
  save_embeddings(embeddings, bundle / mode_file("embeddings", cfg.mode, ".txt"));

  std::ostringstream meta;
  meta << "stage=fuse\n" << describe(cfg);
  meta << "embedding_source=" << embeddings.source_tag << "\n";
  meta << "embedding_dim=" << embeddings.dim << "\n";
  meta << history_lines(out.fusion->history);
  meta << "train_patch_accuracy=" << text::format_double(out.fusion->train_accuracy) << "\n";
  meta << "backbone_checksum=" << after << "\n";
  text::write_file(meta_path, meta.str());
  return out;
}

S3fnModel load_model(const fs::path& bundle, const RunConfig& cfg) {
  require_artifact(bundle / "pca.txt", "pca");
  require_artifact(bundle / "labels.txt", "pca");
  S3fnModel model;
  model.mode = cfg.mode;
  model.pca = load_pca(bundle / "pca.txt");
  model.labels = load_labels(bundle / "labels.txt");
  model.backbone = load_backbone(bundle, cfg, model.pca);
  if (cfg.mode == RunMode::standalone_cnn) return model;

  const auto head_path = bundle / mode_file("head", cfg.mode, ".params");
  require_artifact(head_path, "fuse --mode " + to_string(cfg.mode));
  model.head = fusion_head_from_layers(nn::load_params(head_path), cfg.normalize_embeddings);
  const auto emb_path = cfg.embeddings_path ? *cfg.embeddings_path : bundle / mode_file("embeddings", cfg.mode, ".txt");
  const auto embeddings = load_embeddings(emb_path);
  model.embeddings = embedding_matrix(embeddings, model.labels, cfg.normalize_embeddings);
  model.embedding_source = embeddings.source_tag;
  if (embeddings.dim != model.head->embedding_dim) throw Error(Errc::shape, "embedding dim differs from the trained head");
  return model;
}

EvalStage evaluate(const S3fnModel& model, const DatasetManifest& manifest, Split split) {
  EvalStage out;
  std::vector<std::size_t> preds, truths;
  for (const auto& entry : manifest.entries) {
    if (entry.split != split) continue;
    ImagePrediction p;
    p.cube_path = entry.cube_path;
    p.truth = model.labels.index_of(entry.label);
    p.result = classify_image(model, load_cube(entry.cube_path));
    preds.push_back(p.result.predicted);
    truths.push_back(p.truth);
    out.predictions.push_back(std::move(p));
  }
  if (out.predictions.empty()) throw Error(Errc::data, "split '" + to_string(split) + "' has no images to evaluate");
  out.report = summarize(confusion_matrix(preds, truths, model.labels.size()), model.labels.names());
  out.report.metadata["mode"] = to_string(model.mode);
  out.report.metadata["encoder"] = model.mode == RunMode::standalone_cnn ? "none" : model.embedding_source;
  out.report.metadata["split"] = to_string(split);
  return out;
}

EvalStage run_eval(const fs::path& manifest, const fs::path& bundle, const RunConfig& cfg, Split split) {
  const auto model = load_model(bundle, cfg);
  const auto loaded = checked_manifest(manifest, bundle);
  auto out = evaluate(model, loaded.manifest, split);
  out.report.metadata["seed"] = std::to_string(cfg.train.seed);

  write_report(out.report, bundle / mode_file("report", cfg.mode, ".txt"), ReportFormat::text);
  write_report(out.report, bundle / mode_file("report", cfg.mode, ".kv"), ReportFormat::machine);

  std::ostringstream csv;
  csv << "cube,truth,predicted,votes\n";
  for (const auto& p : out.predictions) {
    csv << p.cube_path.filename().generic_string() << "," << model.labels.name(p.truth) << ","
        << model.labels.name(p.result.predicted) << ",";
    for (std::size_t k = 0; k < p.result.votes.size(); ++k) csv << (k ? ";" : "") << model.labels.name(p.result.votes[k]);
    csv << "\n";
  }
  text::write_file(bundle / mode_file("predictions", cfg.mode, ".csv"), csv.str());

  std::ostringstream meta;
  meta << "stage=eval\n" << describe(cfg);
  meta << "reduced_bands=" << model.pca.reduced_bands << "\n";
  meta << "encoder=" << out.report.metadata["encoder"] << "\n";
  meta << "split=" << to_string(split) << "\n";
  meta << "images=" << out.predictions.size() << "\n";
  meta << "accuracy=" << text::format_double(out.report.accuracy) << "\n";
  meta << "backbone_checksum=" << nn::checksum(model.backbone.layers) << "\n";
  text::write_file(bundle / mode_file("run", cfg.mode, ".meta"), meta.str());
  return out;
}

}  // namespace s3fn::pipeline
