#include <doctest.h>

#include "s3fn/error.hpp"
#include "s3fn/nn/checkpoint.hpp"
#include "s3fn/pipeline.hpp"
#include "s3fn/synth.hpp"
#include "s3fn/text.hpp"
#include "test_support.hpp"

using namespace s3fn;
using s3fn::testing::slurp;
using s3fn::testing::TempDir;

namespace {

SynthSpec small_spec() {
  SynthSpec s;
  s.train_per_class = 2;
  s.test_per_class = 1;
  s.height = s.width = 32;
  s.bands = 16;
  return s;
}

RunConfig small_config() {
  RunConfig cfg;
  cfg.patch_size = 16;
  cfg.train.epochs = 2;
  cfg.train.seed = 3;
  return cfg;
}

std::string message_of(auto&& fn, Errc expected) {
  try {
    fn();
  } catch (const Error& e) {
    CHECK(e.code() == expected);
    return e.what();
  }
  FAIL("expected an s3fn::Error");
  return {};
}

}  // namespace

TEST_CASE("stages require their predecessors") {
  TempDir dir("pipe_missing");
  const auto ds = generate_dataset(small_spec(), dir / "data");
  auto cfg = small_config();
  const auto bundle = dir / "bundle";
  CHECK(message_of([&] { pipeline::run_pretrain(ds.manifest_path, bundle, cfg); }, Errc::config).find("s3fn pca") !=
        std::string::npos);
  pipeline::run_pca(ds.manifest_path, bundle, cfg);
  CHECK(message_of([&] { pipeline::run_fuse(ds.manifest_path, bundle, cfg); }, Errc::config).find("s3fn pretrain") !=
        std::string::npos);
  pipeline::run_pretrain(ds.manifest_path, bundle, cfg);
  // full_s3fn without embeddings
  CHECK(message_of([&] { pipeline::run_fuse(ds.manifest_path, bundle, cfg); }, Errc::config).find("embeddings") !=
        std::string::npos);
  CHECK(message_of([&] { pipeline::run_eval(ds.manifest_path, bundle, cfg); }, Errc::config).find("s3fn fuse") !=
        std::string::npos);
  // standalone evaluation needs no embeddings
  cfg.mode = RunMode::standalone_cnn;
  const auto r = pipeline::run_eval(ds.manifest_path, bundle, cfg);
  CHECK(r.predictions.size() == 2);
  CHECK(r.report.metadata.at("mode") == "standalone_cnn");
  CHECK(std::filesystem::exists(bundle / "report.standalone_cnn.txt"));
}

TEST_CASE("full chain writes artifacts and metadata, and is byte-reproducible") {
  TempDir dir("pipe_chain");
  const auto ds = generate_dataset(small_spec(), dir / "data");
  const auto emb_path = dir / "emb.txt";
  save_embeddings(synth_orthogonal_embeddings(ds.labels, 4, 1), emb_path);

  auto run_all = [&](const std::filesystem::path& bundle) {
    auto cfg = small_config();
    pipeline::run_pca(ds.manifest_path, bundle, cfg);
    pipeline::run_pretrain(ds.manifest_path, bundle, cfg);
    for (auto mode : {RunMode::standalone_cnn, RunMode::full_s3fn}) {
      cfg.mode = mode;
      cfg.embeddings_path = mode == RunMode::standalone_cnn ? std::nullopt : std::optional(emb_path);
      pipeline::run_fuse(ds.manifest_path, bundle, cfg);
      pipeline::run_eval(ds.manifest_path, bundle, cfg);
    }
  };
  run_all(dir / "a");
  run_all(dir / "b");

  for (const char* name : {"pca.txt", "pca.meta", "labels.txt", "backbone.params", "pretrain.meta",
                           "head.full_s3fn.params", "embeddings.full_s3fn.txt", "fuse.full_s3fn.meta",
                           "fuse.standalone_cnn.meta", "report.full_s3fn.txt", "report.full_s3fn.kv",
                           "predictions.full_s3fn.csv", "run.full_s3fn.meta", "report.standalone_cnn.kv"}) {
    INFO(name);
    REQUIRE(std::filesystem::exists(dir / "a" / name));
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  }
  const auto pre = slurp(dir / "a" / "pretrain.meta");
  for (const char* key : {"seed=3", "epochs=2", "reduced_bands=", "epoch_losses=", "initial_loss="})
    CHECK(pre.find(key) != std::string::npos);
  CHECK(slurp(dir / "a" / "pca.meta").find("reduced_bands=") != std::string::npos);

  const auto fuse_meta = slurp(dir / "a" / "fuse.full_s3fn.meta");
  const auto ck = std::to_string(nn::checksum(nn::load_params(dir / "a" / "backbone.params")));
  CHECK(fuse_meta.find("backbone_checksum=" + ck) != std::string::npos);

  const auto report = read_report(dir / "a" / "report.full_s3fn.kv");
  CHECK(report.confusion.total() == 2);
  CHECK(report.metadata.at("encoder") == "synthetic-orthogonal seed=1");
}

TEST_CASE("load_model rejects a head trained with different embeddings") {
  TempDir dir("pipe_dim");
  const auto ds = generate_dataset(small_spec(), dir / "data");
  auto cfg = small_config();
  cfg.train.epochs = 1;
  const auto bundle = dir / "bundle";
  pipeline::run_pca(ds.manifest_path, bundle, cfg);
  pipeline::run_pretrain(ds.manifest_path, bundle, cfg);
  save_embeddings(synth_orthogonal_embeddings(ds.labels, 4, 1), dir / "e4.txt");
  save_embeddings(synth_orthogonal_embeddings(ds.labels, 5, 1), dir / "e5.txt");
  cfg.mode = RunMode::label_only;
  cfg.embeddings_path = dir / "e4.txt";
  pipeline::run_fuse(ds.manifest_path, bundle, cfg);
  cfg.embeddings_path = dir / "e5.txt";
  CHECK_THROWS_AS(pipeline::load_model(bundle, cfg), Error);
  cfg.embeddings_path.reset();
  CHECK(pipeline::load_model(bundle, cfg).head->embedding_dim == 4);
}
