#include <doctest.h>

#include <cmath>
#include <set>

#include "s3fn/config.hpp"
#include "s3fn/error.hpp"
#include "s3fn/random.hpp"
#include "s3fn/text.hpp"
#include "test_support.hpp"

using namespace s3fn;

TEST_CASE("error categories map to exit codes") {
  CHECK(exit_code(Errc::config) == 2);
  CHECK(exit_code(Errc::parameter) == 2);
  CHECK(exit_code(Errc::format) == 3);
  CHECK(exit_code(Errc::truncation) == 3);
  CHECK(exit_code(Errc::io) == 3);
  CHECK(exit_code(Errc::numeric) == 4);
  CHECK(exit_code(Errc::degenerate) == 4);
}

TEST_CASE("text: shortest round-trip doubles and strict parsing") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-300, 300));
    CHECK(text::parse_double(text::format_double(v)) == v);
  }
  CHECK(text::format_double(0.1) == "0.1");
  CHECK(text::parse_double(" 2.5 ") == 2.5);
  CHECK_THROWS_AS(text::parse_double("2.5x"), Error);
  CHECK_THROWS_AS(text::parse_double(""), Error);
  CHECK(text::parse_int("-12") == -12);
  CHECK_THROWS_AS(text::parse_int("1.5"), Error);
  CHECK(text::split("a,,b", ',').size() == 3);
  CHECK(text::trim("  x \t") == "x");
}

TEST_CASE("rng: determinism and ranges") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  Rng r(3);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto k = r.index(7);
    CHECK(k < 7);
    seen.insert(k);
  }
  CHECK(seen.size() == 7);
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("run config defaults follow the published training setup") {
  const RunConfig cfg;
  CHECK(cfg.train.epochs == 100);
  CHECK(cfg.train.batch_size == 4);
  CHECK(cfg.train.dropout == 0.5);
  CHECK(cfg.train.lambda == 1e-2);
  CHECK(cfg.train.lr == 1e-3);
  CHECK(cfg.train.augment);
  CHECK(cfg.train.augment_lo == 0.9);
  CHECK(cfg.train.augment_hi == 1.1);
  CHECK(cfg.patch_size == 32);
  CHECK(cfg.variance_target == 0.99);
  CHECK(cfg.mode == RunMode::full_s3fn);
  CHECK(cfg.tap == FeatureTap::fc2);
  CHECK(cfg.projection_depth == 1);
  CHECK_FALSE(cfg.normalize_embeddings);
  CHECK(cfg.fuse_train().epochs == 100);
}

TEST_CASE("run config parsing and overrides") {
  s3fn::testing::TempDir dir("cfg");
  text::write_file(dir / "run.cfg", "epochs=30\nseed=7\nmode=label_only\n# note\n\nfuse_epochs=5\nfeature_tap=fc1\n");
  auto cfg = load_run_config(dir / "run.cfg");
  CHECK(cfg.train.epochs == 30);
  CHECK(cfg.train.seed == 7);
  CHECK(cfg.mode == RunMode::label_only);
  CHECK(cfg.tap == FeatureTap::fc1);
  CHECK(cfg.fuse_train().epochs == 5);
  CHECK(cfg.fuse_train().lr == cfg.train.lr);

  KeyValues flags;
  flags.set("epochs", "3");
  apply(cfg, flags);
  CHECK(cfg.train.epochs == 3);
  CHECK(cfg.train.seed == 7);

  text::write_file(dir / "bad.cfg", "epoch=30\n");
  try {
    load_run_config(dir / "bad.cfg");
    FAIL("unknown key");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::config);
  }
  text::write_file(dir / "badval.cfg", "epochs=many\n");
  CHECK_THROWS_AS(load_run_config(dir / "badval.cfg"), Error);
  text::write_file(dir / "noeq.cfg", "epochs\n");
  CHECK_THROWS_AS(load_run_config(dir / "noeq.cfg"), Error);

  const auto echo = describe(cfg);
  CHECK(echo.find("epochs=3\n") != std::string::npos);
  CHECK(echo.find("mode=label_only\n") != std::string::npos);
  CHECK(echo == describe(cfg));
}
