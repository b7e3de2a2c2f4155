#include <doctest.h>

#include <cmath>

#include "s3fn/error.hpp"
#include "s3fn/pca.hpp"
#include "s3fn/patching.hpp"
#include "s3fn/synth.hpp"
#include "s3fn/text.hpp"
#include "pca_oracle.hpp"
#include "test_support.hpp"

using namespace s3fn;
using s3fn::testing::TempDir;

namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

SynthSpec tiny_spec() {
  SynthSpec s;
  s.train_per_class = 2;
  s.test_per_class = 1;
  s.height = s.width = 32;
  s.bands = 16;
  return s;
}

}  // namespace

TEST_CASE("default_signatures: separation, bounds, smoothness") {
  const auto sig = default_signatures(2, 40, 0.2);
  REQUIRE(sig.size() == 2);
  CHECK(distance(sig[0], sig[1]) >= 0.2 * std::sqrt(40.0));
  for (const auto& s : sig) {
    CHECK(s.size() == 40);
    double max_step = 0.0;
    for (std::size_t c = 0; c < s.size(); ++c) {
      CHECK(s[c] >= 0.0);
      CHECK(s[c] <= 1.0);
      if (c) max_step = std::max(max_step, std::abs(s[c] - s[c - 1]));
    }
    CHECK(max_step < 0.1);
  }
  CHECK(distance(sig[0], sig[1]) >= 0.3 * std::sqrt(40.0));
}

TEST_CASE("property: signatures stay bounded, distinct and separated when feasible") {
  for (std::size_t u = 2; u <= 4; ++u) {
    for (std::size_t c : {40, 64, 120, 200}) {
      const auto sig = default_signatures(u, c, 0.1);
      for (std::size_t a = 0; a < u; ++a) {
        for (double v : sig[a]) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
        }
        for (std::size_t b = a + 1; b < u; ++b) CHECK(distance(sig[a], sig[b]) >= 0.1 * std::sqrt(double(c)));
      }
    }
  }
}

TEST_CASE("default_signatures rejects an unreachable separation") {
  try {
    default_signatures(2, 40, 5.0);
    FAIL("expected parameter error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parameter);
  }
  CHECK_THROWS_AS(default_signatures(2, 40, 0.0), Error);
}

TEST_CASE("noise_factor reproduces a unit-diagonal correlation") {
  for (double ell : {0.0, 2.0, 6.0}) {
    const std::size_t c = 20;
    const auto L = noise_factor(c, ell);
    for (std::size_t i = 0; i < c; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        double v = 0.0;
        for (std::size_t k = 0; k < c; ++k) v += L[i * c + k] * L[j * c + k];
        if (i == j) CHECK(std::abs(v - 1.0) < 1e-9);
        if (ell == 0.0 && i != j) CHECK(std::abs(v) < 1e-12);
        if (ell > 0.0 && i + 1 == j) CHECK(v > 0.5);
      }
    }
  }
}

TEST_CASE("noise_sd = 0 reproduces the signature at every pixel") {
  auto spec = tiny_spec();
  spec.noise_sd = 0.0;
  const auto sig = default_signatures(2, spec.bands, spec.separation);
  const auto cube = generate_cube(spec, sig[1], noise_factor(spec.bands, spec.noise_correlation_bands), 3);
  for (std::size_t i = 0; i < 32; ++i)
    for (std::size_t j = 0; j < 32; ++j)
      for (std::size_t c = 0; c < spec.bands; ++c) CHECK(cube.at(i, j, c) == static_cast<float>(sig[1][c]));
}

TEST_CASE("per-band noise has the requested standard deviation") {
  for (double ell : {0.0, 6.0}) {
    auto spec = tiny_spec();
    spec.height = spec.width = 64;
    spec.noise_correlation_bands = ell;
    const auto sig = default_signatures(2, spec.bands, spec.separation);
    const auto cube = generate_cube(spec, sig[0], noise_factor(spec.bands, ell), 5);
    for (std::size_t c = 0; c < spec.bands; ++c) {
      double s = 0, ss = 0;
      for (std::size_t i = 0; i < 64; ++i)
        for (std::size_t j = 0; j < 64; ++j) {
          const double d = cube.at(i, j, c) - sig[0][c];
          s += d;
          ss += d * d;
        }
      const double n = 64.0 * 64.0;
      CHECK(std::abs(s / n) < 0.006);
      CHECK(std::abs(std::sqrt(ss / n) - 0.05) < 0.006);
    }
  }
}

TEST_CASE("generate_dataset: layout and byte determinism") {
  TempDir a("synth_a"), b("synth_b");
  const auto spec = tiny_spec();
  const auto ds = generate_dataset(spec, a.path());
  generate_dataset(spec, b.path());
  CHECK(ds.manifest.entries.size() == 6);
  CHECK(ds.labels.names() == std::vector<std::string>{"class_0", "class_1"});
  std::size_t train = 0;
  for (const auto& e : ds.manifest.entries) {
    train += e.split == Split::train;
    const auto rel = std::filesystem::relative(e.cube_path, a.path());
    CHECK(s3fn::testing::slurp(e.cube_path) == s3fn::testing::slurp(b.path() / rel));
  }
  CHECK(train == 4);
  CHECK(s3fn::testing::slurp(a / "manifest.csv") == s3fn::testing::slurp(b / "manifest.csv"));
  CHECK(s3fn::testing::slurp(a / "synth.meta") == s3fn::testing::slurp(b / "synth.meta"));

  auto other = spec;
  other.seed = 8;
  TempDir c("synth_c");
  generate_dataset(other, c.path());
  CHECK(s3fn::testing::slurp(ds.manifest.entries[0].cube_path) !=
        s3fn::testing::slurp(c.path() / std::filesystem::relative(ds.manifest.entries[0].cube_path, a.path())));
}

TEST_CASE("nearest-mean classifier separates a default-noise dataset") {
  TempDir dir("synth_nm");
  auto spec = tiny_spec();
  spec.train_per_class = 6;
  spec.test_per_class = 6;
  spec.bands = 40;
  const auto ds = generate_dataset(spec, dir.path());
  std::vector<std::vector<double>> centroid(2, std::vector<double>(40, 0.0));
  std::vector<double> n(2, 0.0);
  for (const auto& e : ds.manifest.entries) {
    if (e.split != Split::train) continue;
    const auto k = ds.labels.index_of(e.label);
    const auto m = mean_reflectance(load_cube(e.cube_path)).means;
    for (std::size_t c = 0; c < 40; ++c) centroid[k][c] += m[c];
    n[k] += 1;
  }
  for (std::size_t k = 0; k < 2; ++k)
    for (auto& v : centroid[k]) v /= n[k];
  std::size_t correct = 0, total = 0;
  for (const auto& e : ds.manifest.entries) {
    if (e.split != Split::test) continue;
    const auto m = mean_reflectance(load_cube(e.cube_path)).means;
    const std::size_t pred = distance(m, centroid[0]) <= distance(m, centroid[1]) ? 0 : 1;
    correct += pred == ds.labels.index_of(e.label);
    ++total;
  }
  CHECK(correct == total);
}

TEST_CASE("isotropic low-noise data has effective spectral rank at most U + 3") {
  for (std::size_t u : {2, 3}) {
    auto spec = tiny_spec();
    spec.num_classes = u;
    spec.bands = 40;
    spec.noise_sd = 0.02;
    spec.noise_correlation_bands = 0.0;
    spec.separation = 0.1;
    const auto sig = default_signatures(u, spec.bands, spec.separation);
    const auto factor = noise_factor(spec.bands, 0.0);
    std::vector<Patch> patches;
    std::vector<double> rows;
    for (std::size_t k = 0; k < 2 * u; ++k) {
      for (auto& p : extract_patches(generate_cube(spec, sig[k % u], factor, 100 + k))) {
        for (float v : p.values) rows.push_back(v);
        patches.push_back(std::move(p));
      }
    }
    const auto model = fit_pca(patches, 0.99);
    const auto oracle = s3fn::testing::pca_oracle(rows, rows.size() / spec.bands, spec.bands);
    CHECK(model.reduced_bands == s3fn::testing::oracle_select(oracle.ratios, 0.99));
    CHECK(model.reduced_bands <= u + 3);
  }
}

TEST_CASE("spec file parsing") {
  TempDir dir("synth_spec");
  text::write_file(dir / "s.cfg",
                   "# comment\nnum_classes=3\ntrain_per_class=2\ntest_per_class=1\nbands=12\nseed=11\n"
                   "class_names=Heartwood, Sapwood, Bark\nnoise_sd=0.01\n");
  const auto s = load_synth_spec(dir / "s.cfg");
  CHECK(s.num_classes == 3);
  CHECK(s.bands == 12);
  CHECK(s.seed == 11);
  CHECK(s.names() == std::vector<std::string>{"Heartwood", "Sapwood", "Bark"});
  CHECK(s.noise_sd == 0.01);
  CHECK(describe(s).find("num_classes=3") != std::string::npos);

  text::write_file(dir / "bad.cfg", "num_clases=3\n");
  try {
    load_synth_spec(dir / "bad.cfg");
    FAIL("unknown key");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::config);
  }

  text::write_file(dir / "sig.cfg", "num_classes=2\nbands=3\nsignature.0=0.1,0.2,0.3\nsignature.1=0.3,0.2,0.1\n");
  const auto sig = load_synth_spec(dir / "sig.cfg");
  REQUIRE(sig.signatures.size() == 2);
  CHECK(sig.signatures[1] == std::vector<double>{0.3, 0.2, 0.1});

  text::write_file(dir / "same.cfg", "num_classes=2\nbands=2\nsignature.0=0.1,0.2\nsignature.1=0.1,0.2\n");
  CHECK_THROWS_AS(load_synth_spec(dir / "same.cfg").validate(), Error);

  text::write_file(dir / "neg.cfg", "noise_sd=-1\n");
  CHECK_THROWS_AS(load_synth_spec(dir / "neg.cfg").validate(), Error);
}
