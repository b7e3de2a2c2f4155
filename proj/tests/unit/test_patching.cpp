#include <doctest.h>

#include <set>

#include "s3fn/error.hpp"
#include "s3fn/patching.hpp"
#include "s3fn/text.hpp"
#include "test_support.hpp"

using namespace s3fn;
using s3fn::testing::TempDir;

TEST_CASE("extract_patches counts") {
  CHECK(extract_patches(HsiCube(64, 64, 2)).size() == 4);
  CHECK(extract_patches(HsiCube(33, 33, 1)).size() == 1);
  CHECK(extract_patches(HsiCube(65, 97, 1)).size() == 2 * 3);
}

TEST_CASE("extract_patches on the wood image dimensions") {
  // 1800 x 1600 -> 56 x 50 tiles. Checked on a one-band cube to keep memory small.
  const auto patches = extract_patches(HsiCube(1800, 1600, 1));
  CHECK(patches.size() == 2800);
  CHECK(patches.back().origin_row == 55 * 32);
  CHECK(patches.back().origin_col == 49 * 32);
}

TEST_CASE("extract_patches rejects cubes smaller than a patch") {
  try {
    extract_patches(HsiCube(31, 64, 3));
    FAIL("expected size error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::size);
  }
}

TEST_CASE("extract_patches copies pixels in row-major tile order") {
  Rng rng(3);
  const auto cube = s3fn::testing::random_cube(rng, 70, 40, 3);
  const auto patches = extract_patches(cube, 16, 7, 1);
  REQUIRE(patches.size() == 4 * 2);
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const auto& p = patches[k];
    CHECK(p.patch_index == k);
    CHECK(p.image_index == 7);
    CHECK(p.label == 1);
    CHECK(p.origin_row == (k / 2) * 16);
    CHECK(p.origin_col == (k % 2) * 16);
    for (std::size_t r = 0; r < 16; ++r)
      for (std::size_t c = 0; c < 16; ++c)
        for (std::size_t b = 0; b < 3; ++b)
          REQUIRE(p.values[(r * 16 + c) * 3 + b] == cube.at(p.origin_row + r, p.origin_col + c, b));
  }
}

TEST_CASE("property: patch count law and disjointness") {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t ps = 1 + rng.index(12);
    const std::size_t h = ps + rng.index(40), w = ps + rng.index(40);
    const auto patches = extract_patches(HsiCube(h, w, 1), ps);
    CHECK(patches.size() == (h / ps) * (w / ps));
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& p : patches) {
      for (std::size_t r = 0; r < ps; ++r)
        for (std::size_t c = 0; c < ps; ++c) {
          const std::pair<std::size_t, std::size_t> px{p.origin_row + r, p.origin_col + c};
          CHECK(px.first < h);
          CHECK(px.second < w);
          CHECK(seen.insert(px).second);
        }
    }
  }
}

TEST_CASE("augment_scale") {
  Rng rng(1);
  auto patches = extract_patches(s3fn::testing::random_cube(rng, 8, 8, 3), 8);
  const auto& p = patches[0];

  Rng r1(5);
  const auto same = augment_scale(p, r1, 1.0, 1.0);
  CHECK(same.values == p.values);

  Patch ones = p;
  std::fill(ones.values.begin(), ones.values.end(), 1.0f);
  Rng r2(5);
  for (float v : augment_scale(ones, r2, 0.9, 0.9).values) CHECK(v == doctest::Approx(0.9f));

  Rng a(77), b(77);
  CHECK(augment_scale(p, a).values == augment_scale(p, b).values);

  Rng r3(5);
  CHECK_THROWS_AS(augment_scale(p, r3, 1.1, 0.9), Error);
}

TEST_CASE("property: augmentation is one scalar per patch within [lo, hi]") {
  Rng rng(4);
  auto patches = extract_patches(s3fn::testing::random_cube(rng, 8, 8, 4), 8);
  const auto& p = patches[0];
  for (int trial = 0; trial < 50; ++trial) {
    const auto out = augment_scale(p, rng, 0.9, 1.1);
    CHECK(out.label == p.label);
    CHECK(out.patch_index == p.patch_index);
    const double alpha = static_cast<double>(out.values[0]) / p.values[0];
    CHECK(alpha >= 0.9 - 1e-6);
    CHECK(alpha <= 1.1 + 1e-6);
    for (std::size_t i = 0; i < p.values.size(); ++i)
      CHECK(std::abs(out.values[i] - alpha * p.values[i]) < 1e-5);
  }
}

TEST_CASE("build_patch_dataset over a manifest") {
  TempDir dir("patchds");
  Rng rng(8);
  save_cube(s3fn::testing::random_cube(rng, 64, 64, 2), dir / "a.hsc");
  save_cube(s3fn::testing::random_cube(rng, 64, 64, 2), dir / "b.hsc");
  save_cube(s3fn::testing::random_cube(rng, 40, 70, 2), dir / "c.hsc");
  text::write_file(dir / "m.csv", "cube_path,label,split\na.hsc,A,train\nb.hsc,B,train\nc.hsc,B,test\n");
  const auto loaded = load_manifest(dir / "m.csv");

  const auto train = build_patch_dataset(loaded.manifest, loaded.labels, Split::train);
  CHECK(train.patches.size() == 8);
  CHECK(train.per_image_index.size() == 2);
  CHECK(train.per_image_index.at(0).size() == 4);
  CHECK(train.per_image_index.at(1).size() == 4);
  for (const auto& p : train.patches) CHECK(p.label == train.image_labels[p.image_index]);
  CHECK(train.image_labels == std::vector<std::size_t>{0, 1});

  // per_image_index covers every patch exactly once
  std::multiset<std::size_t> covered;
  for (const auto& [img, idx] : train.per_image_index) covered.insert(idx.begin(), idx.end());
  std::multiset<std::size_t> all;
  for (std::size_t i = 0; i < train.patches.size(); ++i) all.insert(i);
  CHECK(covered == all);

  const auto test = build_patch_dataset(loaded.manifest, loaded.labels, Split::test);
  CHECK(test.patches.size() == 2);
  CHECK(test.image_labels == std::vector<std::size_t>{1});

  const auto val = build_patch_dataset(loaded.manifest, loaded.labels, Split::val);
  CHECK(val.empty());
}

TEST_CASE("build_patch_dataset rejects labels outside the label set") {
  TempDir dir("patchds_label");
  save_cube(HsiCube(32, 32, 1, 0.5f), dir / "a.hsc");
  text::write_file(dir / "m.csv", "cube_path,label,split\na.hsc,Z,train\n");
  const auto loaded = load_manifest(dir / "m.csv");
  try {
    build_patch_dataset(loaded.manifest, LabelSet({"A"}), Split::train);
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::validation);
  }
}
