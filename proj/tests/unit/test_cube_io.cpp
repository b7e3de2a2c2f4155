#include <doctest.h>

#include <cstring>
#include <fstream>

#include "s3fn/cube_io.hpp"
#include "s3fn/error.hpp"
#include "s3fn/text.hpp"
#include "test_support.hpp"

using namespace s3fn;
using s3fn::testing::TempDir;

namespace {

void write_raw_cube(const std::filesystem::path& p, std::uint32_t h, std::uint32_t w, std::uint32_t c,
                    const std::vector<float>& values, const char* magic = "HSC1") {
  std::ofstream out(p, std::ios::binary);
  out.write(magic, 4);
  for (std::uint32_t d : {h, w, c}) {
    unsigned char le[4] = {static_cast<unsigned char>(d), static_cast<unsigned char>(d >> 8),
                           static_cast<unsigned char>(d >> 16), static_cast<unsigned char>(d >> 24)};
    out.write(reinterpret_cast<const char*>(le), 4);
  }
  for (float v : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    unsigned char le[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                           static_cast<unsigned char>(bits >> 16), static_cast<unsigned char>(bits >> 24)};
    out.write(reinterpret_cast<const char*>(le), 4);
  }
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an s3fn::Error");
  return Errc::io;
}

}  // namespace

TEST_CASE("load_cube decodes header and band-sequential payload") {
  TempDir dir("cube");
  std::vector<float> vals(12);
  for (int i = 0; i < 12; ++i) vals[i] = 0.1f * static_cast<float>(i);
  write_raw_cube(dir / "a.hsc", 2, 2, 3, vals);
  const auto cube = load_cube(dir / "a.hsc");
  CHECK(cube.height == 2);
  CHECK(cube.width == 2);
  CHECK(cube.bands == 3);
  CHECK(cube.values == vals);
  // index = c*H*W + i*W + j
  CHECK(cube.at(1, 0, 2) == vals[2 * 4 + 1 * 2 + 0]);
}

TEST_CASE("load_cube error categories") {
  TempDir dir("cube_err");
  write_raw_cube(dir / "short.hsc", 2, 2, 3, std::vector<float>(11, 0.5f));
  CHECK(code_of([&] { load_cube(dir / "short.hsc"); }) == Errc::truncation);

  write_raw_cube(dir / "long.hsc", 2, 2, 3, std::vector<float>(13, 0.5f));
  CHECK(code_of([&] { load_cube(dir / "long.hsc"); }) == Errc::truncation);

  write_raw_cube(dir / "magic.hsc", 1, 1, 1, {0.5f}, "HSC2");
  CHECK(code_of([&] { load_cube(dir / "magic.hsc"); }) == Errc::format);

  std::vector<float> bad(4, 0.5f);
  bad[3] = std::numeric_limits<float>::quiet_NaN();
  write_raw_cube(dir / "nan.hsc", 2, 2, 1, bad);
  CHECK(code_of([&] { load_cube(dir / "nan.hsc"); }) == Errc::data);

  bad[3] = std::numeric_limits<float>::infinity();
  write_raw_cube(dir / "inf.hsc", 2, 2, 1, bad);
  CHECK(code_of([&] { load_cube(dir / "inf.hsc"); }) == Errc::data);
}

TEST_CASE("save_cube writes a 16-byte header and 4 bytes per value") {
  TempDir dir("cube_save");
  HsiCube one(1, 1, 1, 0.5f);
  save_cube(one, dir / "one.hsc");
  CHECK(std::filesystem::file_size(dir / "one.hsc") == 20);
  const auto bytes = s3fn::testing::slurp(dir / "one.hsc");
  CHECK(bytes.substr(0, 4) == "HSC1");
  CHECK(load_cube(dir / "one.hsc") == one);
}

TEST_CASE("save_cube rejects invalid cubes before writing") {
  TempDir dir("cube_invalid");
  HsiCube zero_bands;
  zero_bands.height = 2;
  zero_bands.width = 2;
  zero_bands.bands = 0;
  CHECK(code_of([&] { save_cube(zero_bands, dir / "z.hsc"); }) == Errc::validation);
  CHECK_FALSE(std::filesystem::exists(dir / "z.hsc"));

  HsiCube wrong_len(2, 2, 2);
  wrong_len.values.pop_back();
  CHECK(code_of([&] { save_cube(wrong_len, dir / "w.hsc"); }) == Errc::validation);
}

TEST_CASE("save_cube to an unwritable path is an io error") {
  HsiCube c(1, 1, 1, 0.5f);
  CHECK(code_of([&] { save_cube(c, "/nonexistent_dir_s3fn/x.hsc"); }) == Errc::io);
}

TEST_CASE("property: save/load round trip is bit exact") {
  TempDir dir("cube_rt");
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const auto h = 1 + rng.index(9), w = 1 + rng.index(9), c = 1 + rng.index(7);
    HsiCube cube(h, w, c);
    for (auto& v : cube.values) v = static_cast<float>(rng.uniform(-5.0, 5.0) * std::pow(10.0, rng.uniform(-3, 3)));
    save_cube(cube, dir / "rt.hsc");
    const auto back = load_cube(dir / "rt.hsc");
    REQUIRE(back.values.size() == cube.values.size());
    CHECK(std::memcmp(back.values.data(), cube.values.data(), cube.values.size() * 4) == 0);
    CHECK(back.height == h);
    CHECK(back.width == w);
    CHECK(back.bands == c);
  }
}

TEST_CASE("load_manifest derives label order from first appearance") {
  TempDir dir("manifest");
  text::write_file(dir / "m.csv", "cube_path,label,split\na.hsc,Heartwood,train\nb.hsc,Sapwood,test\n");
  const auto m = load_manifest(dir / "m.csv");
  CHECK(m.labels.size() == 2);
  CHECK(m.labels.names() == std::vector<std::string>{"Heartwood", "Sapwood"});
  REQUIRE(m.manifest.entries.size() == 2);
  CHECK(m.manifest.entries[0].split == Split::train);
  CHECK(m.manifest.entries[1].split == Split::test);
  CHECK(m.manifest.entries[0].cube_path == dir / "a.hsc");
  CHECK(m.labels.index_of("Sapwood") == 1);
  CHECK(m.labels.find("Oak") == 2);
}

TEST_CASE("load_manifest errors") {
  TempDir dir("manifest_err");
  text::write_file(dir / "dev.csv", "cube_path,label,split\na.hsc,A,dev\n");
  CHECK(code_of([&] { load_manifest(dir / "dev.csv"); }) == Errc::parse);

  text::write_file(dir / "empty.csv", "cube_path,label,split\n");
  CHECK(code_of([&] { load_manifest(dir / "empty.csv"); }) == Errc::validation);

  text::write_file(dir / "dup.csv", "cube_path,label,split\na.hsc,A,train\na.hsc,B,test\n");
  CHECK(code_of([&] { load_manifest(dir / "dup.csv"); }) == Errc::validation);
}

TEST_CASE("manifest save/load round trip") {
  TempDir dir("manifest_rt");
  DatasetManifest m;
  m.entries.push_back({dir / "cubes" / "x.hsc", "A", Split::train});
  m.entries.push_back({dir / "cubes" / "y.hsc", "B", Split::val});
  save_manifest(m, dir / "m.csv");
  const auto back = load_manifest(dir / "m.csv");
  REQUIRE(back.manifest.entries.size() == 2);
  CHECK(back.manifest.entries[0].cube_path == m.entries[0].cube_path);
  CHECK(back.manifest.entries[1].split == Split::val);
  CHECK(s3fn::testing::slurp(dir / "m.csv").find("cubes/x.hsc") != std::string::npos);
}

TEST_CASE("LabelSet rejects duplicates and empty names") {
  CHECK_THROWS_AS(LabelSet({"a", "a"}), Error);
  CHECK_THROWS_AS(LabelSet({"a", ""}), Error);
  LabelSet ok({"b", "a"});
  CHECK(ok.name(0) == "b");
  CHECK(code_of([&] { (void)ok.index_of("c"); }) == Errc::validation);
}

TEST_CASE("mean_reflectance examples") {
  HsiCube constant(3, 4, 5, 0.5f);
  for (double m : mean_reflectance(constant).means) CHECK(m == doctest::Approx(0.5).epsilon(1e-12));

  HsiCube two(2, 1, 1);
  two.values = {0.2f, 0.4f};
  CHECK(mean_reflectance(two).means[0] == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("mean_reflectance matches a per-pixel loop oracle") {
  Rng rng(5);
  const auto cube = s3fn::testing::random_cube(rng, 4, 4, 8);
  const auto curve = mean_reflectance(cube);
  REQUIRE(curve.means.size() == 8);
  for (std::size_t c = 0; c < 8; ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) acc += cube.at(i, j, c);
    CHECK(std::abs(curve.means[c] - acc / 16.0) < 1e-6);
  }
}

TEST_CASE("property: mean_reflectance is linear and recovers a uniform pixel") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = 1 + rng.index(6), w = 1 + rng.index(6), c = 1 + rng.index(6);
    const auto cube = s3fn::testing::random_cube(rng, h, w, c);
    const float alpha = static_cast<float>(rng.uniform(0.1, 4.0));
    auto scaled = cube;
    for (auto& v : scaled.values) v *= alpha;
    const auto a = mean_reflectance(cube).means, b = mean_reflectance(scaled).means;
    for (std::size_t k = 0; k < c; ++k) CHECK(std::abs(b[k] - alpha * a[k]) < 1e-5);

    HsiCube flat(h, w, c);
    std::vector<float> v(c);
    for (auto& x : v) x = static_cast<float>(rng.uniform(0.0, 2.0));
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j)
        for (std::size_t k = 0; k < c; ++k) flat.at(i, j, k) = v[k];
    const auto m = mean_reflectance(flat).means;
    for (std::size_t k = 0; k < c; ++k) CHECK(std::abs(m[k] - v[k]) < 1e-6);
  }
}

TEST_CASE("write_curve emits one band,value row per band") {
  TempDir dir("curve");
  HsiCube cube(2, 2, 6, 0.5f);
  write_curve(mean_reflectance(cube), dir / "c.csv");
  const auto lines = text::read_lines(dir / "c.csv");
  std::size_t rows = 0;
  for (const auto& l : lines) {
    if (l.empty()) continue;
    const auto parts = text::split(l, ',');
    REQUIRE(parts.size() == 2);
    CHECK(text::parse_int(parts[0]) == static_cast<long long>(rows));
    CHECK(text::parse_double(parts[1]) == 0.5);
    ++rows;
  }
  CHECK(rows == 6);
}
