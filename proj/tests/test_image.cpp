#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "roix/image.hpp"
#include "test_util.hpp"

using namespace roix;
using namespace roix::test;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

fs::path temp_path(const std::string& name) {
  static const fs::path dir = scratch_dir("image");
  return dir / name;
}

GrayImage random_image(std::mt19937& rng, BitDepth depth) {
  std::uniform_int_distribution<std::uint32_t> dim(1, 17);
  std::uniform_int_distribution<std::uint32_t> val(0, max_value(depth));
  const auto w = dim(rng), h = dim(rng);
  std::vector<std::uint16_t> px(w * h);
  for (auto& v : px) v = static_cast<std::uint16_t>(val(rng));
  return {w, h, depth, std::move(px)};
}

}  // namespace

TEST_CASE("PGM P5 decode of a 2x2 depth-8 raster") {
  auto b = bytes_of("P5\n2 2\n255\n");
  b.insert(b.end(), {9, 8, 7, 6});
  const GrayImage img = decode_pgm(b);
  CHECK(img.width() == 2);
  CHECK(img.height() == 2);
  CHECK(img.depth() == BitDepth::k8);
  CHECK(img.pixels() == std::vector<std::uint16_t>{9, 8, 7, 6});
}

TEST_CASE("PGM header comments and 16-bit big-endian samples") {
  auto b = bytes_of("P5 # note\n1 2\n# another\n65535\n");
  b.insert(b.end(), {0x12, 0x34, 0xFF, 0xFF});
  const GrayImage img = decode_pgm(b);
  CHECK(img.depth() == BitDepth::k16);
  CHECK(img.pixels() == std::vector<std::uint16_t>{0x1234, 0xFFFF});
}

TEST_CASE("PGM size mismatch and malformed headers") {
  auto b = bytes_of("P5\n4 4\n255\n");
  b.resize(b.size() + 10, 0);
  CHECK(code_of([&] { decode_pgm(b); }) == ErrorCode::size_mismatch);
  CHECK(code_of([&] { decode_pgm(bytes_of("P2\n1 1\n255\n0")); }) == ErrorCode::malformed_header);
  CHECK(code_of([&] { decode_pgm(bytes_of("P5\n1 x\n255\n")); }) == ErrorCode::malformed_header);
  CHECK(code_of([&] { decode_pgm(bytes_of("P5\n1 1\n70000\n")); }) == ErrorCode::malformed_header);
  CHECK(code_of([&] { decode_pgm(bytes_of("P5\n0 1\n255\n")); }) == ErrorCode::malformed_header);
  auto over = bytes_of("P5\n1 1\n100\n");
  over.push_back(200);
  CHECK(code_of([&] { decode_pgm(over); }) == ErrorCode::value_out_of_range);
}

TEST_CASE("raw little-endian 16-bit load and size mismatch") {
  const auto p = temp_path("raw16.raw");
  write_bytes(p, {1, 0, 2, 0, 0x34, 0x12, 0xFF, 0xFF});
  const GrayImage img = load_image(p, ImageFormat::raw, RawLayout{2, 2, BitDepth::k16});
  CHECK(img.depth() == BitDepth::k16);
  CHECK(img.pixels() == std::vector<std::uint16_t>{1, 2, 0x1234, 0xFFFF});
  CHECK(code_of([&] { load_image(p, ImageFormat::raw, RawLayout{3, 2, BitDepth::k16}); }) == ErrorCode::size_mismatch);
  CHECK(code_of([&] { load_image(p, ImageFormat::raw); }) == ErrorCode::invalid_argument);
}

TEST_CASE("save_image emits maxval 65535 for depth 16 and fails on unwritable paths") {
  const GrayImage img(2, 1, BitDepth::k16, std::vector<std::uint16_t>{0, 65535});
  const auto p = temp_path("deep.pgm");
  save_image(img, p, ImageFormat::pgm);
  std::ifstream in(p, std::ios::binary);
  std::string magic, w, h, maxval;
  in >> magic >> w >> h >> maxval;
  CHECK(maxval == "65535");
  CHECK(code_of([&] { save_image(img, "/nonexistent-dir/x/y.pgm", ImageFormat::pgm); }) == ErrorCode::io);
  CHECK(code_of([&] { load_image("/nonexistent-dir/x.pgm", ImageFormat::pgm); }) == ErrorCode::io);
}

TEST_CASE("save/load roundtrip is bitwise identity for both formats") {
  std::mt19937 rng(7);
  for (int i = 0; i < 40; ++i) {
    for (BitDepth depth : {BitDepth::k8, BitDepth::k16}) {
      const GrayImage img = random_image(rng, depth);
      const auto pgm = temp_path("rt.pgm");
      const auto raw = temp_path("rt.raw");
      save_image(img, pgm, ImageFormat::pgm);
      save_image(img, raw, ImageFormat::raw);
      CHECK(load_image(pgm, ImageFormat::pgm) == img);
      CHECK(load_image(raw, ImageFormat::raw, RawLayout{img.width(), img.height(), depth}) == img);
    }
  }
}

TEST_CASE("subtract_background examples") {
  const GrayImage i(2, 1, BitDepth::k8, std::vector<std::uint16_t>{10, 20});
  const GrayImage b(2, 1, BitDepth::k8, std::vector<std::uint16_t>{3, 3});
  CHECK(subtract_background(i, {b}).pixels() == std::vector<std::uint16_t>{7, 17});
  CHECK(subtract_background(i, {i}).pixels() == std::vector<std::uint16_t>{0, 0});
  const GrayImage five(1, 1, BitDepth::k8, std::uint16_t{5});
  const GrayImage nine(1, 1, BitDepth::k8, std::uint16_t{9});
  CHECK(subtract_background(five, {nine}).pixels() == std::vector<std::uint16_t>{0});
  CHECK(code_of([&] { subtract_background(i, {five}); }) == ErrorCode::dimension_mismatch);
}

TEST_CASE("subtract_background matches an element-wise oracle and stays within [0, max]") {
  std::mt19937 rng(11);
  for (int n = 0; n < 50; ++n) {
    const BitDepth depth = n % 2 ? BitDepth::k16 : BitDepth::k8;
    const GrayImage img = random_image(rng, depth);
    std::uniform_int_distribution<std::uint32_t> val(0, max_value(depth));
    std::vector<std::uint16_t> bg(img.size());
    for (auto& v : bg) v = static_cast<std::uint16_t>(val(rng));
    const GrayImage b(img.width(), img.height(), depth, bg);
    const GrayImage out = subtract_background(img, {b});
    for (std::size_t k = 0; k < img.size(); ++k) {
      const long expect = std::max(0L, long(img.pixels()[k]) - long(bg[k]));
      REQUIRE(out.pixels()[k] == expect);
    }
    CHECK(out.max_pixel() <= img.max_pixel());
    CHECK(out.depth() == depth);
  }
}

TEST_CASE("estimate_background takes the border-frame median") {
  GrayImage img(4, 4, BitDepth::k8, std::uint16_t{10});
  img.set(1, 1, 200);
  img.set(2, 1, 200);
  img.set(1, 2, 200);
  img.set(2, 2, 200);
  const BackgroundModel bg = estimate_background(img, 0.25);
  CHECK(bg.source == BackgroundSource::estimated);
  CHECK(bg.image == GrayImage(4, 4, BitDepth::k8, std::uint16_t{10}));

  const GrayImage uniform(9, 5, BitDepth::k16, std::uint16_t{4321});
  CHECK(estimate_background(uniform, 0.3).image == uniform);

  const GrayImage one(1, 1, BitDepth::k8, std::uint16_t{3});
  CHECK(code_of([&] { estimate_background(one, 0.4); }) == ErrorCode::degenerate_input);
  CHECK(code_of([&] { estimate_background(GrayImage(), 0.2); }) == ErrorCode::degenerate_input);
  CHECK(code_of([&] { estimate_background(img, 0.5); }) == ErrorCode::invalid_argument);
}

TEST_CASE("normalize_intensity examples") {
  const GrayImage top(1, 1, BitDepth::k16, std::uint16_t{65535});
  auto [n1, s1] = normalize_intensity(top);
  CHECK(n1.pixels()[0] == 255);
  CHECK(s1.i_max == 65535.0);

  const GrayImage zero(3, 2, BitDepth::k16);
  auto [n2, s2] = normalize_intensity(zero);
  CHECK(n2 == GrayImage(3, 2, BitDepth::k8));
  CHECK(s2.i_max == 1.0);

  // 32768 / 65535 * 255 = 127.5019... rounds half-up to 128.
  const GrayImage half(2, 1, BitDepth::k16, std::vector<std::uint16_t>{32768, 65535});
  CHECK(normalize_intensity(half).first.pixels()[0] == 128);
}

TEST_CASE("denormalize examples") {
  const NormalizationScale deep{65535.0, BitDepth::k16};
  const GrayImage p(2, 1, BitDepth::k8, std::vector<std::uint16_t>{255, 128});
  // 128 * 65535 / 255 = 32896 exactly.
  CHECK(denormalize(p, deep).pixels() == std::vector<std::uint16_t>{65535, 32896});
  CHECK(code_of([&] { denormalize(GrayImage(1, 1, BitDepth::k16), deep); }) == ErrorCode::wrong_depth);
}

TEST_CASE("depth-8 normalization is the identity and invertible") {
  std::mt19937 rng(3);
  for (int i = 0; i < 30; ++i) {
    const GrayImage img = random_image(rng, BitDepth::k8);
    auto [n, s] = normalize_intensity(img);
    CHECK(n == img);
    CHECK(s.i_max == 255.0);
    CHECK(denormalize(n, s) == img);
  }
}

TEST_CASE("normalized pixels stay in [0, 255] and the max maps to 255") {
  std::mt19937 rng(5);
  for (int i = 0; i < 30; ++i) {
    const GrayImage img = random_image(rng, BitDepth::k16);
    auto [n, s] = normalize_intensity(img);
    CHECK(n.depth() == BitDepth::k8);
    CHECK(n.max_pixel() <= 255);
    if (img.max_pixel() > 0) CHECK(n.max_pixel() == 255);
    // Denormalized values land within half a quantization step of the source.
    const GrayImage back = denormalize(n, s);
    for (std::size_t k = 0; k < img.size(); ++k) {
      CHECK(std::abs(double(back.pixels()[k]) - double(img.pixels()[k])) <= s.i_max / 255.0 / 2.0 + 1.0);
    }
  }
}
