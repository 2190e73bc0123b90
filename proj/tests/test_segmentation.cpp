#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "roix/phantom.hpp"
#include "roix/segmentation.hpp"
#include "test_util.hpp"

using namespace roix;
using namespace roix::test;

namespace {

GrayImage image8(std::uint32_t w, std::uint32_t h, std::vector<std::uint16_t> px) {
  return {w, h, BitDepth::k8, std::move(px)};
}

BinaryMask mask_from_rows(const std::vector<std::string>& rows) {
  BinaryMask m(static_cast<std::uint32_t>(rows[0].size()), static_cast<std::uint32_t>(rows.size()));
  for (std::uint32_t y = 0; y < rows.size(); ++y) {
    for (std::uint32_t x = 0; x < rows[y].size(); ++x) m.set(x, y, rows[y][x] == '#');
  }
  return m;
}

Histogram random_histogram(std::mt19937& rng) {
  Histogram h{};
  std::uniform_int_distribution<int> bins(2, 12);
  std::uniform_int_distribution<int> pos(0, 255);
  std::uniform_int_distribution<int> mass(1, 500);
  const int n = bins(rng);
  for (int i = 0; i < n; ++i) h[pos(rng)] += mass(rng);
  return h;
}

std::vector<int> as_ints(const std::vector<std::uint8_t>& v) { return {v.begin(), v.end()}; }

std::size_t populated(const Histogram& h) {
  std::size_t n = 0;
  for (auto c : h) n += c > 0;
  return n;
}

}  // namespace

TEST_CASE("histogram counts") {
  Histogram h = histogram(image8(3, 1, {0, 0, 255}));
  CHECK(h[0] == 2);
  CHECK(h[255] == 1);
  std::uint64_t rest = 0;
  for (int b = 1; b < 255; ++b) rest += h[b];
  CHECK(rest == 0);

  Histogram empty = histogram(GrayImage(0, 0, BitDepth::k8));
  for (auto c : empty) CHECK(c == 0);

  CHECK(histogram(GrayImage(5, 2, BitDepth::k8, std::uint16_t{7}))[7] == 10);
  CHECK(code_of([] { histogram(GrayImage(1, 1, BitDepth::k16)); }) == ErrorCode::wrong_depth);
}

TEST_CASE("multi_otsu on the bimodal example matches exhaustive search") {
  Histogram h{};
  h[10] = 50;
  h[200] = 50;
  const auto t = multi_otsu(h, 2);
  REQUIRE(t.size() == 1);
  CHECK(t[0] >= 10);
  CHECK(t[0] < 200);
  CHECK(as_ints(t) == oracle::exhaustive_otsu(h, 2));
  // Every threshold in [10, 200) gives the same variance; the smallest wins.
  CHECK(t[0] == 10);
}

TEST_CASE("multi_otsu separates three spikes") {
  Histogram h{};
  h[0] = 30;
  h[128] = 30;
  h[255] = 30;
  const auto t = multi_otsu(h, 3);
  REQUIRE(t.size() == 2);
  CHECK(t[0] >= 0);
  CHECK(t[0] < 128);
  CHECK(t[1] >= 128);
  CHECK(t[1] < 255);
  CHECK(as_ints(t) == oracle::exhaustive_otsu(h, 3));
}

TEST_CASE("multi_otsu precondition errors") {
  Histogram h{};
  h[42] = 9;
  CHECK(code_of([&] { multi_otsu(h, 2); }) == ErrorCode::insufficient_intensities);
  h[43] = 1;
  CHECK(code_of([&] { multi_otsu(h, 3); }) == ErrorCode::insufficient_intensities);
  CHECK(code_of([&] { multi_otsu(h, 1); }) == ErrorCode::invalid_argument);
}

TEST_CASE("multi_otsu matches exhaustive search on random histograms") {
  std::mt19937 rng(2024);
  for (int i = 0; i < 15; ++i) {
    const Histogram h = random_histogram(rng);
    for (int k : {2, 3}) {
      if (populated(h) < static_cast<std::size_t>(k)) continue;
      const auto t = multi_otsu(h, k);
      CHECK(as_ints(t) == oracle::exhaustive_otsu(h, k));
      CHECK(std::is_sorted(t.begin(), t.end()));
    }
  }
}

TEST_CASE("multi_otsu with more classes returns ascending thresholds") {
  Histogram h{};
  for (int b : {5, 40, 90, 150, 220}) h[b] = 100;
  const auto t = multi_otsu(h, 5);
  REQUIRE(t.size() == 4);
  CHECK(t == std::vector<std::uint8_t>{5, 40, 90, 150});
}

TEST_CASE("binarize examples") {
  const GrayImage img = image8(3, 1, {0, 10, 200});
  CHECK(binarize(img, 10).bits() == std::vector<std::uint8_t>{0, 0, 1});
  CHECK(binarize(img, 255).count() == 0);

  std::vector<std::uint16_t> px(100, 10);
  for (std::size_t i = 50; i < 100; ++i) px[i] = 200;
  const GrayImage bimodal = image8(10, 10, px);
  const auto t = multi_otsu(histogram(bimodal), 2);
  const BinaryMask m = binarize(bimodal, t[0]);
  for (std::size_t i = 0; i < 100; ++i) CHECK(m.bits()[i] == (px[i] == 200 ? 1 : 0));
}

TEST_CASE("largest_component keeps the bigger blob") {
  const BinaryMask m = mask_from_rows({
      "##.....",
      "##.....",
      "#...###",
      "....###",
      "....###",
  });
  const BinaryMask out = largest_component(m);
  CHECK(out.count() == 9);
  CHECK(out == oracle::largest_component(m));
  CHECK(!out.at(0, 0));
  CHECK(out.at(6, 4));
}

TEST_CASE("largest_component empty, full and diagonal cases") {
  CHECK(largest_component(BinaryMask(6, 4)).count() == 0);
  const BinaryMask full(5, 3, true);
  CHECK(largest_component(full) == full);
  // Diagonal neighbours join under 8-connectivity.
  const BinaryMask diag = mask_from_rows({"#..", ".#.", "..#"});
  CHECK(largest_component(diag) == diag);
  // Equal areas: the component met first in raster order wins.
  const BinaryMask tie = mask_from_rows({"...##", "##...", "....."});
  CHECK(largest_component(tie) == mask_from_rows({"...##", ".....", "....."}));
}

TEST_CASE("largest_component matches the union-find oracle on random masks") {
  std::mt19937 rng(99);
  for (int i = 0; i < 200; ++i) {
    std::uniform_int_distribution<std::uint32_t> dim(1, 24);
    const BinaryMask m = oracle::random_mask(dim(rng), dim(rng), 0.35, rng);
    const BinaryMask out = largest_component(m);
    REQUIRE(out == oracle::largest_component(m));
    if (m.count() > 0) CHECK(oracle::component_count(out) == 1);
  }
}

TEST_CASE("extract_row_spans examples") {
  const BinaryMask m = mask_from_rows({".....", ".##.#", "....."});
  CHECK(extract_row_spans(m) == GeometryTable{{1, 1, 5}});
  CHECK(extract_row_spans(BinaryMask(4, 4)).empty());
  CHECK(extract_row_spans(BinaryMask(7, 2, true)) == GeometryTable{{0, 0, 7}, {1, 0, 7}});
}

TEST_CASE("row spans cover the mask and rasterize back for row-convex masks") {
  std::mt19937 rng(5);
  for (int i = 0; i < 100; ++i) {
    const BinaryMask m = oracle::random_mask(13, 9, 0.3, rng);
    const GeometryTable g = extract_row_spans(m);
    validate_geometry(g, m.width(), m.height());
    const BinaryMask r = rasterize_spans(g, m.width(), m.height());
    for (std::uint32_t y = 0; y < m.height(); ++y) {
      for (std::uint32_t x = 0; x < m.width(); ++x) {
        if (m.at(x, y)) CHECK(r.at(x, y));
      }
    }
  }
  const Phantom p = make_disk_phantom({.width = 40, .height = 30});
  CHECK(rasterize_spans(extract_row_spans(p.truth), 40, 30) == p.truth);
}

TEST_CASE("validate_geometry rejects malformed tables") {
  CHECK_NOTHROW(validate_geometry({{0, 0, 3}, {2, 1, 2}}, 3, 3));
  CHECK(code_of([] { validate_geometry({{1, 0, 2}, {1, 0, 2}}, 3, 3); }) == ErrorCode::inconsistent);
  CHECK(code_of([] { validate_geometry({{0, 2, 2}}, 3, 3); }) == ErrorCode::inconsistent);
  CHECK(code_of([] { validate_geometry({{0, 0, 4}}, 3, 3); }) == ErrorCode::inconsistent);
  CHECK(code_of([] { validate_geometry({{3, 0, 1}}, 3, 3); }) == ErrorCode::inconsistent);
}

TEST_CASE("gather_pixels examples") {
  const GrayImage img = image8(4, 1, {9, 8, 7, 6});
  CHECK(gather_pixels(img, {{0, 1, 3}}) == PixelSections{{8, 7}});
  CHECK(gather_pixels(img, {}).empty());
  CHECK(gather_pixels(img, {{0, 0, 4}}) == PixelSections{{9, 8, 7, 6}});
  CHECK(code_of([&] { gather_pixels(img, {{0, 2, 5}}); }) == ErrorCode::out_of_bounds);
  CHECK(code_of([&] { gather_pixels(img, {{1, 0, 1}}); }) == ErrorCode::out_of_bounds);
}

TEST_CASE("segment_roi on a disk phantom") {
  const Phantom p = make_disk_phantom({.width = 96, .height = 96, .seed = 4});
  const GrayImage sub = subtract_background(p.image, p.background);
  const RoiBundle b = segment_roi(sub);
  validate_bundle(b);
  const BinaryMask pred = rasterize_spans(b.geometry, b.width, b.height);
  std::size_t both = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) both += pred.bits()[i] && p.truth.bits()[i];
  const double dsc = 2.0 * static_cast<double>(both) / static_cast<double>(pred.count() + p.truth.count());
  CHECK(dsc >= 0.99);
  CHECK(b.pixel_count() == span_pixel_count(b.geometry));
  CHECK(b.scale.i_max == 255.0);
}

TEST_CASE("segment_roi keeps the larger of two blobs and rejects uniform input") {
  GrayImage img(20, 10, BitDepth::k8, std::uint16_t{5});
  for (std::uint32_t y = 1; y < 4; ++y) {
    for (std::uint32_t x = 1; x < 4; ++x) img.set(x, y, 200);
  }
  for (std::uint32_t y = 2; y < 8; ++y) {
    for (std::uint32_t x = 10; x < 16; ++x) img.set(x, y, 180);
  }
  const RoiBundle b = segment_roi(img, 2);
  CHECK(b.geometry.size() == 6);
  for (const auto& s : b.geometry) {
    CHECK(s.x_start == 10);
    CHECK(s.x_end == 16);
  }
  CHECK(code_of([] { segment_roi(GrayImage(8, 8, BitDepth::k8, std::uint16_t{3})); }) ==
        ErrorCode::insufficient_intensities);
}
