#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "roix/metrics.hpp"
#include "test_util.hpp"

using namespace roix;
using namespace roix::test;

namespace {

BinaryMask points(std::uint32_t w, std::uint32_t h, std::initializer_list<std::pair<std::uint32_t, std::uint32_t>> xy) {
  BinaryMask m(w, h);
  for (auto [x, y] : xy) m.set(x, y);
  return m;
}

/// Per-pixel reference metrics straight from the definitions.
MetricsReport naive_overlap(const BinaryMask& p, const BinaryMask& t) {
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool a = p.bits()[i], b = t.bits()[i];
    tp += a && b, tn += !a && !b, fp += a && !b, fn += !a && b;
  }
  const double n = tp + tn + fp + fn;
  MetricsReport r;
  auto div = [](double a, double b) { return b == 0 ? kUndefined : a / b; };
  r.dsc = div(2 * tp, 2 * tp + fp + fn);
  r.iou = div(tp, tp + fp + fn);
  r.sensitivity = div(tp, tp + fn);
  r.specificity = div(tn, tn + fp);
  r.accuracy = div(tp + tn, n);
  const double fc = ((tn + fn) * (tn + fp) + (fp + tp) * (fn + tp)) / n;
  r.kappa = div(tp + tn - fc, n - fc);
  r.auc = 1 - 0.5 * (div(fp, fp + tn) + div(fn, fn + tp));
  return r;
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

GrayImage from_fn(std::uint32_t w, std::uint32_t h, auto fn) {
  GrayImage img(w, h, BitDepth::k8);
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) img.set(x, y, static_cast<std::uint16_t>(fn(x, y)));
  }
  return img;
}

}  // namespace

TEST_CASE("confusion examples") {
  std::mt19937 rng(1);
  const BinaryMask m = oracle::random_mask(9, 7, 0.4, rng);
  const auto k = m.count();
  CHECK(confusion(m, m) == ConfusionCounts{k, 63 - k, 0, 0});
  CHECK(confusion(BinaryMask(4, 5, true), BinaryMask(4, 5)) == ConfusionCounts{0, 0, 20, 0});

  BinaryMask pred(10, 10), truth(10, 10);
  for (std::uint32_t x = 0; x < 5; ++x) pred.set(x, 0), truth.set(x, 0);
  for (std::uint32_t x = 0; x < 5; ++x) pred.set(x, 1), truth.set(x, 2);
  CHECK(confusion(pred, truth) == ConfusionCounts{5, 85, 5, 5});
  CHECK(code_of([] { confusion(BinaryMask(2, 2), BinaryMask(2, 3)); }) == ErrorCode::dimension_mismatch);
}

TEST_CASE("overlap metric examples") {
  const MetricsReport a = overlap_metrics({40, 40, 10, 10});
  CHECK(a.accuracy == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(std::abs(a.kappa - 0.6) <= 1e-12);
  CHECK(std::abs(a.auc - 0.8) <= 1e-12);

  const MetricsReport perfect = overlap_metrics({7, 11, 0, 0});
  for (double v : {perfect.dsc, perfect.iou, perfect.sensitivity, perfect.specificity, perfect.accuracy,
                   perfect.kappa, perfect.auc}) {
    CHECK(v == 1.0);
  }

  const MetricsReport b = overlap_metrics({5, 85, 5, 5});
  CHECK(b.dsc == 0.5);
  CHECK(std::abs(b.iou - 1.0 / 3.0) <= 1e-15);
  CHECK(is_undefined(b.ahd));
  CHECK(is_undefined(b.ssim));
}

TEST_CASE("zero denominators are undefined") {
  const MetricsReport r = overlap_metrics({0, 10, 0, 0});
  CHECK(is_undefined(r.dsc));
  CHECK(is_undefined(r.iou));
  CHECK(is_undefined(r.sensitivity));
  CHECK(r.specificity == 1.0);
  CHECK(r.accuracy == 1.0);
  // Expected agreement equals the total: kappa has no denominator.
  CHECK(is_undefined(r.kappa));
  CHECK(is_undefined(r.auc));
  const MetricsReport z = overlap_metrics({0, 0, 0, 0});
  CHECK(is_undefined(z.accuracy));
}

TEST_CASE("overlap metrics match the per-pixel reference and identities hold") {
  std::mt19937 rng(12);
  std::uniform_int_distribution<std::uint32_t> dim(1, 64);
  std::uniform_real_distribution<double> dens(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const std::uint32_t w = dim(rng), h = dim(rng);
    const BinaryMask p = oracle::random_mask(w, h, dens(rng), rng);
    const BinaryMask t = oracle::random_mask(w, h, dens(rng), rng);
    const MetricsReport r = overlap_metrics(confusion(p, t));
    const MetricsReport n = naive_overlap(p, t);
    CHECK(same(r.dsc, n.dsc));
    CHECK(same(r.iou, n.iou));
    CHECK(same(r.sensitivity, n.sensitivity));
    CHECK(same(r.specificity, n.specificity));
    CHECK(same(r.accuracy, n.accuracy));
    CHECK(same(r.auc, n.auc));
    CHECK((same(r.kappa, n.kappa) || std::abs(r.kappa - n.kappa) <= 1e-12));
    if (!is_undefined(r.dsc)) {
      CHECK(std::abs(r.dsc - 2 * r.iou / (1 + r.iou)) <= 1e-12);
      CHECK(r.dsc >= 0);
      CHECK(r.dsc <= 1);
    }
    if (!is_undefined(r.kappa)) {
      CHECK(r.kappa >= -1);
      CHECK(r.kappa <= 1);
    }
  }
}

TEST_CASE("accuracy inflates with background while dsc stays fixed") {
  double last_acc = 0;
  double first_dsc = kUndefined;
  for (std::uint32_t side : {10u, 20u, 40u, 80u, 160u}) {
    BinaryMask pred(side, side), truth(side, side);
    for (std::uint32_t x = 0; x < 4; ++x) {
      for (std::uint32_t y = 0; y < 4; ++y) truth.set(x, y);
    }
    for (std::uint32_t x = 2; x < 6; ++x) {
      for (std::uint32_t y = 0; y < 4; ++y) pred.set(x, y);
    }
    const MetricsReport r = overlap_metrics(confusion(pred, truth));
    CHECK(r.accuracy > last_acc);
    last_acc = r.accuracy;
    if (is_undefined(first_dsc)) first_dsc = r.dsc;
    CHECK(r.dsc == first_dsc);
  }
  CHECK(first_dsc == 0.5);
  CHECK(last_acc > 0.999);
}

TEST_CASE("ahd examples") {
  const BinaryMask a = points(5, 5, {{0, 0}, {2, 1}});
  CHECK(ahd(a, a) == 0.0);
  CHECK(ahd(points(5, 5, {{0, 0}}), points(5, 5, {{3, 4}})) == 5.0);
  CHECK(ahd(points(1, 3, {{0, 0}, {0, 2}}), points(1, 3, {{0, 0}})) == 1.0);
  CHECK(is_undefined(ahd(BinaryMask(5, 5), a)));
  CHECK(code_of([] { ahd(BinaryMask(2, 2, true), BinaryMask(3, 2, true)); }) == ErrorCode::dimension_mismatch);
}

TEST_CASE("ahd matches the floating-point oracle and is symmetric") {
  std::mt19937 rng(31);
  std::uniform_int_distribution<std::uint32_t> dim(1, 30);
  for (int i = 0; i < 150; ++i) {
    const std::uint32_t w = dim(rng), h = dim(rng);
    const BinaryMask a = oracle::random_mask(w, h, 0.2, rng);
    const BinaryMask b = oracle::random_mask(w, h, 0.1, rng);
    if (a.count() == 0 || b.count() == 0) {
      CHECK(is_undefined(ahd(a, b)));
      continue;
    }
    const double v = ahd(a, b);
    CHECK(v == doctest::Approx(oracle::ahd(a, b)).epsilon(1e-12));
    CHECK(v == ahd(b, a));
    CHECK(v >= 0);
  }
}

TEST_CASE("distance transform path equals pairwise search bitwise") {
  std::mt19937 rng(77);
  std::uniform_int_distribution<std::uint32_t> dim(1, 70);
  for (int i = 0; i < 120; ++i) {
    const std::uint32_t w = dim(rng), h = dim(rng);
    const BinaryMask a = oracle::random_mask(w, h, 0.3, rng);
    const BinaryMask b = oracle::random_mask(w, h, i % 4 == 0 ? 0.005 : 0.2, rng);
    if (a.count() == 0 || b.count() == 0) continue;
    CHECK(directed_mean_distance_edt(a, b) == directed_mean_distance_bruteforce(a, b));
    CHECK(directed_mean_distance_edt(b, a) == directed_mean_distance_bruteforce(b, a));
  }
}

TEST_CASE("ahd above the pairwise guard") {
  // Two filled rectangles: the directed distance from each pixel is its
  // horizontal gap to the other rectangle's nearest column.
  BinaryMask a(1200, 600), b(1200, 600);
  for (std::uint32_t y = 0; y < 600; ++y) {
    for (std::uint32_t x = 0; x < 100; ++x) a.set(x, y);
    for (std::uint32_t x = 1100; x < 1200; ++x) b.set(x, y);
  }
  REQUIRE(a.count() * b.count() > kAhdBruteForcePairs);
  // Gaps 1001..1100 for either direction, mean 1050.5.
  CHECK(ahd(a, b) == 1050.5);
}

TEST_CASE("ssim identities and goldens") {
  const GrayImage flat(20, 20, BitDepth::k8, std::uint16_t{90});
  CHECK(ssim(flat, flat) == 1.0);

  std::mt19937 rng(4);
  std::uniform_int_distribution<int> v(0, 255);
  const GrayImage noise = from_fn(33, 21, [&](auto, auto) { return v(rng); });
  CHECK(ssim(noise, noise) == 1.0);

  // Reference values computed with scikit-image structural_similarity
  // (gaussian_weights, sigma 1.5, population covariance, data_range 255).
  const GrayImage checker = from_fn(64, 48, [](auto x, auto y) { return ((x / 8 + y / 8) % 2 == 1) ? 220 : 30; });
  const GrayImage checker_inv = from_fn(64, 48, [&](auto x, auto y) { return 255 - checker.at(x, y); });
  CHECK(ssim(checker, checker_inv) == doctest::Approx(-0.71946438044650063).epsilon(1e-9));

  const GrayImage grad = from_fn(64, 48, [](auto x, auto y) { return (3 * x + 5 * y) % 256; });
  const GrayImage grad_up = from_fn(64, 48, [&](auto x, auto y) { return std::min(grad.at(x, y) + 40, 255); });
  CHECK(ssim(grad, grad_up) == doctest::Approx(0.89964568555034319).epsilon(1e-9));

  auto disk = [](auto x, auto y) {
    const double dx = x - 31.5, dy = y - 23.5;
    return dx * dx + dy * dy <= 256.0 ? 240 : 15;
  };
  const GrayImage d = from_fn(64, 48, disk);
  const GrayImage d_inv = from_fn(64, 48, [&](auto x, auto y) { return 255 - d.at(x, y); });
  const double s = ssim(d, d_inv);
  CHECK(s == doctest::Approx(-0.10477886662405911).epsilon(1e-9));
  CHECK(s < 0.5);
}

TEST_CASE("ssim matches the direct 2-D oracle") {
  std::mt19937 rng(6);
  std::uniform_int_distribution<int> v(0, 255);
  std::uniform_int_distribution<int> jitter(-20, 20);
  for (int i = 0; i < 5; ++i) {
    const GrayImage x = from_fn(30 + i, 25, [&](auto, auto) { return v(rng); });
    const GrayImage y = from_fn(30 + i, 25, [&](auto a, auto b) { return std::clamp(x.at(a, b) + jitter(rng), 0, 255); });
    CHECK(ssim(x, y) == doctest::Approx(oracle::ssim(x, y)).epsilon(1e-10));
  }
}

TEST_CASE("ssim errors") {
  const GrayImage a(20, 20, BitDepth::k8);
  CHECK(code_of([&] { ssim(a, GrayImage(20, 21, BitDepth::k8)); }) == ErrorCode::dimension_mismatch);
  CHECK(code_of([&] { ssim(GrayImage(20, 20, BitDepth::k16), GrayImage(20, 20, BitDepth::k16)); }) ==
        ErrorCode::wrong_depth);
  CHECK(code_of([&] { ssim(GrayImage(10, 40, BitDepth::k8), GrayImage(10, 40, BitDepth::k8)); }) ==
        ErrorCode::image_too_small);
}

TEST_CASE("spatial reduction") {
  CHECK(spatial_reduction({{0, 0, 4}, {1, 0, 4}}, 4, 2) == 1.0);
  GeometryTable g;
  for (std::uint32_t r = 0; r < 50; ++r) g.push_back({r, 0, 50});
  CHECK(spatial_reduction(g, 100, 100) == 4.0);
  CHECK(code_of([] { spatial_reduction({}, 10, 10); }) == ErrorCode::empty_geometry);
}
