#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "roix/image.hpp"
#include "roix/segmentation.hpp"

namespace roix {

/// Marker for metrics whose denominator vanishes.
inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();
inline bool is_undefined(double v) noexcept { return std::isnan(v); }

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MetricsReport {
  double dsc = kUndefined;
  double iou = kUndefined;
  double sensitivity = kUndefined;
  double specificity = kUndefined;
  double accuracy = kUndefined;
  double kappa = kUndefined;
  double auc = kUndefined;
  double ahd = kUndefined;
  double ssim = kUndefined;
  double spatial_reduction = kUndefined;
  double compression_ratio = kUndefined;
};

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& truth);

/// Fills the overlap fields (dsc through auc); other fields stay undefined.
MetricsReport overlap_metrics(const ConfusionCounts& c);

/// Average Hausdorff distance over all set pixels of both masks, Euclidean
/// distance between pixel centres. Undefined when either mask is empty.
/// Exact for any size: pairwise search up to kAhdBruteForcePairs, exact
/// Euclidean distance transform beyond.
double ahd(const BinaryMask& a, const BinaryMask& b);

inline constexpr std::uint64_t kAhdBruteForcePairs = 1'000'000;

/// Directed component: mean over set pixels of `from` of the distance to the
/// nearest set pixel of `to`, by pairwise search.
double directed_mean_distance_bruteforce(const BinaryMask& from, const BinaryMask& to);
/// Same quantity through a squared Euclidean distance transform of `to`.
double directed_mean_distance_edt(const BinaryMask& from, const BinaryMask& to);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
};

/// Mean SSIM over every fully contained Gaussian window.
double ssim(const GrayImage& x, const GrayImage& y, const SsimParams& params = {});

/// width * height / total span pixels.
double spatial_reduction(const GeometryTable& geometry, std::uint32_t width, std::uint32_t height);

}  // namespace roix
