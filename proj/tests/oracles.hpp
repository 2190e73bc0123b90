#pragma once

// Independent reference computations used only by tests. None of these call
// into the code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "roix/image.hpp"
#include "roix/metrics.hpp"
#include "roix/segmentation.hpp"

namespace roix::oracle {

/// Between-class variance of the partition induced by ascending thresholds,
/// evaluated straight from the histogram.
inline double between_class_variance(const Histogram& h, const std::vector<int>& thresholds) {
  double n = 0, total = 0;
  for (int b = 0; b < 256; ++b) {
    n += static_cast<double>(h[b]);
    total += static_cast<double>(h[b]) * b;
  }
  const double mu_t = total / n;
  double var = 0;
  int lo = 0;
  for (std::size_t k = 0; k <= thresholds.size(); ++k) {
    const int hi = k < thresholds.size() ? thresholds[k] : 255;
    double w = 0, s = 0;
    for (int b = lo; b <= hi; ++b) {
      w += static_cast<double>(h[b]);
      s += static_cast<double>(h[b]) * b;
    }
    if (w > 0) {
      const double mu = s / w;
      var += (w / n) * (mu - mu_t) * (mu - mu_t);
    }
    lo = hi + 1;
  }
  return var;
}

/// Exhaustive search for k in {2, 3}; strict improvement keeps the
/// lexicographically smallest maximizer because tuples are visited in order.
inline std::vector<int> exhaustive_otsu(const Histogram& h, int classes) {
  std::vector<int> best;
  double best_var = -1;
  if (classes == 2) {
    for (int t = 0; t <= 254; ++t) {
      const double v = between_class_variance(h, {t});
      if (v > best_var) best_var = v, best = {t};
    }
  } else {
    for (int t1 = 0; t1 <= 253; ++t1) {
      for (int t2 = t1 + 1; t2 <= 254; ++t2) {
        const double v = between_class_variance(h, {t1, t2});
        if (v > best_var) best_var = v, best = {t1, t2};
      }
    }
  }
  return best;
}

/// Union-find 8-connected labeling; returns per-pixel root (or -1).
inline std::vector<long> component_roots(const BinaryMask& m) {
  const long w = m.width(), h = m.height();
  std::vector<long> parent(static_cast<std::size_t>(w * h), -1);
  auto find = [&](long a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      if (!m.at(x, y)) continue;
      const long i = y * w + x;
      parent[i] = i;
      const long nbr[4][2] = {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
      for (const auto& d : nbr) {
        const long nx = x + d[0], ny = y + d[1];
        if (nx < 0 || ny < 0 || nx >= w || !m.at(nx, ny)) continue;
        const long a = find(i), b = find(ny * w + nx);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  for (long i = 0; i < w * h; ++i) {
    if (parent[i] >= 0) parent[i] = find(i);
  }
  return parent;
}

/// Largest component by flood-fill oracle with raster-order tie-break.
inline BinaryMask largest_component(const BinaryMask& m) {
  const auto roots = component_roots(m);
  std::vector<std::size_t> area(roots.size(), 0);
  for (long r : roots) {
    if (r >= 0) ++area[r];
  }
  long winner = -1;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    // Roots are the minimum index of their component, i.e. the raster anchor.
    if (roots[i] == static_cast<long>(i) && (winner < 0 || area[i] > area[winner])) winner = static_cast<long>(i);
  }
  BinaryMask out(m.width(), m.height());
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (winner >= 0 && roots[i] == winner) out.set(i % m.width(), i / m.width());
  }
  return out;
}

inline std::size_t component_count(const BinaryMask& m) {
  const auto roots = component_roots(m);
  std::size_t n = 0;
  for (std::size_t i = 0; i < roots.size(); ++i) n += roots[i] == static_cast<long>(i);
  return n;
}

/// Pairwise Euclidean distances in floating point.
inline double ahd(const BinaryMask& a, const BinaryMask& b) {
  std::vector<std::pair<double, double>> pa, pb;
  for (std::uint32_t y = 0; y < a.height(); ++y) {
    for (std::uint32_t x = 0; x < a.width(); ++x) {
      if (a.at(x, y)) pa.emplace_back(x, y);
      if (b.at(x, y)) pb.emplace_back(x, y);
    }
  }
  auto directed = [](const auto& from, const auto& to) {
    double sum = 0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, std::hypot(p.first - q.first, p.second - q.second));
      sum += best;
    }
    return sum / static_cast<double>(from.size());
  };
  return std::max(directed(pa, pb), directed(pb, pa));
}

/// Direct 2-D windowed SSIM with an explicit 11x11 Gaussian.
inline double ssim(const GrayImage& x, const GrayImage& y) {
  const int n = 11;
  const double sigma = 1.5;
  double kernel[n][n];
  double total = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      kernel[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * sigma * sigma));
      total += kernel[i][j];
    }
  }
  const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
  double sum = 0;
  long count = 0;
  for (std::uint32_t oy = 0; oy + n <= x.height(); ++oy) {
    for (std::uint32_t ox = 0; ox + n <= x.width(); ++ox) {
      double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double w = kernel[i][j] / total;
          const double a = x.at(ox + j, oy + i), b = y.at(ox + j, oy + i);
          mx += w * a, my += w * b, xx += w * a * a, yy += w * b * b, xy += w * a * b;
        }
      }
      const double vx = xx - mx * mx, vy = yy - my * my, cov = xy - mx * my;
      sum += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

inline BinaryMask random_mask(std::uint32_t w, std::uint32_t h, double density, std::mt19937& rng) {
  std::bernoulli_distribution bit(density);
  BinaryMask m(w, h);
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) m.set(x, y, bit(rng));
  }
  return m;
}

}  // namespace roix::oracle
