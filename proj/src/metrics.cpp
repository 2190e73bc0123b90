#include "roix/metrics.hpp"

#include <algorithm>
#include <vector>

#include "roix/error.hpp"

namespace roix {

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& truth) {
  if (!pred.same_shape(truth)) throw Error(ErrorCode::dimension_mismatch, "masks differ in size");
  ConfusionCounts c;
  const auto& p = pred.bits();
  const auto& t = truth.bits();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] && t[i]) ++c.tp;
    else if (p[i]) ++c.fp;
    else if (t[i]) ++c.fn;
    else ++c.tn;
  }
  return c;
}

namespace {

double ratio(double num, double den) { return den == 0.0 ? kUndefined : num / den; }

}  // namespace

MetricsReport overlap_metrics(const ConfusionCounts& c) {
  const auto tp = static_cast<double>(c.tp);
  const auto tn = static_cast<double>(c.tn);
  const auto fp = static_cast<double>(c.fp);
  const auto fn = static_cast<double>(c.fn);
  const double n = tp + tn + fp + fn;

  MetricsReport r;
  r.dsc = ratio(2 * tp, 2 * tp + fp + fn);
  r.iou = ratio(tp, tp + fp + fn);
  r.sensitivity = ratio(tp, tp + fn);
  r.specificity = ratio(tn, tn + fp);
  r.accuracy = ratio(tp + tn, n);
  if (n > 0) {
    const double chance = ((tn + fn) * (tn + fp) + (fp + tp) * (fn + tp)) / n;
    r.kappa = ratio((tp + tn) - chance, n - chance);
  }
  const double fpr = ratio(fp, fp + tn);
  const double fnr = ratio(fn, fn + tp);
  r.auc = (is_undefined(fpr) || is_undefined(fnr)) ? kUndefined : 1.0 - 0.5 * (fpr + fnr);
  return r;
}

// --- average Hausdorff distance -------------------------------------------

namespace {

struct Point {
  std::int64_t x;
  std::int64_t y;
};

std::vector<Point> set_points(const BinaryMask& m) {
  std::vector<Point> pts;
  for (std::uint32_t y = 0; y < m.height(); ++y) {
    for (std::uint32_t x = 0; x < m.width(); ++x) {
      if (m.at(x, y)) pts.push_back({x, y});
    }
  }
  return pts;
}

constexpr std::int64_t kFar = std::numeric_limits<std::int64_t>::max() / 4;
__extension__ using Wide = __int128;

// Exact 1-D lower envelope of parabolas (q - v)^2 + f(v) over finite f.
// Breakpoints are kept as fractions so no rounding enters the envelope.
void envelope_1d(std::vector<std::int64_t>& f) {
  const auto n = static_cast<std::int64_t>(f.size());
  std::vector<std::int64_t> v;
  struct Frac {
    Wide num;
    Wide den;  // > 0
  };
  std::vector<Frac> z;
  auto height = [&](std::int64_t q) { return static_cast<Wide>(f[q]) + static_cast<Wide>(q) * q; };
  for (std::int64_t q = 0; q < n; ++q) {
    if (f[q] >= kFar) continue;
    while (!v.empty()) {
      const std::int64_t p = v.back();
      const Frac s{height(q) - height(p), static_cast<Wide>(2) * (q - p)};
      if (v.size() > 1 && s.num * z.back().den <= z.back().num * s.den) {
        v.pop_back();
        z.pop_back();
        continue;
      }
      z.push_back(s);
      break;
    }
    v.push_back(q);
  }
  if (v.empty()) return;
  // z[k] is where parabola v[k + 1] starts to win.
  std::vector<std::int64_t> out(f.size());
  std::size_t k = 0;
  for (std::int64_t q = 0; q < n; ++q) {
    while (k < z.size() && z[k].num < static_cast<Wide>(q) * z[k].den) ++k;
    const std::int64_t d = q - v[k];
    out[q] = d * d + f[v[k]];
  }
  f.swap(out);
}

// Squared Euclidean distance from every pixel to the nearest set pixel.
std::vector<std::int64_t> squared_distance_transform(const BinaryMask& m) {
  const std::size_t w = m.width();
  const std::size_t h = m.height();
  std::vector<std::int64_t> grid(w * h);
  std::vector<std::int64_t> line;
  for (std::size_t x = 0; x < w; ++x) {
    line.assign(h, kFar);
    for (std::size_t y = 0; y < h; ++y) {
      if (m.bits()[y * w + x]) line[y] = 0;
    }
    envelope_1d(line);
    for (std::size_t y = 0; y < h; ++y) grid[y * w + x] = line[y];
  }
  for (std::size_t y = 0; y < h; ++y) {
    line.assign(grid.begin() + static_cast<std::ptrdiff_t>(y * w), grid.begin() + static_cast<std::ptrdiff_t>((y + 1) * w));
    envelope_1d(line);
    std::copy(line.begin(), line.end(), grid.begin() + static_cast<std::ptrdiff_t>(y * w));
  }
  return grid;
}

}  // namespace

double directed_mean_distance_bruteforce(const BinaryMask& from, const BinaryMask& to) {
  const auto a = set_points(from);
  const auto b = set_points(to);
  if (a.empty() || b.empty()) return kUndefined;
  double sum = 0.0;
  for (const auto& p : a) {
    std::int64_t best = kFar;
    for (const auto& q : b) {
      const std::int64_t dx = p.x - q.x;
      const std::int64_t dy = p.y - q.y;
      best = std::min(best, dx * dx + dy * dy);
    }
    sum += std::sqrt(static_cast<double>(best));
  }
  return sum / static_cast<double>(a.size());
}

double directed_mean_distance_edt(const BinaryMask& from, const BinaryMask& to) {
  if (!from.same_shape(to)) throw Error(ErrorCode::dimension_mismatch, "masks differ in size");
  if (from.count() == 0 || to.count() == 0) return kUndefined;
  const auto dist = squared_distance_transform(to);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (!from.bits()[i]) continue;
    sum += std::sqrt(static_cast<double>(dist[i]));
    ++n;
  }
  return sum / static_cast<double>(n);
}

double ahd(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::dimension_mismatch, "masks differ in size");
  const std::uint64_t na = a.count();
  const std::uint64_t nb = b.count();
  if (na == 0 || nb == 0) return kUndefined;
  const bool small = na * nb <= kAhdBruteForcePairs;
  const double ab = small ? directed_mean_distance_bruteforce(a, b) : directed_mean_distance_edt(a, b);
  const double ba = small ? directed_mean_distance_bruteforce(b, a) : directed_mean_distance_edt(b, a);
  return std::max(ab, ba);
}

// --- SSIM ------------------------------------------------------------------

namespace {

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const double c = (size - 1) / 2.0;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - c;
    k[i] = std::exp(-(d * d) / (2 * sigma * sigma));
    total += k[i];
  }
  for (auto& v : k) v /= total;
  return k;
}

// Separable 'valid' filtering: output is (w - n + 1) x (h - n + 1).
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t w, std::size_t h,
                                 const std::vector<double>& k) {
  const std::size_t n = k.size();
  const std::size_t ow = w - n + 1;
  const std::size_t oh = h - n + 1;
  std::vector<double> rows(ow * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += k[i] * src[y * w + x + i];
      rows[y * ow + x] = acc;
    }
  }
  std::vector<double> out(ow * oh);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += k[i] * rows[(y + i) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const GrayImage& x, const GrayImage& y, const SsimParams& params) {
  if (!x.same_shape(y)) throw Error(ErrorCode::dimension_mismatch, "SSIM inputs differ in size");
  if (x.depth() != BitDepth::k8 || y.depth() != BitDepth::k8) {
    throw Error(ErrorCode::wrong_depth, "SSIM expects depth-8 rasters");
  }
  const auto win = static_cast<std::uint32_t>(params.window);
  if (x.width() < win || x.height() < win) {
    throw Error(ErrorCode::image_too_small, "image smaller than the SSIM window");
  }
  const std::size_t w = x.width();
  const std::size_t h = x.height();
  std::vector<double> a(w * h), b(w * h), aa(w * h), bb(w * h), ab(w * h);
  for (std::size_t i = 0; i < w * h; ++i) {
    a[i] = x.pixels()[i];
    b[i] = y.pixels()[i];
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const auto k = gaussian_kernel(params.window, params.sigma);
  const auto mu_a = filter_valid(a, w, h, k);
  const auto mu_b = filter_valid(b, w, h, k);
  const auto e_aa = filter_valid(aa, w, h, k);
  const auto e_bb = filter_valid(bb, w, h, k);
  const auto e_ab = filter_valid(ab, w, h, k);

  const double c1 = (params.k1 * params.dynamic_range) * (params.k1 * params.dynamic_range);
  const double c2 = (params.k2 * params.dynamic_range) * (params.k2 * params.dynamic_range);
  double sum = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double va = e_aa[i] - ma * ma;
    const double vb = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return sum / static_cast<double>(mu_a.size());
}

double spatial_reduction(const GeometryTable& geometry, std::uint32_t width, std::uint32_t height) {
  const std::size_t covered = span_pixel_count(geometry);
  if (covered == 0) throw Error(ErrorCode::empty_geometry, "no ROI pixels to compare against");
  return static_cast<double>(std::uint64_t{width} * height) / static_cast<double>(covered);
}

}  // namespace roix
