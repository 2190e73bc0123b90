#include "roix/segmentation.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "roix/error.hpp"

namespace roix {

BinaryMask::BinaryMask(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (bits_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::size_mismatch, "mask bit count does not match width x height");
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::size_t span_pixel_count(const GeometryTable& geometry) noexcept {
  std::size_t n = 0;
  for (const auto& s : geometry) n += s.length();
  return n;
}

std::size_t RoiBundle::pixel_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : pixels) n += s.size();
  return n;
}

std::vector<std::uint8_t> RoiBundle::flatten() const {
  std::vector<std::uint8_t> out;
  out.reserve(pixel_count());
  for (const auto& s : pixels) out.insert(out.end(), s.begin(), s.end());
  return out;
}

void validate_geometry(const GeometryTable& geometry, std::uint32_t width, std::uint32_t height) {
  for (std::size_t k = 0; k < geometry.size(); ++k) {
    const RowSpan& s = geometry[k];
    if (k > 0 && s.row <= geometry[k - 1].row) {
      throw Error(ErrorCode::inconsistent, "geometry rows are not strictly increasing at record " + std::to_string(k));
    }
    if (s.row >= height || s.x_start >= s.x_end || s.x_end > width) {
      throw Error(ErrorCode::inconsistent, "geometry record " + std::to_string(k) + " lies outside the raster");
    }
  }
}

void validate_bundle(const RoiBundle& bundle) {
  validate_geometry(bundle.geometry, bundle.width, bundle.height);
  if (bundle.pixels.size() != bundle.geometry.size()) {
    throw Error(ErrorCode::inconsistent, "pixel sections do not align with geometry records");
  }
  for (std::size_t k = 0; k < bundle.geometry.size(); ++k) {
    if (bundle.pixels[k].size() != bundle.geometry[k].length()) {
      throw Error(ErrorCode::inconsistent, "pixel section " + std::to_string(k) + " length differs from its span");
    }
  }
}

Histogram histogram(const GrayImage& image8) {
  if (image8.depth() != BitDepth::k8) throw Error(ErrorCode::wrong_depth, "histogram expects a depth-8 raster");
  Histogram h{};
  for (auto v : image8.pixels()) ++h[v];
  return h;
}

std::vector<std::uint8_t> multi_otsu(const Histogram& hist, int class_count) {
  if (class_count < 2) throw Error(ErrorCode::invalid_argument, "class count must be at least 2");
  const auto populated = std::count_if(hist.begin(), hist.end(), [](auto c) { return c > 0; });
  if (populated < class_count) {
    throw Error(ErrorCode::insufficient_intensities, std::to_string(populated) + " distinct intensities cannot form " +
                                                         std::to_string(class_count) + " classes");
  }

  constexpr int kBins = 256;
  // Prefix weights and first moments; exact in 64-bit for any realistic raster.
  std::array<std::uint64_t, kBins + 1> weight{};
  std::array<std::uint64_t, kBins + 1> moment{};
  for (int b = 0; b < kBins; ++b) {
    weight[b + 1] = weight[b] + hist[b];
    moment[b + 1] = moment[b] + hist[b] * static_cast<std::uint64_t>(b);
  }
  // Between-class variance differs from sum(S_k^2 / W_k) only by constants.
  auto term = [&](int lo, int hi) {
    const auto w = weight[hi + 1] - weight[lo];
    if (w == 0) return 0.0;
    const auto s = static_cast<double>(moment[hi + 1] - moment[lo]);
    return s * s / static_cast<double>(w);
  };

  // best[c][a]: optimum for bins [a, 255] split into c classes;
  // cut[c][a]: smallest upper bin of the first class achieving it.
  const int k = class_count;
  std::vector<std::array<double, kBins>> best(k + 1);
  std::vector<std::array<int, kBins>> cut(k + 1);
  for (int a = 0; a < kBins; ++a) best[1][a] = term(a, kBins - 1);
  for (int c = 2; c <= k; ++c) {
    for (int a = 0; a + c <= kBins; ++a) {
      double top = -1.0;
      int arg = a;
      for (int t = a; t + c - 1 <= kBins - 1; ++t) {
        const double v = term(a, t) + best[c - 1][t + 1];
        if (v > top) {
          top = v;
          arg = t;
        }
      }
      best[c][a] = top;
      cut[c][a] = arg;
    }
  }

  std::vector<std::uint8_t> thresholds;
  thresholds.reserve(k - 1);
  int start = 0;
  for (int c = k; c >= 2; --c) {
    const int t = cut[c][start];
    thresholds.push_back(static_cast<std::uint8_t>(t));
    start = t + 1;
  }
  return thresholds;
}

BinaryMask binarize(const GrayImage& image8, std::uint8_t threshold) {
  if (image8.depth() != BitDepth::k8) throw Error(ErrorCode::wrong_depth, "binarize expects a depth-8 raster");
  std::vector<std::uint8_t> bits(image8.size());
  std::transform(image8.pixels().begin(), image8.pixels().end(), bits.begin(),
                 [threshold](auto v) { return v > threshold ? 1 : 0; });
  return {image8.width(), image8.height(), std::move(bits)};
}

BinaryMask largest_component(const BinaryMask& mask) {
  const std::uint32_t w = mask.width();
  const std::uint32_t h = mask.height();
  const auto& bits = mask.bits();
  std::vector<std::uint32_t> label(bits.size(), 0);
  std::vector<std::size_t> area{0};
  std::vector<std::size_t> stack;

  for (std::size_t seed = 0; seed < bits.size(); ++seed) {
    if (!bits[seed] || label[seed]) continue;
    const auto id = static_cast<std::uint32_t>(area.size());
    std::size_t n = 0;
    label[seed] = id;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++n;
      const auto x = static_cast<std::int64_t>(p % w);
      const auto y = static_cast<std::int64_t>(p / w);
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          const auto nx = x + dx;
          const auto ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const auto q = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
          if (bits[q] && !label[q]) {
            label[q] = id;
            stack.push_back(q);
          }
        }
      }
    }
    area.push_back(n);
  }

  BinaryMask out(w, h);
  if (area.size() == 1) return out;
  // Labels are assigned in raster order of their anchors, so the first
  // maximum is the tie-break winner.
  const auto winner = static_cast<std::uint32_t>(std::max_element(area.begin() + 1, area.end()) - area.begin());
  std::vector<std::uint8_t> keep(bits.size());
  std::transform(label.begin(), label.end(), keep.begin(), [winner](auto l) { return l == winner ? 1 : 0; });
  return {w, h, std::move(keep)};
}

GeometryTable extract_row_spans(const BinaryMask& mask) {
  GeometryTable table;
  for (std::uint32_t y = 0; y < mask.height(); ++y) {
    const auto row = mask.bits().begin() + static_cast<std::ptrdiff_t>(y) * mask.width();
    const auto end = row + mask.width();
    const auto first = std::find(row, end, std::uint8_t{1});
    if (first == end) continue;
    const auto last = std::find(std::make_reverse_iterator(end), std::make_reverse_iterator(first),
                                std::uint8_t{1});
    table.push_back({y, static_cast<std::uint32_t>(first - row), static_cast<std::uint32_t>(last.base() - row)});
  }
  return table;
}

BinaryMask rasterize_spans(const GeometryTable& geometry, std::uint32_t width, std::uint32_t height) {
  validate_geometry(geometry, width, height);
  BinaryMask out(width, height);
  for (const auto& s : geometry) {
    for (auto x = s.x_start; x < s.x_end; ++x) out.set(x, s.row);
  }
  return out;
}

PixelSections gather_pixels(const GrayImage& image8, const GeometryTable& geometry) {
  if (image8.depth() != BitDepth::k8) throw Error(ErrorCode::wrong_depth, "gather_pixels expects a depth-8 raster");
  PixelSections sections;
  sections.reserve(geometry.size());
  for (const auto& s : geometry) {
    if (s.row >= image8.height() || s.x_start >= s.x_end || s.x_end > image8.width()) {
      throw Error(ErrorCode::out_of_bounds, "span (" + std::to_string(s.row) + ", " + std::to_string(s.x_start) +
                                                ", " + std::to_string(s.x_end) + ") outside the image");
    }
    const auto begin = image8.pixels().begin() + static_cast<std::ptrdiff_t>(s.row) * image8.width();
    std::vector<std::uint8_t> section(s.length());
    std::transform(begin + s.x_start, begin + s.x_end, section.begin(),
                   [](auto v) { return static_cast<std::uint8_t>(v); });
    sections.push_back(std::move(section));
  }
  return sections;
}

RoiBundle segment_roi(const GrayImage& image8, int class_count) {
  const auto thresholds = multi_otsu(histogram(image8), class_count);
  const auto object = largest_component(binarize(image8, thresholds.front()));
  RoiBundle bundle;
  bundle.geometry = extract_row_spans(object);
  bundle.pixels = gather_pixels(image8, bundle.geometry);
  bundle.width = image8.width();
  bundle.height = image8.height();
  bundle.scale = NormalizationScale{255.0, BitDepth::k8};
  return bundle;
}

}  // namespace roix
