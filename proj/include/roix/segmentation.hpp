#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "roix/image.hpp"

namespace roix {

using Histogram = std::array<std::uint64_t, 256>;

/// Row-major boolean raster; one byte (0 or 1) per pixel.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(std::uint32_t width, std::uint32_t height, bool fill = false)
      : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {}
  BinaryMask(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> bits);

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool at(std::uint32_t x, std::uint32_t y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(std::uint32_t x, std::uint32_t y, bool v = true) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
  }

  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  std::size_t count() const noexcept;
  bool same_shape(const BinaryMask& o) const noexcept { return width_ == o.width_ && height_ == o.height_; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// One row of the object: columns [x_start, x_end) of row `row`.
struct RowSpan {
  std::uint32_t row = 0;
  std::uint32_t x_start = 0;
  std::uint32_t x_end = 0;

  std::uint32_t length() const noexcept { return x_end - x_start; }
  friend bool operator==(const RowSpan&, const RowSpan&) = default;
};

using GeometryTable = std::vector<RowSpan>;
using PixelSections = std::vector<std::vector<std::uint8_t>>;

/// Separated ROI representation: exact geometry plus the 8-bit intensities
/// covered by each span.
struct RoiBundle {
  GeometryTable geometry;
  PixelSections pixels;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  NormalizationScale scale;

  std::size_t pixel_count() const noexcept;
  /// Sections concatenated in geometry order.
  std::vector<std::uint8_t> flatten() const;

  friend bool operator==(const RoiBundle&, const RoiBundle&) = default;
};

std::size_t span_pixel_count(const GeometryTable& geometry) noexcept;

/// Throws `inconsistent` unless rows strictly increase and every span lies in
/// [0, width) with x_start < x_end, and rows lie below `height`.
void validate_geometry(const GeometryTable& geometry, std::uint32_t width, std::uint32_t height);

/// Throws unless the bundle's geometry is valid and sections align with spans.
void validate_bundle(const RoiBundle& bundle);

Histogram histogram(const GrayImage& image8);

/// Ascending thresholds t_1 < ... < t_{k-1}; class j covers (t_j, t_{j+1}].
/// Maximizes between-class variance, ties resolved toward the
/// lexicographically smallest tuple.
std::vector<std::uint8_t> multi_otsu(const Histogram& hist, int class_count);

/// bit = pixel > threshold
BinaryMask binarize(const GrayImage& image8, std::uint8_t threshold);

/// 8-connected foreground component with the largest area; ties go to the
/// component whose first pixel comes first in raster order.
BinaryMask largest_component(const BinaryMask& mask);

GeometryTable extract_row_spans(const BinaryMask& mask);
BinaryMask rasterize_spans(const GeometryTable& geometry, std::uint32_t width, std::uint32_t height);

PixelSections gather_pixels(const GrayImage& image8, const GeometryTable& geometry);

inline constexpr int kDefaultClassCount = 3;

/// histogram -> multi_otsu -> binarize at the lowest threshold ->
/// largest_component -> extract_row_spans -> gather_pixels.
/// The returned bundle carries a depth-8 identity scale; callers that
/// normalized a deeper source overwrite it.
RoiBundle segment_roi(const GrayImage& image8, int class_count = kDefaultClassCount);

}  // namespace roix
