#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace roix {

enum class BitDepth : std::uint8_t { k8 = 8, k16 = 16 };

constexpr std::uint32_t max_value(BitDepth depth) noexcept {
  return depth == BitDepth::k8 ? 0xFFu : 0xFFFFu;
}

constexpr std::size_t bytes_per_sample(BitDepth depth) noexcept {
  return depth == BitDepth::k8 ? 1 : 2;
}

/// Row-major grayscale raster. Samples are held as 16-bit values regardless of
/// depth; depth only bounds the admissible range.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(std::uint32_t width, std::uint32_t height, BitDepth depth, std::uint16_t fill = 0);
  GrayImage(std::uint32_t width, std::uint32_t height, BitDepth depth,
            std::vector<std::uint16_t> pixels);

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  BitDepth depth() const noexcept { return depth_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint16_t at(std::uint32_t x, std::uint32_t y) const { return pixels_[index(x, y)]; }
  void set(std::uint32_t x, std::uint32_t y, std::uint16_t v);

  const std::vector<std::uint16_t>& pixels() const noexcept { return pixels_; }
  std::uint16_t max_pixel() const noexcept;

  /// Size of the raster as stored uncompressed at its own depth.
  std::size_t raw_bytes() const noexcept { return pixels_.size() * bytes_per_sample(depth_); }

  bool same_shape(const GrayImage& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(std::uint32_t x, std::uint32_t y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  BitDepth depth_ = BitDepth::k8;
  std::vector<std::uint16_t> pixels_;
};

enum class BackgroundSource : std::uint8_t { reference_scan, estimated };

struct BackgroundModel {
  GrayImage image;
  BackgroundSource source = BackgroundSource::reference_scan;
};

/// Scale used to map a source raster into 8 bits and back.
struct NormalizationScale {
  double i_max = 255.0;
  BitDepth source_depth = BitDepth::k8;

  friend bool operator==(const NormalizationScale&, const NormalizationScale&) = default;
};

enum class ImageFormat { pgm, raw };

/// Out-of-band description of a headerless raw file.
struct RawLayout {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  BitDepth depth = BitDepth::k8;
};

GrayImage load_image(const std::filesystem::path& path, ImageFormat format,
                     std::optional<RawLayout> raw_layout = std::nullopt);
void save_image(const GrayImage& image, const std::filesystem::path& path, ImageFormat format);

// In-memory codecs behind load_image/save_image.
GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_pgm(const GrayImage& image);
GrayImage decode_raw(const std::vector<std::uint8_t>& bytes, const RawLayout& layout);
std::vector<std::uint8_t> encode_raw(const GrayImage& image);

/// out = max(0, image - background), pixel by pixel.
GrayImage subtract_background(const GrayImage& image, const BackgroundModel& background);

/// Constant background equal to the median of the border frame of thickness
/// ceil(border_fraction * min(width, height)).
BackgroundModel estimate_background(const GrayImage& image, double border_fraction);

/// Maps a raster into depth 8. Depth-8 inputs are copied unchanged.
std::pair<GrayImage, NormalizationScale> normalize_intensity(const GrayImage& image);

GrayImage denormalize(const GrayImage& image8, const NormalizationScale& scale);

/// Single-sample forms of the two maps above; reconstruction uses these per
/// ROI pixel.
std::uint8_t normalize_sample(std::uint32_t value, const NormalizationScale& scale) noexcept;
std::uint16_t denormalize_sample(std::uint8_t value, const NormalizationScale& scale) noexcept;

}  // namespace roix
