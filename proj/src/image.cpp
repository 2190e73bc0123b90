#include "roix/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "roix/error.hpp"

namespace roix {

GrayImage::GrayImage(std::uint32_t width, std::uint32_t height, BitDepth depth, std::uint16_t fill)
    : width_(width), height_(height), depth_(depth) {
  if (fill > max_value(depth)) {
    throw Error(ErrorCode::value_out_of_range, "fill value exceeds bit depth");
  }
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(std::uint32_t width, std::uint32_t height, BitDepth depth,
                     std::vector<std::uint16_t> pixels)
    : width_(width), height_(height), depth_(depth), pixels_(std::move(pixels)) {
  if (pixels_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::size_mismatch, "pixel count does not match width x height");
  }
  const auto limit = max_value(depth);
  if (std::any_of(pixels_.begin(), pixels_.end(), [limit](auto v) { return v > limit; })) {
    throw Error(ErrorCode::value_out_of_range, "pixel value exceeds bit depth");
  }
}

void GrayImage::set(std::uint32_t x, std::uint32_t y, std::uint16_t v) {
  if (x >= width_ || y >= height_) throw Error(ErrorCode::out_of_bounds, "pixel outside raster");
  if (v > max_value(depth_)) throw Error(ErrorCode::value_out_of_range, "pixel value exceeds bit depth");
  pixels_[index(x, y)] = v;
}

std::uint16_t GrayImage::max_pixel() const noexcept {
  if (pixels_.empty()) return 0;
  return *std::max_element(pixels_.begin(), pixels_.end());
}

// --- file formats ----------------------------------------------------------

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

// Netpbm header tokenizer: whitespace separated decimal fields, '#' comments.
class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint64_t next_number() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw Error(ErrorCode::malformed_header, "expected a decimal field in PGM header");
    }
    std::uint64_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorCode::malformed_header, "PGM header field too large");
      }
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorCode::malformed_header, "missing separator before PGM raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 2;
};

void check_dims(std::uint64_t width, std::uint64_t height) {
  if (width == 0 || height == 0) throw Error(ErrorCode::malformed_header, "zero image dimension");
}

}  // namespace

GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw Error(ErrorCode::malformed_header, "not a binary PGM (P5) file");
  }
  PgmHeaderReader reader(bytes);
  const auto width = reader.next_number();
  const auto height = reader.next_number();
  const auto maxval = reader.next_number();
  check_dims(width, height);
  if (maxval == 0 || maxval > 65535) throw Error(ErrorCode::malformed_header, "PGM maxval out of range");
  const std::size_t offset = reader.raster_offset();

  const BitDepth depth = maxval <= 255 ? BitDepth::k8 : BitDepth::k16;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  const std::size_t expected = count * bytes_per_sample(depth);
  if (bytes.size() - offset != expected) {
    throw Error(ErrorCode::size_mismatch, "PGM raster holds " + std::to_string(bytes.size() - offset) +
                                              " bytes, header declares " + std::to_string(expected));
  }

  std::vector<std::uint16_t> pixels(count);
  const std::uint8_t* src = bytes.data() + offset;
  if (depth == BitDepth::k8) {
    std::copy(src, src + count, pixels.begin());
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      pixels[i] = static_cast<std::uint16_t>((src[2 * i] << 8) | src[2 * i + 1]);
    }
  }
  if (std::any_of(pixels.begin(), pixels.end(), [maxval](auto v) { return v > maxval; })) {
    throw Error(ErrorCode::value_out_of_range, "PGM sample exceeds declared maxval");
  }
  return {static_cast<std::uint32_t>(width), static_cast<std::uint32_t>(height), depth, std::move(pixels)};
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  const std::string header = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) +
                             "\n" + std::to_string(max_value(image.depth())) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + image.raw_bytes());
  for (auto v : image.pixels()) {
    if (image.depth() == BitDepth::k16) out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  }
  return out;
}

GrayImage decode_raw(const std::vector<std::uint8_t>& bytes, const RawLayout& layout) {
  check_dims(layout.width, layout.height);
  const std::size_t count = static_cast<std::size_t>(layout.width) * layout.height;
  if (bytes.size() != count * bytes_per_sample(layout.depth)) {
    throw Error(ErrorCode::size_mismatch, "raw file holds " + std::to_string(bytes.size()) +
                                              " bytes, layout needs " +
                                              std::to_string(count * bytes_per_sample(layout.depth)));
  }
  std::vector<std::uint16_t> pixels(count);
  if (layout.depth == BitDepth::k8) {
    std::copy(bytes.begin(), bytes.end(), pixels.begin());
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      pixels[i] = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
    }
  }
  return {layout.width, layout.height, layout.depth, std::move(pixels)};
}

std::vector<std::uint8_t> encode_raw(const GrayImage& image) {
  std::vector<std::uint8_t> out;
  out.reserve(image.raw_bytes());
  for (auto v : image.pixels()) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    if (image.depth() == BitDepth::k16) out.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  return out;
}

GrayImage load_image(const std::filesystem::path& path, ImageFormat format,
                     std::optional<RawLayout> raw_layout) {
  if (format == ImageFormat::raw && !raw_layout) {
    throw Error(ErrorCode::invalid_argument, "raw images need explicit width, height and depth");
  }
  const auto bytes = read_file(path);
  return format == ImageFormat::pgm ? decode_pgm(bytes) : decode_raw(bytes, *raw_layout);
}

void save_image(const GrayImage& image, const std::filesystem::path& path, ImageFormat format) {
  write_file(path, format == ImageFormat::pgm ? encode_pgm(image) : encode_raw(image));
}

// --- background ------------------------------------------------------------

GrayImage subtract_background(const GrayImage& image, const BackgroundModel& background) {
  const GrayImage& bg = background.image;
  if (!image.same_shape(bg)) {
    throw Error(ErrorCode::dimension_mismatch, "background dimensions differ from image");
  }
  if (image.depth() != bg.depth()) {
    throw Error(ErrorCode::dimension_mismatch, "background bit depth differs from image");
  }
  std::vector<std::uint16_t> out(image.size());
  const auto& a = image.pixels();
  const auto& b = bg.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a[i] > b[i] ? static_cast<std::uint16_t>(a[i] - b[i]) : 0;
  }
  return {image.width(), image.height(), image.depth(), std::move(out)};
}

BackgroundModel estimate_background(const GrayImage& image, double border_fraction) {
  if (image.empty()) throw Error(ErrorCode::degenerate_input, "cannot estimate background of empty image");
  if (!(border_fraction > 0.0 && border_fraction < 0.5)) {
    throw Error(ErrorCode::invalid_argument, "border fraction must lie in (0, 0.5)");
  }
  const std::uint32_t w = image.width();
  const std::uint32_t h = image.height();
  const double span = border_fraction * std::min(w, h);
  if (span < 1.0) {
    throw Error(ErrorCode::degenerate_input, "border frame thinner than one pixel");
  }
  const auto thickness = static_cast<std::uint32_t>(std::ceil(span));

  std::vector<std::uint16_t> frame;
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      const bool on_border = y < thickness || y >= h - std::min(h, thickness) || x < thickness ||
                             x >= w - std::min(w, thickness);
      if (on_border) frame.push_back(image.at(x, y));
    }
  }
  // Lower median for even counts keeps the estimate an observed intensity.
  const auto mid = frame.begin() + static_cast<std::ptrdiff_t>((frame.size() - 1) / 2);
  std::nth_element(frame.begin(), mid, frame.end());
  return {GrayImage(w, h, image.depth(), *mid), BackgroundSource::estimated};
}

// --- normalization ---------------------------------------------------------

std::uint8_t normalize_sample(std::uint32_t value, const NormalizationScale& scale) noexcept {
  if (scale.source_depth == BitDepth::k8) return static_cast<std::uint8_t>(std::min<std::uint32_t>(value, 255));
  const double v = std::floor(static_cast<double>(value) * 255.0 / scale.i_max + 0.5);
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

std::uint16_t denormalize_sample(std::uint8_t value, const NormalizationScale& scale) noexcept {
  if (scale.source_depth == BitDepth::k8) return value;
  const double v = std::floor(static_cast<double>(value) * scale.i_max / 255.0 + 0.5);
  return static_cast<std::uint16_t>(std::clamp(v, 0.0, static_cast<double>(max_value(scale.source_depth))));
}

std::pair<GrayImage, NormalizationScale> normalize_intensity(const GrayImage& image) {
  if (image.depth() == BitDepth::k8) return {image, NormalizationScale{255.0, BitDepth::k8}};
  const NormalizationScale scale{std::max<double>(1.0, image.max_pixel()), image.depth()};
  std::vector<std::uint16_t> out(image.size());
  std::transform(image.pixels().begin(), image.pixels().end(), out.begin(),
                 [&scale](auto v) { return normalize_sample(v, scale); });
  return {GrayImage(image.width(), image.height(), BitDepth::k8, std::move(out)), scale};
}

GrayImage denormalize(const GrayImage& image8, const NormalizationScale& scale) {
  if (image8.depth() != BitDepth::k8) throw Error(ErrorCode::wrong_depth, "denormalize expects a depth-8 raster");
  if (!(scale.i_max >= 1.0)) throw Error(ErrorCode::invalid_argument, "i_max must be at least 1");
  std::vector<std::uint16_t> out(image8.size());
  std::transform(image8.pixels().begin(), image8.pixels().end(), out.begin(),
                 [&scale](auto v) { return denormalize_sample(static_cast<std::uint8_t>(v), scale); });
  return {image8.width(), image8.height(), scale.source_depth, std::move(out)};
}

}  // namespace roix
