#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "roix/codec.hpp"
#include "roix/error.hpp"

namespace roix {

namespace {

constexpr std::uint8_t kMagic[4] = {'R', 'O', 'I', 'X'};
constexpr std::size_t kBlockHeader = 16;
constexpr std::size_t kTrailer = 4;

class Writer {
 public:
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void block(std::uint64_t raw_size, const Bytes& packed) {
    u64(raw_size);
    u64(packed.size());
    bytes(packed);
  }
  Bytes take() && { return std::move(out_); }
  const Bytes& view() const { return out_; }

 private:
  Bytes out_;
};

std::uint32_t load_u32(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[off + i];
  return v;
}

std::uint64_t load_u64(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[off + i];
  return v;
}

struct BlockRef {
  std::uint64_t raw_size = 0;
  std::span<const std::uint8_t> packed;
};

// Walks one length-prefixed block; never reads past `limit`.
BlockRef read_block(std::span<const std::uint8_t> b, std::size_t& off, std::size_t limit, const char* name) {
  if (limit - off < kBlockHeader) throw Error(ErrorCode::truncated, std::string(name) + " block header cut short");
  BlockRef ref;
  ref.raw_size = load_u64(b, off);
  const std::uint64_t packed = load_u64(b, off + 8);
  off += kBlockHeader;
  if (packed > limit - off) throw Error(ErrorCode::truncated, std::string(name) + " block payload cut short");
  ref.packed = b.subspan(off, static_cast<std::size_t>(packed));
  off += static_cast<std::size_t>(packed);
  return ref;
}

Bytes raster_bytes(const GrayImage& image) {
  Bytes raw;
  raw.reserve(image.raw_bytes());
  for (auto v : image.pixels()) {
    raw.push_back(static_cast<std::uint8_t>(v & 0xFF));
    if (image.depth() == BitDepth::k16) raw.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  return raw;
}

void check_background(const std::optional<BackgroundModel>& background, std::uint32_t width, std::uint32_t height,
                      BitDepth depth) {
  if (!background) return;
  const GrayImage& bg = background->image;
  if (bg.width() != width || bg.height() != height) {
    throw Error(ErrorCode::dimension_mismatch, "background is " + std::to_string(bg.width()) + "x" +
                                                   std::to_string(bg.height()) + ", ROI raster is " +
                                                   std::to_string(width) + "x" + std::to_string(height));
  }
  if (bg.depth() != depth) throw Error(ErrorCode::dimension_mismatch, "background depth differs from source depth");
}

}  // namespace

Bytes encode_archive(const RoiBundle& bundle, const std::optional<BackgroundModel>& background, CodecId codec,
                     QuantizationSpec spec) {
  if (!is_implemented(static_cast<std::uint8_t>(codec))) {
    throw Error(ErrorCode::unimplemented_codec, "codec id " + std::to_string(static_cast<int>(codec)));
  }
  validate_bundle(bundle);
  check_background(background, bundle.width, bundle.height, bundle.scale.source_depth);
  if (!(bundle.scale.i_max >= 1.0) || bundle.scale.i_max > max_value(bundle.scale.source_depth)) {
    throw Error(ErrorCode::invalid_argument, "normalization scale out of range");
  }
  if (!std::isfinite(spec.e_abs) || spec.e_abs < 0.0 || spec.e_abs > std::numeric_limits<float>::max()) {
    throw Error(ErrorCode::invalid_argument, "error bound not representable");
  }
  if (bundle.geometry.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::oversize, "too many geometry rows");
  }

  Bytes geometry_raw;
  geometry_raw.reserve(bundle.geometry.size() * 12);
  for (const auto& s : bundle.geometry) {
    for (std::uint32_t v : {s.row, s.x_start, s.x_end}) {
      for (int i = 0; i < 4; ++i) geometry_raw.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  const Bytes pixels_raw = quantize_abs(std::span<const std::uint8_t>(bundle.flatten()), spec).values;

  Writer w;
  w.bytes(kMagic);
  w.u8(kArchiveVersion);
  w.u8(background ? kFlagBackground : 0);
  w.u8(static_cast<std::uint8_t>(codec));
  w.u8(static_cast<std::uint8_t>(bundle.scale.source_depth));
  w.f32(static_cast<float>(spec.e_abs));
  w.u32(bundle.width);
  w.u32(bundle.height);
  w.f32(static_cast<float>(bundle.scale.i_max));
  w.u32(static_cast<std::uint32_t>(bundle.geometry.size()));
  w.block(geometry_raw.size(), compress_payload(geometry_raw, CodecId::deflate));
  w.block(pixels_raw.size(), compress_payload(pixels_raw, codec));
  if (background) {
    const Bytes bg_raw = raster_bytes(background->image);
    w.block(bg_raw.size(), compress_payload(bg_raw, CodecId::deflate));
  }
  w.u32(crc32(w.view()));
  return std::move(w).take();
}

DecodedArchive decode_archive(std::span<const std::uint8_t> b) {
  if (b.size() < 4) throw Error(ErrorCode::truncated, "archive shorter than its magic");
  if (!std::equal(std::begin(kMagic), std::end(kMagic), b.begin())) {
    throw Error(ErrorCode::bad_magic, "not a ROIX archive");
  }
  if (b.size() < kHeaderSize) throw Error(ErrorCode::truncated, "archive header cut short");
  if (b[4] != kArchiveVersion) {
    throw Error(ErrorCode::version_mismatch, "archive version " + std::to_string(b[4]) + ", expected " +
                                                 std::to_string(kArchiveVersion));
  }

  ArchiveInfo info;
  info.version = b[4];
  info.flags = b[5];
  const std::uint8_t codec_id = b[6];
  const std::uint8_t depth = b[7];
  info.e_abs = std::bit_cast<float>(load_u32(b, 8));
  info.width = load_u32(b, 12);
  info.height = load_u32(b, 16);
  info.i_max = std::bit_cast<float>(load_u32(b, 20));
  info.rows = load_u32(b, 24);

  // Structure first so that a short file reports truncation, then the CRC.
  const std::size_t limit = b.size() - std::min(b.size(), kTrailer);
  if (b.size() < kHeaderSize + kTrailer) throw Error(ErrorCode::truncated, "archive has no room for blocks");
  std::size_t off = kHeaderSize;
  const BlockRef geometry_block = read_block(b, off, limit, "geometry");
  const BlockRef pixel_block = read_block(b, off, limit, "pixel");
  std::optional<BlockRef> background_block;
  if (info.flags & kFlagBackground) background_block = read_block(b, off, limit, "background");
  if (off != limit) {
    throw Error(off < limit ? ErrorCode::inconsistent : ErrorCode::truncated, "archive length does not match blocks");
  }
  const std::uint32_t stored_crc = load_u32(b, limit);
  if (crc32(b.first(limit)) != stored_crc) throw Error(ErrorCode::crc_mismatch, "archive checksum does not verify");

  if (info.flags & ~kFlagBackground) throw Error(ErrorCode::malformed_header, "unknown flag bits set");
  if (codec_id > kMaxReservedCodecId) throw Error(ErrorCode::malformed_header, "codec id out of range");
  if (!is_implemented(codec_id)) {
    throw Error(ErrorCode::unimplemented_codec, "codec id " + std::to_string(codec_id) + " has no backend");
  }
  info.codec = static_cast<CodecId>(codec_id);
  if (depth != 8 && depth != 16) throw Error(ErrorCode::malformed_header, "source depth must be 8 or 16");
  info.source_depth = static_cast<BitDepth>(depth);
  if (!std::isfinite(info.e_abs) || info.e_abs < 0.0f) throw Error(ErrorCode::malformed_header, "invalid error bound");
  if (!std::isfinite(info.i_max) || info.i_max < 1.0f || info.i_max > static_cast<float>(max_value(info.source_depth))) {
    throw Error(ErrorCode::malformed_header, "invalid normalization maximum");
  }
  info.geometry_bytes = geometry_block.packed.size();
  info.pixel_bytes = pixel_block.packed.size();
  info.background_bytes = background_block ? background_block->packed.size() : 0;

  if (info.rows > info.height) throw Error(ErrorCode::inconsistent, "more geometry rows than raster rows");
  if (geometry_block.raw_size != std::uint64_t{info.rows} * 12) {
    throw Error(ErrorCode::inconsistent, "geometry block length disagrees with row count");
  }
  const Bytes geometry_raw = decompress_payload(geometry_block.packed, CodecId::deflate, geometry_block.raw_size);

  DecodedArchive out;
  out.info = info;
  RoiBundle& bundle = out.bundle;
  bundle.width = info.width;
  bundle.height = info.height;
  bundle.scale = NormalizationScale{static_cast<double>(info.i_max), info.source_depth};
  bundle.geometry.resize(info.rows);
  for (std::uint32_t k = 0; k < info.rows; ++k) {
    bundle.geometry[k] = RowSpan{load_u32(geometry_raw, 12 * k), load_u32(geometry_raw, 12 * k + 4),
                                 load_u32(geometry_raw, 12 * k + 8)};
  }
  validate_geometry(bundle.geometry, info.width, info.height);

  const std::size_t total = span_pixel_count(bundle.geometry);
  if (pixel_block.raw_size != total) {
    throw Error(ErrorCode::inconsistent, "pixel stream length " + std::to_string(pixel_block.raw_size) +
                                             " differs from span total " + std::to_string(total));
  }
  const Bytes stream = decompress_payload(pixel_block.packed, info.codec, pixel_block.raw_size);
  bundle.pixels.reserve(info.rows);
  auto cursor = stream.begin();
  for (const auto& s : bundle.geometry) {
    bundle.pixels.emplace_back(cursor, cursor + s.length());
    cursor += s.length();
  }

  if (background_block) {
    const std::uint64_t samples = std::uint64_t{info.width} * info.height;
    if (background_block->raw_size != samples * bytes_per_sample(info.source_depth)) {
      throw Error(ErrorCode::inconsistent, "background block length disagrees with raster size");
    }
    const Bytes raw = decompress_payload(background_block->packed, CodecId::deflate, background_block->raw_size);
    std::vector<std::uint16_t> px(static_cast<std::size_t>(samples));
    for (std::size_t i = 0; i < px.size(); ++i) {
      px[i] = info.source_depth == BitDepth::k8 ? raw[i]
                                                : static_cast<std::uint16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
    }
    out.background = BackgroundModel{GrayImage(info.width, info.height, info.source_depth, std::move(px)),
                                     BackgroundSource::reference_scan};
  }
  return out;
}

GrayImage reconstruct_image(const RoiBundle& bundle, const std::optional<BackgroundModel>& background) {
  validate_bundle(bundle);
  const BitDepth depth = bundle.scale.source_depth;
  check_background(background, bundle.width, bundle.height, depth);
  GrayImage out = background ? background->image : GrayImage(bundle.width, bundle.height, depth);
  const std::uint32_t limit = max_value(depth);
  for (std::size_t k = 0; k < bundle.geometry.size(); ++k) {
    const RowSpan& s = bundle.geometry[k];
    const auto& section = bundle.pixels[k];
    for (std::uint32_t j = 0; j < s.length(); ++j) {
      const std::uint32_t x = s.x_start + j;
      const std::uint32_t base = background ? background->image.at(x, s.row) : 0;
      const std::uint32_t v = denormalize_sample(section[j], bundle.scale) + base;
      out.set(x, s.row, static_cast<std::uint16_t>(std::min(v, limit)));
    }
  }
  return out;
}

double compression_ratio(std::uint64_t original_size, std::uint64_t archive_size) {
  if (archive_size == 0) throw Error(ErrorCode::zero_divisor, "archive size is zero");
  return static_cast<double>(original_size) / static_cast<double>(archive_size);
}

double relative_improvement(double roix_ratio, double standard_ratio) {
  if (!(standard_ratio > 0.0)) throw Error(ErrorCode::zero_divisor, "standard ratio must be positive");
  return roix_ratio / standard_ratio;
}

}  // namespace roix
