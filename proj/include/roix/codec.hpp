#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "roix/image.hpp"
#include "roix/quantizer.hpp"
#include "roix/segmentation.hpp"

namespace roix {

/// Backend identifiers as stored in the archive header. 3-15 are reserved for
/// external error-bounded compressors, which carry their own error control
/// and would take the pixel stream unquantized.
enum class CodecId : std::uint8_t {
  store = 0,
  deflate = 1,
  zstd = 2,
};

inline constexpr std::uint8_t kMaxReservedCodecId = 15;

bool is_implemented(std::uint8_t codec_id) noexcept;
std::string_view codec_name(CodecId codec) noexcept;
/// Accepts "store", "gzip"/"deflate" and "zstd".
CodecId parse_codec(std::string_view name);

using Bytes = std::vector<std::uint8_t>;

/// deflate payloads are gzip members; zstd payloads are single zstd frames.
Bytes compress_payload(std::span<const std::uint8_t> raw, CodecId codec);
Bytes compress_payload(std::span<const std::uint8_t> raw, std::uint8_t codec_id);
/// `raw_size` is the exact expected output length.
Bytes decompress_payload(std::span<const std::uint8_t> packed, CodecId codec, std::uint64_t raw_size);

/// ROIX container v1, all integers little-endian:
///
///   off  size  field
///     0     4  magic "ROIX"
///     4     1  version (1)
///     5     1  flags (bit 0: background block present; other bits zero)
///     6     1  pixel codec id
///     7     1  source bit depth (8 or 16)
///     8     4  e_abs (IEEE-754 binary32)
///    12     4  width
///    16     4  height
///    20     4  i_max (IEEE-754 binary32)
///    24     4  row count m
///    28        geometry block, then pixel block, then the optional background
///              block; each block is u64 raw length, u64 packed length, packed
///              bytes
///   end     4  CRC-32 (ISO-HDLC, as zlib) of every preceding byte
///
/// Geometry raw bytes are m (row, x_start, x_end) u32 triples packed with the
/// deflate codec. Pixel raw bytes are the quantized 8-bit stream in geometry
/// order packed with the header's codec. Background raw bytes are the
/// source-depth raster (16-bit samples little-endian) packed with deflate.
inline constexpr std::uint8_t kArchiveVersion = 1;
inline constexpr std::size_t kHeaderSize = 28;
inline constexpr std::uint8_t kFlagBackground = 0x01;

struct ArchiveInfo {
  std::uint8_t version = kArchiveVersion;
  std::uint8_t flags = 0;
  CodecId codec = CodecId::store;
  float e_abs = 0.0f;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  BitDepth source_depth = BitDepth::k8;
  float i_max = 255.0f;
  std::uint32_t rows = 0;
  std::uint64_t geometry_bytes = 0;
  std::uint64_t pixel_bytes = 0;
  std::uint64_t background_bytes = 0;

  bool has_background() const noexcept { return (flags & kFlagBackground) != 0; }
};

struct DecodedArchive {
  RoiBundle bundle;
  std::optional<BackgroundModel> background;
  ArchiveInfo info;
};

Bytes encode_archive(const RoiBundle& bundle, const std::optional<BackgroundModel>& background, CodecId codec,
                     QuantizationSpec spec);

DecodedArchive decode_archive(std::span<const std::uint8_t> archive);

/// Background (or a zero raster) with every span overwritten by
/// denormalize(section) + background, clamped to the source depth.
GrayImage reconstruct_image(const RoiBundle& bundle, const std::optional<BackgroundModel>& background);

double compression_ratio(std::uint64_t original_size, std::uint64_t archive_size);
double relative_improvement(double roix_ratio, double standard_ratio);

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept;

}  // namespace roix
