#pragma once

#include <optional>

#include "roix/codec.hpp"
#include "roix/image.hpp"
#include "roix/segmentation.hpp"

namespace roix {

/// How the background for a frame is obtained and where it ends up.
struct BackgroundPolicy {
  enum class Kind { none, reference, estimate };
  Kind kind = Kind::none;
  std::optional<BackgroundModel> reference;  // for Kind::reference
  double border_fraction = 0.05;             // for Kind::estimate
  /// Store the background inside the archive. Estimated backgrounds are
  /// always embedded since nothing else could reproduce them.
  bool embed = false;
};

struct CompressOptions {
  CodecId codec = CodecId::deflate;
  QuantizationSpec quantization;
  int class_count = kDefaultClassCount;
  BackgroundPolicy background;
};

struct CompressResult {
  Bytes archive;
  RoiBundle bundle;  // before quantization
  std::optional<BackgroundModel> background;
};

/// subtract background -> normalize -> segment -> encode.
CompressResult compress_image(const GrayImage& image, const CompressOptions& options);

/// decode -> reconstruct. An external background is used only when the
/// archive carries none.
GrayImage decompress_image(std::span<const std::uint8_t> archive,
                           const std::optional<BackgroundModel>& external_background = std::nullopt);

}  // namespace roix
