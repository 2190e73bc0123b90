#include "roix/pipeline.hpp"

#include "roix/error.hpp"

namespace roix {

CompressResult compress_image(const GrayImage& image, const CompressOptions& options) {
  const BackgroundPolicy& policy = options.background;
  std::optional<BackgroundModel> background;
  switch (policy.kind) {
    case BackgroundPolicy::Kind::none:
      break;
    case BackgroundPolicy::Kind::reference:
      if (!policy.reference) throw Error(ErrorCode::invalid_argument, "reference background policy without a raster");
      background = policy.reference;
      break;
    case BackgroundPolicy::Kind::estimate:
      background = estimate_background(image, policy.border_fraction);
      break;
  }

  const GrayImage object = background ? subtract_background(image, *background) : image;
  auto [image8, scale] = normalize_intensity(object);

  CompressResult result;
  result.bundle = segment_roi(image8, options.class_count);
  result.bundle.scale = scale;

  const bool embed = background && (policy.embed || policy.kind == BackgroundPolicy::Kind::estimate);
  result.archive = encode_archive(result.bundle, embed ? background : std::nullopt, options.codec,
                                  options.quantization);
  result.background = std::move(background);
  return result;
}

GrayImage decompress_image(std::span<const std::uint8_t> archive,
                           const std::optional<BackgroundModel>& external_background) {
  DecodedArchive decoded = decode_archive(archive);
  const auto& background = decoded.background ? decoded.background : external_background;
  return reconstruct_image(decoded.bundle, background);
}

}  // namespace roix
