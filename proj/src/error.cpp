#include "roix/error.hpp"

namespace roix {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::io: return "io";
    case ErrorCode::malformed_header: return "malformed_header";
    case ErrorCode::size_mismatch: return "size_mismatch";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::degenerate_input: return "degenerate_input";
    case ErrorCode::wrong_depth: return "wrong_depth";
    case ErrorCode::insufficient_intensities: return "insufficient_intensities";
    case ErrorCode::out_of_bounds: return "out_of_bounds";
    case ErrorCode::value_out_of_range: return "value_out_of_range";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::unimplemented_codec: return "unimplemented_codec";
    case ErrorCode::bad_magic: return "bad_magic";
    case ErrorCode::version_mismatch: return "version_mismatch";
    case ErrorCode::crc_mismatch: return "crc_mismatch";
    case ErrorCode::truncated: return "truncated";
    case ErrorCode::inconsistent: return "inconsistent";
    case ErrorCode::corrupt_payload: return "corrupt_payload";
    case ErrorCode::oversize: return "oversize";
    case ErrorCode::zero_divisor: return "zero_divisor";
    case ErrorCode::empty_geometry: return "empty_geometry";
    case ErrorCode::image_too_small: return "image_too_small";
    case ErrorCode::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

}  // namespace roix
