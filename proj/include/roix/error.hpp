#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace roix {

enum class ErrorCode {
  io,
  malformed_header,
  size_mismatch,
  dimension_mismatch,
  degenerate_input,
  wrong_depth,
  insufficient_intensities,
  out_of_bounds,
  value_out_of_range,
  length_mismatch,
  unimplemented_codec,
  bad_magic,
  version_mismatch,
  crc_mismatch,
  truncated,
  inconsistent,
  corrupt_payload,
  oversize,
  zero_divisor,
  empty_geometry,
  image_too_small,
  invalid_argument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (and the fuzz harness) can tell error classes apart.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace roix
