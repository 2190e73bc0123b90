#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace roix {

/// Absolute error tolerance in intensity units. Zero is allowed and yields
/// lossless run grouping.
struct QuantizationSpec {
  double e_abs = 0.0;
};

/// Piecewise-constant replacement of a pixel stream.
struct QuantizedRun {
  std::vector<std::uint8_t> values;
  /// Start index of every constant group; first entry is 0 when non-empty.
  std::vector<std::size_t> group_boundaries;

  friend bool operator==(const QuantizedRun&, const QuantizedRun&) = default;
};

/// Greedy left-to-right grouping: a group grows while the intersection of
/// [D[i] - e, D[i] + e] over its members still holds an integer, and every
/// member is replaced by the floored midpoint of that intersection. Grouping
/// uses floor(e) since outputs are integers.
QuantizedRun quantize_abs(std::span<const std::uint8_t> data, QuantizationSpec spec);
QuantizedRun quantize_abs(std::span<const std::uint16_t> data, QuantizationSpec spec);

/// Indices where |q[i] - data[i]| > e_abs.
std::vector<std::size_t> verify_bound(std::span<const std::uint8_t> data, const QuantizedRun& q,
                                      QuantizationSpec spec);

/// Reference grouping by explicit window scan (max - min <= 2 floor(e)). Quadratic;
/// meant for short sequences in tests.
QuantizedRun oracle_quantize(std::span<const std::uint8_t> data, QuantizationSpec spec);

}  // namespace roix
