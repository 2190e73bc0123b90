#include "roix/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "roix/error.hpp"

namespace roix {

namespace {

void check_spec(QuantizationSpec spec) {
  if (!(spec.e_abs >= 0.0) || !std::isfinite(spec.e_abs)) {
    throw Error(ErrorCode::invalid_argument, "error bound must be a finite non-negative number");
  }
}

template <typename T>
QuantizedRun quantize_impl(std::span<const T> data, QuantizationSpec spec) {
  check_spec(spec);
  QuantizedRun out;
  out.values.resize(data.size());
  if (data.empty()) return out;

  // Outputs are integers, so only the integer part of the bound is usable:
  // [d - e, d + e] and [d - floor(e), d + floor(e)] hold the same integers.
  const double e = std::floor(spec.e_abs);
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  // The intersection is [max - e, min + e], so its midpoint is (max + min) / 2
  // exactly; tracking the data extremes avoids rounding the sum of the bounds.
  int group_min = 0;
  int group_max = 0;
  std::size_t head = 0;

  auto close_group = [&](std::size_t end) {
    const int mid = (group_min + group_max) / 2;
    const auto value = static_cast<std::uint8_t>(std::clamp(mid, 0, 255));
    std::fill(out.values.begin() + static_cast<std::ptrdiff_t>(head),
              out.values.begin() + static_cast<std::ptrdiff_t>(end), value);
    out.group_boundaries.push_back(head);
  };

  for (std::size_t i = 0; i < data.size(); ++i) {
    const int d = data[i];
    if (d < 0 || d > 255) {
      throw Error(ErrorCode::value_out_of_range, "sample " + std::to_string(i) + " outside [0, 255]");
    }
    const double lo_i = d - e;
    const double hi_i = d + e;
    const double lo_new = std::max(lower, lo_i);
    const double hi_new = std::min(upper, hi_i);
    if (i > 0 && hi_new < lo_new) {
      close_group(i);
      head = i;
      lower = lo_i;
      upper = hi_i;
      group_min = group_max = d;
    } else {
      lower = lo_new;
      upper = hi_new;
      if (i == 0) {
        group_min = group_max = d;
      } else {
        group_min = std::min(group_min, d);
        group_max = std::max(group_max, d);
      }
    }
  }
  close_group(data.size());
  return out;
}

}  // namespace

QuantizedRun quantize_abs(std::span<const std::uint8_t> data, QuantizationSpec spec) {
  return quantize_impl(data, spec);
}

QuantizedRun quantize_abs(std::span<const std::uint16_t> data, QuantizationSpec spec) {
  return quantize_impl(data, spec);
}

std::vector<std::size_t> verify_bound(std::span<const std::uint8_t> data, const QuantizedRun& q,
                                      QuantizationSpec spec) {
  if (data.size() != q.values.size()) {
    throw Error(ErrorCode::length_mismatch, "quantized stream length differs from data length");
  }
  std::vector<std::size_t> violations;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (std::abs(static_cast<double>(q.values[i]) - static_cast<double>(data[i])) > spec.e_abs) {
      violations.push_back(i);
    }
  }
  return violations;
}

QuantizedRun oracle_quantize(std::span<const std::uint8_t> data, QuantizationSpec spec) {
  check_spec(spec);
  QuantizedRun out;
  out.values.resize(data.size());
  std::size_t head = 0;
  while (head < data.size()) {
    std::size_t end = head + 1;
    while (end < data.size()) {
      const auto window = data.subspan(head, end + 1 - head);
      const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
      if (static_cast<double>(*hi) - static_cast<double>(*lo) > 2.0 * std::floor(spec.e_abs)) break;
      ++end;
    }
    const auto window = data.subspan(head, end - head);
    const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
    const auto value = static_cast<std::uint8_t>((static_cast<int>(*lo) + static_cast<int>(*hi)) / 2);
    std::fill(out.values.begin() + static_cast<std::ptrdiff_t>(head),
              out.values.begin() + static_cast<std::ptrdiff_t>(end), value);
    out.group_boundaries.push_back(head);
    head = end;
  }
  return out;
}

}  // namespace roix
