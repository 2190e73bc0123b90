#include <random>

#include "doctest.h"
#include "roix/quantizer.hpp"
#include "test_util.hpp"

using namespace roix;
using namespace roix::test;

namespace {

using U8 = std::vector<std::uint8_t>;
using Idx = std::vector<std::size_t>;

QuantizedRun q(const U8& d, double e) { return quantize_abs(std::span<const std::uint8_t>(d), {e}); }

}  // namespace

TEST_CASE("quantize_abs examples") {
  CHECK(q({5, 5, 7}, 0) == QuantizedRun{{5, 5, 7}, {0, 2}});
  CHECK(q({10, 12, 20}, 2) == QuantizedRun{{11, 11, 20}, {0, 2}});
  CHECK(q({}, 3) == QuantizedRun{});
  CHECK(q({255, 251}, 3) == QuantizedRun{{253, 253}, {0}});
  CHECK(q({0, 255}, 200).values == U8{127, 127});
}

TEST_CASE("quantize_abs with distinct values and zero bound keeps every value") {
  const U8 d{3, 1, 4, 1, 5, 9, 2, 6};
  const QuantizedRun r = q(d, 0);
  CHECK(r.values == d);
  CHECK(r.group_boundaries == Idx{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("fractional bounds group on the integer lattice") {
  // [9.5, 10.5] and [10.5, 11.5] meet only at 10.5, which no output can take.
  CHECK(q({10, 11}, 0.5) == QuantizedRun{{10, 11}, {0, 1}});
  CHECK(q({10, 10, 11}, 0.1) == QuantizedRun{{10, 10, 11}, {0, 2}});
  CHECK(q({10, 11}, 1.0) == QuantizedRun{{10, 10}, {0}});
  // Odd spread under a .5 bound: {10, 15} fits 2.5 on reals but not on integers.
  CHECK(q({10, 15}, 2.5) == QuantizedRun{{10, 15}, {0, 1}});
  CHECK(q({10, 14}, 2.5) == QuantizedRun{{12, 12}, {0}});
  for (double e : {0.5, 0.7, 1.5, 2.5, 7.9}) {
    const U8 d{0, 1, 3, 6, 10, 15, 21, 28, 36, 45, 55};
    CHECK(verify_bound(d, q(d, e), {e}).empty());
  }
}

TEST_CASE("16-bit input overload") {
  const std::vector<std::uint16_t> d{10, 12, 20};
  CHECK(quantize_abs(std::span<const std::uint16_t>(d), {2}).values == U8{11, 11, 20});
  const std::vector<std::uint16_t> bad{256};
  CHECK(code_of([&] { quantize_abs(std::span<const std::uint16_t>(bad), {1}); }) == ErrorCode::value_out_of_range);
}

TEST_CASE("negative or non-finite bounds are rejected") {
  CHECK(code_of([] { q({1}, -1); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { q({1}, std::numeric_limits<double>::quiet_NaN()); }) == ErrorCode::invalid_argument);
}

TEST_CASE("verify_bound examples") {
  CHECK(verify_bound(U8{0}, QuantizedRun{{5}, {0}}, {1}) == Idx{0});
  CHECK(verify_bound(U8{10, 10}, QuantizedRun{{11, 9}, {0, 1}}, {1}).empty());
  CHECK(code_of([] { verify_bound(U8{1, 2}, QuantizedRun{{1}, {0}}, {1}); }) == ErrorCode::length_mismatch);
}

TEST_CASE("oracle_quantize examples") {
  CHECK(oracle_quantize(U8{10, 12, 20}, {2}) == QuantizedRun{{11, 11, 20}, {0, 2}});
  CHECK(oracle_quantize(U8{0, 255}, {200}) == QuantizedRun{{127, 127}, {0}});
  CHECK(oracle_quantize(U8{1, 2, 3}, {0}).group_boundaries == Idx{0, 1, 2});
}

TEST_CASE("random streams: bound holds, groups are maximal, oracle agrees") {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> len(0, 300);
  std::uniform_int_distribution<int> step(-12, 12);
  for (int n = 0; n < 300; ++n) {
    U8 d(static_cast<std::size_t>(len(rng)));
    int v = 128;
    for (auto& x : d) x = static_cast<std::uint8_t>(v = std::clamp(v + step(rng), 0, 255));
    for (double e : {0.0, 0.1, 1.0, 2.5, 5.0, 10.0, 15.0}) {
      const QuantizedRun r = q(d, e);
      REQUIRE(r.values.size() == d.size());
      CHECK(verify_bound(d, r, {e}).empty());
      CHECK(r == oracle_quantize(d, {e}));
      // Constant within a group, and no group could absorb the next element.
      for (std::size_t g = 0; g < r.group_boundaries.size(); ++g) {
        const std::size_t lo = r.group_boundaries[g];
        const std::size_t hi = g + 1 < r.group_boundaries.size() ? r.group_boundaries[g + 1] : d.size();
        std::uint8_t mn = 255, mx = 0;
        for (std::size_t i = lo; i < hi; ++i) {
          CHECK(r.values[i] == r.values[lo]);
          mn = std::min(mn, d[i]);
          mx = std::max(mx, d[i]);
        }
        if (hi < d.size()) {
          const double span = std::max<double>(mx, d[hi]) - std::min<double>(mn, d[hi]);
          CHECK(span > 2 * std::floor(e));
        }
      }
    }
  }
}
