#include <cstring>
#include <random>

#include "doctest.h"
#include "roix/codec.hpp"
#include "roix/metrics.hpp"
#include "roix/phantom.hpp"
#include "roix/pipeline.hpp"
#include "test_util.hpp"

using namespace roix;
using namespace roix::test;

namespace {

void put_u32(Bytes& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(Bytes& b, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(b, v);
}

struct Block {
  std::uint64_t raw_size;
  Bytes packed;
};

/// Hand-assembled container, independent of encode_archive.
Bytes assemble(std::uint8_t codec, std::uint8_t flags, std::uint32_t w, std::uint32_t h, std::uint32_t m,
               const std::vector<Block>& blocks) {
  Bytes b{'R', 'O', 'I', 'X', 1, flags, codec, 8};
  put_f32(b, 0.0f);
  put_u32(b, w);
  put_u32(b, h);
  put_f32(b, 255.0f);
  put_u32(b, m);
  for (const auto& blk : blocks) {
    put_u64(b, blk.raw_size);
    put_u64(b, blk.packed.size());
    b.insert(b.end(), blk.packed.begin(), blk.packed.end());
  }
  put_u32(b, crc32(b));
  return b;
}

Block geometry_block(const GeometryTable& g) {
  Bytes raw;
  for (const auto& s : g) {
    put_u32(raw, s.row);
    put_u32(raw, s.x_start);
    put_u32(raw, s.x_end);
  }
  return {raw.size(), compress_payload(raw, CodecId::deflate)};
}

void reseal(Bytes& a) {
  a.resize(a.size() - 4);
  put_u32(a, crc32(a));
}

Phantom small_phantom(std::uint32_t seed = 1) { return make_disk_phantom({.width = 64, .height = 48, .seed = seed}); }

CompressResult compress_phantom(const Phantom& p, CodecId codec, double e) {
  CompressOptions opt;
  opt.codec = codec;
  opt.quantization = {e};
  opt.background.kind = BackgroundPolicy::Kind::reference;
  opt.background.reference = p.background;
  opt.background.embed = true;
  return compress_image(p.image, opt);
}

}  // namespace

TEST_CASE("codec names and ids") {
  CHECK(parse_codec("store") == CodecId::store);
  CHECK(parse_codec("gzip") == CodecId::deflate);
  CHECK(parse_codec("deflate") == CodecId::deflate);
  CHECK(parse_codec("zstd") == CodecId::zstd);
  CHECK(codec_name(CodecId::deflate) == "gzip");
  CHECK(code_of([] { parse_codec("sz3"); }) == ErrorCode::unimplemented_codec);
  CHECK(code_of([] { parse_codec("lzma"); }) == ErrorCode::invalid_argument);
  CHECK(is_implemented(2));
  CHECK(!is_implemented(3));
}

TEST_CASE("payload roundtrips for every codec") {
  std::mt19937 rng(8);
  std::uniform_int_distribution<int> byte(0, 255);
  for (CodecId c : {CodecId::store, CodecId::deflate, CodecId::zstd}) {
    for (std::size_t n : {0u, 1u, 17u, 5000u}) {
      Bytes raw(n);
      for (auto& v : raw) v = static_cast<std::uint8_t>(byte(rng));
      const Bytes packed = compress_payload(raw, c);
      CHECK(decompress_payload(packed, c, raw.size()) == raw);
    }
  }
  const Bytes raw{1, 2, 3};
  CHECK(compress_payload(raw, CodecId::store) == raw);
}

TEST_CASE("deflate of constant bytes shrinks and is a gzip member") {
  const Bytes raw(10'000, 0x5A);
  const Bytes packed = compress_payload(raw, CodecId::deflate);
  CHECK(packed.size() < raw.size());
  REQUIRE(packed.size() > 2);
  CHECK(packed[0] == 0x1F);
  CHECK(packed[1] == 0x8B);
  CHECK(decompress_payload(packed, CodecId::deflate, raw.size()) == raw);
  CHECK(compress_payload(raw, CodecId::zstd).size() < raw.size());
}

TEST_CASE("payload errors") {
  const Bytes raw(100, 7);
  CHECK(code_of([&] { compress_payload(raw, std::uint8_t{3}); }) == ErrorCode::unimplemented_codec);
  for (CodecId c : {CodecId::store, CodecId::deflate, CodecId::zstd}) {
    Bytes packed = compress_payload(raw, c);
    CHECK(code_of([&] { decompress_payload(packed, c, 99); }) == ErrorCode::corrupt_payload);
    CHECK(code_of([&] { decompress_payload(packed, c, 101); }) == ErrorCode::corrupt_payload);
    packed.resize(packed.size() / 2);
    CHECK(code_of([&] { decompress_payload(packed, c, 100); }) == ErrorCode::corrupt_payload);
  }
  CHECK(code_of([] { decompress_payload(Bytes{1, 2, 3, 4}, CodecId::zstd, 4); }) == ErrorCode::corrupt_payload);
}

TEST_CASE("empty geometry archive") {
  RoiBundle b;
  b.width = 5;
  b.height = 4;
  const Bytes a = encode_archive(b, std::nullopt, CodecId::zstd, {0});
  const DecodedArchive d = decode_archive(a);
  CHECK(d.info.rows == 0);
  CHECK(d.info.pixel_bytes == 0);
  CHECK(d.bundle.geometry.empty());
  CHECK(d.bundle.width == 5);
  CHECK(!d.background);
  // Header, two empty blocks whose geometry payload is also empty, CRC.
  CHECK(a.size() == kHeaderSize + 2 * 16 + 4);
}

TEST_CASE("hand-assembled archive decodes to the expected bundle") {
  const GeometryTable g{{0, 1, 3}, {1, 0, 2}};
  const Bytes px{9, 8, 7, 6};
  const Bytes a = assemble(0, 0, 4, 2, 2, {geometry_block(g), {4, px}});
  const DecodedArchive d = decode_archive(a);
  CHECK(d.bundle.geometry == g);
  CHECK(d.bundle.pixels == PixelSections{{9, 8}, {7, 6}});
  CHECK(d.info.codec == CodecId::store);
}

TEST_CASE("store codec at E=0 roundtrips the bundle bitwise") {
  const Phantom p = small_phantom();
  const CompressResult r = compress_phantom(p, CodecId::store, 0);
  const DecodedArchive d = decode_archive(r.archive);
  CHECK(d.bundle == r.bundle);
  REQUIRE(d.background);
  CHECK(d.background->image == p.background.image);
}

TEST_CASE("zstd at E=5 keeps every decoded pixel within the bound") {
  const Phantom p = small_phantom(3);
  const CompressResult r = compress_phantom(p, CodecId::zstd, 5);
  const DecodedArchive d = decode_archive(r.archive);
  CHECK(d.bundle.geometry == r.bundle.geometry);
  const auto orig = r.bundle.flatten();
  const auto dec = d.bundle.flatten();
  REQUIRE(orig.size() == dec.size());
  QuantizedRun q;
  q.values = dec;
  CHECK(verify_bound(orig, q, {5}).empty());
  CHECK(d.info.e_abs == 5.0f);
}

TEST_CASE("archive error cases") {
  const Phantom p = small_phantom();
  const Bytes good = compress_phantom(p, CodecId::deflate, 1).archive;

  Bytes bad = good;
  bad[0] = 'X';
  CHECK(code_of([&] { decode_archive(bad); }) == ErrorCode::bad_magic);

  bad = good;
  bad[4] = 2;
  CHECK(code_of([&] { decode_archive(bad); }) == ErrorCode::version_mismatch);

  bad = good;
  bad[kHeaderSize + 40] ^= 0x10;
  CHECK(code_of([&] { decode_archive(bad); }) == ErrorCode::crc_mismatch);

  bad = good;
  bad.back() ^= 1;
  CHECK(code_of([&] { decode_archive(bad); }) == ErrorCode::crc_mismatch);

  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{20}, kHeaderSize + 5, good.size() - 1}) {
    const Bytes t(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(cut));
    CHECK(code_of([&] { decode_archive(t); }) == ErrorCode::truncated);
  }

  bad = good;
  bad.insert(bad.end() - 4, 0);
  reseal(bad);
  CHECK(code_of([&] { decode_archive(bad); }) == ErrorCode::inconsistent);

  bad = good;
  bad[6] = 3;
  reseal(bad);
  CHECK(code_of([&] { decode_archive(bad); }) == ErrorCode::unimplemented_codec);
  bad[6] = 16;
  reseal(bad);
  CHECK(code_of([&] { decode_archive(bad); }) == ErrorCode::malformed_header);

  bad = good;
  bad[7] = 12;
  reseal(bad);
  CHECK(code_of([&] { decode_archive(bad); }) == ErrorCode::malformed_header);

  bad = good;
  bad[5] = 0x80 | kFlagBackground;
  reseal(bad);
  CHECK(code_of([&] { decode_archive(bad); }) == ErrorCode::malformed_header);
}

TEST_CASE("pixel length disagreeing with the span total is inconsistent") {
  const GeometryTable g{{0, 0, 2}, {1, 0, 2}, {2, 1, 3}};
  const Bytes six{1, 2, 3, 4, 5, 6};
  CHECK_NOTHROW(decode_archive(assemble(0, 0, 3, 3, 3, {geometry_block(g), {6, six}})));
  const Bytes five{1, 2, 3, 4, 5};
  CHECK(code_of([&] { decode_archive(assemble(0, 0, 3, 3, 3, {geometry_block(g), {5, five}})); }) ==
        ErrorCode::inconsistent);
  // Geometry block sized for a different row count.
  CHECK(code_of([&] { decode_archive(assemble(0, 0, 3, 3, 2, {geometry_block(g), {6, six}})); }) ==
        ErrorCode::inconsistent);
  // Span outside the raster.
  const GeometryTable wide{{0, 0, 4}};
  CHECK(code_of([&] { decode_archive(assemble(0, 0, 3, 3, 1, {geometry_block(wide), {4, Bytes(4)}})); }) ==
        ErrorCode::inconsistent);
  // Store block whose packed length differs from the declared raw length.
  CHECK(code_of([&] { decode_archive(assemble(0, 0, 3, 3, 3, {geometry_block(g), {6, five}})); }) ==
        ErrorCode::corrupt_payload);
}

TEST_CASE("encode rejects unimplemented codecs and mismatched backgrounds") {
  const Phantom p = small_phantom();
  const CompressResult r = compress_phantom(p, CodecId::store, 0);
  CHECK(code_of([&] { encode_archive(r.bundle, std::nullopt, static_cast<CodecId>(3), {0}); }) ==
        ErrorCode::unimplemented_codec);
  const BackgroundModel small{GrayImage(3, 3, BitDepth::k8), BackgroundSource::reference_scan};
  CHECK(code_of([&] { encode_archive(r.bundle, small, CodecId::store, {0}); }) == ErrorCode::dimension_mismatch);
}

TEST_CASE("reconstruct_image cases") {
  const Phantom p = small_phantom();
  RoiBundle empty;
  empty.width = p.image.width();
  empty.height = p.image.height();
  CHECK(reconstruct_image(empty, p.background) == p.background.image);

  const CompressResult r = compress_phantom(p, CodecId::deflate, 0);
  const DecodedArchive d = decode_archive(r.archive);
  const GrayImage full = reconstruct_image(d.bundle, d.background);
  CHECK(full == p.image);

  const GrayImage bare = reconstruct_image(d.bundle, std::nullopt);
  const BinaryMask roi = rasterize_spans(d.bundle.geometry, d.bundle.width, d.bundle.height);
  const GrayImage sub = subtract_background(p.image, p.background);
  for (std::uint32_t y = 0; y < bare.height(); ++y) {
    for (std::uint32_t x = 0; x < bare.width(); ++x) {
      CHECK(bare.at(x, y) == (roi.at(x, y) ? sub.at(x, y) : 0));
    }
  }
}

TEST_CASE("reconstruct clamps to the source depth") {
  RoiBundle b;
  b.width = 2;
  b.height = 1;
  b.geometry = {{0, 0, 2}};
  b.pixels = {{250, 10}};
  const BackgroundModel bg{GrayImage(2, 1, BitDepth::k8, std::uint16_t{20}), BackgroundSource::reference_scan};
  CHECK(reconstruct_image(b, bg).pixels() == std::vector<std::uint16_t>{255, 30});
}

TEST_CASE("depth-16 archive carries scale and background") {
  const Phantom p = make_disk_phantom({.width = 40, .height = 40, .depth = BitDepth::k16, .seed = 2});
  const CompressResult r = compress_phantom(p, CodecId::zstd, 0);
  const DecodedArchive d = decode_archive(r.archive);
  CHECK(d.info.source_depth == BitDepth::k16);
  CHECK(d.bundle.scale.i_max == static_cast<double>(static_cast<float>(r.bundle.scale.i_max)));
  REQUIRE(d.background);
  CHECK(d.background->image == p.background.image);
  const GrayImage out = reconstruct_image(d.bundle, d.background);
  CHECK(out.depth() == BitDepth::k16);
  // Normalization to 8 bits costs at most half a step of i_max / 255 per pixel.
  const double step = r.bundle.scale.i_max / 255.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(std::abs(double(out.pixels()[i]) - double(p.image.pixels()[i])) <= step / 2 + 1);
  }
}

TEST_CASE("compression ratio and relative improvement") {
  CHECK(compression_ratio(1000, 100) == 10.0);
  CHECK(compression_ratio(77, 77) == 1.0);
  CHECK(code_of([] { compression_ratio(10, 0); }) == ErrorCode::zero_divisor);
  CHECK(relative_improvement(6.0, 3.0) == 2.0);
  CHECK(relative_improvement(4.5, 4.5) == 1.0);
  CHECK(code_of([] { relative_improvement(2.0, 0.0); }) == ErrorCode::zero_divisor);
}

TEST_CASE("crc32 check value") {
  const std::string s = "123456789";
  CHECK(crc32(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())) == 0xCBF43926u);
}
