#include <zlib.h>
#include <zstd.h>

#include <algorithm>
#include <memory>
#include <string>

#include "roix/codec.hpp"
#include "roix/error.hpp"

namespace roix {

namespace {

constexpr std::size_t kChunk = 1 << 16;
constexpr std::size_t kReserveCap = 1 << 26;

Bytes deflate_gzip(std::span<const std::uint8_t> raw) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error(ErrorCode::corrupt_payload, "deflateInit2 failed");
  }
  Bytes out(deflateBound(&zs, static_cast<uLong>(raw.size())) + 32);
  zs.next_in = const_cast<Bytef*>(raw.data());
  zs.avail_in = static_cast<uInt>(raw.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(ErrorCode::corrupt_payload, "deflate did not finish");
  out.resize(produced);
  return out;
}

Bytes inflate_gzip(std::span<const std::uint8_t> packed, std::uint64_t raw_size) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 16) != Z_OK) throw Error(ErrorCode::corrupt_payload, "inflateInit2 failed");
  std::unique_ptr<z_stream, decltype(&inflateEnd)> guard(&zs, &inflateEnd);

  Bytes out;
  out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(raw_size, kReserveCap)));
  std::uint8_t buf[kChunk];
  zs.next_in = const_cast<Bytef*>(packed.data());
  zs.avail_in = static_cast<uInt>(packed.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = buf;
    zs.avail_out = kChunk;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      throw Error(ErrorCode::corrupt_payload, std::string("gzip stream invalid: ") + (zs.msg ? zs.msg : "inflate error"));
    }
    const std::size_t got = kChunk - zs.avail_out;
    if (out.size() + got > raw_size) throw Error(ErrorCode::corrupt_payload, "gzip stream longer than declared");
    out.insert(out.end(), buf, buf + got);
    if (rc == Z_OK && got == 0 && zs.avail_in == 0) {
      throw Error(ErrorCode::corrupt_payload, "gzip stream ends prematurely");
    }
  }
  if (zs.avail_in != 0) throw Error(ErrorCode::corrupt_payload, "trailing bytes after gzip member");
  if (out.size() != raw_size) throw Error(ErrorCode::corrupt_payload, "gzip stream shorter than declared");
  return out;
}

Bytes zstd_compress(std::span<const std::uint8_t> raw) {
  Bytes out(ZSTD_compressBound(raw.size()));
  const std::size_t n = ZSTD_compress(out.data(), out.size(), raw.data(), raw.size(), ZSTD_CLEVEL_DEFAULT);
  if (ZSTD_isError(n)) throw Error(ErrorCode::corrupt_payload, ZSTD_getErrorName(n));
  out.resize(n);
  return out;
}

Bytes zstd_decompress(std::span<const std::uint8_t> packed, std::uint64_t raw_size) {
  std::unique_ptr<ZSTD_DStream, decltype(&ZSTD_freeDStream)> ds(ZSTD_createDStream(), &ZSTD_freeDStream);
  if (!ds) throw Error(ErrorCode::corrupt_payload, "cannot allocate zstd stream");
  ZSTD_initDStream(ds.get());

  Bytes out;
  out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(raw_size, kReserveCap)));
  std::uint8_t buf[kChunk];
  ZSTD_inBuffer in{packed.data(), packed.size(), 0};
  std::size_t hint = 1;
  while (hint != 0) {
    ZSTD_outBuffer ob{buf, kChunk, 0};
    hint = ZSTD_decompressStream(ds.get(), &ob, &in);
    if (ZSTD_isError(hint)) {
      throw Error(ErrorCode::corrupt_payload, std::string("zstd frame invalid: ") + ZSTD_getErrorName(hint));
    }
    if (out.size() + ob.pos > raw_size) throw Error(ErrorCode::corrupt_payload, "zstd frame longer than declared");
    out.insert(out.end(), buf, buf + ob.pos);
    if (hint != 0 && ob.pos == 0 && in.pos == in.size) {
      throw Error(ErrorCode::corrupt_payload, "zstd frame ends prematurely");
    }
  }
  if (in.pos != in.size) throw Error(ErrorCode::corrupt_payload, "trailing bytes after zstd frame");
  if (out.size() != raw_size) throw Error(ErrorCode::corrupt_payload, "zstd frame shorter than declared");
  return out;
}

}  // namespace

bool is_implemented(std::uint8_t codec_id) noexcept { return codec_id <= static_cast<std::uint8_t>(CodecId::zstd); }

std::string_view codec_name(CodecId codec) noexcept {
  switch (codec) {
    case CodecId::store: return "store";
    case CodecId::deflate: return "gzip";
    case CodecId::zstd: return "zstd";
  }
  return "unknown";
}

CodecId parse_codec(std::string_view name) {
  if (name == "store") return CodecId::store;
  if (name == "gzip" || name == "deflate") return CodecId::deflate;
  if (name == "zstd") return CodecId::zstd;
  if (name == "sz3" || name == "zfp") {
    throw Error(ErrorCode::unimplemented_codec, std::string(name) + " is reserved but not built");
  }
  throw Error(ErrorCode::invalid_argument, "unknown codec '" + std::string(name) + "'");
}

Bytes compress_payload(std::span<const std::uint8_t> raw, std::uint8_t codec_id) {
  if (!is_implemented(codec_id)) {
    throw Error(ErrorCode::unimplemented_codec, "codec id " + std::to_string(codec_id) + " has no backend");
  }
  return compress_payload(raw, static_cast<CodecId>(codec_id));
}

Bytes compress_payload(std::span<const std::uint8_t> raw, CodecId codec) {
  if (!is_implemented(static_cast<std::uint8_t>(codec))) {
    throw Error(ErrorCode::unimplemented_codec,
                "codec id " + std::to_string(static_cast<int>(codec)) + " has no backend");
  }
  // An empty stream is stored as an empty block for every backend.
  if (raw.empty()) return {};
  switch (codec) {
    case CodecId::store: return Bytes(raw.begin(), raw.end());
    case CodecId::deflate: return deflate_gzip(raw);
    case CodecId::zstd: return zstd_compress(raw);
  }
  return {};
}

Bytes decompress_payload(std::span<const std::uint8_t> packed, CodecId codec, std::uint64_t raw_size) {
  if (!is_implemented(static_cast<std::uint8_t>(codec))) {
    throw Error(ErrorCode::unimplemented_codec,
                "codec id " + std::to_string(static_cast<int>(codec)) + " has no backend");
  }
  if (packed.empty() || raw_size == 0) {
    if (packed.empty() && raw_size == 0) return {};
    throw Error(ErrorCode::corrupt_payload, "empty block with non-empty declared length");
  }
  switch (codec) {
    case CodecId::store:
      if (packed.size() != raw_size) throw Error(ErrorCode::corrupt_payload, "stored block length mismatch");
      return Bytes(packed.begin(), packed.end());
    case CodecId::deflate: return inflate_gzip(packed, raw_size);
    case CodecId::zstd: return zstd_decompress(packed, raw_size);
  }
  return {};
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = ::crc32(crc, bytes.data() + off, n);
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace roix
