#pragma once

// Minimal zip container support: writes stored (uncompressed) entries and
// reads stored or deflated entries. Enough for grasp records; not a general
// archiver (no zip64, no encryption, no multi-disk).

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "tacmod/core/error.hpp"

namespace tacmod::zip {

using Bytes = std::vector<std::uint8_t>;

namespace detail {

inline void put16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

inline std::uint16_t get16(const Bytes& in, std::size_t at) {
  require(at + 2 <= in.size(), ErrorKind::TruncatedPayload, "zip structure truncated");
  return static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
}

inline std::uint32_t get32(const Bytes& in, std::size_t at) {
  require(at + 4 <= in.size(), ErrorKind::TruncatedPayload, "zip structure truncated");
  return static_cast<std::uint32_t>(in[at]) | (static_cast<std::uint32_t>(in[at + 1]) << 8) |
         (static_cast<std::uint32_t>(in[at + 2]) << 16) | (static_cast<std::uint32_t>(in[at + 3]) << 24);
}

inline std::uint32_t crc(const Bytes& data) {
  uLong c = crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < data.size()) {
    const std::size_t chunk = std::min<std::size_t>(data.size() - off, 1u << 30);
    c = crc32(c, data.data() + off, static_cast<uInt>(chunk));
    off += chunk;
  }
  return static_cast<std::uint32_t>(c);
}

inline Bytes inflate_raw(const std::uint8_t* src, std::size_t n, std::size_t expected) {
  Bytes out(expected);
  z_stream zs{};
  require(inflateInit2(&zs, -MAX_WBITS) == Z_OK, ErrorKind::Io, "zlib init failed");
  zs.next_in = const_cast<Bytef*>(src);
  zs.avail_in = static_cast<uInt>(n);
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  require(rc == Z_STREAM_END && zs.total_out == expected, ErrorKind::TruncatedPayload, "deflate stream is corrupt");
  return out;
}

}  // namespace detail

inline Bytes build(const std::map<std::string, Bytes>& entries) {
  Bytes out;
  Bytes central;
  std::uint16_t count = 0;
  for (const auto& [name, data] : entries) {
    require(data.size() < 0xffffffffULL, ErrorKind::Io, "zip entry too large");
    const auto offset = static_cast<std::uint32_t>(out.size());
    const std::uint32_t c = detail::crc(data);
    const auto size = static_cast<std::uint32_t>(data.size());
    const auto name_len = static_cast<std::uint16_t>(name.size());

    detail::put32(out, 0x04034b50);
    detail::put16(out, 20);  // version needed
    detail::put16(out, 0);   // flags
    detail::put16(out, 0);   // stored
    detail::put16(out, 0);   // mod time
    detail::put16(out, 0x21);  // mod date 1980-01-01
    detail::put32(out, c);
    detail::put32(out, size);
    detail::put32(out, size);
    detail::put16(out, name_len);
    detail::put16(out, 0);
    out.insert(out.end(), name.begin(), name.end());
    out.insert(out.end(), data.begin(), data.end());

    detail::put32(central, 0x02014b50);
    detail::put16(central, 20);
    detail::put16(central, 20);
    detail::put16(central, 0);
    detail::put16(central, 0);
    detail::put16(central, 0);
    detail::put16(central, 0x21);
    detail::put32(central, c);
    detail::put32(central, size);
    detail::put32(central, size);
    detail::put16(central, name_len);
    detail::put16(central, 0);
    detail::put16(central, 0);
    detail::put16(central, 0);
    detail::put16(central, 0);
    detail::put32(central, 0);
    detail::put32(central, offset);
    central.insert(central.end(), name.begin(), name.end());
    ++count;
  }
  const auto central_offset = static_cast<std::uint32_t>(out.size());
  out.insert(out.end(), central.begin(), central.end());
  detail::put32(out, 0x06054b50);
  detail::put16(out, 0);
  detail::put16(out, 0);
  detail::put16(out, count);
  detail::put16(out, count);
  detail::put32(out, static_cast<std::uint32_t>(central.size()));
  detail::put32(out, central_offset);
  detail::put16(out, 0);
  return out;
}

inline std::map<std::string, Bytes> parse(const Bytes& archive) {
  require(archive.size() >= 22, ErrorKind::TruncatedPayload, "zip archive too short");
  std::size_t eocd = archive.size() - 22;
  while (true) {
    if (detail::get32(archive, eocd) == 0x06054b50) break;
    require(eocd > 0 && archive.size() - eocd < 22 + 0xffff, ErrorKind::MalformedManifest,
            "zip end-of-central-directory not found");
    --eocd;
  }
  const std::uint16_t count = detail::get16(archive, eocd + 10);
  std::size_t at = detail::get32(archive, eocd + 16);
  std::map<std::string, Bytes> entries;
  for (std::uint16_t i = 0; i < count; ++i) {
    require(detail::get32(archive, at) == 0x02014b50, ErrorKind::MalformedManifest, "bad zip central header");
    const std::uint16_t method = detail::get16(archive, at + 10);
    const std::uint32_t c = detail::get32(archive, at + 16);
    const std::uint32_t comp_size = detail::get32(archive, at + 20);
    const std::uint32_t size = detail::get32(archive, at + 24);
    const std::uint16_t name_len = detail::get16(archive, at + 28);
    const std::uint16_t extra_len = detail::get16(archive, at + 30);
    const std::uint16_t comment_len = detail::get16(archive, at + 32);
    const std::uint32_t local = detail::get32(archive, at + 42);
    require(at + 46 + name_len <= archive.size(), ErrorKind::TruncatedPayload, "zip name truncated");
    std::string name(reinterpret_cast<const char*>(archive.data() + at + 46), name_len);
    at += 46 + name_len + extra_len + comment_len;

    require(detail::get32(archive, local) == 0x04034b50, ErrorKind::MalformedManifest, "bad zip local header");
    const std::size_t data_at =
        local + 30 + detail::get16(archive, local + 26) + detail::get16(archive, local + 28);
    require(data_at + comp_size <= archive.size(), ErrorKind::TruncatedPayload, "zip entry data truncated");
    Bytes data;
    if (method == 0) {
      data.assign(archive.begin() + static_cast<std::ptrdiff_t>(data_at),
                  archive.begin() + static_cast<std::ptrdiff_t>(data_at + comp_size));
    } else if (method == 8) {
      data = detail::inflate_raw(archive.data() + data_at, comp_size, size);
    } else {
      fail(ErrorKind::MalformedManifest, "unsupported zip compression method " + std::to_string(method));
    }
    require(detail::crc(data) == c, ErrorKind::MalformedManifest, "zip entry checksum mismatch: " + name);
    entries.emplace(std::move(name), std::move(data));
  }
  return entries;
}

}  // namespace tacmod::zip
