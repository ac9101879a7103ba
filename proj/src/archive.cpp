#include <zlib.h>

#include <cstdint>
#include <cstring>

#include "wscan/error.hpp"
#include "wscan/extension.hpp"

namespace wscan {

namespace {

constexpr uint32_t kLocalHeaderSig = 0x04034b50;
constexpr uint32_t kCentralHeaderSig = 0x02014b50;
constexpr uint32_t kEndOfCentralSig = 0x06054b50;
constexpr size_t kEndOfCentralSize = 22;

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedArchive, what);
}

uint16_t u16(std::string_view b, size_t at) {
  if (at + 2 > b.size()) malformed("truncated archive");
  return uint16_t(uint8_t(b[at]) | (uint8_t(b[at + 1]) << 8));
}

uint32_t u32(std::string_view b, size_t at) {
  if (at + 4 > b.size()) malformed("truncated archive");
  return uint32_t(uint8_t(b[at])) | (uint32_t(uint8_t(b[at + 1])) << 8) |
         (uint32_t(uint8_t(b[at + 2])) << 16) | (uint32_t(uint8_t(b[at + 3])) << 24);
}

void put16(std::string& out, uint16_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char(v >> 8));
}

void put32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

std::string inflate_raw(std::string_view data, size_t expected) {
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) malformed("inflate init failed");
  std::string out(expected, '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = uInt(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = uInt(out.size());
  int rc = inflate(&zs, Z_FINISH);
  size_t produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) malformed("corrupt deflate stream");
  return out;
}

std::string deflate_raw(std::string_view data) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error(ErrorCode::kWriteFailure, "deflate init failed");
  }
  std::string out(deflateBound(&zs, uLong(data.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = uInt(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = uInt(out.size());
  deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  return out;
}

}  // namespace

std::map<std::string, std::string> read_zip(std::string_view bytes) {
  if (bytes.size() < kEndOfCentralSize) malformed("archive too small");
  // The end record sits in the last 64 KiB + 22 bytes (comment length is 16-bit).
  size_t floor = bytes.size() > 0xffff + kEndOfCentralSize ? bytes.size() - 0xffff - kEndOfCentralSize : 0;
  size_t eocd = std::string_view::npos;
  for (size_t i = bytes.size() - kEndOfCentralSize + 1; i-- > floor;) {
    if (u32(bytes, i) == kEndOfCentralSig) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string_view::npos) malformed("no end-of-central-directory record");
  uint16_t entries = u16(bytes, eocd + 10);
  uint32_t dir_offset = u32(bytes, eocd + 16);
  if (dir_offset == 0xffffffffu || entries == 0xffff) malformed("zip64 archives are not supported");

  std::map<std::string, std::string> files;
  size_t at = dir_offset;
  for (uint16_t n = 0; n < entries; ++n) {
    if (u32(bytes, at) != kCentralHeaderSig) malformed("bad central directory entry");
    uint16_t flags = u16(bytes, at + 8);
    uint16_t method = u16(bytes, at + 10);
    uint32_t crc = u32(bytes, at + 16);
    uint32_t compressed = u32(bytes, at + 20);
    uint32_t size = u32(bytes, at + 24);
    uint16_t name_len = u16(bytes, at + 28);
    uint16_t extra_len = u16(bytes, at + 30);
    uint16_t comment_len = u16(bytes, at + 32);
    uint32_t local = u32(bytes, at + 42);
    if (at + 46 + name_len > bytes.size()) malformed("truncated central directory");
    std::string name(bytes.substr(at + 46, name_len));
    at += 46 + size_t(name_len) + extra_len + comment_len;

    if (flags & 0x1) malformed("encrypted entry: " + name);
    if (!name.empty() && name.back() == '/') continue;
    auto normalized = normalize_relative_path(name);
    if (!normalized) malformed("entry escapes archive root: " + name);

    if (u32(bytes, local) != kLocalHeaderSig) malformed("bad local header for " + name);
    size_t data_at = local + 30 + size_t(u16(bytes, local + 26)) + u16(bytes, local + 28);
    if (data_at + compressed > bytes.size()) malformed("truncated entry data: " + name);
    std::string_view data = bytes.substr(data_at, compressed);

    std::string content;
    if (method == 0) {
      if (compressed != size) malformed("stored entry size mismatch: " + name);
      content.assign(data);
    } else if (method == 8) {
      content = inflate_raw(data, size);
    } else {
      malformed("unsupported compression method " + std::to_string(method) + " for " + name);
    }
    uint32_t actual = uint32_t(crc32(0L, reinterpret_cast<const Bytef*>(content.data()), uInt(content.size())));
    if (actual != crc) malformed("checksum mismatch: " + name);
    files[*normalized] = std::move(content);
  }
  return files;
}

std::string_view strip_crx_header(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "Cr24") return bytes;
  uint32_t version = u32(bytes, 4);
  size_t payload = 0;
  if (version == 2) {
    if (bytes.size() < 16) malformed("truncated crx header");
    payload = 16 + size_t(u32(bytes, 8)) + u32(bytes, 12);
  } else if (version == 3) {
    payload = 12 + size_t(u32(bytes, 8));
  } else {
    malformed("unsupported crx version " + std::to_string(version));
  }
  if (payload > bytes.size()) malformed("truncated crx header");
  return bytes.substr(payload);
}

std::string write_zip(const std::map<std::string, std::string>& files) {
  std::string out;
  std::string central;
  for (const auto& [name, content] : files) {
    std::string packed = deflate_raw(content);
    uint32_t crc = uint32_t(crc32(0L, reinterpret_cast<const Bytef*>(content.data()), uInt(content.size())));
    uint32_t offset = uint32_t(out.size());

    put32(out, kLocalHeaderSig);
    put16(out, 20);
    put16(out, 0);
    put16(out, 8);
    put16(out, 0);
    put16(out, 0x21);  // 1980-01-01 keeps output byte-stable
    put32(out, crc);
    put32(out, uint32_t(packed.size()));
    put32(out, uint32_t(content.size()));
    put16(out, uint16_t(name.size()));
    put16(out, 0);
    out += name;
    out += packed;

    put32(central, kCentralHeaderSig);
    put16(central, 20);
    put16(central, 20);
    put16(central, 0);
    put16(central, 8);
    put16(central, 0);
    put16(central, 0x21);
    put32(central, crc);
    put32(central, uint32_t(packed.size()));
    put32(central, uint32_t(content.size()));
    put16(central, uint16_t(name.size()));
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put32(central, 0);
    put32(central, offset);
    central += name;
  }
  uint32_t dir_offset = uint32_t(out.size());
  out += central;
  put32(out, kEndOfCentralSig);
  put16(out, 0);
  put16(out, 0);
  put16(out, uint16_t(files.size()));
  put16(out, uint16_t(files.size()));
  put32(out, uint32_t(central.size()));
  put32(out, dir_offset);
  put16(out, 0);
  return out;
}

}  // namespace wscan
