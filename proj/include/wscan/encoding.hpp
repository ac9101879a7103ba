#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

// Byte-level encodings shared by the loader, the detectors and the harness.
namespace wscan::encoding {

std::string to_hex(std::string_view bytes);
std::string base64_encode(std::string_view bytes, bool pad = true);
// UTF-8 in, UTF-16LE bytes out. Invalid sequences are copied as Latin-1.
std::string utf16le(std::string_view utf8);
// Body of a JSON string literal (no surrounding quotes), JSON.stringify style.
std::string json_escape(std::string_view text);

std::string sha256_hex(std::string_view bytes);
std::string sha512_hex(std::string_view bytes);

// Chrome-style extension id: first 16 digest bytes, nibbles mapped onto 'a'..'p'.
std::string extension_id_from_bytes(std::string_view bytes);

bool is_hex_string(std::string_view text);
std::string to_lower(std::string_view text);

}  // namespace wscan::encoding
