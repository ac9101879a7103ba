#include "wscan/encoding.hpp"

#include <openssl/evp.h>

#include <array>
#include <cctype>
#include <memory>
#include <stdexcept>

#include "wscan/error.hpp"

namespace wscan {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingManifest: return "MissingManifest";
    case ErrorCode::kMalformedArchive: return "MalformedArchive";
    case ErrorCode::kUnresolvedScriptRef: return "UnresolvedScriptRef";
    case ErrorCode::kInvalidJson: return "InvalidJson";
    case ErrorCode::kUnsupportedManifestVersion: return "UnsupportedManifestVersion";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kParseUnsupported: return "ParseUnsupported";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kAlreadyInstrumented: return "AlreadyInstrumented";
    case ErrorCode::kWriteFailure: return "WriteFailure";
    case ErrorCode::kWebDriverUnreachable: return "WebDriverUnreachable";
    case ErrorCode::kWebDriverProtocol: return "WebDriverProtocol";
    case ErrorCode::kExtensionLoadFailed: return "ExtensionLoadFailed";
    case ErrorCode::kStartPageNotFound: return "StartPageNotFound";
    case ErrorCode::kSessionLost: return "SessionLost";
    case ErrorCode::kElementGone: return "ElementGone";
    case ErrorCode::kNoAdvanceControl: return "NoAdvanceControl";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kTraceFormat: return "TraceFormat";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace wscan

namespace wscan::encoding {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";
constexpr char kBase64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string digest_hex(const EVP_MD* md, std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1) {
    throw std::runtime_error("digest computation failed");
  }
  return to_hex(std::string_view(reinterpret_cast<const char*>(out.data()), len));
}

}  // namespace

std::string to_hex(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(kHexDigits[c >> 4]);
    out.push_back(kHexDigits[c & 0x0f]);
  }
  return out;
}

std::string base64_encode(std::string_view bytes, bool pad) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    uint32_t v = (uint8_t(bytes[i]) << 16) | (uint8_t(bytes[i + 1]) << 8) | uint8_t(bytes[i + 2]);
    out.push_back(kBase64Alphabet[(v >> 18) & 63]);
    out.push_back(kBase64Alphabet[(v >> 12) & 63]);
    out.push_back(kBase64Alphabet[(v >> 6) & 63]);
    out.push_back(kBase64Alphabet[v & 63]);
  }
  size_t rest = bytes.size() - i;
  if (rest == 1) {
    uint32_t v = uint8_t(bytes[i]) << 16;
    out.push_back(kBase64Alphabet[(v >> 18) & 63]);
    out.push_back(kBase64Alphabet[(v >> 12) & 63]);
    if (pad) out += "==";
  } else if (rest == 2) {
    uint32_t v = (uint8_t(bytes[i]) << 16) | (uint8_t(bytes[i + 1]) << 8);
    out.push_back(kBase64Alphabet[(v >> 18) & 63]);
    out.push_back(kBase64Alphabet[(v >> 12) & 63]);
    out.push_back(kBase64Alphabet[(v >> 6) & 63]);
    if (pad) out += "=";
  }
  return out;
}

std::string utf16le(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size() * 2);
  auto emit = [&out](uint32_t unit) {
    out.push_back(char(unit & 0xff));
    out.push_back(char((unit >> 8) & 0xff));
  };
  size_t i = 0;
  while (i < utf8.size()) {
    unsigned char lead = utf8[i];
    size_t extra = lead >= 0xf0 && lead < 0xf8 ? 3 : lead >= 0xe0 && lead < 0xf0 ? 2
                   : lead >= 0xc0 && lead < 0xe0 ? 1 : 0;
    uint32_t cp = extra == 3 ? lead & 0x07u : extra == 2 ? lead & 0x0fu : extra == 1 ? lead & 0x1fu : lead;
    bool valid = extra > 0 || lead < 0x80;
    for (size_t k = 1; k <= extra && valid; ++k) {
      if (i + k >= utf8.size() || (uint8_t(utf8[i + k]) & 0xc0) != 0x80) {
        valid = false;
      } else {
        cp = (cp << 6) | (uint8_t(utf8[i + k]) & 0x3fu);
      }
    }
    if (!valid) {
      emit(lead);
      ++i;
      continue;
    }
    if (cp >= 0x10000) {
      cp -= 0x10000;
      emit(0xd800 + (cp >> 10));
      emit(0xdc00 + (cp & 0x3ff));
    } else {
      emit(cp);
    }
    i += extra + 1;
  }
  return out;
}

std::string json_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          out += "\\u00";
          out.push_back(kHexDigits[c >> 4]);
          out.push_back(kHexDigits[c & 0x0f]);
        } else {
          out.push_back(char(c));
        }
    }
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) { return digest_hex(EVP_sha256(), bytes); }
std::string sha512_hex(std::string_view bytes) { return digest_hex(EVP_sha512(), bytes); }

std::string extension_id_from_bytes(std::string_view bytes) {
  std::string hex = sha256_hex(bytes).substr(0, 32);
  for (char& c : hex) {
    int v = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : c - 'a' + 10;
    c = char('a' + v);
  }
  return hex;
}

bool is_hex_string(std::string_view text) {
  if (text.empty()) return false;
  for (unsigned char c : text) {
    if (!std::isxdigit(c)) return false;
  }
  return true;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = char(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace wscan::encoding
