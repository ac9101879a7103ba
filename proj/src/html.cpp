#include "wscan/html.hpp"

#include <cctype>
#include <set>

#include "wscan/encoding.hpp"

namespace wscan::html {

namespace {

const std::set<std::string> kRawText = {"script", "style", "textarea", "title", "noscript", "template"};
const std::set<std::string> kVoid = {"area", "base", "br", "col", "embed", "hr", "img", "input",
                                     "link", "meta", "source", "track", "wbr"};

void append_utf8(std::string& out, unsigned long cp) {
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':';
}

}  // namespace

std::string decode_entities(std::string_view s) {
  static const std::map<std::string, std::string> kNamed = {
      {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "}};
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    size_t semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += '&';
      continue;
    }
    std::string body(s.substr(i + 1, semi - i - 1));
    if (!body.empty() && body[0] == '#') {
      bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
      std::string digits = body.substr(hex ? 2 : 1);
      if (!digits.empty() && digits.find_first_not_of(hex ? "0123456789abcdefABCDEF" : "0123456789") ==
                                 std::string::npos) {
        append_utf8(out, std::stoul(digits, nullptr, hex ? 16 : 10));
        i = semi;
        continue;
      }
    } else if (auto it = kNamed.find(body); it != kNamed.end()) {
      out += it->second;
      i = semi;
      continue;
    }
    out += '&';
  }
  return out;
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::string text;
  auto flush = [&] {
    if (text.empty()) return;
    Token t;
    t.text = decode_entities(text);
    out.push_back(std::move(t));
    text.clear();
  };
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '<') {
      text += s[i++];
      continue;
    }
    if (s.compare(i, 4, "<!--") == 0) {
      size_t end = s.find("-->", i + 4);
      i = end == std::string_view::npos ? s.size() : end + 3;
      continue;
    }
    if (i + 1 < s.size() && (s[i + 1] == '!' || s[i + 1] == '?')) {
      size_t end = s.find('>', i);
      i = end == std::string_view::npos ? s.size() : end + 1;
      continue;
    }
    bool closing = i + 1 < s.size() && s[i + 1] == '/';
    size_t j = i + (closing ? 2 : 1);
    if (j >= s.size() || !std::isalpha(static_cast<unsigned char>(s[j]))) {
      text += s[i++];
      continue;
    }
    flush();
    Token tag;
    tag.kind = closing ? Token::Kind::EndTag : Token::Kind::StartTag;
    while (j < s.size() && name_char(s[j])) tag.name += static_cast<char>(std::tolower(static_cast<unsigned char>(s[j++])));
    // Attributes.
    while (j < s.size() && s[j] != '>') {
      if (std::isspace(static_cast<unsigned char>(s[j]))) {
        ++j;
        continue;
      }
      if (s[j] == '/') {
        tag.self_closing = true;
        ++j;
        continue;
      }
      std::string name;
      while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '=' && s[j] != '>' &&
             s[j] != '/') {
        name += static_cast<char>(std::tolower(static_cast<unsigned char>(s[j++])));
      }
      if (name.empty()) {
        ++j;
        continue;
      }
      tag.self_closing = false;
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      std::string value;
      if (j < s.size() && s[j] == '=') {
        ++j;
        while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j < s.size() && (s[j] == '"' || s[j] == '\'')) {
          char q = s[j++];
          size_t end = s.find(q, j);
          if (end == std::string_view::npos) end = s.size();
          value = std::string(s.substr(j, end - j));
          j = end + 1;
        } else {
          while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '>') value += s[j++];
        }
      }
      tag.attrs.emplace(std::move(name), decode_entities(value));
    }
    i = j < s.size() ? j + 1 : s.size();
    std::string name = tag.name;
    bool raw = tag.kind == Token::Kind::StartTag && !tag.self_closing && kRawText.count(name);
    out.push_back(std::move(tag));
    if (raw) {
      // Raw text runs to the matching end tag.
      std::string lower = encoding::to_lower(std::string(s.substr(i)));
      size_t end = lower.find("</" + name);
      std::string body(s.substr(i, end == std::string::npos ? s.size() - i : end));
      if (!body.empty()) {
        Token t;
        t.text = name == "script" || name == "style" ? body : decode_entities(body);
        out.push_back(std::move(t));
      }
      i = end == std::string::npos ? s.size() : i + end;
    }
  }
  flush();
  return out;
}

std::vector<TextBlock> text_blocks(std::string_view s) {
  std::vector<TextBlock> out;
  std::vector<std::string> open;
  for (const auto& t : tokenize(s)) {
    switch (t.kind) {
      case Token::Kind::StartTag:
        if (t.name == "input") {
          auto type = t.attrs.count("type") ? encoding::to_lower(t.attrs.at("type")) : std::string("text");
          if (auto v = t.attrs.find("value"); v != t.attrs.end() && !v->second.empty()) {
            out.push_back({"input", type, v->second});
          }
        }
        if (!t.self_closing && !kVoid.count(t.name)) open.push_back(t.name);
        break;
      case Token::Kind::EndTag:
        for (size_t k = open.size(); k-- > 0;) {
          if (open[k] == t.name) {
            open.resize(k);
            break;
          }
        }
        break;
      case Token::Kind::Text: {
        std::string tag = open.empty() ? "" : open.back();
        if (tag == "script" || tag == "style") break;
        bool blank = t.text.find_first_not_of(" \t\r\n") == std::string::npos;
        if (!blank) out.push_back({tag, "", t.text});
        break;
      }
    }
  }
  return out;
}

}  // namespace wscan::html
