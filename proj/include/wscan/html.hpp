#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

// Lenient HTML tokenizer, enough to read page text and form controls.
namespace wscan::html {

struct Token {
  enum class Kind { StartTag, EndTag, Text };
  Kind kind = Kind::Text;
  std::string name;                            // lowercased tag name
  std::map<std::string, std::string> attrs;    // lowercased names, decoded values
  bool self_closing = false;
  std::string text;                            // decoded text for Text tokens
};

std::vector<Token> tokenize(std::string_view html);
std::string decode_entities(std::string_view text);

// Text carried by one element: a text run (tag = innermost open element), a textarea's
// content, or an input's value attribute.
struct TextBlock {
  std::string tag;
  std::string type;  // input type, "" for other tags
  std::string text;
};
std::vector<TextBlock> text_blocks(std::string_view html);

}  // namespace wscan::html
