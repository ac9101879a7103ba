#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace wscan {

// Page types the navigator can recognise by content.
inline constexpr const char* kPageIds[] = {
    "start", "wallet_creation_preparations", "password_setting", "mnemonic_display", "import_method_selection",
    "mnemonic_import", "wallet_setup", "home", "wallet_unlock",
};
bool is_page_id(std::string_view id);

enum class PredicateKind { InputCount, PasswordInput, Textarea, ButtonLabeled, Checkbox, InputSequence };
std::string_view predicate_name(PredicateKind k);

struct ElementPredicate {
  PredicateKind kind = PredicateKind::InputCount;
  std::optional<int> min;
  std::optional<int> max;
  std::vector<int> counts;          // input_sequence: accepted run lengths
  bool allow_textarea = false;      // input_sequence: a single text box also qualifies
  std::vector<std::string> labels;  // button_labeled: phrases, any of which may match

  std::string describe() const;
};

using Phrase = std::vector<std::string>;  // lowercased tokens

struct SemanticsEntry {
  std::string page_id;
  std::vector<std::vector<Phrase>> keyword_groups;
  std::vector<ElementPredicate> predicates;
  std::string origin;  // where the keywords come from
};

struct SemanticsDb {
  std::vector<SemanticsEntry> entries;
  const SemanticsEntry* entry(std::string_view page_id) const;
};

SemanticsDb load_semantics_db(std::string_view raw_json);
SemanticsDb default_semantics();

// Lowercased alphanumeric runs; every other character separates tokens.
std::vector<std::string> tokenize(std::string_view text);

struct PageElement {
  std::string tag;    // input, textarea, button, select, a
  std::string type;   // input type attribute (lowercased), "" otherwise
  std::string label;  // visible label, aria-label, placeholder or value
  std::string id;
  std::string text;   // textarea content / element inner text
  int count = 1;      // identical consecutive elements may be folded by producers
};

struct PageObservation {
  std::vector<std::string> visible_text;  // tokens
  std::vector<PageElement> elements;
  std::string url;
  double timestamp = 0;
};

// Builds an observation from page HTML: text outside script/style, plus interactive elements.
PageObservation observe_html(std::string_view html, std::string url = {});

struct PageClassification {
  std::string page_id = "unknown";
  std::map<int, std::string> matched_keywords;  // group index -> first phrase hit
  std::vector<std::string> matched_predicates;
  int total_hits = 0;

  bool known() const { return page_id != "unknown"; }
};

bool phrase_in(const std::vector<std::string>& tokens, const Phrase& phrase);
bool predicate_holds(const ElementPredicate& p, const std::vector<PageElement>& elements);
PageClassification classify_page(const PageObservation& obs, const SemanticsDb& db);

struct KeywordStat {
  std::string term;
  double tf = 0;
  double idf = 0;
  double tfidf = 0;
};

// Per document, the top_k terms by tf-idf (descending, ties lexicographic); tf is the raw
// count and idf = ln(N / df).
std::vector<std::vector<KeywordStat>> build_keyword_candidates(const std::vector<std::vector<std::string>>& corpus,
                                                               size_t top_k);
std::vector<std::vector<KeywordStat>> build_keyword_candidates(const std::vector<std::string>& documents, size_t top_k);

nlohmann::json to_json(const PageClassification& c);

}  // namespace wscan
