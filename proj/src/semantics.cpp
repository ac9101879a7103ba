#include "wscan/semantics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "resources.hpp"
#include "wscan/encoding.hpp"
#include "wscan/error.hpp"
#include "wscan/html.hpp"

namespace wscan {

using nlohmann::json;

namespace {

[[noreturn]] void violation(const std::string& what) {
  throw Error(ErrorCode::kSchemaViolation, "semantics: " + what);
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) violation(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) violation("unknown key '" + it.key() + "' in " + where);
  }
}

std::optional<int> optional_count(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj[key];
  if (!v.is_number_integer() || v.get<long long>() < 0) violation(where + "." + key + " must be a non-negative integer");
  return v.get<int>();
}

Phrase phrase_of(const json& v, const std::string& where) {
  if (!v.is_string()) violation(where + " must be a string");
  Phrase p = tokenize(v.get<std::string>());
  if (p.empty()) violation(where + " has no word characters");
  return p;
}

ElementPredicate parse_predicate(const json& e, const std::string& where) {
  if (!e.is_object() || !e.contains("kind") || !e["kind"].is_string()) violation(where + " needs a kind");
  std::string kind = e["kind"].get<std::string>();
  ElementPredicate p;
  if (kind == "input_count" || kind == "password_input" || kind == "textarea" || kind == "checkbox") {
    check_keys(e, {"kind", "min", "max"}, where);
    p.kind = kind == "input_count"      ? PredicateKind::InputCount
             : kind == "password_input" ? PredicateKind::PasswordInput
             : kind == "textarea"       ? PredicateKind::Textarea
                                        : PredicateKind::Checkbox;
    p.min = optional_count(e, "min", where);
    p.max = optional_count(e, "max", where);
    if (!p.min && !p.max) violation(where + " needs min or max");
    if (p.min && p.max && *p.min > *p.max) violation(where + " has min > max");
  } else if (kind == "input_sequence") {
    check_keys(e, {"kind", "counts", "allow_textarea"}, where);
    p.kind = PredicateKind::InputSequence;
    if (!e.contains("counts") || !e["counts"].is_array() || e["counts"].empty()) violation(where + ".counts must be a nonempty list");
    for (const auto& c : e["counts"]) {
      if (!c.is_number_integer() || c.get<int>() <= 0) violation(where + ".counts entries must be positive integers");
      p.counts.push_back(c.get<int>());
    }
    if (e.contains("allow_textarea")) {
      if (!e["allow_textarea"].is_boolean()) violation(where + ".allow_textarea must be a boolean");
      p.allow_textarea = e["allow_textarea"].get<bool>();
    }
  } else if (kind == "button_labeled") {
    check_keys(e, {"kind", "labels"}, where);
    p.kind = PredicateKind::ButtonLabeled;
    if (!e.contains("labels") || !e["labels"].is_array() || e["labels"].empty()) violation(where + ".labels must be a nonempty list");
    for (const auto& l : e["labels"]) {
      phrase_of(l, where + ".labels");
      p.labels.push_back(l.get<std::string>());
    }
  } else {
    violation(where + ": unknown predicate kind '" + kind + "'");
  }
  return p;
}

bool text_input(const PageElement& e) {
  static const std::set<std::string> kTypes = {"", "text", "password", "email", "number", "tel", "search", "url"};
  return e.tag == "input" && kTypes.count(e.type);
}

bool advance_like(const PageElement& e) {
  return e.tag == "button" || e.tag == "a" || (e.tag == "input" && (e.type == "submit" || e.type == "button"));
}

int count_if(const std::vector<PageElement>& elements, bool (*pred)(const PageElement&)) {
  int n = 0;
  for (const auto& e : elements) {
    if (pred(e)) n += e.count;
  }
  return n;
}

}  // namespace

bool is_page_id(std::string_view id) {
  for (const char* p : kPageIds) {
    if (id == p) return true;
  }
  return false;
}

std::string_view predicate_name(PredicateKind k) {
  switch (k) {
    case PredicateKind::InputCount: return "input_count";
    case PredicateKind::PasswordInput: return "password_input";
    case PredicateKind::Textarea: return "textarea";
    case PredicateKind::ButtonLabeled: return "button_labeled";
    case PredicateKind::Checkbox: return "checkbox";
    case PredicateKind::InputSequence: return "input_sequence";
  }
  return "input_count";
}

std::string ElementPredicate::describe() const {
  std::string out(predicate_name(kind));
  if (min) out += " min=" + std::to_string(*min);
  if (max) out += " max=" + std::to_string(*max);
  for (size_t i = 0; i < counts.size(); ++i) out += (i ? "/" : " counts=") + std::to_string(counts[i]);
  for (size_t i = 0; i < labels.size(); ++i) out += (i ? "|" : " labels=") + labels[i];
  return out;
}

const SemanticsEntry* SemanticsDb::entry(std::string_view page_id) const {
  for (const auto& e : entries) {
    if (e.page_id == page_id) return &e;
  }
  return nullptr;
}

SemanticsDb load_semantics_db(std::string_view raw) {
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidJson, std::string("semantics: ") + e.what());
  }
  check_keys(doc, {"$comment", "version", "entries"}, "semantics");
  if (!doc.contains("entries") || !doc["entries"].is_array()) violation("entries must be a list");
  SemanticsDb db;
  std::set<std::string> seen;
  for (size_t i = 0; i < doc["entries"].size(); ++i) {
    const json& e = doc["entries"][i];
    std::string where = "entries[" + std::to_string(i) + "]";
    check_keys(e, {"page_id", "origin", "keyword_groups", "element_predicates", "$comment"}, where);
    if (!e.contains("page_id") || !e["page_id"].is_string()) violation(where + " needs a page_id");
    SemanticsEntry entry;
    entry.page_id = e["page_id"].get<std::string>();
    if (!is_page_id(entry.page_id)) violation(where + ": unknown page_id '" + entry.page_id + "'");
    if (!seen.insert(entry.page_id).second) violation(where + ": duplicate page_id '" + entry.page_id + "'");
    entry.origin = e.value("origin", std::string());
    if (!e.contains("keyword_groups") || !e["keyword_groups"].is_array() || e["keyword_groups"].empty()) {
      violation(where + " needs at least one keyword group");
    }
    for (size_t g = 0; g < e["keyword_groups"].size(); ++g) {
      const json& group = e["keyword_groups"][g];
      std::string gw = where + ".keyword_groups[" + std::to_string(g) + "]";
      if (!group.is_array() || group.empty()) violation(gw + " must be a nonempty list");
      std::vector<Phrase> phrases;
      for (const auto& p : group) phrases.push_back(phrase_of(p, gw));
      entry.keyword_groups.push_back(std::move(phrases));
    }
    if (e.contains("element_predicates")) {
      if (!e["element_predicates"].is_array()) violation(where + ".element_predicates must be a list");
      for (size_t k = 0; k < e["element_predicates"].size(); ++k) {
        entry.predicates.push_back(
            parse_predicate(e["element_predicates"][k], where + ".element_predicates[" + std::to_string(k) + "]"));
      }
    }
    db.entries.push_back(std::move(entry));
  }
  return db;
}

SemanticsDb default_semantics() { return load_semantics_db(resources::semantics_json()); }

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

PageObservation observe_html(std::string_view page, std::string url) {
  struct Open {
    std::string name;
    bool hidden;
  };
  PageObservation obs;
  obs.url = std::move(url);
  std::vector<Open> open;
  std::map<std::string, std::string> label_for;
  std::string label_target;
  std::string label_text;
  bool in_label = false;
  std::vector<size_t> collecting;  // buttons and links whose inner text is their label

  auto suppressed = [&] {
    for (const auto& o : open) {
      if (o.hidden || o.name == "script" || o.name == "style" || o.name == "template" || o.name == "noscript" ||
          o.name == "title" || o.name == "head") {
        return true;
      }
    }
    return false;
  };

  for (const auto& tok : html::tokenize(page)) {
    if (tok.kind == html::Token::Kind::Text) {
      if (!open.empty() && open.back().name == "textarea") {
        if (!obs.elements.empty() && obs.elements.back().tag == "textarea") obs.elements.back().text += tok.text;
        continue;
      }
      if (suppressed()) continue;
      auto words = tokenize(tok.text);
      obs.visible_text.insert(obs.visible_text.end(), words.begin(), words.end());
      for (size_t idx : collecting) obs.elements[idx].label += tok.text;
      if (in_label) label_text += tok.text;
      continue;
    }
    if (tok.kind == html::Token::Kind::EndTag) {
      for (size_t k = open.size(); k-- > 0;) {
        if (open[k].name == tok.name) {
          open.resize(k);
          break;
        }
      }
      if ((tok.name == "button" || tok.name == "a") && !collecting.empty()) collecting.pop_back();
      if (tok.name == "label" && in_label) {
        in_label = false;
        if (!label_target.empty()) label_for[label_target] = label_text;
      }
      continue;
    }
    const auto& a = tok.attrs;
    auto attr = [&](const char* k) { return a.count(k) ? a.at(k) : std::string(); };
    std::string style = encoding::to_lower(attr("style"));
    style.erase(std::remove(style.begin(), style.end(), ' '), style.end());
    bool hidden = a.count("hidden") || attr("aria-hidden") == "true" || style.find("display:none") != std::string::npos;
    bool is_void = tok.self_closing || tok.name == "input" || tok.name == "br" || tok.name == "img" ||
                   tok.name == "meta" || tok.name == "link" || tok.name == "hr";
    bool was_suppressed = suppressed();
    if (!is_void) open.push_back({tok.name, hidden});
    if (was_suppressed || hidden) continue;
    if (tok.name == "label") {
      in_label = true;
      label_target = attr("for");
      label_text.clear();
      continue;
    }
    PageElement el;
    el.tag = tok.name;
    el.id = attr("id");
    if (tok.name == "input") {
      el.type = a.count("type") ? encoding::to_lower(attr("type")) : "text";
      if (el.type == "hidden") continue;
      el.label = !attr("aria-label").empty() ? attr("aria-label") : attr("placeholder");
      if (el.label.empty() && (el.type == "submit" || el.type == "button")) el.label = attr("value");
      if (el.type != "password") el.text = attr("value");
      if (in_label && el.label.empty()) el.label = label_text;
    } else if (tok.name == "textarea" || tok.name == "select") {
      el.label = !attr("aria-label").empty() ? attr("aria-label") : attr("placeholder");
    } else if (tok.name == "button" || tok.name == "a") {
      el.label = attr("aria-label");
      if (!is_void) collecting.push_back(obs.elements.size());
    } else {
      continue;
    }
    if (tok.name == "input" || tok.name == "textarea") {
      // Placeholders and input captions read as page text.
      auto words = tokenize(el.label);
      obs.visible_text.insert(obs.visible_text.end(), words.begin(), words.end());
    }
    obs.elements.push_back(std::move(el));
  }
  for (auto& el : obs.elements) {
    if (el.label.empty() && !el.id.empty()) {
      if (auto it = label_for.find(el.id); it != label_for.end()) el.label = it->second;
    }
  }
  return obs;
}

bool phrase_in(const std::vector<std::string>& tokens, const Phrase& phrase) {
  if (phrase.empty() || tokens.size() < phrase.size()) return false;
  return std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end()) != tokens.end();
}

bool predicate_holds(const ElementPredicate& p, const std::vector<PageElement>& elements) {
  auto in_range = [&](int n) { return (!p.min || n >= *p.min) && (!p.max || n <= *p.max); };
  switch (p.kind) {
    case PredicateKind::InputCount:
      return in_range(count_if(elements, text_input));
    case PredicateKind::PasswordInput:
      return in_range(count_if(elements, [](const PageElement& e) { return e.tag == "input" && e.type == "password"; }));
    case PredicateKind::Textarea:
      return in_range(count_if(elements, [](const PageElement& e) { return e.tag == "textarea"; }));
    case PredicateKind::Checkbox:
      return in_range(count_if(elements, [](const PageElement& e) { return e.tag == "input" && e.type == "checkbox"; }));
    case PredicateKind::ButtonLabeled:
      for (const auto& e : elements) {
        if (!advance_like(e)) continue;
        auto words = tokenize(e.label);
        for (const auto& l : p.labels) {
          if (phrase_in(words, tokenize(l))) return true;
        }
      }
      return false;
    case PredicateKind::InputSequence: {
      if (p.allow_textarea && count_if(elements, [](const PageElement& e) { return e.tag == "textarea"; }) > 0) {
        return true;
      }
      // Maximal runs of adjacent text inputs of one type.
      size_t i = 0;
      while (i < elements.size()) {
        if (!text_input(elements[i])) {
          ++i;
          continue;
        }
        int run = 0;
        size_t j = i;
        while (j < elements.size() && text_input(elements[j]) && elements[j].type == elements[i].type) {
          run += elements[j].count;
          ++j;
        }
        if (std::find(p.counts.begin(), p.counts.end(), run) != p.counts.end()) return true;
        i = j;
      }
      return false;
    }
  }
  return false;
}

PageClassification classify_page(const PageObservation& obs, const SemanticsDb& db) {
  PageClassification best;
  for (const auto& entry : db.entries) {
    PageClassification c;
    c.page_id = entry.page_id;
    bool ok = true;
    for (size_t g = 0; g < entry.keyword_groups.size(); ++g) {
      bool group_hit = false;
      for (const auto& phrase : entry.keyword_groups[g]) {
        if (!phrase_in(obs.visible_text, phrase)) continue;
        ++c.total_hits;
        if (!group_hit) {
          std::string text;
          for (const auto& w : phrase) text += (text.empty() ? "" : " ") + w;
          c.matched_keywords[static_cast<int>(g)] = text;
          group_hit = true;
        }
      }
      ok &= group_hit;
    }
    if (!ok) continue;
    for (const auto& p : entry.predicates) {
      if (!predicate_holds(p, obs.elements)) {
        ok = false;
        break;
      }
      c.matched_predicates.push_back(p.describe());
    }
    if (!ok) continue;
    if (!best.known() || c.total_hits > best.total_hits) best = std::move(c);
  }
  return best;
}

std::vector<std::vector<KeywordStat>> build_keyword_candidates(const std::vector<std::vector<std::string>>& corpus,
                                                               size_t top_k) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "keyword mining needs at least one document");
  std::map<std::string, size_t> df;
  std::vector<std::map<std::string, size_t>> tf(corpus.size());
  for (size_t d = 0; d < corpus.size(); ++d) {
    for (const auto& t : corpus[d]) ++tf[d][t];
    for (const auto& [t, n] : tf[d]) ++df[t];
  }
  const double n_docs = static_cast<double>(corpus.size());
  std::vector<std::vector<KeywordStat>> out;
  for (size_t d = 0; d < corpus.size(); ++d) {
    std::vector<KeywordStat> stats;
    for (const auto& [t, n] : tf[d]) {
      KeywordStat s;
      s.term = t;
      s.tf = static_cast<double>(n);
      s.idf = std::log(n_docs / static_cast<double>(df[t]));
      s.tfidf = s.tf * s.idf;
      stats.push_back(std::move(s));
    }
    std::stable_sort(stats.begin(), stats.end(), [](const KeywordStat& a, const KeywordStat& b) {
      return a.tfidf != b.tfidf ? a.tfidf > b.tfidf : a.term < b.term;
    });
    if (stats.size() > top_k) stats.resize(top_k);
    out.push_back(std::move(stats));
  }
  return out;
}

std::vector<std::vector<KeywordStat>> build_keyword_candidates(const std::vector<std::string>& documents, size_t top_k) {
  std::vector<std::vector<std::string>> corpus;
  for (const auto& d : documents) corpus.push_back(tokenize(d));
  return build_keyword_candidates(corpus, top_k);
}

json to_json(const PageClassification& c) {
  json groups = json::object();
  for (const auto& [g, phrase] : c.matched_keywords) groups[std::to_string(g)] = phrase;
  return {{"page_id", c.page_id}, {"matched_keywords", groups}, {"matched_predicates", c.matched_predicates},
          {"total_hits", c.total_hits}};
}

}  // namespace wscan
