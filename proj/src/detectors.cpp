#include "wscan/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

#include "resources.hpp"
#include "wscan/encoding.hpp"
#include "wscan/html.hpp"

namespace wscan {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr size_t kExcerptCap = 256;

// Argument slots whose values are secrets (as opposed to ciphertext, salts or options).
const std::set<std::string> kSecretSlots = {"key", "password", "keyData", "baseKey", "message"};

size_t utf8_length(std::string_view s) {
  size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Window of the haystack around a match, widened to UTF-8 character boundaries.
std::string excerpt(std::string_view s, size_t pos, size_t len) {
  if (s.size() <= kExcerptCap) return std::string(s);
  size_t margin = len >= kExcerptCap ? 0 : (kExcerptCap - len) / 2;
  size_t begin = pos > margin ? pos - margin : 0;
  size_t end = std::min(s.size(), pos + len + margin);
  while (begin > 0 && (static_cast<unsigned char>(s[begin]) & 0xC0) == 0x80) --begin;
  while (end < s.size() && (static_cast<unsigned char>(s[end]) & 0xC0) == 0x80) ++end;
  return std::string(s.substr(begin, end - begin));
}

EvidenceRef span_ref(const std::string& file, const js::Span& span, std::string detail) {
  EvidenceRef e;
  e.kind = "file_span";
  e.file = file;
  e.span = span;
  e.detail = std::move(detail);
  return e;
}

EvidenceRef event_ref(int id, std::string detail) {
  EvidenceRef e;
  e.kind = "trace_event";
  e.event_id = id;
  e.detail = std::move(detail);
  return e;
}

std::string value_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

struct StorageEntry {
  std::string location;
  std::string value;
  int event_id;
};

void flatten_store(const json& node, const std::string& prefix, int event_id, std::vector<StorageEntry>& out) {
  if (node.is_object()) {
    for (const auto& [k, v] : node.items()) flatten_store(v, prefix + "/" + k, event_id, out);
  } else if (node.is_array()) {
    for (size_t i = 0; i < node.size(); ++i) flatten_store(node[i], prefix + "/" + std::to_string(i), event_id, out);
  } else {
    out.push_back({prefix, value_text(node), event_id});
  }
}

std::vector<StorageEntry> storage_entries(const RuntimeTrace& trace) {
  std::vector<StorageEntry> out;
  for (const auto& e : trace.events) {
    if (e.kind != EventKind::StorageSnapshot) continue;
    for (const char* area : {"localStorage", "sessionStorage"}) {
      if (!e.payload.contains(area) || !e.payload[area].is_object()) continue;
      for (const auto& [k, v] : e.payload[area].items()) out.push_back({std::string(area) + ":" + k, value_text(v), e.id});
    }
    if (e.payload.contains("indexedDB")) flatten_store(e.payload["indexedDB"], "indexedDB:", e.id, out);
  }
  for (auto& s : out) {
    if (s.location.rfind("indexedDB:/", 0) == 0) s.location.erase(10, 1);
  }
  return out;
}

std::optional<double> number_of(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string& s = v.get_ref<const std::string&>();
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    double d = std::strtod(s.c_str(), &end);
    if (end && *end == '\0') return d;
  }
  return std::nullopt;
}

std::vector<std::string> split_ids(const std::string& ids) {
  std::vector<std::string> out;
  std::stringstream ss(ids);
  std::string id;
  while (std::getline(ss, id, ',')) {
    if (!id.empty()) out.push_back(id);
  }
  return out;
}

std::string plan_id_of(const FunctionMatch& m) { return m.file + "#" + std::to_string(m.node_id); }

std::string format_number(double d) {
  if (d == std::floor(d) && std::fabs(d) < 1e15) return std::to_string(static_cast<long long>(d));
  std::ostringstream os;
  os << d;
  return os.str();
}

}  // namespace

std::string_view category_name(Category c) {
  switch (c) {
    case Category::Clickjacking: return "clickjacking";
    case Category::Xss: return "xss";
    case Category::DefectivePasswordPolicy: return "defective_password_policy";
    case Category::RedundantStorage: return "redundant_storage";
    case Category::Demonic: return "demonic";
    case Category::DefectiveCryptography: return "defective_cryptography";
  }
  return "xss";
}

std::string_view normalization_name(Normalization n) {
  switch (n) {
    case Normalization::Raw: return "raw";
    case Normalization::Hex: return "hex";
    case Normalization::Base64: return "base64";
    case Normalization::JsonEmbedded: return "json_embedded";
    case Normalization::Utf16: return "utf16";
  }
  return "raw";
}

std::string encode_needle(std::string_view needle, Normalization n) {
  switch (n) {
    case Normalization::Raw: return std::string(needle);
    case Normalization::Hex: return encoding::to_hex(needle);
    case Normalization::Base64: return encoding::base64_encode(needle, false);
    case Normalization::JsonEmbedded: return encoding::json_escape(needle);
    case Normalization::Utf16: return encoding::utf16le(needle);
  }
  return std::string(needle);
}

std::optional<MatchEvidence> sensitive_match(std::string_view needle, std::string_view haystack) {
  if (needle.size() < kMinNeedle) return std::nullopt;
  for (Normalization n : {Normalization::Raw, Normalization::Hex, Normalization::Base64, Normalization::JsonEmbedded,
                          Normalization::Utf16}) {
    std::string enc = encode_needle(needle, n);
    if (size_t pos = haystack.find(enc); pos != std::string_view::npos) {
      MatchEvidence m;
      m.needle = std::string(needle);
      m.normalization = n;
      m.excerpt = excerpt(haystack, pos, enc.size());
      return m;
    }
  }
  return std::nullopt;
}

void Detection::append(Detection other) {
  for (auto& f : other.findings) findings.push_back(std::move(f));
  for (auto& n : other.notes) notes.push_back(std::move(n));
}

bool password_defective(std::string_view pw, const Thresholds& t) {
  size_t len = utf8_length(pw);
  return (all_digits(pw) && len <= t.password_max_digits) || len < t.password_min_length;
}

bool iterations_defective(double iterations, const Thresholds& t) {
  return iterations < static_cast<double>(t.min_iterations);
}

bool csp_restricts_scripts(std::string_view csp) {
  std::map<std::string, std::vector<std::string>> directives;
  std::stringstream ss{std::string(csp)};
  std::string part;
  while (std::getline(ss, part, ';')) {
    std::stringstream ws(part);
    std::string name, token;
    if (!(ws >> name)) continue;
    name = encoding::to_lower(name);
    auto& sources = directives[name];
    while (ws >> token) sources.push_back(encoding::to_lower(token));
  }
  auto it = directives.find("script-src");
  if (it == directives.end()) it = directives.find("default-src");
  if (it == directives.end()) return false;
  for (const auto& src : it->second) {
    if (src == "'unsafe-inline'" || src == "'unsafe-eval'" || src == "*" || src == "http:" || src == "https:" ||
        src == "data:") {
      return false;
    }
  }
  return true;
}

Detection detect_clickjacking(const StaticArtifacts& a, const ValuableFunctionDb& db) {
  Detection d;
  const auto& sensitive = db.thresholds.sensitive_pages;
  for (const auto& path : a.war_html) {
    std::string page_id = "unknown";
    if (auto it = a.page_classes.find(path); it != a.page_classes.end()) page_id = it->second.page_id;
    bool is_action = a.action_page && *a.action_page == path;
    bool high = is_action || std::find(sensitive.begin(), sensitive.end(), page_id) != sensitive.end();
    Finding f;
    f.category = Category::Clickjacking;
    f.severity = high ? db.severity.clickjacking_sensitive : db.severity.clickjacking_other;
    f.file = path;
    EvidenceRef key;
    key.kind = "manifest_key";
    key.file = "manifest.json";
    key.detail = "web_accessible_resources exposes " + path;
    f.evidence.push_back(std::move(key));
    EvidenceRef cls;
    cls.kind = "page_class";
    cls.file = path;
    cls.detail = "page classified as " + page_id + (is_action ? " (action popup)" : "");
    f.evidence.push_back(std::move(cls));
    f.description = path + " can be framed by any web page" +
                    std::string(high ? "; it is a sensitive wallet page" : "");
    f.remediation = "Remove the page from web_accessible_resources or restrict its matches to trusted origins.";
    d.findings.push_back(std::move(f));
  }
  return d;
}

Detection detect_xss(const std::vector<TaintTrace>& traces, const std::optional<std::string>& csp,
                     const ValuableFunctionDb& db) {
  Detection d;
  bool mitigated = csp && csp_restricts_scripts(*csp);
  for (const auto& t : traces) {
    const auto& sink = t.sink;
    std::string where = sink.file + ":" + std::to_string(sink.span.start_line);
    if (!t.resolved) {
      d.notes.push_back({"unresolved_trace", sink.file,
                         "taint into " + sink.callee_path + " at " + where + " passes through values the analysis cannot follow"});
      continue;
    }
    if (!t.externally_modifiable) continue;
    Finding f;
    f.category = Category::Xss;
    f.severity = mitigated ? db.severity.xss_under_csp : db.severity.xss;
    f.file = sink.file;
    f.evidence.push_back(span_ref(sink.file, sink.span, "sink " + sink.callee_path));
    for (size_t i = 0; i < t.steps.size(); ++i) {
      EvidenceRef step;
      step.kind = "taint_step";
      step.file = sink.file;
      if (i < t.step_spans.size()) step.span = t.step_spans[i];
      step.detail = std::string(transfer_name(t.steps[i].transfer)) + ": " +
                    (i < t.step_text.size() ? t.step_text[i] : std::to_string(t.steps[i].node_id));
      f.evidence.push_back(std::move(step));
    }
    std::string source = t.step_text.empty() ? t.source.value_or("") : t.step_text.back();
    f.description = "Externally controlled " + source + " reaches " + sink.callee_path + " at " + where +
                    (mitigated ? " (script sources restricted by CSP)" : "");
    f.remediation = "Assign untrusted data with textContent or sanitize it before writing HTML.";
    d.findings.push_back(std::move(f));
  }
  return d;
}

Detection detect_password_policy(const std::optional<PasswordProbeResult>& probe, const ValuableFunctionDb& db) {
  Detection d;
  if (!probe) return d;
  if (probe->inconclusive) {
    d.notes.push_back({"probe_inconclusive", "", "password acceptance could not be determined"});
    return d;
  }
  if (!probe->weakest_accepted || !password_defective(*probe->weakest_accepted, db.thresholds)) return d;
  Finding f;
  f.category = Category::DefectivePasswordPolicy;
  f.severity = db.severity.password_policy;
  f.file = "<runtime>";
  for (const auto& a : probe->attempts) {
    EvidenceRef e;
    e.kind = "probe_attempt";
    e.detail = "\"" + a.candidate + "\" " + (a.accepted ? "accepted" : "rejected") + " (" + a.signal + ")";
    f.evidence.push_back(std::move(e));
  }
  f.description = "Wallet password \"" + *probe->weakest_accepted + "\" was accepted";
  f.remediation = "Require passwords of at least 8 characters mixing character classes.";
  d.findings.push_back(std::move(f));
  return d;
}

std::vector<std::string> intermediate_values(const RuntimeTrace& trace, const std::vector<PlanSummary>& plans) {
  std::map<std::string, const PlanSummary*> by_id;
  for (const auto& p : plans) by_id[p.plan_id] = &p;
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : trace.events) {
    if (e.kind != EventKind::ParamCapture || !e.payload.contains("bindings")) continue;
    auto ids = split_ids(e.payload.value("plan_id", std::string()));
    for (const auto& [name, v] : e.payload["bindings"].items()) {
      bool secret = false;
      for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) continue;
        auto slots = it->second->binding_slots.find(name);
        if (slots == it->second->binding_slots.end()) continue;
        for (const auto& s : slots->second) secret |= kSecretSlots.count(s) > 0;
      }
      if (!secret || !v.is_string()) continue;
      std::string value = v.get<std::string>();
      if (value.size() < 8 || all_digits(value)) continue;
      if (seen.insert(value).second) out.push_back(value);
    }
  }
  return out;
}

Detection detect_redundant_storage(const RuntimeTrace& trace, const std::vector<PlanSummary>& plans,
                                   const ValuableFunctionDb& db) {
  (void)plans;
  Detection d;
  struct Needle {
    std::string label;
    std::string value;
    bool plaintext;
  };
  const auto& c = trace.sensitive_corpus;
  std::vector<Needle> needles;
  std::set<std::string> plain;
  if (!c.password_used.empty()) {
    needles.push_back({"password", c.password_used, true});
    plain.insert(c.password_used);
  }
  if (!c.mnemonic_words.empty()) {
    std::string phrase;
    for (const auto& w : c.mnemonic_words) phrase += (phrase.empty() ? "" : " ") + w;
    needles.push_back({"mnemonic", phrase, true});
    plain.insert(phrase);
  }
  for (const auto& k : c.private_keys_observed) {
    needles.push_back({"private_key", k, true});
    plain.insert(k);
  }
  for (const auto& v : c.intermediate_crypto_values) {
    if (!plain.count(v)) needles.push_back({"intermediate_value", v, false});
  }
  if (!c.password_used.empty()) {
    // Initial password hashes, as the hex and base64 text a wallet would store.
    for (auto [label, hex] : {std::pair{"password_sha256", encoding::sha256_hex(c.password_used)},
                              std::pair{"password_sha512", encoding::sha512_hex(c.password_used)}}) {
      std::string raw;
      for (size_t i = 0; i + 1 < hex.size(); i += 2) raw += static_cast<char>(std::stoi(hex.substr(i, 2), nullptr, 16));
      needles.push_back({label, hex, false});
      needles.push_back({label, encoding::base64_encode(raw, false), false});
    }
  }

  std::set<std::pair<std::string, std::string>> reported;
  for (const auto& entry : storage_entries(trace)) {
    for (const auto& n : needles) {
      if (reported.count({n.value, entry.location})) continue;
      auto m = sensitive_match(n.value, entry.value);
      if (!m) continue;
      reported.insert({n.value, entry.location});
      m->haystack_location = entry.location;
      Finding f;
      f.category = Category::RedundantStorage;
      f.severity = n.plaintext ? db.severity.redundant_plaintext : db.severity.redundant_derived;
      f.file = entry.location;
      EvidenceRef ev;
      ev.kind = "value_match";
      ev.event_id = entry.event_id;
      ev.detail = n.label + " found (" + std::string(normalization_name(m->normalization)) + ")";
      ev.match = std::move(*m);
      f.evidence.push_back(std::move(ev));
      static const std::map<std::string, std::string> kWhat = {
          {"password", "Plaintext wallet password"},
          {"mnemonic", "Plaintext recovery phrase"},
          {"private_key", "Plaintext private key"},
          {"intermediate_value", "Captured key material"},
          {"password_sha256", "SHA-256 hash of the wallet password"},
          {"password_sha512", "SHA-512 hash of the wallet password"}};
      f.description = kWhat.at(n.label) + " stored under " + entry.location + " (" + trace.route_id + " route)";
      f.remediation = "Keep secrets only in encrypted form and never persist password-derived material.";
      d.findings.push_back(std::move(f));
    }
  }
  return d;
}

Detection detect_demonic(const RuntimeTrace& trace, const std::vector<std::string>& wordlist,
                         const ValuableFunctionDb& db) {
  Detection d;
  std::set<std::string> words(wordlist.begin(), wordlist.end());
  static const std::regex kHex64("(?:^|[^0-9a-fA-F])(?:0x)?([0-9a-fA-F]{64})(?![0-9a-fA-F])");
  auto storage = storage_entries(trace);
  std::set<std::string> reported;

  for (const auto& e : trace.events) {
    if (e.kind != EventKind::HtmlSnapshot) continue;
    std::string page = e.payload.value("html", std::string());
    for (const auto& block : html::text_blocks(page)) {
      if (block.tag == "input" && block.type == "password") continue;
      std::vector<std::string> candidates;
      auto tokens = tokenize(block.text);
      size_t run_start = 0, run = 0;
      for (size_t i = 0; i <= tokens.size(); ++i) {
        if (i < tokens.size() && words.count(tokens[i])) {
          if (run++ == 0) run_start = i;
          continue;
        }
        if (run >= 12) {
          std::string phrase;
          for (size_t k = run_start; k < run_start + run; ++k) phrase += (phrase.empty() ? "" : " ") + tokens[k];
          candidates.push_back(phrase);
        }
        run = 0;
      }
      for (std::sregex_iterator it(block.text.begin(), block.text.end(), kHex64), end; it != end; ++it) {
        candidates.push_back((*it)[1].str());
      }
      for (const auto& plaintext : candidates) {
        if (reported.count(plaintext)) continue;
        std::optional<EvidenceRef> persisted;
        for (const auto& s : storage) {
          if (auto m = sensitive_match(plaintext, s.value)) {
            m->haystack_location = s.location;
            EvidenceRef ev;
            ev.kind = "value_match";
            ev.event_id = s.event_id;
            ev.detail = "same text persisted in " + s.location;
            ev.match = std::move(*m);
            persisted = std::move(ev);
            break;
          }
        }
        if (!persisted) {
          for (const auto& p : trace.events) {
            if (p.kind != EventKind::ProfileScan || !p.payload.contains("files")) continue;
            for (const auto& file : p.payload["files"]) {
              std::string needle = encoding::to_lower(file.value("needle", std::string()));
              if (needle.empty() || needle != encoding::to_lower(plaintext)) continue;
              persisted = event_ref(p.id, "same text cached in profile file " + file.value("path", std::string()));
              break;
            }
            if (persisted) break;
          }
        }
        if (!persisted) continue;
        reported.insert(plaintext);
        Finding f;
        f.category = Category::Demonic;
        f.severity = db.severity.demonic;
        f.file = e.payload.value("url", std::string("<runtime>"));
        f.evidence.push_back(event_ref(e.id, "<" + block.tag + "> shows " +
                                                 (plaintext.size() == 64 ? "a 64-hex-digit key" : "a recovery phrase")));
        f.evidence.push_back(std::move(*persisted));
        f.description = "Secret rendered in a plain <" + block.tag + "> element was persisted by the browser (" +
                        trace.route_id + " route)";
        f.remediation = "Render secrets in password-type inputs or non-cacheable elements and clear them after use.";
        d.findings.push_back(std::move(f));
      }
    }
  }
  return d;
}

Detection detect_defective_crypto(const std::vector<FunctionMatch>& matches, const std::vector<RuntimeTrace>& traces,
                                  const std::vector<PlanSummary>& plans, const ValuableFunctionDb& db) {
  (void)plans;
  Detection d;
  const Thresholds& t = db.thresholds;
  std::regex weak_mode(t.weak_cipher_mode, std::regex::ECMAScript | std::regex::icase);
  for (const auto& m : matches) {
    if (m.kind != MatchKind::Crypto) continue;
    std::string where = m.file + ":" + std::to_string(m.span.start_line);
    if (m.role == "derive_key" && m.iterations_slot) {
      std::optional<double> iterations;
      std::string origin;
      if (auto it = m.hardcoded_params.find(*m.iterations_slot); it != m.hardcoded_params.end()) {
        iterations = number_of(it->second.value);
        origin = "literal " + it->second.raw;
      }
      if (!iterations) {
        auto sym = m.symbolic_params.find(*m.iterations_slot);
        std::string id = plan_id_of(m);
        for (const auto& tr : traces) {
          for (const auto& e : tr.events) {
            if (iterations || e.kind != EventKind::ParamCapture || sym == m.symbolic_params.end()) continue;
            auto ids = split_ids(e.payload.value("plan_id", std::string()));
            if (std::find(ids.begin(), ids.end(), id) == ids.end()) continue;
            const json& b = e.payload.value("bindings", json::object());
            if (b.contains(sym->second)) {
              if ((iterations = number_of(b[sym->second]))) origin = "runtime capture #" + std::to_string(e.id);
            }
          }
        }
      }
      if (!iterations) {
        d.notes.push_back({"indeterminate_iterations", m.file, m.callee_path + " at " + where + ": iteration count unknown"});
      } else if (iterations_defective(*iterations, t)) {
        Finding f;
        f.category = Category::DefectiveCryptography;
        f.severity = db.severity.defective_crypto;
        f.file = m.file;
        f.evidence.push_back(span_ref(m.file, m.span, m.callee_path + " iterations=" + format_number(*iterations) +
                                                          " (" + origin + ")"));
        f.description = m.callee_path + " at " + where + " uses " + format_number(*iterations) +
                        " iterations, below " + std::to_string(t.min_iterations);
        f.remediation = "Use at least " + std::to_string(t.strong_iterations) + " PBKDF2-SHA256 iterations.";
        d.findings.push_back(std::move(f));
      } else if (*iterations >= static_cast<double>(t.strong_iterations)) {
        d.notes.push_back({"strong_iterations", m.file,
                           m.callee_path + " at " + where + " uses " + format_number(*iterations) + " iterations"});
      }
    }
    for (const auto& [slot, c] : m.hardcoded_params) {
      if (!c.value.is_string()) continue;
      const std::string& v = c.value.get_ref<const std::string&>();
      if (!std::regex_search(v, weak_mode)) continue;
      Finding f;
      f.category = Category::DefectiveCryptography;
      f.severity = db.severity.defective_crypto;
      f.file = m.file;
      f.evidence.push_back(span_ref(m.file, m.span, m.callee_path + " " + slot + "=" + c.raw));
      f.description = m.callee_path + " at " + where + " uses CBC mode (" + c.raw + ")";
      f.remediation = "Use an authenticated mode such as AES-GCM.";
      d.findings.push_back(std::move(f));
      break;
    }
  }
  return d;
}

void sort_findings(std::vector<Finding>& findings) {
  std::stable_sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
    if (a.severity != b.severity) return a.severity > b.severity;
    if (a.category != b.category) return category_name(a.category) < category_name(b.category);
    if (a.file != b.file) return a.file < b.file;
    return a.description < b.description;
  });
}

Detection run_detectors(const TraceFile& input, const ValuableFunctionDb& db, const std::vector<std::string>& wordlist) {
  Detection all;
  const StaticArtifacts& s = input.scan;
  all.notes = s.notes;
  all.append(detect_clickjacking(s, db));
  all.append(detect_xss(s.taint_traces, s.csp, db));
  all.append(detect_defective_crypto(s.crypto_matches, input.traces, s.plans, db));
  for (const auto& tr : input.traces) {
    if (!tr.completed) {
      all.notes.push_back({"route_failed", "", tr.route_id + " route incomplete: " + tr.failure_reason.value_or("unknown")});
    }
    all.append(detect_password_policy(tr.password_probe, db));
    all.append(detect_redundant_storage(tr, s.plans, db));
    all.append(detect_demonic(tr, wordlist, db));
  }
  // The same defect seen on both routes is reported once.
  std::vector<Finding> unique;
  std::set<std::string> keys;
  for (auto& f : all.findings) {
    std::string key = std::string(category_name(f.category)) + "\x1f" + f.file + "\x1f";
    std::string desc = f.description;
    for (const char* suffix : {" (create route)", " (import route)"}) {
      if (auto pos = desc.find(suffix); pos != std::string::npos) desc.erase(pos);
    }
    key += desc;
    if (keys.insert(key).second) unique.push_back(std::move(f));
  }
  all.findings = std::move(unique);
  sort_findings(all.findings);
  return all;
}

ordered_json to_json(const MatchEvidence& m) {
  return ordered_json{{"needle", m.needle},
                      {"haystack_location", m.haystack_location},
                      {"normalization", normalization_name(m.normalization)},
                      {"excerpt", m.excerpt}};
}

ordered_json to_json(const Finding& f) {
  ordered_json evidence = ordered_json::array();
  for (const auto& e : f.evidence) {
    ordered_json j;
    j["kind"] = e.kind;
    if (!e.file.empty()) j["file"] = e.file;
    if (e.span) {
      j["span"] = {{"start_line", e.span->start_line}, {"start_col", e.span->start_col},
                   {"end_line", e.span->end_line}, {"end_col", e.span->end_col}};
    }
    if (e.event_id) j["event_id"] = *e.event_id;
    if (e.match) j["match"] = to_json(*e.match);
    j["detail"] = e.detail;
    evidence.push_back(std::move(j));
  }
  ordered_json j;
  j["category"] = category_name(f.category);
  j["severity"] = severity_name(f.severity);
  j["file"] = f.file;
  std::optional<int> line;
  for (const auto& e : f.evidence) {
    if (e.span && !line) line = e.span->start_line;
  }
  j["line"] = line ? ordered_json(*line) : ordered_json(nullptr);
  j["description"] = f.description;
  j["remediation"] = f.remediation;
  j["evidence"] = std::move(evidence);
  return j;
}

std::vector<std::string> bip39_wordlist() {
  std::vector<std::string> out;
  std::stringstream ss{std::string(resources::bip39_english())};
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

}  // namespace wscan
