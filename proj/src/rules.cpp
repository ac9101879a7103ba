#include "wscan/rules.hpp"

#include <set>

#include "resources.hpp"
#include "wscan/error.hpp"

namespace wscan {

namespace {

using nlohmann::json;

[[noreturn]] void violation(const std::string& what) {
  throw Error(ErrorCode::kSchemaViolation, "rules: " + what);
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) violation(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.contains(it.key())) violation("unknown key '" + it.key() + "' in " + where);
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) violation(where + " is missing '" + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) violation(where + "." + key + " must be a string");
  return v.get<std::string>();
}

PathPattern make_pattern(const std::string& source, const std::string& where) {
  try {
    return PathPattern(source);
  } catch (const std::regex_error& e) {
    violation(where + ": invalid pattern '" + source + "': " + e.what());
  }
}

CryptoRole parse_role(const std::string& s, const std::string& where) {
  if (s == "derive_key") return CryptoRole::DeriveKey;
  if (s == "decrypt") return CryptoRole::Decrypt;
  if (s == "encrypt") return CryptoRole::Encrypt;
  if (s == "hash") return CryptoRole::Hash;
  violation(where + ": unknown role '" + s + "'");
}

SinkKind parse_sink_kind(const std::string& s, const std::string& where) {
  if (s == "html_write") return SinkKind::HtmlWrite;
  if (s == "navigation") return SinkKind::Navigation;
  violation(where + ": unknown sink_kind '" + s + "'");
}

Severity severity_field(const json& obj, const char* key, Severity fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) violation(std::string("severity.") + key + " must be a string");
  try {
    return parse_severity(it->get<std::string>());
  } catch (const Error&) {
    violation(std::string("severity.") + key + ": unknown level '" + it->get<std::string>() + "'");
  }
}

}  // namespace

std::string_view severity_name(Severity s) {
  switch (s) {
    case Severity::Low: return "low";
    case Severity::Medium: return "medium";
    case Severity::High: return "high";
    case Severity::Critical: return "critical";
  }
  return "low";
}

Severity parse_severity(std::string_view name) {
  if (name == "low") return Severity::Low;
  if (name == "medium") return Severity::Medium;
  if (name == "high") return Severity::High;
  if (name == "critical") return Severity::Critical;
  throw Error(ErrorCode::kSchemaViolation, "unknown severity " + std::string(name));
}

std::string_view role_name(CryptoRole r) {
  switch (r) {
    case CryptoRole::DeriveKey: return "derive_key";
    case CryptoRole::Decrypt: return "decrypt";
    case CryptoRole::Encrypt: return "encrypt";
    case CryptoRole::Hash: return "hash";
  }
  return "hash";
}

std::string_view sink_kind_name(SinkKind k) {
  return k == SinkKind::HtmlWrite ? "html_write" : "navigation";
}

PathPattern::PathPattern(std::string source)
    : source_(std::move(source)), re_("^(?:" + source_ + ")$", std::regex::ECMAScript) {}

bool PathPattern::matches(std::string_view path) const {
  return std::regex_match(path.begin(), path.end(), re_);
}

ValuableFunctionDb load_rules(std::string_view raw_json) {
  json doc;
  try {
    doc = json::parse(raw_json);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidJson, std::string("rules: ") + e.what());
  }
  check_keys(doc, {"$comment", "version", "crypto", "sinks", "sources", "thresholds", "severity"}, "rules");

  ValuableFunctionDb db;
  db.version = doc.value("version", std::string());

  const json& crypto = require(doc, "crypto", "rules");
  if (!crypto.is_array()) violation("crypto must be a list");
  for (size_t i = 0; i < crypto.size(); ++i) {
    std::string where = "crypto[" + std::to_string(i) + "]";
    const json& e = crypto[i];
    check_keys(e, {"pattern", "role", "params", "iterations"}, where);
    CryptoPattern p;
    p.pattern = make_pattern(require_string(e, "pattern", where), where);
    p.role = parse_role(require_string(e, "role", where), where);
    const json& params = require(e, "params", where);
    if (!params.is_array()) violation(where + ".params must be a list");
    for (const auto& slot : params) {
      if (!slot.is_string() || slot.get<std::string>().empty()) violation(where + ".params entries must be names");
      p.params.push_back(slot.get<std::string>());
    }
    if (e.contains("iterations")) p.iterations = require_string(e, "iterations", where);
    db.crypto.push_back(std::move(p));
  }

  const json& sinks = require(doc, "sinks", "rules");
  if (!sinks.is_array()) violation("sinks must be a list");
  for (size_t i = 0; i < sinks.size(); ++i) {
    std::string where = "sinks[" + std::to_string(i) + "]";
    const json& e = sinks[i];
    check_keys(e, {"pattern", "sink_kind", "form", "arg"}, where);
    SinkPattern p;
    p.pattern = make_pattern(require_string(e, "pattern", where), where);
    p.kind = parse_sink_kind(require_string(e, "sink_kind", where), where);
    std::string form = e.value("form", std::string("call"));
    if (form == "call") {
      p.form = SinkForm::Call;
    } else if (form == "assign") {
      p.form = SinkForm::Assign;
    } else {
      violation(where + ": unknown form '" + form + "'");
    }
    if (e.contains("arg")) {
      if (!e["arg"].is_number_unsigned()) violation(where + ".arg must be a non-negative integer");
      p.arg = e["arg"].get<size_t>();
    }
    db.sinks.push_back(std::move(p));
  }

  const json& sources = require(doc, "sources", "rules");
  if (!sources.is_array()) violation("sources must be a list");
  for (size_t i = 0; i < sources.size(); ++i) {
    std::string where = "sources[" + std::to_string(i) + "]";
    const json& e = sources[i];
    check_keys(e, {"pattern", "externally_modifiable"}, where);
    SourcePattern p;
    p.pattern = make_pattern(require_string(e, "pattern", where), where);
    const json& ext = require(e, "externally_modifiable", where);
    if (!ext.is_boolean()) violation(where + ".externally_modifiable must be a boolean");
    p.externally_modifiable = ext.get<bool>();
    db.sources.push_back(std::move(p));
  }

  if (auto t = doc.find("thresholds"); t != doc.end()) {
    check_keys(*t, {"min_iterations", "strong_iterations", "weak_cipher_mode", "password_max_digits",
                    "password_min_length", "sensitive_pages"},
               "thresholds");
    Thresholds& th = db.thresholds;
    auto integer = [&](const char* key, auto& out) {
      if (!t->contains(key)) return;
      if (!(*t)[key].is_number_integer() || (*t)[key].get<long long>() < 0) {
        violation(std::string("thresholds.") + key + " must be a non-negative integer");
      }
      out = (*t)[key].get<std::decay_t<decltype(out)>>();
    };
    integer("min_iterations", th.min_iterations);
    integer("strong_iterations", th.strong_iterations);
    integer("password_max_digits", th.password_max_digits);
    integer("password_min_length", th.password_min_length);
    if (t->contains("weak_cipher_mode")) {
      th.weak_cipher_mode = require_string(*t, "weak_cipher_mode", "thresholds");
      try {
        std::regex check(th.weak_cipher_mode);
      } catch (const std::regex_error& e) {
        violation(std::string("thresholds.weak_cipher_mode: ") + e.what());
      }
    }
    if (t->contains("sensitive_pages")) {
      th.sensitive_pages.clear();
      for (const auto& p : (*t)["sensitive_pages"]) {
        if (!p.is_string()) violation("thresholds.sensitive_pages entries must be strings");
        th.sensitive_pages.push_back(p.get<std::string>());
      }
    }
  }

  if (auto s = doc.find("severity"); s != doc.end()) {
    check_keys(*s, {"demonic", "redundant_storage_plaintext", "redundant_storage_derived",
                    "clickjacking_sensitive", "clickjacking_other", "xss", "xss_under_csp",
                    "defective_password_policy", "defective_cryptography"},
               "severity");
    SeverityTable& t = db.severity;
    t.demonic = severity_field(*s, "demonic", t.demonic);
    t.redundant_plaintext = severity_field(*s, "redundant_storage_plaintext", t.redundant_plaintext);
    t.redundant_derived = severity_field(*s, "redundant_storage_derived", t.redundant_derived);
    t.clickjacking_sensitive = severity_field(*s, "clickjacking_sensitive", t.clickjacking_sensitive);
    t.clickjacking_other = severity_field(*s, "clickjacking_other", t.clickjacking_other);
    t.xss = severity_field(*s, "xss", t.xss);
    t.xss_under_csp = severity_field(*s, "xss_under_csp", t.xss_under_csp);
    t.password_policy = severity_field(*s, "defective_password_policy", t.password_policy);
    t.defective_crypto = severity_field(*s, "defective_cryptography", t.defective_crypto);
  }
  return db;
}

ValuableFunctionDb default_rules() { return load_rules(resources::rules_json()); }

}  // namespace wscan
