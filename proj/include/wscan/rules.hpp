#pragma once

#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace wscan {

enum class Severity { Low, Medium, High, Critical };
std::string_view severity_name(Severity s);
Severity parse_severity(std::string_view name);

enum class CryptoRole { DeriveKey, Decrypt, Encrypt, Hash };
enum class SinkKind { HtmlWrite, Navigation };
enum class SinkForm { Call, Assign };

std::string_view role_name(CryptoRole r);
std::string_view sink_kind_name(SinkKind k);

// Anchored regular expression over dotted member paths.
class PathPattern {
 public:
  PathPattern() = default;
  explicit PathPattern(std::string source);
  const std::string& source() const { return source_; }
  bool matches(std::string_view path) const;

 private:
  std::string source_;
  std::regex re_;
};

struct CryptoPattern {
  PathPattern pattern;
  CryptoRole role = CryptoRole::Hash;
  std::vector<std::string> params;       // ordered semantic slots
  std::optional<std::string> iterations;  // slot (or option key) holding the iteration count
};

struct SinkPattern {
  PathPattern pattern;
  SinkKind kind = SinkKind::HtmlWrite;
  SinkForm form = SinkForm::Call;
  size_t arg = 0;  // tainted argument index for call sinks
};

struct SourcePattern {
  PathPattern pattern;
  bool externally_modifiable = true;
};

struct Thresholds {
  long long min_iterations = 10000;      // strictly fewer is a finding
  long long strong_iterations = 310000;  // at least this many earns a positive note
  std::string weak_cipher_mode = "(^|[^a-z0-9])cbc([^a-z0-9]|$)";  // case-insensitive search
  size_t password_max_digits = 6;        // all-digit passwords up to this length are weak
  size_t password_min_length = 6;        // anything shorter is weak
  std::vector<std::string> sensitive_pages = {"home", "wallet_unlock", "mnemonic_display"};
};

struct SeverityTable {
  Severity demonic = Severity::Critical;
  Severity redundant_plaintext = Severity::Critical;
  Severity redundant_derived = Severity::High;
  Severity clickjacking_sensitive = Severity::High;
  Severity clickjacking_other = Severity::Medium;
  Severity xss = Severity::High;
  Severity xss_under_csp = Severity::Medium;
  Severity password_policy = Severity::Medium;
  Severity defective_crypto = Severity::Medium;
};

struct ValuableFunctionDb {
  std::string version;
  std::vector<CryptoPattern> crypto;
  std::vector<SinkPattern> sinks;
  std::vector<SourcePattern> sources;
  Thresholds thresholds;
  SeverityTable severity;
};

// Throws Error(kSchemaViolation) on unknown keys, bad enums or invalid regexes.
ValuableFunctionDb load_rules(std::string_view raw_json);
ValuableFunctionDb default_rules();

}  // namespace wscan
