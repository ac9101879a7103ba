#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wscan/artifacts.hpp"
#include "wscan/rules.hpp"

namespace wscan {

enum class Category { Clickjacking, Xss, DefectivePasswordPolicy, RedundantStorage, Demonic, DefectiveCryptography };
std::string_view category_name(Category c);

enum class Normalization { Raw, Hex, Base64, JsonEmbedded, Utf16 };
std::string_view normalization_name(Normalization n);

// Encoded form of a needle under one normalization: lowercase hex, unpadded standard
// base64, JSON string-body escaping, UTF-16LE bytes.
std::string encode_needle(std::string_view needle, Normalization n);

struct MatchEvidence {
  std::string needle;
  std::string haystack_location;
  Normalization normalization = Normalization::Raw;
  std::string excerpt;  // the haystack entry, or a window of it around the match
};

inline constexpr size_t kMinNeedle = 4;

// First normalization, in declaration order, whose encoding of `needle` occurs in `haystack`.
std::optional<MatchEvidence> sensitive_match(std::string_view needle, std::string_view haystack);

struct EvidenceRef {
  std::string kind;  // file_span | manifest_key | trace_event | taint_step | value_match | probe_attempt
  std::string file;
  std::optional<js::Span> span;
  std::optional<int> event_id;
  std::optional<MatchEvidence> match;
  std::string detail;
};

struct Finding {
  Category category = Category::Clickjacking;
  Severity severity = Severity::Low;
  std::string file;
  std::vector<EvidenceRef> evidence;
  std::string description;
  std::string remediation;
};

struct Detection {
  std::vector<Finding> findings;
  std::vector<Note> notes;

  void append(Detection other);
};

Detection detect_clickjacking(const StaticArtifacts& a, const ValuableFunctionDb& db);
Detection detect_xss(const std::vector<TaintTrace>& traces, const std::optional<std::string>& csp,
                     const ValuableFunctionDb& db);
Detection detect_password_policy(const std::optional<PasswordProbeResult>& probe, const ValuableFunctionDb& db);
Detection detect_redundant_storage(const RuntimeTrace& trace, const std::vector<PlanSummary>& plans,
                                   const ValuableFunctionDb& db);
Detection detect_demonic(const RuntimeTrace& trace, const std::vector<std::string>& wordlist,
                         const ValuableFunctionDb& db);
Detection detect_defective_crypto(const std::vector<FunctionMatch>& matches, const std::vector<RuntimeTrace>& traces,
                                  const std::vector<PlanSummary>& plans, const ValuableFunctionDb& db);

// True when a CSP string limits script sources (script-src, or default-src without
// script-src) to sources excluding 'unsafe-inline', 'unsafe-eval' and wildcards.
bool csp_restricts_scripts(std::string_view csp);

// Rule helpers, exposed for boundary tests.
bool password_defective(std::string_view weakest_accepted, const Thresholds& t);
bool iterations_defective(double iterations, const Thresholds& t);

// Values captured at runtime that count as intermediate key material: strings of at
// least 8 characters that are not purely numeric, bound to secret-bearing slots.
std::vector<std::string> intermediate_values(const RuntimeTrace& trace, const std::vector<PlanSummary>& plans);

// Static-only detectors, then, per runtime trace, the dynamic ones. Findings are sorted
// by severity (descending), category and file; duplicates across routes are merged.
Detection run_detectors(const TraceFile& input, const ValuableFunctionDb& db, const std::vector<std::string>& wordlist);

void sort_findings(std::vector<Finding>& findings);

nlohmann::ordered_json to_json(const Finding& f);
nlohmann::ordered_json to_json(const MatchEvidence& m);

std::vector<std::string> bip39_wordlist();

}  // namespace wscan
