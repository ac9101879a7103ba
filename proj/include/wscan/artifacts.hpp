#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wscan/semantics.hpp"
#include "wscan/static_analyzer.hpp"

// Everything the detectors consume, in a form that round-trips through the trace file.
namespace wscan {

struct Note {
  std::string kind;  // unresolved_trace, indeterminate_iterations, strong_iterations, ...
  std::string file;
  std::string message;
};

enum class EventKind { StorageSnapshot, HtmlSnapshot, ParamCapture, ProfileScan, ActionLog };
std::string_view event_kind_name(EventKind k);
EventKind parse_event_kind(std::string_view name);

struct RuntimeEvent {
  int id = 0;
  double timestamp = 0;  // seconds since the route started
  EventKind kind = EventKind::ActionLog;
  nlohmann::json payload = nlohmann::json::object();
};

struct SensitiveCorpus {
  std::string password_used;
  std::vector<std::string> mnemonic_words;
  std::vector<std::string> private_keys_observed;
  std::vector<std::string> intermediate_crypto_values;
};

struct ProbeAttempt {
  std::string candidate;
  bool accepted = false;
  std::string signal;  // navigation | input_gone | no_error_text | error_text
};

struct PasswordProbeResult {
  std::vector<ProbeAttempt> attempts;
  std::optional<std::string> weakest_accepted;
  bool inconclusive = false;
};

struct RuntimeTrace {
  std::string extension_id;
  std::string route_id;  // create | import
  std::vector<RuntimeEvent> events;
  SensitiveCorpus sensitive_corpus;
  bool completed = false;
  std::optional<std::string> failure_reason;
  std::optional<PasswordProbeResult> password_probe;
  std::vector<std::string> pages_visited;
};

struct PlanSummary {
  std::string plan_id;
  std::string file;
  std::string role;
  std::string callee;
  std::map<std::string, std::vector<std::string>> binding_slots;
};

struct StaticStats {
  int scripts_total = 0;
  int files_parsed = 0;
  int parse_unsupported = 0;
  int normalization_skipped = 0;
};

struct StaticArtifacts {
  std::string target_path;
  std::string digest;
  std::string started_at;
  int manifest_version = 0;
  std::optional<std::string> action_page;
  std::optional<std::string> csp;
  std::vector<std::string> war_html;
  std::map<std::string, PageClassification> page_classes;
  std::vector<FunctionMatch> crypto_matches;
  std::vector<TaintTrace> taint_traces;
  std::vector<PlanSummary> plans;
  std::vector<Note> notes;
  StaticStats stats;
};

struct TraceFile {
  StaticArtifacts scan;
  std::vector<RuntimeTrace> traces;
  std::string finished_at;
};

nlohmann::json to_json(const Note& n);
Note note_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RuntimeEvent& e);
RuntimeEvent event_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PasswordProbeResult& p);
PasswordProbeResult probe_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SensitiveCorpus& c);
SensitiveCorpus corpus_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StaticArtifacts& a);
StaticArtifacts artifacts_from_json(const nlohmann::json& j);
PageClassification classification_from_json(const nlohmann::json& j);

// JSON-lines layout: one `scan` record, then per route a `trace` record followed by its
// `event` records, then an `end` record.
std::string serialize_trace_file(const TraceFile& t);
TraceFile parse_trace_file(std::string_view text);
void write_trace_file(const std::filesystem::path& path, const TraceFile& t);
TraceFile read_trace_file(const std::filesystem::path& path);

// ISO-8601 UTC timestamp of the current time, second precision.
std::string utc_now();

}  // namespace wscan
