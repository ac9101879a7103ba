#include "wscan/artifacts.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "wscan/error.hpp"

namespace wscan {

using nlohmann::json;

namespace {

[[noreturn]] void bad_trace(const std::string& what) { throw Error(ErrorCode::kTraceFormat, "trace: " + what); }

json opt(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

}  // namespace

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::StorageSnapshot: return "storage_snapshot";
    case EventKind::HtmlSnapshot: return "html_snapshot";
    case EventKind::ParamCapture: return "param_capture";
    case EventKind::ProfileScan: return "profile_scan";
    case EventKind::ActionLog: return "action_log";
  }
  return "action_log";
}

EventKind parse_event_kind(std::string_view name) {
  for (EventKind k : {EventKind::StorageSnapshot, EventKind::HtmlSnapshot, EventKind::ParamCapture,
                      EventKind::ProfileScan, EventKind::ActionLog}) {
    if (event_kind_name(k) == name) return k;
  }
  bad_trace("unknown event kind '" + std::string(name) + "'");
}

json to_json(const Note& n) { return {{"kind", n.kind}, {"file", n.file}, {"message", n.message}}; }

Note note_from_json(const json& j) {
  return {j.at("kind").get<std::string>(), j.value("file", std::string()), j.at("message").get<std::string>()};
}

json to_json(const RuntimeEvent& e) {
  return {{"id", e.id}, {"timestamp", e.timestamp}, {"kind", event_kind_name(e.kind)}, {"payload", e.payload}};
}

RuntimeEvent event_from_json(const json& j) {
  RuntimeEvent e;
  e.id = j.at("id").get<int>();
  e.timestamp = j.at("timestamp").get<double>();
  e.kind = parse_event_kind(j.at("kind").get<std::string>());
  e.payload = j.at("payload");
  return e;
}

json to_json(const PasswordProbeResult& p) {
  json attempts = json::array();
  for (const auto& a : p.attempts) {
    attempts.push_back({{"candidate", a.candidate}, {"accepted", a.accepted}, {"signal", a.signal}});
  }
  return {{"attempts", attempts}, {"weakest_accepted", opt(p.weakest_accepted)}, {"inconclusive", p.inconclusive}};
}

PasswordProbeResult probe_from_json(const json& j) {
  PasswordProbeResult p;
  for (const auto& a : j.at("attempts")) {
    p.attempts.push_back({a.at("candidate").get<std::string>(), a.at("accepted").get<bool>(),
                          a.value("signal", std::string())});
  }
  p.weakest_accepted = opt_string(j, "weakest_accepted");
  p.inconclusive = j.value("inconclusive", false);
  return p;
}

json to_json(const SensitiveCorpus& c) {
  return {{"password_used", c.password_used},
          {"mnemonic_words", c.mnemonic_words},
          {"private_keys_observed", c.private_keys_observed},
          {"intermediate_crypto_values", c.intermediate_crypto_values}};
}

SensitiveCorpus corpus_from_json(const json& j) {
  SensitiveCorpus c;
  c.password_used = j.value("password_used", std::string());
  c.mnemonic_words = j.value("mnemonic_words", std::vector<std::string>{});
  c.private_keys_observed = j.value("private_keys_observed", std::vector<std::string>{});
  c.intermediate_crypto_values = j.value("intermediate_crypto_values", std::vector<std::string>{});
  return c;
}

PageClassification classification_from_json(const json& j) {
  PageClassification c;
  c.page_id = j.at("page_id").get<std::string>();
  json keywords = j.value("matched_keywords", json::object());
  for (const auto& [g, phrase] : keywords.items()) {
    c.matched_keywords[std::stoi(g)] = phrase.get<std::string>();
  }
  c.matched_predicates = j.value("matched_predicates", std::vector<std::string>{});
  c.total_hits = j.value("total_hits", 0);
  return c;
}

json to_json(const StaticArtifacts& a) {
  json pages = json::object();
  for (const auto& [path, c] : a.page_classes) pages[path] = to_json(c);
  json matches = json::array();
  for (const auto& m : a.crypto_matches) matches.push_back(to_json(m));
  json traces = json::array();
  for (const auto& t : a.taint_traces) traces.push_back(to_json(t));
  json plans = json::array();
  for (const auto& p : a.plans) {
    plans.push_back({{"plan_id", p.plan_id}, {"file", p.file}, {"role", p.role}, {"callee", p.callee},
                     {"binding_slots", p.binding_slots}});
  }
  json notes = json::array();
  for (const auto& n : a.notes) notes.push_back(to_json(n));
  return {{"target_path", a.target_path},
          {"digest", a.digest},
          {"started_at", a.started_at},
          {"manifest_version", a.manifest_version},
          {"action_page", opt(a.action_page)},
          {"csp", opt(a.csp)},
          {"war_html", a.war_html},
          {"page_classes", pages},
          {"crypto_matches", matches},
          {"taint_traces", traces},
          {"plans", plans},
          {"notes", notes},
          {"stats",
           {{"scripts_total", a.stats.scripts_total},
            {"files_parsed", a.stats.files_parsed},
            {"parse_unsupported", a.stats.parse_unsupported},
            {"normalization_skipped", a.stats.normalization_skipped}}}};
}

StaticArtifacts artifacts_from_json(const json& j) {
  StaticArtifacts a;
  a.target_path = j.at("target_path").get<std::string>();
  a.digest = j.at("digest").get<std::string>();
  a.started_at = j.value("started_at", std::string());
  a.manifest_version = j.value("manifest_version", 0);
  a.action_page = opt_string(j, "action_page");
  a.csp = opt_string(j, "csp");
  a.war_html = j.value("war_html", std::vector<std::string>{});
  json pages = j.value("page_classes", json::object());
  for (const auto& [path, c] : pages.items()) {
    a.page_classes[path] = classification_from_json(c);
  }
  for (const auto& m : j.value("crypto_matches", json::array())) a.crypto_matches.push_back(match_from_json(m));
  for (const auto& t : j.value("taint_traces", json::array())) a.taint_traces.push_back(trace_from_json(t));
  for (const auto& p : j.value("plans", json::array())) {
    a.plans.push_back({p.at("plan_id").get<std::string>(), p.value("file", std::string()), p.value("role", std::string()),
                       p.value("callee", std::string()),
                       p.value("binding_slots", std::map<std::string, std::vector<std::string>>{})});
  }
  for (const auto& n : j.value("notes", json::array())) a.notes.push_back(note_from_json(n));
  if (j.contains("stats")) {
    const json& s = j["stats"];
    a.stats.scripts_total = s.value("scripts_total", 0);
    a.stats.files_parsed = s.value("files_parsed", 0);
    a.stats.parse_unsupported = s.value("parse_unsupported", 0);
    a.stats.normalization_skipped = s.value("normalization_skipped", 0);
  }
  return a;
}

std::string serialize_trace_file(const TraceFile& t) {
  std::string out;
  json scan = to_json(t.scan);
  scan["record"] = "scan";
  scan["format"] = 1;
  out += scan.dump() + "\n";
  for (const auto& tr : t.traces) {
    json head = {{"record", "trace"},
                 {"route_id", tr.route_id},
                 {"extension_id", tr.extension_id},
                 {"completed", tr.completed},
                 {"failure_reason", opt(tr.failure_reason)},
                 {"sensitive_corpus", to_json(tr.sensitive_corpus)},
                 {"password_probe", tr.password_probe ? to_json(*tr.password_probe) : json(nullptr)},
                 {"pages_visited", tr.pages_visited},
                 {"event_count", tr.events.size()}};
    out += head.dump() + "\n";
    for (const auto& e : tr.events) {
      json ev = to_json(e);
      ev["record"] = "event";
      ev["route_id"] = tr.route_id;
      out += ev.dump() + "\n";
    }
  }
  out += json{{"record", "end"}, {"finished_at", t.finished_at}}.dump() + "\n";
  return out;
}

TraceFile parse_trace_file(std::string_view text) {
  TraceFile t;
  bool have_scan = false;
  bool have_end = false;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (have_end) bad_trace("content after the end record at line " + std::to_string(lineno));
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      bad_trace("line " + std::to_string(lineno) + " is not JSON: " + e.what());
    }
    std::string record = j.value("record", std::string());
    try {
      if (record == "scan") {
        if (have_scan) bad_trace("duplicate scan record");
        t.scan = artifacts_from_json(j);
        have_scan = true;
      } else if (record == "trace") {
        if (!have_scan) bad_trace("trace record before scan record");
        RuntimeTrace tr;
        tr.route_id = j.at("route_id").get<std::string>();
        tr.extension_id = j.value("extension_id", std::string());
        tr.completed = j.at("completed").get<bool>();
        tr.failure_reason = opt_string(j, "failure_reason");
        tr.sensitive_corpus = corpus_from_json(j.at("sensitive_corpus"));
        if (j.contains("password_probe") && !j["password_probe"].is_null()) {
          tr.password_probe = probe_from_json(j["password_probe"]);
        }
        tr.pages_visited = j.value("pages_visited", std::vector<std::string>{});
        t.traces.push_back(std::move(tr));
      } else if (record == "event") {
        if (t.traces.empty() || j.at("route_id").get<std::string>() != t.traces.back().route_id) {
          bad_trace("event at line " + std::to_string(lineno) + " does not follow its trace record");
        }
        RuntimeEvent e = event_from_json(j);
        auto& events = t.traces.back().events;
        if (!events.empty() && e.timestamp < events.back().timestamp) {
          bad_trace("event timestamps decrease at line " + std::to_string(lineno));
        }
        events.push_back(std::move(e));
      } else if (record == "end") {
        t.finished_at = j.value("finished_at", std::string());
        have_end = true;
      } else {
        bad_trace("unknown record type '" + record + "' at line " + std::to_string(lineno));
      }
    } catch (const json::exception& e) {
      bad_trace("malformed " + record + " record at line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_scan) bad_trace("missing scan record");
  return t;
}

void write_trace_file(const std::filesystem::path& path, const TraceFile& t) {
  std::ofstream out(path, std::ios::binary);
  out << serialize_trace_file(t);
  if (!out) throw Error(ErrorCode::kIo, "cannot write trace " + path.string());
}

TraceFile read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read trace " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trace_file(ss.str());
}

std::string utc_now() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace wscan
