#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wscan/artifacts.hpp"
#include "wscan/instrumenter.hpp"
#include "wscan/semantics.hpp"
#include "wscan/webdriver.hpp"

namespace wscan {

inline const std::vector<std::string> kDefaultPasswordLadder = {"123",      "123456",   "abcdef",
                                                                "12345678", "abc12345", "Weasdxz@a142"};
// A standard English recovery-phrase test vector; never holds funds.
inline const std::vector<std::string> kTestMnemonic = {"legal",  "winner", "thank", "year",  "wave",  "sausage",
                                                       "worth",  "useful", "legal", "winner", "thank", "yellow"};

struct HarnessConfig {
  std::string webdriver_url;
  std::filesystem::path browser_profile_dir;  // empty: a fresh directory per route
  int per_page_timeout_s = 30;
  int route_timeout_s = 180;
  int poll_interval_ms = 1000;
  int probe_wait_ms = 2000;     // how long a password attempt may take to show an error
  int settle_ms = 1500;         // pause after an action before observing again
  int connect_timeout_ms = 5000;
  std::vector<std::string> password_ladder = kDefaultPasswordLadder;
  std::vector<std::string> mnemonic_words = kTestMnemonic;
  std::vector<std::string> browser_args;  // extra browser command-line switches
  std::optional<std::string> browser_binary;

  // Throws kSchemaViolation when an invariant does not hold.
  void validate() const;
};

enum class RouteId { Create, Import };
std::string_view route_name(RouteId r);

// The page sequence each route is expected to traverse.
std::vector<std::string> expected_sequence(RouteId r);

// One interactive element as reported by the inventory script.
struct UiElement {
  int idx = -1;
  std::string tag;
  std::string type;
  std::string label;
  std::string text;
  bool checked = false;
  bool disabled = false;
  std::string value;
};

class Session {
 public:
  // Starts a browser with the bundle loaded unpacked and opens `start_page` inside it.
  static std::unique_ptr<Session> open(const HarnessConfig& cfg, const InstrumentedBundle& bundle,
                                       const std::string& start_page, const std::filesystem::path& profile_dir);

  WebDriverClient& driver() { return *driver_; }
  const std::string& extension_id() const { return extension_id_; }
  const std::string& start_url() const { return start_url_; }
  const std::filesystem::path& profile_dir() const { return profile_dir_; }

 private:
  std::unique_ptr<WebDriverClient> driver_;
  std::string extension_id_;
  std::string start_url_;
  std::filesystem::path profile_dir_;
};

// True when the words form a 12-24 word recovery phrase whose checksum bits verify.
bool mnemonic_checksum_ok(const std::vector<std::string>& words, const std::vector<std::string>& wordlist);

// Picks the recovery phrase out of a run of wordlist tokens: the longest checksum-valid
// window, the latest one on ties, or the whole run when no window verifies.
std::vector<std::string> select_mnemonic(const std::vector<std::string>& run, const std::vector<std::string>& wordlist);

// Chrome's id for an unpacked extension loaded from `dir`.
std::string unpacked_extension_id(const std::filesystem::path& dir);

// Change-gated runtime monitor: storage and HTML snapshots only when their content hash
// changed, drained capture records, and profile files holding sensitive values.
class RuntimeMonitor {
 public:
  RuntimeMonitor(Session& session, RuntimeTrace& trace);

  // One poll; returns the number of events recorded.
  size_t poll();
  // Profile scan over every file modified since the route started.
  size_t final_profile_scan();
  void log(const std::string& action, nlohmann::json detail = nlohmann::json::object());
  double now() const;

 private:
  size_t scan_profile(std::filesystem::file_time_type since);
  void add(EventKind kind, nlohmann::json payload);

  Session& session_;
  RuntimeTrace& trace_;
  std::chrono::steady_clock::time_point start_;
  std::filesystem::file_time_type route_start_file_time_;
  std::filesystem::file_time_type last_scan_;
  std::string storage_hash_;
  std::string html_hash_;
  std::set<std::string> profile_hits_;
  bool agent_missing_logged_ = false;
};

// Drives one navigation route to completion or failure. Failures land in the trace.
class RouteRunner {
 public:
  RouteRunner(Session& session, RouteId route, const SemanticsDb& db, const HarnessConfig& cfg,
              const std::vector<PlanSummary>& plans, const std::vector<std::string>& wordlist);

  RuntimeTrace run();

  // Page inventory; elements are tagged in the page so they can be addressed later.
  std::vector<UiElement> inventory();
  PageObservation observe();
  PasswordProbeResult probe_password_policy();

 private:
  enum class Phase { Setup, Locking, Unlocking, ToSettings, Settings, Verified, Done };

  void act(const PageClassification& cls, const PageObservation& obs);
  void act_generic(const std::vector<UiElement>& elements, bool fill_unknown);
  bool click_labeled(const std::vector<UiElement>& elements, const std::vector<std::string>& phrases);
  bool click_advance(const std::vector<UiElement>& elements);
  void check_boxes(const std::vector<UiElement>& elements);
  void fill(const UiElement& e, const std::string& text);
  void fill_passwords(const std::vector<UiElement>& elements, const std::string& password);
  void fill_mnemonic(const std::vector<UiElement>& elements);
  void visit(const std::string& page);
  void harvest_secrets(const PageObservation& obs);
  bool shows_secret(const PageObservation& obs) const;
  std::set<std::string> error_blocks() const;
  void fail(const std::string& reason, const PageObservation& obs);
  void wait(int ms);
  void maybe_poll();

  Session& session_;
  RouteId route_;
  const SemanticsDb& db_;
  const HarnessConfig& cfg_;
  const std::vector<PlanSummary>& plans_;
  std::vector<std::string> wordlist_;
  std::set<std::string> words_;
  RuntimeTrace trace_;
  RuntimeMonitor monitor_;
  Phase phase_ = Phase::Setup;
  std::string password_;
  bool probed_ = false;
  bool terminal_ = false;
  std::chrono::steady_clock::time_point last_poll_;
  std::mt19937 rng_{20240601};
  std::map<std::string, int> clicks_;
  std::set<int> mnemonic_idx_;
  std::vector<UiElement> last_inventory_;
  std::string last_source_;
  std::string last_page_;
};

}  // namespace wscan
