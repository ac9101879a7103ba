#include "wscan/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "wscan/detectors.hpp"
#include "wscan/encoding.hpp"
#include "wscan/error.hpp"
#include "wscan/html.hpp"

namespace wscan {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Scripts carry a leading tag comment so a test double can tell them apart.
constexpr const char* kInventoryScript = R"JS(/*wr:inventory*/
var out = [];
var nodes = document.querySelectorAll('input, textarea, button, select, a, [role="button"]');
var n = 0;
for (var i = 0; i < nodes.length; i++) {
  var el = nodes[i];
  var r = el.getBoundingClientRect();
  var st = window.getComputedStyle(el);
  el.removeAttribute('data-wr-idx');
  if (el.type === 'hidden' || st.display === 'none' || st.visibility === 'hidden' || (r.width === 0 && r.height === 0)) continue;
  el.setAttribute('data-wr-idx', String(n));
  var tag = el.tagName.toLowerCase();
  var label = el.getAttribute('aria-label') || el.getAttribute('placeholder') || '';
  if (!label && el.id) { var l = document.querySelector('label[for="' + el.id + '"]'); if (l) label = l.textContent; }
  if (!label && (tag === 'button' || tag === 'a' || el.getAttribute('role') === 'button')) label = el.textContent;
  if (!label && tag === 'input' && (el.type === 'submit' || el.type === 'button')) label = el.value;
  if (!label && el.closest) { var p = el.closest('label'); if (p) label = p.textContent; }
  out.push({idx: n, tag: tag, type: tag === 'input' ? (el.getAttribute('type') || 'text').toLowerCase() : '',
            label: String(label || '').trim().slice(0, 200), text: tag === 'textarea' ? String(el.value || '') : '',
            checked: !!el.checked, disabled: !!el.disabled, value: tag === 'input' ? String(el.value || '') : ''});
  n++;
}
return out;)JS";

constexpr const char* kSnapshotScript = R"JS(/*wr:snapshot*/
var done = arguments[arguments.length - 1];
if (typeof __wr_snapshot !== 'function') { done(null); return; }
Promise.resolve(__wr_snapshot()).then(function (s) { done(s); }, function (e) { done({__wr_error: String(e)}); });)JS";

constexpr const char* kDrainScript = R"JS(/*wr:drain*/
return typeof __wr_drain === 'function' ? __wr_drain() : null;)JS";

constexpr size_t kProfileFileCap = 32u << 20;

const std::regex& error_pattern() {
  static const std::regex re(
      "(at least|too short|too weak|too simple|must (contain|include|be|have)|invalid|not match|don't match|"
      "do not match|weak password|is required|minimum|not strong|requirements?)",
      std::regex::icase);
  return re;
}

std::vector<std::string> phrases(std::initializer_list<const char*> list) { return {list.begin(), list.end()}; }

const std::vector<std::string> kAdvance = phrases({"next", "continue", "confirm", "i agree", "agree", "accept",
                                                   "ok", "got it", "done", "submit", "create", "import", "unlock",
                                                   "save", "proceed", "finish", "get started", "start", "skip"});

bool is_text_input(const UiElement& e) {
  return e.tag == "input" && (e.type.empty() || e.type == "text" || e.type == "search" || e.type == "email" ||
                              e.type == "tel" || e.type == "url");
}

bool is_clickable(const UiElement& e) {
  return e.tag == "button" || e.tag == "a" || (e.tag == "input" && (e.type == "submit" || e.type == "button")) ||
         (e.tag != "input" && e.tag != "textarea" && e.tag != "select");
}

double round_ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void HarnessConfig::validate() const {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::kSchemaViolation, "harness config: " + why); };
  if (poll_interval_ms < 250) bad("poll_interval_ms must be at least 250");
  if (per_page_timeout_s <= 0 || route_timeout_s <= 0) bad("timeouts must be positive");
  if (password_ladder.empty()) bad("password ladder is empty");
  size_t n = mnemonic_words.size();
  if (n != 12 && n != 15 && n != 18 && n != 21 && n != 24) bad("mnemonic must have 12-24 words");
}

std::string_view route_name(RouteId r) { return r == RouteId::Create ? "create" : "import"; }

std::vector<std::string> expected_sequence(RouteId r) {
  if (r == RouteId::Create) return {"start", "wallet_creation_preparations", "password_setting", "mnemonic_display"};
  return {"start",         "import_method_selection", "mnemonic_import", "password_setting",
          "home",          "wallet_unlock",           "wallet_setting",  "password_verification",
          "wallet_backup"};
}

bool mnemonic_checksum_ok(const std::vector<std::string>& words, const std::vector<std::string>& wordlist) {
  size_t n = words.size();
  if (n < 12 || n > 24 || n % 3 != 0) return false;
  std::vector<bool> bits;
  for (const auto& w : words) {
    auto it = std::find(wordlist.begin(), wordlist.end(), w);
    if (it == wordlist.end()) return false;
    size_t index = static_cast<size_t>(it - wordlist.begin());
    for (int b = 10; b >= 0; --b) bits.push_back((index >> b) & 1);
  }
  size_t checksum_bits = n / 3;
  size_t entropy_bits = bits.size() - checksum_bits;
  std::string entropy(entropy_bits / 8, '\0');
  for (size_t i = 0; i < entropy_bits; ++i) {
    if (bits[i]) entropy[i / 8] = static_cast<char>(entropy[i / 8] | (0x80 >> (i % 8)));
  }
  unsigned first = static_cast<unsigned>(std::stoul(encoding::sha256_hex(entropy).substr(0, 2), nullptr, 16));
  for (size_t i = 0; i < checksum_bits; ++i) {
    if (bool((first >> (7 - i)) & 1) != bits[entropy_bits + i]) return false;
  }
  return true;
}

std::vector<std::string> select_mnemonic(const std::vector<std::string>& run, const std::vector<std::string>& wordlist) {
  for (size_t len : {24, 21, 18, 15, 12}) {
    if (len > run.size()) continue;
    for (size_t start = run.size() - len + 1; start-- > 0;) {
      std::vector<std::string> window(run.begin() + static_cast<long>(start), run.begin() + static_cast<long>(start + len));
      if (mnemonic_checksum_ok(window, wordlist)) return window;
    }
  }
  return run;
}

std::string unpacked_extension_id(const fs::path& dir) {
  return encoding::extension_id_from_bytes(fs::absolute(dir).lexically_normal().string());
}

std::unique_ptr<Session> Session::open(const HarnessConfig& cfg, const InstrumentedBundle& bundle,
                                       const std::string& start_page, const fs::path& profile_dir) {
  cfg.validate();
  if (cfg.webdriver_url.empty()) {
    throw Error(ErrorCode::kWebDriverUnreachable, "no WebDriver endpoint (use --webdriver-url or WR_WEBDRIVER_URL)");
  }
  auto s = std::unique_ptr<Session>(new Session());
  s->driver_ = std::make_unique<WebDriverClient>(cfg.webdriver_url, std::chrono::milliseconds(cfg.connect_timeout_ms));
  s->profile_dir_ = profile_dir;
  std::string ext = fs::absolute(bundle.out_path).lexically_normal().string();
  json args = {"--load-extension=" + ext, "--disable-extensions-except=" + ext,
               "--user-data-dir=" + fs::absolute(profile_dir).string(), "--no-first-run", "--no-default-browser-check"};
  for (const auto& a : cfg.browser_args) args.push_back(a);
  json chrome = {{"args", args}};
  if (cfg.browser_binary) chrome["binary"] = *cfg.browser_binary;
  s->driver_->new_session({{"alwaysMatch", {{"browserName", "chrome"}, {"goog:chromeOptions", chrome}}}});
  s->extension_id_ = unpacked_extension_id(bundle.out_path);
  s->start_url_ = "chrome-extension://" + s->extension_id_ + "/" + start_page;
  try {
    s->driver_->navigate(s->start_url_);
  } catch (const Error& e) {
    throw Error(ErrorCode::kExtensionLoadFailed, "opening " + s->start_url_ + " failed: " + e.what());
  }
  std::string url = s->driver_->current_url();
  std::string source = s->driver_->page_source();
  if (url.rfind("chrome-error://", 0) == 0 || source.find("ERR_BLOCKED_BY_CLIENT") != std::string::npos ||
      source.find("ERR_FILE_NOT_FOUND") != std::string::npos) {
    std::string text;
    for (const auto& b : html::text_blocks(source)) text += b.text + " ";
    throw Error(ErrorCode::kExtensionLoadFailed, "extension page did not load: " + text.substr(0, 300));
  }
  return s;
}

RuntimeMonitor::RuntimeMonitor(Session& session, RuntimeTrace& trace)
    : session_(session),
      trace_(trace),
      start_(std::chrono::steady_clock::now()),
      route_start_file_time_(fs::file_time_type::clock::now()),
      last_scan_(route_start_file_time_) {}

double RuntimeMonitor::now() const {
  return round_ms(std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count());
}

void RuntimeMonitor::add(EventKind kind, json payload) {
  RuntimeEvent e;
  e.id = static_cast<int>(trace_.events.size());
  e.timestamp = now();
  if (!trace_.events.empty()) e.timestamp = std::max(e.timestamp, trace_.events.back().timestamp);
  e.kind = kind;
  e.payload = std::move(payload);
  trace_.events.push_back(std::move(e));
}

void RuntimeMonitor::log(const std::string& action, json detail) {
  detail["action"] = action;
  add(EventKind::ActionLog, std::move(detail));
}

size_t RuntimeMonitor::poll() {
  size_t before = trace_.events.size();
  auto& wd = session_.driver();
  json snap = wd.execute_async(kSnapshotScript);
  std::string page;
  if (snap.is_object() && !snap.contains("__wr_error")) {
    json storage = {{"localStorage", snap.value("localStorage", json::object())},
                    {"sessionStorage", snap.value("sessionStorage", json::object())},
                    {"indexedDB", snap.value("indexedDB", json::object())}};
    std::string h = encoding::sha256_hex(storage.dump());
    if (h != storage_hash_) {
      storage_hash_ = h;
      add(EventKind::StorageSnapshot, std::move(storage));
    }
    page = snap.value("html", std::string());
  } else {
    if (!agent_missing_logged_) {
      agent_missing_logged_ = true;
      log("agent_absent", {{"detail", snap.is_object() ? snap.value("__wr_error", std::string()) : "no snapshot entry"}});
    }
    page = wd.page_source();
  }
  std::string hh = encoding::sha256_hex(page);
  if (hh != html_hash_) {
    html_hash_ = hh;
    add(EventKind::HtmlSnapshot, {{"url", wd.current_url()}, {"html", page}});
  }
  json drained = wd.execute(kDrainScript);
  if (drained.is_array()) {
    for (const auto& rec : drained) {
      if (!rec.is_object()) continue;
      add(EventKind::ParamCapture, {{"plan_id", rec.value("plan_id", std::string())},
                                    {"bindings", rec.value("bindings", json::object())},
                                    {"captured_at", rec.value("timestamp", json(nullptr))}});
    }
  }
  auto since = last_scan_;
  last_scan_ = fs::file_time_type::clock::now();
  scan_profile(since);
  return trace_.events.size() - before;
}

size_t RuntimeMonitor::final_profile_scan() { return scan_profile(route_start_file_time_ - std::chrono::seconds(1)); }

size_t RuntimeMonitor::scan_profile(fs::file_time_type since) {
  const fs::path& dir = session_.profile_dir();
  if (dir.empty() || !fs::is_directory(dir)) return 0;
  const auto& c = trace_.sensitive_corpus;
  std::vector<std::pair<std::string, std::string>> needles;
  if (c.password_used.size() >= kMinNeedle) needles.push_back({"password", c.password_used});
  if (!c.mnemonic_words.empty()) {
    std::string phrase;
    for (const auto& w : c.mnemonic_words) phrase += (phrase.empty() ? "" : " ") + w;
    needles.push_back({"mnemonic", phrase});
  }
  for (const auto& k : c.private_keys_observed) needles.push_back({"private_key", k});
  if (needles.empty()) return 0;
  json files = json::array();
  std::error_code ec;
  for (fs::recursive_directory_iterator it(dir, fs::directory_options::skip_permission_denied, ec), end;
       it != end; it.increment(ec)) {
    if (ec) break;
    std::error_code fe;
    if (!it->is_regular_file(fe) || it->file_size(fe) >= kProfileFileCap) continue;
    if (it->last_write_time(fe) <= since || fe) continue;
    std::string data = read_file(it->path());
    std::string rel = fs::relative(it->path(), dir, fe).generic_string();
    for (const auto& [kind, needle] : needles) {
      for (auto [encoding_name, enc] : {std::pair<const char*, std::string>{"raw", needle},
                                        std::pair<const char*, std::string>{"utf16", encoding::utf16le(needle)}}) {
        if (data.find(enc) == std::string::npos) continue;
        std::string key = rel + "\x1f" + needle + "\x1f" + encoding_name;
        if (!profile_hits_.insert(key).second) continue;
        files.push_back({{"path", rel}, {"needle_kind", kind}, {"needle", needle}, {"encoding", encoding_name}});
      }
    }
  }
  if (files.empty()) return 0;
  size_t n = files.size();
  add(EventKind::ProfileScan, {{"files", std::move(files)}});
  return n;
}

RouteRunner::RouteRunner(Session& session, RouteId route, const SemanticsDb& db, const HarnessConfig& cfg,
                         const std::vector<PlanSummary>& plans, const std::vector<std::string>& wordlist)
    : session_(session),
      route_(route),
      db_(db),
      cfg_(cfg),
      plans_(plans),
      wordlist_(wordlist),
      words_(wordlist.begin(), wordlist.end()),
      monitor_(session, trace_) {
  trace_.extension_id = session.extension_id();
  trace_.route_id = std::string(route_name(route));
  if (route == RouteId::Import) trace_.sensitive_corpus.mnemonic_words = cfg.mnemonic_words;
}

std::vector<UiElement> RouteRunner::inventory() {
  json v = session_.driver().execute(kInventoryScript);
  std::vector<UiElement> out;
  if (!v.is_array()) return out;
  for (const auto& e : v) {
    UiElement u;
    u.idx = e.value("idx", -1);
    u.tag = e.value("tag", std::string());
    u.type = e.value("type", std::string());
    u.label = e.value("label", std::string());
    u.text = e.value("text", std::string());
    u.checked = e.value("checked", false);
    u.disabled = e.value("disabled", false);
    u.value = e.value("value", std::string());
    out.push_back(std::move(u));
  }
  return out;
}

PageObservation RouteRunner::observe() {
  auto& wd = session_.driver();
  last_source_ = wd.page_source();
  PageObservation obs = observe_html(last_source_, wd.current_url());
  last_inventory_ = inventory();
  obs.elements.clear();
  for (const auto& e : last_inventory_) {
    PageElement p;
    p.tag = e.tag;
    p.type = e.type;
    p.label = e.label;
    p.text = e.tag == "textarea" ? e.text : e.label;
    obs.elements.push_back(std::move(p));
  }
  obs.timestamp = monitor_.now();
  return obs;
}

std::set<std::string> RouteRunner::error_blocks() const {
  std::set<std::string> out;
  for (const auto& b : html::text_blocks(last_source_)) {
    if (b.tag == "input" || b.tag == "textarea") continue;
    if (std::regex_search(b.text, error_pattern())) out.insert(b.text);
  }
  return out;
}

void RouteRunner::wait(int ms) {
  auto until = std::chrono::steady_clock::now() + std::chrono::milliseconds(ms);
  while (std::chrono::steady_clock::now() < until) {
    maybe_poll();
    auto left = until - std::chrono::steady_clock::now();
    std::this_thread::sleep_for(std::min<std::chrono::steady_clock::duration>(left, std::chrono::milliseconds(50)));
  }
}

void RouteRunner::maybe_poll() {
  auto now = std::chrono::steady_clock::now();
  if (now - last_poll_ < std::chrono::milliseconds(cfg_.poll_interval_ms)) return;
  last_poll_ = now;
  monitor_.poll();
}

void RouteRunner::visit(const std::string& page) {
  if (page == last_page_) return;
  last_page_ = page;
  mnemonic_idx_.clear();  // element indexes are per page
  trace_.pages_visited.push_back(page);
  monitor_.log("page", {{"page", page}});
}

void RouteRunner::fill(const UiElement& e, const std::string& text) {
  auto& wd = session_.driver();
  std::string el = wd.find_element("[data-wr-idx=\"" + std::to_string(e.idx) + "\"]");
  wd.clear(el);
  wd.send_keys(el, text);
}

bool RouteRunner::click_labeled(const std::vector<UiElement>& elements, const std::vector<std::string>& wanted) {
  for (const auto& phrase : wanted) {
    Phrase p = tokenize(phrase);
    for (const auto& e : elements) {
      if (!is_clickable(e) || e.disabled || !phrase_in(tokenize(e.label), p)) continue;
      std::string key = last_page_ + "|" + e.label;
      if (++clicks_[key] > 3) continue;
      auto& wd = session_.driver();
      wd.click(wd.find_element("[data-wr-idx=\"" + std::to_string(e.idx) + "\"]"));
      monitor_.log("click", {{"label", e.label}});
      return true;
    }
  }
  return false;
}

bool RouteRunner::click_advance(const std::vector<UiElement>& elements) {
  for (const auto& phrase : kAdvance) {
    Phrase p = tokenize(phrase);
    for (const auto& e : elements) {
      if (!is_clickable(e) || !phrase_in(tokenize(e.label), p)) continue;
      if (e.disabled) return false;
      auto& wd = session_.driver();
      wd.click(wd.find_element("[data-wr-idx=\"" + std::to_string(e.idx) + "\"]"));
      monitor_.log("click", {{"label", e.label}});
      return true;
    }
  }
  return false;
}

void RouteRunner::check_boxes(const std::vector<UiElement>& elements) {
  auto& wd = session_.driver();
  for (const auto& e : elements) {
    if (e.tag != "input" || e.type != "checkbox" || e.checked || e.disabled) continue;
    wd.click(wd.find_element("[data-wr-idx=\"" + std::to_string(e.idx) + "\"]"));
    monitor_.log("check", {{"label", e.label}});
  }
}

void RouteRunner::fill_passwords(const std::vector<UiElement>& elements, const std::string& password) {
  for (const auto& e : elements) {
    if (e.tag != "input" || e.type != "password" || mnemonic_idx_.count(e.idx)) continue;
    fill(e, password);
    monitor_.log("type", {{"field", e.label}, {"kind", "password"}, {"value", password}});
  }
  trace_.sensitive_corpus.password_used = password;
}

void RouteRunner::fill_mnemonic(const std::vector<UiElement>& elements) {
  const auto& words = cfg_.mnemonic_words;
  mnemonic_idx_.clear();
  // Longest run of consecutive single-line inputs, text or password.
  size_t best_start = 0, best_len = 0;
  for (size_t i = 0; i < elements.size();) {
    auto boxy = [&](const UiElement& e) { return is_text_input(e) || (e.tag == "input" && e.type == "password"); };
    if (!boxy(elements[i])) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < elements.size() && boxy(elements[j])) ++j;
    if (j - i > best_len) best_start = i, best_len = j - i;
    i = j;
  }
  std::string phrase;
  for (const auto& w : words) phrase += (phrase.empty() ? "" : " ") + w;
  if (best_len >= words.size()) {
    for (size_t k = 0; k < words.size(); ++k) {
      fill(elements[best_start + k], words[k]);
      mnemonic_idx_.insert(elements[best_start + k].idx);
    }
    monitor_.log("type", {{"kind", "mnemonic"}, {"boxes", words.size()}});
  } else {
    auto box = std::find_if(elements.begin(), elements.end(), [](const UiElement& e) { return e.tag == "textarea"; });
    if (box == elements.end()) box = std::find_if(elements.begin(), elements.end(), is_text_input);
    if (box == elements.end()) return;
    fill(*box, phrase);
    mnemonic_idx_.insert(box->idx);
    monitor_.log("type", {{"kind", "mnemonic"}, {"boxes", 1}});
  }
  trace_.sensitive_corpus.mnemonic_words = words;
}

void RouteRunner::act_generic(const std::vector<UiElement>& elements, bool fill_unknown) {
  check_boxes(elements);
  if (fill_unknown) {
    static const char kAlnum[] = "abcdefghijklmnopqrstuvwxyz0123456789";
    for (const auto& e : elements) {
      if (!is_text_input(e) || !e.value.empty()) continue;
      std::string s = "wr";
      for (int k = 0; k < 8; ++k) s += kAlnum[rng_() % 36];
      fill(e, s);
      monitor_.log("type", {{"field", e.label}, {"kind", "random"}, {"value", s}});
    }
  }
  click_advance(elements);
}

bool RouteRunner::shows_secret(const PageObservation& obs) const {
  size_t run = 0;
  for (const auto& t : obs.visible_text) {
    if (t.size() == 64 && encoding::is_hex_string(t)) return true;
    if (t.size() == 66 && t.rfind("0x", 0) == 0 && encoding::is_hex_string(t.substr(2))) return true;
    run = words_.count(t) ? run + 1 : 0;
    if (run >= 12) return true;
  }
  for (const auto& e : last_inventory_) {
    if (e.tag != "textarea") continue;
    size_t r = 0;
    for (const auto& t : tokenize(e.text)) {
      r = words_.count(t) ? r + 1 : 0;
      if (r >= 12) return true;
    }
  }
  return false;
}

void RouteRunner::harvest_secrets(const PageObservation& obs) {
  auto& c = trace_.sensitive_corpus;
  std::vector<std::vector<std::string>> texts = {obs.visible_text};
  for (const auto& e : last_inventory_) {
    if (e.tag == "textarea") texts.push_back(tokenize(e.text));
  }
  for (const auto& tokens : texts) {
    std::vector<std::string> run;
    for (size_t i = 0; i <= tokens.size(); ++i) {
      if (i < tokens.size() && words_.count(tokens[i])) {
        run.push_back(tokens[i]);
        continue;
      }
      if (run.size() >= 12 && c.mnemonic_words.empty()) c.mnemonic_words = select_mnemonic(run, wordlist_);
      run.clear();
    }
    for (const auto& t : tokens) {
      std::string hex = t.size() == 66 && t.rfind("0x", 0) == 0 ? t.substr(2) : t;
      if (hex.size() == 64 && encoding::is_hex_string(hex) &&
          std::find(c.private_keys_observed.begin(), c.private_keys_observed.end(), hex) ==
              c.private_keys_observed.end()) {
        c.private_keys_observed.push_back(hex);
      }
    }
  }
}

PasswordProbeResult RouteRunner::probe_password_policy() {
  PasswordProbeResult r;
  auto& wd = session_.driver();
  PageObservation start = observe();
  std::string start_page = classify_page(start, db_).page_id;
  std::string start_url = start.url;
  std::set<std::string> baseline = error_blocks();
  for (const auto& candidate : cfg_.password_ladder) {
    auto elements = last_inventory_;
    size_t fields = std::count_if(elements.begin(), elements.end(), [&](const UiElement& e) {
      return e.tag == "input" && e.type == "password" && !mnemonic_idx_.count(e.idx);
    });
    if (fields == 0) {
      r.inconclusive = true;
      break;
    }
    fill_passwords(elements, candidate);
    check_boxes(elements);
    elements = inventory();
    ProbeAttempt attempt{candidate, false, ""};
    if (!click_advance(elements)) {
      attempt.signal = "submit_disabled";
      bool any_advance = std::any_of(elements.begin(), elements.end(), [](const UiElement& e) {
        for (const auto& p : kAdvance) {
          if (is_clickable(e) && phrase_in(tokenize(e.label), tokenize(p))) return true;
        }
        return false;
      });
      if (!any_advance) {
        r.inconclusive = true;
        break;
      }
    } else {
      auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(cfg_.probe_wait_ms);
      while (attempt.signal.empty() && std::chrono::steady_clock::now() < deadline) {
        wait(100);
        PageObservation now = observe();
        int pw_inputs = static_cast<int>(std::count_if(last_inventory_.begin(), last_inventory_.end(), [](const UiElement& e) {
          return e.tag == "input" && e.type == "password";
        }));
        std::string page = classify_page(now, db_).page_id;
        std::set<std::string> errors = error_blocks();
        bool new_error = std::any_of(errors.begin(), errors.end(), [&](const std::string& b) { return !baseline.count(b); });
        if (now.url != start_url || (page != start_page && pw_inputs == 0)) {
          attempt.signal = "navigation";
        } else if (pw_inputs == 0) {
          attempt.signal = "input_gone";
        } else if (new_error) {
          attempt.signal = "error_text";
        }
      }
      if (attempt.signal.empty()) attempt.signal = "no_error_text";
      attempt.accepted = attempt.signal != "error_text";
    }
    monitor_.log("probe", {{"candidate", candidate}, {"accepted", attempt.accepted}, {"signal", attempt.signal}});
    r.attempts.push_back(attempt);
    if (attempt.accepted) {
      r.weakest_accepted = candidate;
      break;
    }
    observe();
  }
  (void)wd;
  return r;
}

void RouteRunner::fail(const std::string& reason, const PageObservation& obs) {
  trace_.completed = false;
  trace_.failure_reason = reason;
  std::string text;
  for (size_t i = 0; i < obs.visible_text.size() && i < 200; ++i) text += (i ? " " : "") + obs.visible_text[i];
  monitor_.log("route_failed", {{"reason", reason}, {"url", obs.url}, {"visible_text", text}});
  terminal_ = true;
}

void RouteRunner::act(const PageClassification& cls, const PageObservation& obs) {
  const auto& els = last_inventory_;
  const std::string& id = cls.page_id;
  bool create = route_ == RouteId::Create;
  if (id == "start") {
    visit(id);
    if (create) {
      click_labeled(els, phrases({"create a new wallet", "create wallet", "new wallet", "create", "get started"}));
    } else {
      click_labeled(els, phrases({"import wallet", "import an existing wallet", "restore wallet",
                                  "already have a wallet", "import", "restore"}));
    }
  } else if (id == "wallet_creation_preparations") {
    visit(id);
    act_generic(els, false);
  } else if (id == "password_setting" || id == "wallet_setup") {
    visit(id);
    if (id == "wallet_setup") fill_mnemonic(els);
    if (!probed_) {
      probed_ = true;
      trace_.password_probe = probe_password_policy();
      const auto& attempts = trace_.password_probe->attempts;
      if (!attempts.empty() && attempts.back().accepted && attempts.back().signal != "no_error_text") {
        trace_.sensitive_corpus.password_used = attempts.back().candidate;
        password_ = attempts.back().candidate;
        return;
      }
      observe();
    }
    password_ = cfg_.password_ladder.back();
    fill_passwords(last_inventory_, password_);
    check_boxes(last_inventory_);
    click_advance(inventory());
  } else if (id == "mnemonic_display") {
    visit(id);
    harvest_secrets(obs);
    if (create) {
      terminal_ = true;
      trace_.completed = true;
      return;
    }
    act_generic(els, false);
  } else if (id == "import_method_selection") {
    visit(id);
    if (!click_labeled(els, phrases({"recovery phrase", "seed phrase", "secret phrase", "mnemonic", "import"}))) {
      click_advance(els);
    }
  } else if (id == "mnemonic_import") {
    visit(id);
    fill_mnemonic(els);
    check_boxes(els);
    click_advance(inventory());
  } else if (id == "home") {
    visit(id);
    if (create) {
      act_generic(els, false);
    } else if (phase_ == Phase::Setup) {
      phase_ = Phase::Locking;
      if (!click_labeled(els, phrases({"lock", "lock wallet", "log out", "logout", "sign out"}))) {
        monitor_.log("reopen", {{"url", session_.start_url()}});
        session_.driver().navigate(session_.start_url());
      }
    } else if (phase_ == Phase::Locking) {
      // The wallet stayed unlocked; carry on to the settings.
      monitor_.log("lock_unavailable");
      phase_ = Phase::ToSettings;
    } else if (phase_ == Phase::ToSettings || phase_ == Phase::Settings) {
      phase_ = Phase::Settings;
      if (!click_labeled(els, phrases({"settings", "setting", "preferences", "menu", "account"}))) {
        fail("no_settings_control", obs);
      }
    }
  } else if (id == "wallet_unlock") {
    visit(id);
    fill_passwords(els, password_.empty() ? cfg_.password_ladder.back() : password_);
    if (!click_labeled(els, phrases({"unlock", "log in", "login", "sign in"}))) click_advance(els);
    if (phase_ == Phase::Locking || phase_ == Phase::Setup) phase_ = Phase::ToSettings;
  } else {
    // Pages without semantics entries are reached positionally.
    if (!create && (phase_ == Phase::Settings || phase_ == Phase::Verified)) {
      if (shows_secret(obs)) {
        visit("wallet_backup");
        harvest_secrets(obs);
        terminal_ = true;
        trace_.completed = true;
        return;
      }
      int pw = static_cast<int>(std::count_if(els.begin(), els.end(), [](const UiElement& e) {
        return e.tag == "input" && e.type == "password";
      }));
      if (phase_ == Phase::Settings && pw == 1) {
        visit("password_verification");
        fill_passwords(els, password_);
        phase_ = Phase::Verified;
        if (!click_labeled(els, phrases({"confirm", "reveal", "show", "next", "continue", "unlock", "ok"}))) {
          click_advance(els);
        }
        return;
      }
      if (phase_ == Phase::Settings) visit("wallet_setting");
      if (click_labeled(els, phrases({"show recovery phrase", "reveal recovery phrase", "reveal secret recovery phrase",
                                      "show secret recovery phrase", "backup", "back up", "recovery phrase",
                                      "seed phrase", "secret phrase", "show private key", "export private key",
                                      "private key", "security", "reveal", "show"}))) {
        return;
      }
    }
    visit("unknown");
    act_generic(els, true);
  }
}

RuntimeTrace RouteRunner::run() {
  auto started = std::chrono::steady_clock::now();
  auto route_deadline = started + std::chrono::seconds(cfg_.route_timeout_s);
  std::string signature;
  auto signature_since = started;
  int element_retries = 0;
  PageObservation obs;
  monitor_.log("route_start", {{"route", trace_.route_id}, {"url", session_.start_url()}});
  try {
    last_poll_ = std::chrono::steady_clock::now();
    monitor_.poll();
    while (!terminal_) {
      auto now = std::chrono::steady_clock::now();
      if (now > route_deadline) {
        fail("route_timeout", obs);
        break;
      }
      maybe_poll();
      obs = observe();
      PageClassification cls = classify_page(obs, db_);
      std::string sig = cls.page_id + "|" + obs.url + "|" + std::to_string(obs.visible_text.size()) + "|" +
                        std::to_string(last_inventory_.size());
      if (sig != signature) {
        signature = sig;
        signature_since = now;
      } else if (now - signature_since > std::chrono::seconds(cfg_.per_page_timeout_s)) {
        fail(cls.known() ? "stuck_on_" + cls.page_id : "unknown_page", obs);
        break;
      }
      try {
        act(cls, obs);
        element_retries = 0;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kElementGone || ++element_retries > 1) {
          if (e.code() == ErrorCode::kElementGone) {
            monitor_.log("element_gone", {{"detail", e.what()}});
            element_retries = 0;
          } else {
            throw;
          }
        }
        continue;
      }
      if (!terminal_) wait(cfg_.settle_ms);
    }
    wait(cfg_.settle_ms);
    monitor_.poll();
    monitor_.final_profile_scan();
  } catch (const Error& e) {
    trace_.completed = false;
    trace_.failure_reason = e.code() == ErrorCode::kSessionLost ? "session_lost"
                                                                 : std::string(error_code_name(e.code())) + ": " + e.what();
  }
  trace_.sensitive_corpus.intermediate_crypto_values = intermediate_values(trace_, plans_);
  return std::move(trace_);
}

}  // namespace wscan
