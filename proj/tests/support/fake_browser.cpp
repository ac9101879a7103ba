#include "fake_browser.hpp"

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <regex>

#include "wscan/encoding.hpp"

namespace wscan::testing {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

json wd_error(const std::string& error, const std::string& message) {
  return {{"value", {{"error", error}, {"message", message}}}};
}

}  // namespace

FakeBrowser::FakeBrowser(FakeWalletOptions options) : opt_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    json body = json::object();
    if (!req.body.empty()) body = json::parse(req.body, nullptr, false);
    int status = 200;
    json reply;
    {
      std::lock_guard<std::mutex> lock(mu_);
      requests_.push_back(req.method + " " + req.path);
      reply = handle(req.method, req.path, body, status);
    }
    res.status = status;
    res.set_content(reply.dump(), "application/json");
  };
  server_->Get(".*", dispatch);
  server_->Post(".*", dispatch);
  server_->Delete(".*", dispatch);
  port_ = server_->bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

FakeBrowser::~FakeBrowser() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string FakeBrowser::url() const { return "http://127.0.0.1:" + std::to_string(port_); }

std::vector<std::string> FakeBrowser::requests() const {
  std::lock_guard<std::mutex> lock(mu_);
  return requests_;
}

json FakeBrowser::last_capabilities() const {
  std::lock_guard<std::mutex> lock(mu_);
  return capabilities_;
}

std::string FakeBrowser::wallet_password() const {
  std::lock_guard<std::mutex> lock(mu_);
  return password_;
}

std::string FakeBrowser::page_url() const { return origin_ + "popup.html#" + page_; }

void FakeBrowser::enter(const std::string& page) {
  page_ = page;
  error_.clear();
  ++generation_;
  elements_.clear();
  auto button = [&](const std::string& label) { elements_.push_back({"button", "", label, "", false, false}); };
  auto input = [&](const std::string& type, const std::string& label) {
    elements_.push_back({"input", type, label, "", false, false});
  };
  if (page == "start") {
    text_ = "Welcome to Demo Wallet. Create a new wallet or import an existing wallet.";
    button("Create a new wallet");
    button("Import wallet");
  } else if (page == "prep") {
    text_ = "Before you start: if you lose your recovery phrase nobody can recover your funds.";
    input("checkbox", "I understand");
    button("Continue");
  } else if (page == "password") {
    text_ = "Create a new password for this device. Confirm it below.";
    input("password", "New password");
    input("password", "Confirm password");
    button("Create");
  } else if (page == "display") {
    if (opt_.textarea_mnemonic) {
      text_ = "Your secret recovery phrase. Write it down and keep it safe.";
      elements_.push_back({"textarea", "", "", opt_.mnemonic, false, false});
    } else {
      text_ = "Your secret recovery phrase. Write it down and keep it safe: " + opt_.mnemonic;
    }
    if (opt_.leak_to_profile && !profile_dir_.empty()) {
      fs::path p = fs::path(profile_dir_) / "Default" / "Sessions" / "Session_1";
      fs::create_directories(p.parent_path());
      std::ofstream(p, std::ios::binary) << "SNSS" << encoding::utf16le(opt_.mnemonic);
    }
  } else if (page == "method") {
    text_ = "Import or restore a wallet using a private key or a recovery phrase.";
    button("Recovery phrase");
    button("Private key");
  } else if (page == "import") {
    text_ = "Import with your secret recovery phrase.";
    for (int i = 1; i <= 12; ++i) input("text", "Word " + std::to_string(i));
    button("Import");
  } else if (page == "home") {
    text_ = "Total balance 0.00 ETH";
    button("Send");
    button("Receive");
    if (opt_.lock_button) button("Lock");
    button("Settings");
  } else if (page == "unlock") {
    text_ = "Welcome back! Unlock with your password.";
    input("password", "Password");
    button("Unlock");
  } else if (page == "settings") {
    text_ = "Settings. General, Security and privacy.";
    button("Show recovery phrase");
    button("Back");
  } else if (page == "verify") {
    text_ = "Enter your password to continue.";
    input("password", "Password");
    button("Confirm");
  } else if (page == "backup") {
    text_ = "Your recovery phrase: " + opt_.mnemonic;
  }
  refresh_disabled();
}

void FakeBrowser::refresh_disabled() {
  if (page_ != "password" || !opt_.disable_submit) return;
  elements_[2].disabled = !opt_.accepts(elements_[0].value) || elements_[0].value != elements_[1].value;
}

void FakeBrowser::click(Element& e) {
  if (e.tag == "input" && e.type == "checkbox") {
    e.checked = !e.checked;
    return;
  }
  if (e.disabled) return;
  const std::string& l = e.label;
  if (page_ == "start") {
    importing_ = l == "Import wallet";
    enter(importing_ ? "method" : "prep");
  } else if (page_ == "prep" && l == "Continue") {
    if (elements_[0].checked) enter("password");
  } else if (page_ == "password" && l == "Create") {
    const std::string& pw = elements_[0].value;
    if (pw != elements_[1].value) {
      error_ = "Passwords do not match";
    } else if (!opt_.accepts(pw)) {
      error_ = "Password must be at least 8 characters and include letters and numbers";
    } else {
      password_ = pw;
      if (opt_.store_plaintext) local_storage_["vault"] = json({{"pw", pw}}).dump();
      captures_.push_back({{"plan_id", "kdf.js#10"}, {"bindings", {{"password", pw}}}, {"timestamp", 1}});
      enter(importing_ ? "home" : "display");
    }
  } else if (page_ == "method" && l == "Recovery phrase") {
    enter("import");
  } else if (page_ == "import" && l == "Import") {
    bool filled = std::all_of(elements_.begin(), elements_.end() - 1, [](const Element& x) { return !x.value.empty(); });
    if (filled) enter("password");
  } else if (page_ == "home" && l == "Lock") {
    enter("unlock");
  } else if (page_ == "home" && l == "Settings") {
    enter("settings");
  } else if (page_ == "unlock" && l == "Unlock") {
    if (elements_[0].value == password_) {
      enter("home");
    } else {
      error_ = "Invalid password";
    }
  } else if (page_ == "settings") {
    enter(l == "Back" ? "home" : "verify");
  } else if (page_ == "verify" && l == "Confirm") {
    if (elements_[0].value == password_) {
      enter("backup");
    } else {
      error_ = "Invalid password";
    }
  }
}

std::string FakeBrowser::render() const {
  std::string h = "<html><head><title>Demo Wallet</title><script>var boot = 1;</script></head><body><p>" +
                  escape(text_) + "</p>";
  for (const auto& e : elements_) {
    if (e.tag == "button") {
      h += "<button" + std::string(e.disabled ? " disabled" : "") + ">" + escape(e.label) + "</button>";
    } else if (e.tag == "textarea") {
      h += "<textarea readonly>" + escape(e.value) + "</textarea>";
    } else if (e.type == "checkbox") {
      h += "<label><input type=\"checkbox\"" + std::string(e.checked ? " checked" : "") + "> " + escape(e.label) +
           "</label>";
    } else {
      h += "<input type=\"" + e.type + "\" placeholder=\"" + escape(e.label) + "\" value=\"" + escape(e.value) + "\">";
    }
  }
  if (!error_.empty()) h += "<div class=\"error\">" + escape(error_) + "</div>";
  return h + "</body></html>";
}

json FakeBrowser::inventory() const {
  json out = json::array();
  for (size_t i = 0; i < elements_.size(); ++i) {
    const Element& e = elements_[i];
    out.push_back({{"idx", i},
                   {"tag", e.tag},
                   {"type", e.type},
                   {"label", e.label},
                   {"text", e.tag == "textarea" ? e.value : ""},
                   {"checked", e.checked},
                   {"disabled", e.disabled},
                   {"value", e.tag == "input" ? e.value : ""}});
  }
  return out;
}

FakeBrowser::Element* FakeBrowser::element(const std::string& id, int& status, json& error) {
  static const std::regex re("g(\\d+)-(\\d+)");
  std::smatch m;
  if (!std::regex_match(id, m, re) || std::stoi(m[1]) != generation_ ||
      std::stoul(m[2]) >= elements_.size()) {
    status = 404;
    error = wd_error("stale element reference", id);
    return nullptr;
  }
  return &elements_[std::stoul(m[2])];
}

json FakeBrowser::handle(const std::string& method, const std::string& path, const json& body, int& status) {
  if (method == "POST" && path == "/session") {
    capabilities_ = body.value("capabilities", json::object());
    for (const auto& a : capabilities_["alwaysMatch"]["goog:chromeOptions"]["args"]) {
      std::string s = a.get<std::string>();
      if (s.rfind("--user-data-dir=", 0) == 0) profile_dir_ = s.substr(16);
    }
    // A new session is a new browser profile, so the wallet starts over.
    session_ = "fake-session";
    password_.clear();
    importing_ = false;
    local_storage_ = json::object();
    captures_ = json::array();
    return {{"value", {{"sessionId", session_}, {"capabilities", {{"browserName", "chrome"}}}}}};
  }
  std::string prefix = "/session/" + session_;
  if (session_.empty() || path.rfind(prefix, 0) != 0) {
    status = 404;
    return wd_error("invalid session id", path);
  }
  std::string rest = path.substr(prefix.size());
  if (method == "DELETE" && rest.empty()) {
    session_.clear();
    return {{"value", nullptr}};
  }
  if (rest == "/url" && method == "POST") {
    std::string url = body.value("url", "");
    auto slash = url.find('/', url.find("://") + 3);
    origin_ = url.substr(0, slash + 1);
    enter(password_.empty() ? "start" : "unlock");
    return {{"value", nullptr}};
  }
  if (rest == "/url") return {{"value", opt_.load_error ? "chrome-error://chromewebdata/" : page_url()}};
  if (rest == "/source") {
    if (opt_.load_error) return {{"value", "<html><body>This page has been blocked. ERR_BLOCKED_BY_CLIENT</body></html>"}};
    return {{"value", render()}};
  }
  if (rest == "/execute/sync") {
    std::string script = body.value("script", "");
    if (script.rfind("/*wr:inventory*/", 0) == 0) return {{"value", inventory()}};
    if (script.rfind("/*wr:drain*/", 0) == 0) {
      if (!opt_.agent) return {{"value", nullptr}};
      json out = captures_;
      captures_ = json::array();
      return {{"value", out}};
    }
    return {{"value", nullptr}};
  }
  if (rest == "/execute/async") {
    if (!opt_.agent) return {{"value", nullptr}};
    return {{"value",
             {{"localStorage", local_storage_},
              {"sessionStorage", json::object()},
              {"indexedDB", json::object()},
              {"html", render()}}}};
  }
  if (rest == "/element" && method == "POST") {
    static const std::regex css("\\[data-wr-idx=\"(\\d+)\"\\]");
    std::smatch m;
    std::string sel = body.value("value", "");
    if (!std::regex_match(sel, m, css) || std::stoul(m[1]) >= elements_.size()) {
      status = 404;
      return wd_error("no such element", sel);
    }
    return {{"value", {{"element-6066-11e4-a52e-4f735466cecf",
                        "g" + std::to_string(generation_) + "-" + std::string(m[1])}}}};
  }
  static const std::regex action("/element/([^/]+)/(click|clear|value)");
  std::smatch m;
  if (std::regex_match(rest, m, action)) {
    json error;
    Element* e = element(m[1], status, error);
    if (!e) return error;
    std::string verb = m[2];
    if (verb == "click") {
      click(*e);
    } else if (verb == "clear") {
      e->value.clear();
      refresh_disabled();
    } else {
      e->value += body.value("text", "");
      refresh_disabled();
    }
    return {{"value", nullptr}};
  }
  status = 404;
  return wd_error("unknown command", method + " " + path);
}

}  // namespace wscan::testing
