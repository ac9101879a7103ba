#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace httplib {
class Server;
}

// A WebDriver endpoint backed by a scripted wallet popup instead of a browser. It answers
// the harness's tagged scripts (inventory, snapshot, drain) and element commands.
namespace wscan::testing {

struct FakeWalletOptions {
  // Password rule enforced by the password page.
  std::function<bool(const std::string&)> accepts = [](const std::string&) { return true; };
  bool disable_submit = false;      // grey out the submit button instead of showing an error
  bool textarea_mnemonic = false;   // show the new phrase in a <textarea>
  bool leak_to_profile = false;     // write the shown phrase UTF-16LE into the profile directory
  bool store_plaintext = true;      // keep the password in localStorage
  bool agent = true;                // snapshot and drain entries present
  bool load_error = false;          // the extension page fails to open
  bool lock_button = true;
  std::string mnemonic = "abandon abandon abandon abandon abandon abandon abandon abandon abandon abandon abandon about";
};

class FakeBrowser {
 public:
  explicit FakeBrowser(FakeWalletOptions options = {});
  ~FakeBrowser();
  FakeBrowser(const FakeBrowser&) = delete;
  FakeBrowser& operator=(const FakeBrowser&) = delete;

  std::string url() const;

  // Requests seen so far, as "METHOD path" lines.
  std::vector<std::string> requests() const;
  nlohmann::json last_capabilities() const;
  std::string wallet_password() const;

  struct Element {
    std::string tag;
    std::string type;
    std::string label;
    std::string value;
    bool checked = false;
    bool disabled = false;
  };

 private:
  nlohmann::json handle(const std::string& method, const std::string& path, const nlohmann::json& body, int& status);
  void enter(const std::string& page);
  void click(Element& e);
  std::string render() const;
  nlohmann::json inventory() const;
  std::string page_url() const;
  Element* element(const std::string& id, int& status, nlohmann::json& error);
  void refresh_disabled();

  FakeWalletOptions opt_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;

  std::vector<std::string> requests_;
  nlohmann::json capabilities_;
  std::string session_;
  std::string origin_;
  std::string profile_dir_;
  std::string page_;
  std::string text_;
  std::string error_;
  std::vector<Element> elements_;
  int generation_ = 0;
  bool importing_ = false;
  std::string password_;
  nlohmann::json local_storage_ = nlohmann::json::object();
  nlohmann::json captures_ = nlohmann::json::array();
};

}  // namespace wscan::testing
