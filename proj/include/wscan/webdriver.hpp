#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace httplib {
class Client;
}

namespace wscan {

// Minimal W3C WebDriver client: sessions, navigation, page source, script execution and
// element interaction. Protocol errors map onto wscan::Error codes.
class WebDriverClient {
 public:
  WebDriverClient(const std::string& url, std::chrono::milliseconds connect_timeout = std::chrono::seconds(5),
                  std::chrono::milliseconds read_timeout = std::chrono::seconds(60));
  ~WebDriverClient();
  WebDriverClient(const WebDriverClient&) = delete;
  WebDriverClient& operator=(const WebDriverClient&) = delete;

  // Throws kWebDriverUnreachable when nothing answers, kExtensionLoadFailed when the
  // browser refuses the capabilities.
  void new_session(const nlohmann::json& capabilities);
  void delete_session();
  const std::string& session_id() const { return session_; }

  void navigate(const std::string& url);
  std::string current_url();
  std::string page_source();
  nlohmann::json execute(const std::string& script, const nlohmann::json& args = nlohmann::json::array());
  nlohmann::json execute_async(const std::string& script, const nlohmann::json& args = nlohmann::json::array());

  // Element references; find throws kElementGone when nothing matches.
  std::string find_element(const std::string& css);
  void click(const std::string& element);
  void clear(const std::string& element);
  void send_keys(const std::string& element, const std::string& text);

 private:
  nlohmann::json call(const std::string& method, const std::string& path, const nlohmann::json& body);
  std::string session_path(const std::string& rest) const;

  std::unique_ptr<httplib::Client> http_;
  std::string base_path_;
  std::string session_;
};

inline constexpr const char* kElementKey = "element-6066-11e4-a52e-4f735466cecf";

}  // namespace wscan
