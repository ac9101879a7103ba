#include "wscan/webdriver.hpp"

#include <httplib.h>

#include "wscan/error.hpp"

namespace wscan {

using nlohmann::json;

namespace {

ErrorCode code_for(const std::string& error) {
  if (error == "invalid session id" || error == "no such window" || error == "session not created") {
    return error == "session not created" ? ErrorCode::kExtensionLoadFailed : ErrorCode::kSessionLost;
  }
  if (error == "no such element" || error == "stale element reference" || error == "element not interactable" ||
      error == "element click intercepted") {
    return ErrorCode::kElementGone;
  }
  return ErrorCode::kWebDriverProtocol;
}

}  // namespace

WebDriverClient::WebDriverClient(const std::string& url, std::chrono::milliseconds connect_timeout,
                                 std::chrono::milliseconds read_timeout) {
  // Split "http://host:port/base" into the endpoint and a path prefix.
  std::string origin = url;
  auto scheme = url.find("://");
  auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash != std::string::npos) {
    origin = url.substr(0, slash);
    base_path_ = url.substr(slash);
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  }
  http_ = std::make_unique<httplib::Client>(origin);
  if (!http_->is_valid()) throw Error(ErrorCode::kWebDriverUnreachable, "invalid WebDriver URL " + url);
  http_->set_connection_timeout(connect_timeout);
  http_->set_read_timeout(read_timeout);
  http_->set_write_timeout(read_timeout);
}

WebDriverClient::~WebDriverClient() {
  try {
    delete_session();
  } catch (const std::exception&) {
  }
}

json WebDriverClient::call(const std::string& method, const std::string& path, const json& body) {
  std::string full = base_path_ + path;
  httplib::Result res;
  if (method == "GET") {
    res = http_->Get(full);
  } else if (method == "DELETE") {
    res = http_->Delete(full);
  } else {
    res = http_->Post(full, body.dump(), "application/json; charset=utf-8");
  }
  if (!res) {
    throw Error(ErrorCode::kWebDriverUnreachable,
                "WebDriver endpoint did not answer " + method + " " + full + ": " + httplib::to_string(res.error()));
  }
  json reply;
  try {
    reply = res->body.empty() ? json::object() : json::parse(res->body);
  } catch (const json::parse_error&) {
    throw Error(ErrorCode::kWebDriverProtocol, "non-JSON reply to " + method + " " + full);
  }
  json value = reply.contains("value") ? reply["value"] : json();
  if (res->status >= 400 || (value.is_object() && value.contains("error"))) {
    std::string error = value.is_object() ? value.value("error", std::string("unknown error")) : "unknown error";
    std::string message = value.is_object() ? value.value("message", std::string()) : res->body;
    throw Error(code_for(error), error + ": " + message);
  }
  return value;
}

std::string WebDriverClient::session_path(const std::string& rest) const {
  if (session_.empty()) throw Error(ErrorCode::kSessionLost, "no WebDriver session");
  return "/session/" + session_ + rest;
}

void WebDriverClient::new_session(const json& capabilities) {
  json value = call("POST", "/session", {{"capabilities", capabilities}});
  if (!value.is_object() || !value.contains("sessionId")) {
    throw Error(ErrorCode::kWebDriverProtocol, "new session reply without sessionId");
  }
  session_ = value["sessionId"].get<std::string>();
}

void WebDriverClient::delete_session() {
  if (session_.empty()) return;
  std::string path = session_path("");
  session_.clear();
  call("DELETE", path, json());
}

void WebDriverClient::navigate(const std::string& url) { call("POST", session_path("/url"), {{"url", url}}); }

std::string WebDriverClient::current_url() {
  json v = call("GET", session_path("/url"), json());
  return v.is_string() ? v.get<std::string>() : "";
}

std::string WebDriverClient::page_source() {
  json v = call("GET", session_path("/source"), json());
  return v.is_string() ? v.get<std::string>() : "";
}

json WebDriverClient::execute(const std::string& script, const json& args) {
  return call("POST", session_path("/execute/sync"), {{"script", script}, {"args", args}});
}

json WebDriverClient::execute_async(const std::string& script, const json& args) {
  return call("POST", session_path("/execute/async"), {{"script", script}, {"args", args}});
}

std::string WebDriverClient::find_element(const std::string& css) {
  json v = call("POST", session_path("/element"), {{"using", "css selector"}, {"value", css}});
  if (!v.is_object() || !v.contains(kElementKey)) throw Error(ErrorCode::kElementGone, "no element for " + css);
  return v[kElementKey].get<std::string>();
}

void WebDriverClient::click(const std::string& element) {
  call("POST", session_path("/element/" + element + "/click"), json::object());
}

void WebDriverClient::clear(const std::string& element) {
  call("POST", session_path("/element/" + element + "/clear"), json::object());
}

void WebDriverClient::send_keys(const std::string& element, const std::string& text) {
  call("POST", session_path("/element/" + element + "/value"), {{"text", text}});
}

}  // namespace wscan
