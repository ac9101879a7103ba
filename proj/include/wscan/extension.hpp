#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace wscan {

struct BackgroundRef {
  enum class Kind { Script, Page, ServiceWorker };
  Kind kind = Kind::Script;
  std::string path;
};

struct ContentScript {
  std::vector<std::string> matches;
  std::vector<std::string> js;
};

struct WarEntry {
  std::vector<std::string> resources;
  std::vector<std::string> matches;  // empty for v2 entries
};

struct Manifest {
  int version = 0;
  std::string name;
  std::vector<BackgroundRef> background;
  std::optional<std::string> action_page;
  std::vector<ContentScript> content_scripts;
  std::vector<WarEntry> web_accessible_resources;
  std::optional<std::string> csp;
  nlohmann::json extra = nlohmann::json::object();  // keys not folded into the fields above

  std::vector<std::string> war_patterns() const;
};

struct ScriptFile {
  std::string path;
  std::string raw_source;
  std::string normalized_source;
  std::string sha256;
  bool parsed = false;
  std::optional<std::string> note;  // set when normalization was skipped
};

struct HtmlPage {
  std::string path;
  std::string raw;
};

struct EntryPoints {
  std::vector<std::string> background_scripts;
  std::optional<std::string> action_page;
  std::vector<std::string> content_scripts;
  std::vector<std::string> war_html;
};

struct ExtensionPackage {
  std::filesystem::path root_path;
  Manifest manifest;
  std::string manifest_raw;
  std::vector<ScriptFile> scripts;
  std::vector<HtmlPage> html_pages;
  std::vector<std::string> assets;
  std::map<std::string, std::string> asset_data;  // path -> bytes, for repackaging
  std::string digest;  // sha256 over the sorted (path, content digest) list

  const ScriptFile* script(std::string_view path) const;
  const HtmlPage* html(std::string_view path) const;
  bool contains(std::string_view path) const;
};

Manifest parse_manifest(std::string_view raw);

// Directory, .zip or .crx.
ExtensionPackage load_extension(const std::filesystem::path& path);

// Same as load_extension over an in-memory file map (relative path -> bytes).
ExtensionPackage load_extension_files(std::map<std::string, std::string> files,
                                      std::filesystem::path root_path);

EntryPoints entry_points(const ExtensionPackage& pkg);

struct Normalized {
  std::string text;
  bool skipped = false;
  std::string note;
};

Normalized normalize_source_ex(std::string_view raw);
inline std::string normalize_source(std::string_view raw) { return normalize_source_ex(raw).text; }

// Relative path with `.` and `..` resolved; nullopt if it escapes the root.
std::optional<std::string> normalize_relative_path(std::string_view path);

bool glob_match(std::string_view pattern, std::string_view text);

// Archive plumbing, exposed for tests.
std::map<std::string, std::string> read_zip(std::string_view bytes);
std::string_view strip_crx_header(std::string_view bytes);
std::string write_zip(const std::map<std::string, std::string>& files);

}  // namespace wscan
