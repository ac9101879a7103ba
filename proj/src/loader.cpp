#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "wscan/ast.hpp"
#include "wscan/encoding.hpp"
#include "wscan/error.hpp"
#include "wscan/extension.hpp"

namespace fs = std::filesystem;

namespace wscan {

namespace {

using nlohmann::json;

// Keys folded into the unified Manifest shape; everything else lands in `extra`.
const std::set<std::string> kNormalizedKeys = {
    "manifest_version", "name",         "background",       "action",
    "browser_action",   "page_action",  "content_scripts",  "web_accessible_resources",
    "content_security_policy"};

std::vector<std::string> string_list(const json& value, const std::string& where) {
  std::vector<std::string> out;
  if (value.is_null()) return out;
  if (value.is_string()) {
    out.push_back(value.get<std::string>());
    return out;
  }
  if (!value.is_array()) throw Error(ErrorCode::kInvalidJson, where + " must be a list of strings");
  for (const auto& item : value) {
    if (!item.is_string()) throw Error(ErrorCode::kInvalidJson, where + " must be a list of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::optional<std::string> popup_of(const json& m, const char* key) {
  auto it = m.find(key);
  if (it == m.end() || !it->is_object()) return std::nullopt;
  auto popup = it->find("default_popup");
  if (popup == it->end() || !popup->is_string() || popup->get<std::string>().empty()) {
    return std::nullopt;
  }
  return popup->get<std::string>();
}

bool is_remote(std::string_view ref) {
  return ref.starts_with("http://") || ref.starts_with("https://") || ref.starts_with("//");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool has_extension(std::string_view path, std::initializer_list<std::string_view> exts) {
  std::string lower = encoding::to_lower(path);
  return std::any_of(exts.begin(), exts.end(), [&](std::string_view e) { return lower.ends_with(e); });
}

std::string resolve_ref(const ExtensionPackage& pkg, std::string_view ref, const std::string& field) {
  if (is_remote(ref)) {
    throw Error(ErrorCode::kUnresolvedScriptRef,
                field + " references remote resource " + std::string(ref) + "; remote scripts are not scanned");
  }
  auto path = normalize_relative_path(ref);
  if (!path) {
    throw Error(ErrorCode::kUnresolvedScriptRef, field + " path escapes the bundle: " + std::string(ref));
  }
  if (!pkg.contains(*path)) {
    throw Error(ErrorCode::kUnresolvedScriptRef, field + " references missing file " + *path);
  }
  return *path;
}

}  // namespace

std::optional<std::string> normalize_relative_path(std::string_view path) {
  std::string p(path);
  std::replace(p.begin(), p.end(), '\\', '/');
  std::vector<std::string> parts;
  std::stringstream ss(p);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (part.empty() || part == ".") continue;
    if (part == "..") {
      if (parts.empty()) return std::nullopt;
      parts.pop_back();
      continue;
    }
    parts.push_back(part);
  }
  if (parts.empty()) return std::nullopt;
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += '/';
    out += parts[i];
  }
  return out;
}

bool glob_match(std::string_view pattern, std::string_view text) {
  // Iterative wildcard match with single-star backtracking.
  size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::vector<std::string> Manifest::war_patterns() const {
  std::vector<std::string> out;
  for (const auto& entry : web_accessible_resources) {
    out.insert(out.end(), entry.resources.begin(), entry.resources.end());
  }
  return out;
}

Manifest parse_manifest(std::string_view raw) {
  json m;
  try {
    m = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidJson, std::string("manifest.json: ") + e.what());
  }
  if (!m.is_object()) throw Error(ErrorCode::kInvalidJson, "manifest.json must be an object");

  Manifest out;
  auto version = m.find("manifest_version");
  if (version == m.end() || !version->is_number_integer()) {
    throw Error(ErrorCode::kUnsupportedManifestVersion, "manifest_version missing or not an integer");
  }
  out.version = version->get<int>();
  if (out.version != 2 && out.version != 3) {
    throw Error(ErrorCode::kUnsupportedManifestVersion,
                "manifest_version " + std::to_string(out.version) + " is not supported");
  }
  if (auto it = m.find("name"); it != m.end() && it->is_string()) out.name = it->get<std::string>();

  if (auto bg = m.find("background"); bg != m.end() && bg->is_object()) {
    for (const auto& s : string_list(bg->value("scripts", json()), "background.scripts")) {
      out.background.push_back({BackgroundRef::Kind::Script, s});
    }
    if (auto page = bg->find("page"); page != bg->end() && page->is_string()) {
      out.background.push_back({BackgroundRef::Kind::Page, page->get<std::string>()});
    }
    if (auto sw = bg->find("service_worker"); sw != bg->end() && sw->is_string()) {
      out.background.push_back({BackgroundRef::Kind::ServiceWorker, sw->get<std::string>()});
    }
  }

  for (const char* key : {"action", "browser_action", "page_action"}) {
    if (auto popup = popup_of(m, key)) {
      out.action_page = *popup;
      break;
    }
  }

  if (auto cs = m.find("content_scripts"); cs != m.end()) {
    if (!cs->is_array()) throw Error(ErrorCode::kInvalidJson, "content_scripts must be a list");
    for (const auto& entry : *cs) {
      if (!entry.is_object()) throw Error(ErrorCode::kInvalidJson, "content_scripts entries must be objects");
      ContentScript script;
      script.matches = string_list(entry.value("matches", json()), "content_scripts.matches");
      script.js = string_list(entry.value("js", json()), "content_scripts.js");
      out.content_scripts.push_back(std::move(script));
    }
  }

  if (auto war = m.find("web_accessible_resources"); war != m.end()) {
    if (!war->is_array()) throw Error(ErrorCode::kInvalidJson, "web_accessible_resources must be a list");
    for (const auto& entry : *war) {
      WarEntry w;
      if (entry.is_string()) {
        w.resources.push_back(entry.get<std::string>());
      } else if (entry.is_object()) {
        w.resources = string_list(entry.value("resources", json()), "web_accessible_resources.resources");
        w.matches = string_list(entry.value("matches", json()), "web_accessible_resources.matches");
      } else {
        throw Error(ErrorCode::kInvalidJson, "web_accessible_resources entries must be strings or objects");
      }
      out.web_accessible_resources.push_back(std::move(w));
    }
  }

  if (auto csp = m.find("content_security_policy"); csp != m.end()) {
    if (csp->is_string()) {
      out.csp = csp->get<std::string>();
    } else if (csp->is_object()) {
      if (auto pages = csp->find("extension_pages"); pages != csp->end() && pages->is_string()) {
        out.csp = pages->get<std::string>();
      }
    }
  }

  for (auto it = m.begin(); it != m.end(); ++it) {
    if (!kNormalizedKeys.contains(it.key())) out.extra[it.key()] = it.value();
  }
  return out;
}

Normalized normalize_source_ex(std::string_view raw) {
  Normalized out;
  try {
    js::Ast ast = js::parse_script(raw);
    js::fold_constant_concat(ast.mutable_program());
    ast.renumber();
    out.text = js::print_canonical(ast);
  } catch (const ParseFailure& e) {
    out.text = std::string(raw);
    out.skipped = true;
    out.note = std::string("NormalizationSkipped: ") + std::string(error_code_name(e.code())) + " at " +
               std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " + e.what();
  }
  return out;
}

const ScriptFile* ExtensionPackage::script(std::string_view path) const {
  for (const auto& s : scripts) {
    if (s.path == path) return &s;
  }
  return nullptr;
}

const HtmlPage* ExtensionPackage::html(std::string_view path) const {
  for (const auto& h : html_pages) {
    if (h.path == path) return &h;
  }
  return nullptr;
}

bool ExtensionPackage::contains(std::string_view path) const {
  if (path == "manifest.json") return true;
  if (script(path) || html(path)) return true;
  return std::find(assets.begin(), assets.end(), path) != assets.end();
}

ExtensionPackage load_extension_files(std::map<std::string, std::string> files, fs::path root_path) {
  auto manifest = files.find("manifest.json");
  if (manifest == files.end()) {
    throw Error(ErrorCode::kMissingManifest, "no manifest.json at the bundle root of " + root_path.string());
  }
  ExtensionPackage pkg;
  pkg.root_path = std::move(root_path);
  pkg.manifest_raw = manifest->second;
  pkg.manifest = parse_manifest(pkg.manifest_raw);

  std::string digest_input;
  for (auto& [path, bytes] : files) {
    std::string sha = encoding::sha256_hex(bytes);
    digest_input += path;
    digest_input += '\0';
    digest_input += sha;
    digest_input += '\n';
    if (path == "manifest.json") continue;
    if (has_extension(path, {".js", ".mjs"})) {
      ScriptFile script;
      script.path = path;
      script.sha256 = sha;
      Normalized n = normalize_source_ex(bytes);
      script.normalized_source = std::move(n.text);
      script.parsed = !n.skipped;
      if (n.skipped) script.note = std::move(n.note);
      script.raw_source = std::move(bytes);
      pkg.scripts.push_back(std::move(script));
    } else if (has_extension(path, {".html", ".htm"})) {
      pkg.html_pages.push_back({path, std::move(bytes)});
    } else {
      pkg.assets.push_back(path);
      pkg.asset_data.emplace(path, std::move(bytes));
    }
  }
  pkg.digest = encoding::sha256_hex(digest_input);

  // Every manifest reference must resolve inside the bundle.
  for (const auto& bg : pkg.manifest.background) resolve_ref(pkg, bg.path, "background");
  if (pkg.manifest.action_page) resolve_ref(pkg, *pkg.manifest.action_page, "action.default_popup");
  for (const auto& cs : pkg.manifest.content_scripts) {
    for (const auto& js : cs.js) resolve_ref(pkg, js, "content_scripts.js");
  }
  return pkg;
}

ExtensionPackage load_extension(const fs::path& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    std::map<std::string, std::string> files;
    fs::path root = fs::weakly_canonical(path);
    for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied);
         it != fs::recursive_directory_iterator(); ++it) {
      if (!it->is_regular_file()) continue;
      std::string rel = fs::relative(it->path(), root).generic_string();
      auto normalized = normalize_relative_path(rel);
      if (!normalized) continue;  // symlink pointing outside the root
      files[*normalized] = read_file(it->path());
    }
    return load_extension_files(std::move(files), root);
  }
  if (!fs::exists(path, ec)) throw Error(ErrorCode::kIo, "no such bundle: " + path.string());
  std::string bytes = read_file(path);
  std::string_view payload = strip_crx_header(bytes);
  return load_extension_files(read_zip(payload), fs::absolute(path));
}

EntryPoints entry_points(const ExtensionPackage& pkg) {
  EntryPoints out;
  for (const auto& bg : pkg.manifest.background) {
    if (bg.kind == BackgroundRef::Kind::Page) continue;
    out.background_scripts.push_back(*normalize_relative_path(bg.path));
  }
  if (pkg.manifest.action_page) out.action_page = normalize_relative_path(*pkg.manifest.action_page);
  for (const auto& cs : pkg.manifest.content_scripts) {
    for (const auto& js : cs.js) out.content_scripts.push_back(*normalize_relative_path(js));
  }
  std::set<std::string> war;
  for (const auto& pattern : pkg.manifest.war_patterns()) {
    std::string p = pattern;
    while (!p.empty() && p.front() == '/') p.erase(p.begin());
    for (const auto& page : pkg.html_pages) {
      if (glob_match(p, page.path)) war.insert(page.path);
    }
  }
  out.war_html.assign(war.begin(), war.end());
  return out;
}

}  // namespace wscan
