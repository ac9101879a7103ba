#include "wscan/instrumenter.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "wscan/encoding.hpp"
#include "wscan/error.hpp"

namespace wscan {

namespace fs = std::filesystem;
using js::Node;
using js::NodeKind;

namespace {

constexpr std::string_view kAgentDir = "__wr_agent";

std::unique_ptr<Node> parse_statement(const std::string& text) {
  js::Ast ast = js::parse_script(text);
  return std::move(ast.mutable_program().children.at(0));
}

std::unique_ptr<Node> make_block(std::vector<std::unique_ptr<Node>> stmts, const js::Span& span) {
  auto block = std::make_unique<Node>();
  block->kind = NodeKind::BlockStatement;
  block->span = span;
  block->children = std::move(stmts);
  return block;
}

void collect_mutable(Node& n, std::map<int, Node*>& out) {
  out[n.id] = &n;
  for (auto& c : n.children) collect_mutable(*c, out);
}

size_t index_in_parent(const Node& parent, const Node* child) {
  for (size_t i = 0; i < parent.children.size(); ++i) {
    if (parent.children[i].get() == child) return i;
  }
  throw Error(ErrorCode::kWriteFailure, "instrumentation anchor detached from its parent");
}

// Inserts `capture` ahead of `anchor`, wrapping single-statement slots in a block and
// expression-bodied arrows in `{ capture; return body; }`.
void insert_before(Node& anchor, std::unique_ptr<Node> capture) {
  Node& parent = *anchor.parent;
  size_t i = index_in_parent(parent, &anchor);
  bool list = parent.kind == NodeKind::Program || parent.kind == NodeKind::BlockStatement ||
              parent.kind == NodeKind::SwitchCase;
  if (list) {
    parent.children.insert(parent.children.begin() + static_cast<long>(i), std::move(capture));
    return;
  }
  std::unique_ptr<Node> original = std::move(parent.children[i]);
  std::vector<std::unique_ptr<Node>> stmts;
  stmts.push_back(std::move(capture));
  if (parent.kind == NodeKind::ArrowFunction && parent.has(js::kExpressionBody)) {
    auto ret = std::make_unique<Node>();
    ret->kind = NodeKind::ReturnStatement;
    ret->span = original->span;
    ret->children.push_back(std::move(original));
    stmts.push_back(std::move(ret));
    parent.flags &= ~static_cast<uint32_t>(js::kExpressionBody);
  } else {
    stmts.push_back(std::move(original));
  }
  parent.children[i] = make_block(std::move(stmts), anchor.span);
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kWriteFailure, "cannot write " + path.string());
}

std::string inject_script_tags(const std::string& html, const std::vector<std::string>& agent_paths) {
  std::string tags;
  for (const auto& p : agent_paths) tags += "<script src=\"/" + p + "\"></script>";
  std::string lower = encoding::to_lower(html);
  for (const char* anchor : {"<head", "<html"}) {
    auto pos = lower.find(anchor);
    if (pos == std::string::npos) continue;
    auto close = lower.find('>', pos);
    if (close == std::string::npos) continue;
    return html.substr(0, close + 1) + tags + html.substr(close + 1);
  }
  return tags + html;
}

}  // namespace

std::string capture_statement(const std::string& plan_ids, const std::vector<std::string>& bindings) {
  std::string obj = "{";
  for (size_t i = 0; i < bindings.size(); ++i) {
    if (i) obj += ", ";
    obj += bindings[i] + ": " + bindings[i];
  }
  obj += "}";
  return "try { typeof " + std::string(kCaptureFunction) + " === \"function\" && " + std::string(kCaptureFunction) +
         "(" + js::quote_string(plan_ids) + ", " + obj + "); } catch (__wr_e) {}";
}

InstrumentResult apply_instrumentation(std::string_view source, const std::string& file,
                                       const std::vector<InstrumentationPlan>& plans) {
  if (source.find(kInstrumentedMarker) != std::string_view::npos) {
    throw Error(ErrorCode::kAlreadyInstrumented, file + " already carries the instrumentation marker");
  }
  InstrumentResult result;
  js::Ast ast = js::parse_script(source, file);
  if (plans.empty()) {
    result.text = js::print_canonical(ast);
    return result;
  }

  std::map<int, Node*> nodes;
  collect_mutable(ast.mutable_program(), nodes);

  struct Group {
    std::vector<std::string> ids;
    std::set<std::string> bindings;
  };
  std::map<int, Group> groups;
  for (const auto& plan : plans) {
    auto it = nodes.find(plan.insert_before);
    if (plan.file != file || it == nodes.end() || !(it->second->span == plan.insertion_span) ||
        !it->second->parent) {
      result.warnings.push_back("StaleSpan: plan " + plan.plan_id + " does not match " + file + "; skipped");
      continue;
    }
    Group& g = groups[plan.insert_before];
    g.ids.push_back(plan.plan_id);
    g.bindings.insert(plan.captured_bindings.begin(), plan.captured_bindings.end());
  }

  for (auto& [node_id, g] : groups) {
    std::string ids;
    for (size_t i = 0; i < g.ids.size(); ++i) ids += (i ? "," : "") + g.ids[i];
    std::vector<std::string> bindings(g.bindings.begin(), g.bindings.end());
    insert_before(*nodes[node_id], parse_statement(capture_statement(ids, bindings)));
    result.applied.insert(result.applied.end(), g.ids.begin(), g.ids.end());
  }
  ast.renumber();
  result.text = std::string(kInstrumentedMarker) + "\n" + js::print_canonical(ast);
  return result;
}

InstrumentResult apply_instrumentation(const ScriptFile& script, const std::vector<InstrumentationPlan>& plans) {
  return apply_instrumentation(script.normalized_source, script.path, plans);
}

InstrumentedBundle package_instrumented(const ExtensionPackage& pkg, const std::map<std::string, std::string>& rewritten,
                                        const std::map<std::string, std::string>& agent_scripts,
                                        const fs::path& out_dir, const std::vector<InstrumentationPlan>& plans) {
  if (agent_scripts.empty()) {
    throw Error(ErrorCode::kWriteFailure,
                "agent scripts missing: pass the browser-agent runtime directory (it must define __wr_capture, "
                "__wr_snapshot and __wr_drain)");
  }
  for (const auto& [path, text] : rewritten) {
    if (!pkg.script(path)) throw Error(ErrorCode::kWriteFailure, "rewritten file " + path + " is not a bundle script");
  }
  std::error_code ec;
  if (fs::exists(out_dir, ec) && !fs::is_empty(out_dir, ec)) {
    throw Error(ErrorCode::kWriteFailure, "output directory " + out_dir.string() + " is not empty");
  }
  if (fs::weakly_canonical(out_dir, ec) == fs::weakly_canonical(pkg.root_path, ec)) {
    throw Error(ErrorCode::kWriteFailure, "refusing to overwrite the original bundle");
  }

  InstrumentedBundle bundle;
  bundle.out_path = out_dir;
  std::string agent_source;
  for (const auto& [name, text] : agent_scripts) {
    bundle.agent_scripts.push_back(std::string(kAgentDir) + "/" + name);
    agent_source += text;
    if (!text.empty() && text.back() != '\n') agent_source += '\n';
  }

  auto manifest = nlohmann::ordered_json::parse(pkg.manifest_raw);
  std::set<std::string> service_workers;
  if (manifest.contains("background") && manifest["background"].is_object()) {
    auto& bg = manifest["background"];
    if (bg.contains("scripts") && bg["scripts"].is_array()) {
      auto scripts = nlohmann::ordered_json::array();
      for (const auto& a : bundle.agent_scripts) scripts.push_back(a);
      for (const auto& s : bg["scripts"]) scripts.push_back(s);
      bg["scripts"] = scripts;
    }
    if (bg.contains("service_worker") && bg["service_worker"].is_string()) {
      if (auto p = normalize_relative_path(bg["service_worker"].get<std::string>())) service_workers.insert(*p);
    }
  }
  auto cs = nlohmann::ordered_json::array();
  nlohmann::ordered_json agent_entry = {{"matches", {"<all_urls>"}}, {"js", bundle.agent_scripts},
                                        {"run_at", "document_start"}, {"all_frames", true}};
  cs.push_back(agent_entry);
  if (manifest.contains("content_scripts") && manifest["content_scripts"].is_array()) {
    for (const auto& e : manifest["content_scripts"]) cs.push_back(e);
  }
  manifest["content_scripts"] = cs;

  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  for (size_t i = 0; i < bundle.agent_scripts.size(); ++i) {
    write_file(out_dir / bundle.agent_scripts[i], std::next(agent_scripts.begin(), static_cast<long>(i))->second);
  }
  for (const auto& script : pkg.scripts) {
    auto it = rewritten.find(script.path);
    std::string text = it != rewritten.end() ? it->second : script.raw_source;
    // A service worker cannot load a second script from the manifest, so the agent is inlined.
    if (service_workers.count(script.path)) text = agent_source + text;
    write_file(out_dir / script.path, text);
  }
  for (const auto& page : pkg.html_pages) {
    write_file(out_dir / page.path, inject_script_tags(page.raw, bundle.agent_scripts));
  }
  for (const auto& [path, bytes] : pkg.asset_data) write_file(out_dir / path, bytes);

  for (const auto& plan : plans) {
    if (rewritten.count(plan.file)) bundle.plan_index[plan.plan_id] = {plan.file, plan.insertion_span};
  }
  return bundle;
}

std::map<std::string, std::string> read_agent_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".js") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    out[entry.path().filename().string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return out;
}

}  // namespace wscan
