#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support/checks.hpp"
#include "wscan/ast.hpp"
#include "wscan/error.hpp"
#include "wscan/extension.hpp"

namespace fs = std::filesystem;
using namespace wscan;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIo;
}

const char* kV2 = R"({"manifest_version": 2, "name": "w", "background": {"scripts": ["bg.js"]},
  "browser_action": {"default_popup": "popup.html"}, "web_accessible_resources": ["wallet.html", "logo.png"]})";

}  // namespace

TEST(Loader, MinimalV2Bundle) {
  auto pkg = load_extension_files({{"manifest.json", R"({"manifest_version": 2, "name": "w", "background": {"scripts": ["bg.js"]}})"},
                                   {"bg.js", "var a = 1;"}},
                                  "mem");
  EXPECT_EQ(pkg.manifest.version, 2);
  ASSERT_EQ(pkg.scripts.size(), 1u);
  EXPECT_EQ(pkg.scripts[0].path, "bg.js");
  EXPECT_EQ(pkg.digest.size(), 64u);
}

TEST(Loader, ArchiveWithoutManifest) {
  std::string zip = write_zip({{"bg.js", "var a = 1;"}});
  fs::path p = fs::temp_directory_path() / "wscan-no-manifest.zip";
  std::ofstream(p, std::ios::binary) << zip;
  EXPECT_EQ(code_of([&] { load_extension(p); }), ErrorCode::kMissingManifest);
  fs::remove(p);
}

TEST(Loader, ZipAndCrxRoundTrip) {
  std::map<std::string, std::string> files = {{"manifest.json", kV2}, {"bg.js", "var a = 1;"},
                                              {"popup.html", "<p>x</p>"}, {"wallet.html", "<p>y</p>"}};
  auto from_map = load_extension_files(files, "mem");
  std::string zip = write_zip(files);
  EXPECT_EQ(read_zip(zip), files);
  // CRX3: magic, version, header length, header, then the zip.
  std::string crx = std::string("Cr24") + std::string("\x03\x00\x00\x00", 4) + std::string("\x02\x00\x00\x00", 4) + "hh" + zip;
  EXPECT_EQ(strip_crx_header(crx), zip);
  fs::path p = fs::temp_directory_path() / "wscan-roundtrip.crx";
  std::ofstream(p, std::ios::binary) << crx;
  auto from_crx = load_extension(p);
  EXPECT_EQ(from_crx.digest, from_map.digest);
  fs::remove(p);
  EXPECT_EQ(code_of([] { read_zip("PK\x03\x04garbage"); }), ErrorCode::kMalformedArchive);
}

TEST(Loader, WarPagesOfClickjackingLayout) {
  auto pkg = load_extension(wscan::testing::fixtures_dir() / "static" / "clickjacking-war-pages");
  auto ep = entry_points(pkg);
  std::vector<std::string> war = ep.war_html;
  std::sort(war.begin(), war.end());
  EXPECT_EQ(war, (std::vector<std::string>{"phishing.html", "wallet.html"}));
}

TEST(Loader, MissingScriptReference) {
  EXPECT_EQ(code_of([] {
              load_extension_files({{"manifest.json", R"({"manifest_version": 2, "background": {"scripts": ["gone.js"]}})"}},
                                   "mem");
            }),
            ErrorCode::kUnresolvedScriptRef);
  EXPECT_EQ(code_of([] {
              load_extension_files(
                  {{"manifest.json", R"({"manifest_version": 2, "background": {"scripts": ["../x.js"]}})"}}, "mem");
            }),
            ErrorCode::kUnresolvedScriptRef);
}

TEST(Manifest, V2FlatWarList) {
  Manifest m = parse_manifest(kV2);
  EXPECT_EQ(m.war_patterns(), (std::vector<std::string>{"wallet.html", "logo.png"}));
  EXPECT_EQ(m.action_page, "popup.html");
}

TEST(Manifest, V3WarObjects) {
  Manifest m = parse_manifest(R"({"manifest_version": 3, "background": {"service_worker": "sw.js"},
    "web_accessible_resources": [{"resources": ["a.html"], "matches": ["<all_urls>"]}],
    "content_security_policy": {"extension_pages": "script-src 'self'; object-src 'self'"}})");
  EXPECT_EQ(m.war_patterns(), (std::vector<std::string>{"a.html"}));
  ASSERT_EQ(m.background.size(), 1u);
  EXPECT_EQ(m.background[0].kind, BackgroundRef::Kind::ServiceWorker);
  EXPECT_EQ(m.csp, "script-src 'self'; object-src 'self'");
}

TEST(Manifest, Errors) {
  EXPECT_EQ(code_of([] { parse_manifest(R"({"manifest_version": 4})"); }), ErrorCode::kUnsupportedManifestVersion);
  EXPECT_EQ(code_of([] { parse_manifest("{not json"); }), ErrorCode::kInvalidJson);
  EXPECT_EQ(code_of([] { parse_manifest(R"({"manifest_version": 2, "web_accessible_resources": 5})"); }),
            ErrorCode::kInvalidJson);
}

TEST(Normalize, FoldsStringConcat) { EXPECT_EQ(normalize_source("var x=\"A\"+\"ES\";"), "var x = \"AES\";\n"); }

TEST(Normalize, MinifiedDecryptExampleMatchesReadableForm) {
  const char* minified =
      "function UnlockExample(x,y,z){function process(temp){return temp}function unlock(a,b){var c=process(a);"
      "function unlocklog(d){console.log(d)}const decrypted=CryptoJS.AES.decrypt(c,b)}}";
  std::ifstream in(wscan::testing::fixtures_dir() / "js" / "unlock.js");
  std::string readable((std::istreambuf_iterator<char>(in)), {});
  std::string canonical = normalize_source(minified);
  EXPECT_GT(std::count(canonical.begin(), canonical.end(), '\n'), 5);
  EXPECT_TRUE(js::structurally_equal(js::parse_script(canonical).program(), js::parse_script(readable).program()));
}

TEST(Normalize, BinaryInputIsLeftAlone) {
  std::string garbage("\x00\x01\xff\xfe{{{", 8);
  Normalized n = normalize_source_ex(garbage);
  EXPECT_TRUE(n.skipped);
  EXPECT_EQ(n.text, garbage);
  EXPECT_FALSE(n.note.empty());
}

TEST(Normalize, ReparseIsStructurallyIdenticalModuloFolding) {
  for (const char* f : {"unlock.js", "derive.js", "phishing.js"}) {
    std::ifstream in(wscan::testing::fixtures_dir() / "js" / f);
    std::string src((std::istreambuf_iterator<char>(in)), {});
    js::Ast a = js::parse_script(src);
    js::fold_constant_concat(a.mutable_program());
    a.renumber();
    js::Ast b = js::parse_script(normalize_source(src));
    EXPECT_TRUE(js::structurally_equal(a.program(), b.program())) << f;
  }
}

TEST(Paths, NormalizeAndGlob) {
  EXPECT_EQ(normalize_relative_path("./a/../b/c.js"), "b/c.js");
  EXPECT_FALSE(normalize_relative_path("../x"));
  EXPECT_TRUE(glob_match("*.html", "wallet.html"));
  EXPECT_TRUE(glob_match("pages/*", "pages/a.html"));
  EXPECT_FALSE(glob_match("*.html", "logo.png"));
}
