#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "wscan/semantics.hpp"

// Independent oracles and the end-to-end checks shared by the unit tests and the
// acceptance binary.
namespace wscan::testing {

struct CheckResult {
  bool ok = false;
  std::string detail;
};

std::filesystem::path fixtures_dir();

// ---- oracles ----

// Five encodings computed without the library's encoding helpers.
std::string oracle_hex(const std::string& s);
std::string oracle_base64_unpadded(const std::string& s);
std::string oracle_json_body(const std::string& s);
std::string oracle_utf16le(const std::string& s);
// Index of the first of raw, hex, base64, json, utf16 found in the haystack; -1 if none
// or the needle is shorter than four bytes.
int oracle_sensitive_match(const std::string& needle, const std::string& haystack);

// tf = raw count, idf = ln(N / df), computed by direct counting.
std::map<std::string, double> oracle_tfidf(const std::vector<std::vector<std::string>>& corpus, size_t doc);

// A random straight-line program with helper functions and DOM sinks, and for each sink
// whether a URL source and whether an opaque value can reach it (flow-insensitive).
struct RandomProgram {
  std::string source;
  std::vector<bool> sink_tainted;
  std::vector<bool> sink_external;
};
RandomProgram random_taint_program(uint64_t seed);

// Observation that satisfies every keyword group (first phrase) and predicate of an entry.
PageObservation synthesize_observation(const SemanticsEntry& entry);
// Tokens with every occurrence of every phrase of the group removed.
std::vector<std::string> delete_group_hits(const std::vector<std::string>& tokens, const std::vector<Phrase>& group);
PageObservation import_setup_observation();

// ---- acceptance checks ----

CheckResult check_static_fixtures();
CheckResult check_decrypt_example();
CheckResult check_taint_oracle(int cases, uint64_t seed);
CheckResult check_tfidf_oracle(int corpora, uint64_t seed);
CheckResult check_classifier_contract();
CheckResult check_sensitive_match_oracle(int pairs, uint64_t seed);
CheckResult check_thresholds();
CheckResult check_replay_golden();

}  // namespace wscan::testing
