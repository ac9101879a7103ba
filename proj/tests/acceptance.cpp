// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "support/checks.hpp"

using namespace wscan::testing;

int main() {
  struct Criterion {
    const char* name;
    std::function<CheckResult()> run;
  };
  const std::vector<Criterion> criteria = {
      {"static detection on inert fixtures", check_static_fixtures},
      {"decrypt example: chain, capture point, reparse", check_decrypt_example},
      {"taint oracle equivalence (500 programs)", [] { return check_taint_oracle(500, 20240917); }},
      {"tf-idf oracle equivalence (100 corpora)", [] { return check_tfidf_oracle(100, 7); }},
      {"classifier contract", check_classifier_contract},
      {"sensitive_match oracle equivalence (1000 pairs)", [] { return check_sensitive_match_oracle(1000, 99); }},
      {"threshold boundaries", check_thresholds},
      {"detector replay matches golden report", check_replay_golden},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    CheckResult r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failures += r.ok ? 0 : 1;
    std::printf("%s %s: %s\n", r.ok ? "PASS" : "FAIL", c.name, r.detail.c_str());
  }
  return failures;
}
