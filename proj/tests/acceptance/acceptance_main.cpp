// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.

#include <cstdio>

#include "ctrac/selftest.hpp"

int main() {
  auto results = ctrac::run_acceptance();
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%s] %2d  %-62s worst %.3e  (%.1f s)%s%s\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.worst, r.seconds, r.detail.empty() ? "" : "  ",
                r.detail.c_str());
    all = all && r.pass;
  }
  std::printf("%s: %zu criteria\n", all ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
              results.size());
  return all ? 0 : 1;
}
