#pragma once

#include <string>
#include <vector>

#include "ctrac/config.hpp"

namespace ctrac {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double worst = 0.0;  // worst residual (or distinguished measured value)
  std::string detail;
  double seconds = 0.0;
};

// The acceptance suite: every criterion runs at its stated tolerance and
// returns one result per criterion.
std::vector<CriterionResult> run_acceptance(const Defaults& cfg = Defaults{});

}  // namespace ctrac
