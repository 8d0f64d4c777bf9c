#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctrac/tractor.hpp"

namespace ctrac {

struct LoopSample {
  std::string id;
  Mat transport;          // conjugated to the common base point
  double metric_residual; // |M^T H M - H| max-norm
};

struct HolonomySample {
  int n = 0;  // d + 2
  Vec base;
  Mat hbase;  // tractor metric at the base point
  std::vector<LoopSample> loops;
  double max_metric_residual = 0.0;
};

// Deterministic loop family: coordinate-plane rectangles at three scales
// through five base points, all conjugated back to the box center. For d = 1
// the loop is the full traversal of the box (the chart read as the covering
// interval of the circle).
HolonomySample holonomy_sample(const Chart& chart, int max_loops = 24,
                               const Defaults& cfg = Defaults{});

struct SplitVerdict {
  enum class Kind { TrivialHolonomy, Witness, NoWitness } kind = Kind::NoWitness;
  std::vector<int> dims;            // block dimensions, when a witness exists
  std::vector<Vec> basis;           // block-adapted basis columns (concatenated)
  double max_offblock = 0.0;
  int commutant_dim = 0;
};

// Searches for a common invariant splitting of the sampled transport matrices
// via the commutant of the generated algebra. The absence of a witness is a
// verdict, not an error.
SplitVerdict detect_splitting(const HolonomySample& sample, const Defaults& cfg = Defaults{});

// Off-block max-norm of every sampled loop in the basis made of the two given
// blocks (used to verify an externally proposed splitting).
double offblock_residual(const HolonomySample& sample, const std::vector<Vec>& block1,
                         const std::vector<Vec>& block2);

}  // namespace ctrac
