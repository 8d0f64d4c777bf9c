#pragma once

#include <span>
#include <vector>

#include "ctrac/tractor.hpp"

namespace ctrac {

// Almost-Einstein structure: a weight-1 scale sigma solving the trace-free
// Hessian equation, its parallel tractor I = (1/d) D sigma, and the constant
// S = -h(I,I) whose sign classifies the structure.
struct AEStructure {
  ScalarExpr sigma;
  double s_const = 0.0;
};

// max-norm of trace-free(nabla nabla sigma + P sigma) at p.
double ae_residual(const Chart& chart, const ScalarExpr& sigma, std::span<const double> p);

// max-norm of nabla I at p for I = (1/d) D sigma.
double ae_parallel_residual(const Chart& chart, const ScalarExpr& sigma,
                            std::span<const double> p);

// I at p, as a slot vector.
Vec ae_tractor_value(const Chart& chart, const ScalarExpr& sigma, std::span<const double> p);

// Verifies the residual over random interior samples, the parallelism of I
// and the constancy of -h(I,I); throws NotAlmostEinstein / NotParallel.
AEStructure make_ae(const Chart& chart, const ScalarExpr& sigma, const Defaults& cfg = Defaults{});

enum class SingularityKind { Empty, IsolatedPoints, Hypersurface };

struct Classification {
  SingularityKind kind = SingularityKind::Empty;
  double s_const = 0.0;
  std::vector<Vec> points;               // refined zero samples
  double max_gradient_at_zeros = 0.0;    // isolated case: |grad sigma| at zeros
  double max_umbilicity = 0.0;           // hypersurface case
  double max_einstein_residual = 0.0;    // sigma^{-2} g against S where |sigma| > 0.1
};

// Zero-set extraction (grid + edge bisection, Newton refinement for touching
// zeros) plus the scalar-type consistency checks; throws GridTooCoarse when
// the sampled zero topology contradicts the sign of S.
Classification classify(const Chart& chart, const AEStructure& ae, const Defaults& cfg = Defaults{});

struct ParallelSpace {
  int dim = 0;
  Vec base;
  std::vector<Vec> basis;  // tractor values at the base point
  double max_closure_residual = 0.0;
};

// Dimension and basis of the space of parallel tractors over the chart box:
// joint nullspace of transported curvature operators and their first
// covariant derivatives, verified by loop-transport closure. Throws
// RankUnstable if the dimension moves under sample refinement x2.
ParallelSpace parallel_space(const Chart& chart, const Defaults& cfg = Defaults{});

}  // namespace ctrac
