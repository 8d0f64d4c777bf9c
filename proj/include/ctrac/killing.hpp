#pragma once

#include <span>
#include <vector>

#include "ctrac/almost_einstein.hpp"
#include "ctrac/tractor.hpp"

namespace ctrac {

// Conformal Killing machinery. Vector fields enter with lowered components
// k_a (exact expressions); the CLI lowers contravariant input symbolically.

// max-norm of the trace-free symmetrized covariant derivative at p.
double ck_residual(const Chart& chart, std::span<const ScalarExpr> k_low,
                   std::span<const double> p);

// 2-form tractor slots at a point: primary k, curl, divergence/d, and the
// bottom slot (1/d)(div(tfsym grad k) - grad div k) - P k.
struct KillingSlots {
  Vec k_low, k_up;
  std::vector<double> curl_low;  // d*d antisymmetric
  double w = 0.0;
  Vec x_low, x_up;
};

KillingSlots kk_slots(const Chart& chart, std::span<const ScalarExpr> k_low,
                      std::span<const double> p);

// The 2-form tractor as an antisymmetric (d+2)x(d+2) matrix with both indices
// down; primary part recoverable as K[rho-row][mu-column].
Mat kk_matrix(const Chart& chart, std::span<const ScalarExpr> k_low, std::span<const double> p);

// Wedge of two tractor values, both indices lowered with h.
Mat wedge_matrix(const Chart& chart, std::span<const double> u, std::span<const double> v,
                 std::span<const double> p);

// Residual of the prolongation transport equation
// nabla_a K - k^b Omega_{ab} = 0 at p (max over directions a).
double cktreq_residual(const Chart& chart, std::span<const ScalarExpr> k_low,
                       std::span<const double> p);

// Residual of plain 2-form parallelism nabla_a K = 0 at p.
double twoform_parallel_residual(const Chart& chart, std::span<const ScalarExpr> k_low,
                                 std::span<const double> p);

struct ProlongResult {
  double max_ck_residual = 0.0;
  double max_cktreq_residual = 0.0;
};

// Verifies the conformal Killing equation over samples (throws
// NotConformalKilling) and reports the transport-equation residual.
ProlongResult prolong_ck(const Chart& chart, std::span<const ScalarExpr> k_low,
                         const Defaults& cfg = Defaults{});

struct WedgeResult {
  std::vector<ScalarExpr> k_low;    // sigma1 d sigma2 - sigma2 d sigma1
  double max_ck_residual = 0.0;
  double max_slot_vs_wedge = 0.0;   // slot-formula matrix against I1 ^ I2
  double max_parallel_residual = 0.0;
  bool gradient_in_scale1 = false;
  double max_gradient_check = 0.0;  // |k - grad(sigma2/sigma1)| in the sigma1 scale
};

// Wedge of two almost-Einstein tractors; throws LinearlyDependent when the
// wedge vanishes identically on the sample grid.
WedgeResult wedge_parallel(const Chart& chart, const AEStructure& ae1, const AEStructure& ae2,
                           const Defaults& cfg = Defaults{});

enum class Essentiality { Essential, Inconclusive, NotApplicableNonGradient };

struct EssentialReport {
  Essentiality verdict = Essentiality::Inconclusive;
  KillingSlots slots;
};

// Slot evaluation at a zero of k; ESSENTIAL requires the gradient hypothesis
// (curl-free in the declared scale). Throws NotAZero / NotConformalKilling.
EssentialReport essential_witness(const Chart& chart, std::span<const ScalarExpr> k_low,
                                  std::span<const double> p, const Defaults& cfg = Defaults{});

// Conformally invariant first-order map from weight-w covectors to covector
// tractors: u_a -> (d+w-2) Z u - X div u.
Vec m_operator(const Chart& chart, std::span<const ScalarExpr> u_low, double w,
               std::span<const double> p);

}  // namespace ctrac
