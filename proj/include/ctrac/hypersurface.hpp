#pragma once

#include <span>
#include <vector>

#include "ctrac/tractor.hpp"

namespace ctrac {

struct AEStructure;

// Regular level set {sigma = 0} with refined sample points.
struct LevelSurface {
  ScalarExpr sigma;
  std::vector<Vec> samples;
};

// Grid + edge-bisection extraction of the zero set; throws SingularLevelSet
// if no regular zero crossing is sampled.
LevelSurface extract_level_surface(const Chart& chart, const ScalarExpr& sigma,
                                   const Defaults& cfg = Defaults{});

// Normal tractor (0, n_a, -H) at a surface point, n the unit conormal on the
// sigma-increasing side and H the average of the principal curvatures.
Vec normal_tractor(const Chart& chart, const LevelSurface& surf, std::span<const double> p);

// -h(K, N): the invariant pairing generalizing mean curvature along the
// surface; constant when K and the surface scale are both parallel.
double generalized_mean_curvature(const Chart& chart, const AEStructure& k,
                                  const LevelSurface& surf, std::span<const double> p);

// max-norm of the trace-free second fundamental form at p.
double umbilicity_residual(const Chart& chart, const LevelSurface& surf,
                           std::span<const double> p);

// Sample points on {s1 = 0} intersect {s2 = 0} (Newton from grid seeds).
std::vector<Vec> intersect_level_sets(const Chart& chart, const ScalarExpr& s1,
                                      const ScalarExpr& s2, int max_count,
                                      const Defaults& cfg = Defaults{});

// Umbilicity of the codimension-2 intersection viewed as a hypersurface of
// {s2 = 0} (second-order quantities on the extracted surface).
double intersection_umbilicity_residual(const Chart& chart, const ScalarExpr& s1,
                                        const ScalarExpr& s2, std::span<const double> p);

}  // namespace ctrac
