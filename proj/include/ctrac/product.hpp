#pragma once

#include <span>
#include <string>
#include <vector>

#include "ctrac/almost_einstein.hpp"
#include "ctrac/tractor.hpp"

namespace ctrac {

// Two Einstein factors whose Einstein constants pair as mu and -mu (the
// factor scale tractors satisfy |I_1|^2 = -|I_2|^2 = -2 mu != 0).
struct SpecialProductSpec {
  Chart chart1, chart2;
  int m1 = 0, m2 = 0;
  double mu = 0.0;
};

// Einstein-constant datum of a chart: Sc/(2 d (d-1)) for d >= 3 (constant
// over the box, einstein_residual enforced), the mu datum for d <= 2.
double einstein_mu(const Chart& chart, const Defaults& cfg = Defaults{});

SpecialProductSpec validate_special_product(const Chart& chart1, const Chart& chart2,
                                            const Defaults& cfg = Defaults{});

// Block-diagonal product chart of dimension m1 + m2, carrying product
// metadata for the tractor splitting.
Chart build_product_chart(const SpecialProductSpec& spec);

// Pair <-> slot isomorphism of Proposition-style product tractors. Pairs are
// factor tractor values constrained orthogonal to the factor scale tractors.
Vec pair_to_slots(const SpecialProductSpec& spec, std::span<const double> u1,
                  std::span<const double> u2);
void slots_to_pair(const SpecialProductSpec& spec, std::span<const double> u, Vec& u1, Vec& u2);

// Splits a product point into factor points.
void split_point(const SpecialProductSpec& spec, std::span<const double> p, Vec& p1, Vec& p2);

// Block bases of the product tractor fibre coming from the factor tractor
// spaces orthogonal to the scale tractors, evaluated at a product point.
std::pair<std::vector<Vec>, std::vector<Vec>> prodt_blocks(const SpecialProductSpec& spec,
                                                           std::span<const double> p);

struct LiftedAE {
  Chart product;
  AEStructure ae;            // sigma is the pullback of the factor scale
  double factor_parallel_residual = 0.0;
  double product_parallel_residual = 0.0;
};

// Lifts a parallel factor tractor (given by its almost-Einstein scale,
// orthogonal to that factor's scale tractor) to the product. Throws
// NotOrthogonal / NotParallel.
LiftedAE lift_tractor(const SpecialProductSpec& spec, int which_factor, const ScalarExpr& sigma_k,
                      const Defaults& cfg = Defaults{});

// Poincare-Einstein collar r^{-2}(dr^2 + (1 - mu r^2/2)^2 g1 + (1 + mu r^2/2)^2 g2)
// over r in [r_min, r_max]; chart2 may be omitted (m2 = 0).
Chart build_collar(const Chart& chart1, const Chart* chart2, double mu, double r_min,
                   double r_max, const Defaults& cfg = Defaults{});

// Named fixture charts ("flat:d=3", "circle:mu=0.5", "product:s2xh2", ...).
std::vector<std::string> catalog_names();
Chart catalog_chart(const std::string& name, const Defaults& cfg = Defaults{});

}  // namespace ctrac
