#pragma once

#include <span>
#include <vector>

#include "ctrac/chart.hpp"
#include "ctrac/jet.hpp"

namespace ctrac {

// Curvature stack at a point. Index layout: gamma[(c*d+a)*d+b] = Gamma^c_ab,
// riem[((a*d+b)*d+c)*d+e] = R_ab^c_e with the sign convention
// (nabla_a nabla_b - nabla_b nabla_a) V^c = R_ab^c_e V^e, weyl all-lower.
// For d <= 2 weyl is identically zero and the Schouten tensor comes from the
// chart's mu datum in the Einstein scale, transported to the chart scale by
// the usual Schouten transformation law.
struct CurvaturePack {
  int d = 0;
  std::vector<double> g, ginv;    // d*d
  std::vector<double> gamma;      // d^3
  std::vector<double> riem;       // d^4, R_ab^c_e
  std::vector<double> ric;        // d*d
  double sc = 0.0;
  std::vector<double> schouten;   // d*d
  double jtrace = 0.0;
  std::vector<double> weyl;       // d^4, C_abcd
};

// First-order jets of the quantities entering the tractor connection.
struct CurvatureJet {
  int d = 0;
  std::vector<Jet> g, ginv, gamma, schouten;
  Jet jtrace;
};

// Second-order jets (used for derivatives of the tractor curvature).
struct CurvatureJet2 {
  int d = 0;
  std::vector<Jet2> g, ginv, gamma, schouten;
  Jet2 jtrace;
};

CurvaturePack curvature(const Chart& chart, std::span<const double> p);
CurvatureJet curvature_jet(const Chart& chart, std::span<const double> p);
CurvatureJet2 curvature_jet2(const Chart& chart, std::span<const double> p);

double scalar_curvature(const Chart& chart, std::span<const double> p);

// max-norm of Ric - (d-1)*lambda*g at p, normalized by the max-norm of the
// inputs (capped below at 1).
double einstein_residual(const Chart& chart, double lambda, std::span<const double> p);

// Tensor field with nup upper and ndown lower indices (nup <= 1, ndown <= 2),
// components indexed upper-first, row-major.
struct TensorField {
  int nup = 0, ndown = 0;
  std::vector<ScalarExpr> comp;
};

// Levi-Civita covariant derivative at p; result has one extra leading lower
// index. Throws Error(UnsupportedValence) beyond (1,2).
std::vector<double> covariant_derivative(const Chart& chart, const TensorField& field,
                                         std::span<const double> p);

}  // namespace ctrac
