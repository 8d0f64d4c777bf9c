#pragma once

#include <span>
#include <vector>

#include "ctrac/chart.hpp"
#include "ctrac/curvature.hpp"

namespace ctrac {

// A conformal change g -> e^{2 omega} g together with the exact 1-form
// Upsilon = d omega.
struct ConformalRescale {
  ScalarExpr omega;
  std::vector<ScalarExpr> upsilon;

  static ConformalRescale from_omega(const ScalarExpr& omega, int dim);
};

// Chart with metric entries multiplied by exp(2 omega). For d <= 2 the mu
// datum is carried along and the accumulated conformal factor back to the
// Einstein scale is tracked on the chart.
Chart rescale_chart(const Chart& chart, const ScalarExpr& omega);

// Schouten transformation law: given P (and its trace J) of the chart metric
// at p, returns the Schouten tensor and trace of e^{2 omega} g at p.
void schouten_transform(const Chart& chart, std::span<const double> schouten, double jtrace,
                        const ConformalRescale& rescale, std::span<const double> p,
                        std::vector<double>& schouten_hat, double& jtrace_hat);

}  // namespace ctrac
