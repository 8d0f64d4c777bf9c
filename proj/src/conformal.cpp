#include "ctrac/conformal.hpp"

#include <cmath>

#include "ctrac/errors.hpp"

namespace ctrac {

ConformalRescale ConformalRescale::from_omega(const ScalarExpr& omega, int dim) {
  ConformalRescale r;
  r.omega = omega;
  for (int a = 0; a < dim; ++a) r.upsilon.push_back(omega.derivative(a));
  return r;
}

Chart rescale_chart(const Chart& chart, const ScalarExpr& omega) {
  const int d = chart.dim();
  ScalarExpr factor = exp(ScalarExpr(2.0) * omega);
  std::vector<ScalarExpr> metric;
  metric.reserve(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) metric.push_back(factor * chart.metric(i, j));
  ScalarExpr acc = chart.einstein_omega() + omega;
  Chart out(chart.box(), std::move(metric), chart.mu(), acc);
  if (chart.product()) out.set_product(*chart.product());
  return out;
}

void schouten_transform(const Chart& chart, std::span<const double> schouten, double jtrace,
                        const ConformalRescale& rescale, std::span<const double> p,
                        std::vector<double>& schouten_hat, double& jtrace_hat) {
  const int d = chart.dim();
  (void)jtrace;
  if (static_cast<int>(schouten.size()) != d * d)
    fail(ErrorKind::BadChart, "schouten tensor has wrong size");
  CurvaturePack c = curvature(chart, p);

  std::vector<double> ups(d), dups(d * d);
  for (int a = 0; a < d; ++a) {
    ups[a] = rescale.upsilon[a].eval(p);
    for (int b = 0; b < d; ++b) dups[a * d + b] = rescale.upsilon[a].derivative(b).eval(p);
  }
  // nabla_a Upsilon_b = d_a U_b - Gamma^c_ab U_c  (note dups is d_b U_a)
  double ups2 = 0.0;
  std::vector<double> upsup(d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) upsup[a] += c.ginv[a * d + b] * ups[b];
  for (int a = 0; a < d; ++a) ups2 += ups[a] * upsup[a];

  schouten_hat.assign(d * d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double grad = dups[b * d + a];  // d_a U_b
      for (int cc = 0; cc < d; ++cc) grad -= c.gamma[(cc * d + a) * d + b] * ups[cc];
      schouten_hat[a * d + b] =
          schouten[a * d + b] - grad + ups[a] * ups[b] - 0.5 * ups2 * c.g[a * d + b];
    }
  double om = rescale.omega.eval(p);
  double e2 = std::exp(-2.0 * om);
  jtrace_hat = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) jtrace_hat += e2 * c.ginv[a * d + b] * schouten_hat[a * d + b];
}

}  // namespace ctrac
