#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "ctrac/almost_einstein.hpp"
#include "ctrac/chart.hpp"
#include "ctrac/product.hpp"

namespace ctrac::testing {

inline ScalarExpr x(int a) { return ScalarExpr::var(a); }

inline ScalarExpr norm2_expr(int d) {
  ScalarExpr s(0.0);
  for (int a = 0; a < d; ++a) s = s + pow(x(a), 2);
  return s;
}

inline Chart flat(int d) { return catalog_chart("flat:d=" + std::to_string(d)); }
inline Chart sphere3() { return catalog_chart("sphere_stereo:d=3"); }
inline Chart ball3() { return catalog_chart("hyperbolic_ball:d=3"); }

// sigma fixtures on the flat chart
inline ScalarExpr sigma_minus(int d) { return (ScalarExpr(1.0) - norm2_expr(d)) / ScalarExpr(2.0); }
inline ScalarExpr sigma_plus(int d) { return (ScalarExpr(1.0) + norm2_expr(d)) / ScalarExpr(2.0); }
inline ScalarExpr sigma_zero(int d) { return norm2_expr(d) / ScalarExpr(2.0); }

inline std::vector<std::vector<double>> points(const Chart& c, int count, unsigned seed = 42) {
  return sample_points(c.box(), count, seed);
}

// random expression trees for property tests (bounded so evaluation stays finite)
inline ScalarExpr random_expr(std::mt19937_64& rng, int dim, int depth = 3) {
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_real_distribution<double> cst(-2.0, 2.0);
  if (depth == 0) {
    if (pick(rng) < 4) return ScalarExpr(cst(rng));
    return x(std::uniform_int_distribution<int>(0, dim - 1)(rng));
  }
  switch (pick(rng)) {
    case 0: return random_expr(rng, dim, depth - 1) + random_expr(rng, dim, depth - 1);
    case 1: return random_expr(rng, dim, depth - 1) - random_expr(rng, dim, depth - 1);
    case 2: return random_expr(rng, dim, depth - 1) * random_expr(rng, dim, depth - 1);
    case 3: return sin(random_expr(rng, dim, depth - 1));
    case 4: return cos(random_expr(rng, dim, depth - 1));
    case 5: return exp(ScalarExpr(0.3) * sin(random_expr(rng, dim, depth - 1)));
    case 6: return pow(random_expr(rng, dim, depth - 1), 2);
    case 7: return sinh(ScalarExpr(0.5) * cos(random_expr(rng, dim, depth - 1)));
    case 8: return cosh(ScalarExpr(0.5) * sin(random_expr(rng, dim, depth - 1)));
    default: return ScalarExpr(cst(rng)) * x(std::uniform_int_distribution<int>(0, dim - 1)(rng));
  }
}

// Richardson-extrapolated central difference, the independent oracle for
// exact differentiation
inline double fd_derivative(const ScalarExpr& f, std::vector<double> p, int axis,
                            double h = 1e-5) {
  auto diff = [&](double step) {
    std::vector<double> hi(p), lo(p);
    hi[axis] += step;
    lo[axis] -= step;
    return (f.eval(hi) - f.eval(lo)) / (2.0 * step);
  };
  double d1 = diff(h), d2 = diff(h / 2.0);
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace ctrac::testing
