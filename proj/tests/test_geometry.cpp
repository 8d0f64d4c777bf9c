#include <doctest.h>

#include <cmath>

#include "ctrac/curvature.hpp"
#include "ctrac/product.hpp"
#include "support/fixtures.hpp"

using namespace ctrac;
using namespace ctrac::testing;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// independent curvature oracle: Christoffels and Riemann from finite
// differences of metric evaluations only (no exact derivatives anywhere)
std::vector<double> fd_christoffel(const Chart& chart, std::vector<double> p, double h = 1e-5) {
  const int d = chart.dim();
  auto metric_at = [&](const std::vector<double>& q) {
    std::vector<double> g(d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g[i * d + j] = chart.metric(i, j).eval(q);
    return g;
  };
  std::vector<double> dg(d * d * d);
  for (int a = 0; a < d; ++a) {
    std::vector<double> hi(p), lo(p);
    hi[a] += h;
    lo[a] -= h;
    auto ghi = metric_at(hi), glo = metric_at(lo);
    for (int i = 0; i < d * d; ++i) dg[a * d * d + i] = (ghi[i] - glo[i]) / (2.0 * h);
  }
  CurvaturePack c = curvature(chart, p);  // only ginv is reused; derivatives are FD
  std::vector<double> gamma(d * d * d, 0.0);
  for (int cc = 0; cc < d; ++cc)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double s = 0.0;
        for (int e = 0; e < d; ++e)
          s += c.ginv[cc * d + e] *
               (dg[a * d * d + e * d + b] + dg[b * d * d + e * d + a] - dg[e * d * d + a * d + b]);
        gamma[(cc * d + a) * d + b] = 0.5 * s;
      }
  return gamma;
}

std::vector<double> fd_riemann(const Chart& chart, std::vector<double> p, double h = 1e-4) {
  const int d = chart.dim();
  std::vector<double> dgamma(d * d * d * d);
  for (int a = 0; a < d; ++a) {
    std::vector<double> hi(p), lo(p);
    hi[a] += h;
    lo[a] -= h;
    auto ghi = fd_christoffel(chart, hi), glo = fd_christoffel(chart, lo);
    for (int i = 0; i < d * d * d; ++i) dgamma[a * d * d * d + i] = (ghi[i] - glo[i]) / (2.0 * h);
  }
  auto gamma = fd_christoffel(chart, p);
  std::vector<double> riem(d * d * d * d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int cc = 0; cc < d; ++cc)
        for (int e = 0; e < d; ++e) {
          double s = dgamma[a * d * d * d + (cc * d + b) * d + e] -
                     dgamma[b * d * d * d + (cc * d + a) * d + e];
          for (int f = 0; f < d; ++f)
            s += gamma[(cc * d + a) * d + f] * gamma[(f * d + b) * d + e] -
                 gamma[(cc * d + b) * d + f] * gamma[(f * d + a) * d + e];
          riem[((a * d + b) * d + cc) * d + e] = s;
        }
  return riem;
}

}  // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("flat chart curvature vanishes") {
  Chart c = flat(3);
  for (const auto& p : points(c, 5)) {
    CurvaturePack k = curvature(c, p);
    CHECK(max_abs(k.gamma) == doctest::Approx(0.0));
    CHECK(max_abs(k.riem) == doctest::Approx(0.0));
    CHECK(max_abs(k.schouten) == doctest::Approx(0.0));
    CHECK(k.jtrace == doctest::Approx(0.0));
    CHECK(einstein_residual(c, 0.0, p) == doctest::Approx(0.0));
  }
}

TEST_CASE("stereographic sphere: curvature of the round metric") {
  Chart c = sphere3();
  std::vector<double> origin{0.0, 0.0, 0.0};
  CurvaturePack k = curvature(c, origin);
  CHECK(k.sc == doctest::Approx(6.0).epsilon(1e-10));  // d(d-1) with d = 3

  // sectional curvature 1: R_abcd = g_ac g_bd - g_ad g_bc
  const int d = 3;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int cc = 0; cc < d; ++cc)
        for (int e = 0; e < d; ++e) {
          double rlow = 0.0;
          for (int f = 0; f < d; ++f) rlow += k.g[cc * d + f] * k.riem[((a * d + b) * d + f) * d + e];
          double want = k.g[a * d + cc] * k.g[b * d + e] - k.g[a * d + e] * k.g[b * d + cc];
          CHECK(rlow == doctest::Approx(want).epsilon(1e-9));
        }

  for (const auto& p : points(c, 10)) {
    CurvaturePack kp = curvature(c, p);
    CHECK(kp.jtrace == doctest::Approx(1.5).epsilon(1e-9));
    for (int i = 0; i < d * d; ++i)
      CHECK(kp.schouten[i] == doctest::Approx(0.5 * kp.g[i]).epsilon(1e-9));
    CHECK(einstein_residual(c, 1.0, p) < 1e-8);
  }
}

TEST_CASE("hyperbolic ball is Einstein with lambda = -1") {
  Chart c = ball3();
  for (const auto& p : points(c, 10)) CHECK(einstein_residual(c, -1.0, p) < 1e-8);
}

TEST_CASE("curvature identities on a perturbed metric") {
  Chart c = catalog_chart("perturbed_flat:d=3");
  const int d = 3;
  for (const auto& p : points(c, 15)) {
    CurvaturePack k = curvature(c, p);
    // Ric = (d-2) P + g J
    for (int i = 0; i < d * d; ++i)
      CHECK(std::abs(k.ric[i] - ((d - 2) * k.schouten[i] + k.g[i] * k.jtrace)) < 1e-10);
    // Riemann decomposition and total trace-freeness of Weyl
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int cc = 0; cc < d; ++cc)
          for (int e = 0; e < d; ++e) {
            double rlow = 0.0;
            for (int f = 0; f < d; ++f)
              rlow += k.g[cc * d + f] * k.riem[((a * d + b) * d + f) * d + e];
            double want = k.weyl[((a * d + b) * d + cc) * d + e] +
                          k.g[cc * d + a] * k.schouten[b * d + e] -
                          k.g[cc * d + b] * k.schouten[a * d + e] +
                          k.g[e * d + b] * k.schouten[a * d + cc] -
                          k.g[e * d + a] * k.schouten[b * d + cc];
            CHECK(std::abs(rlow - want) < 1e-9);
          }
    // first Bianchi R_[abc]d = 0 (lowered)
    auto rlow = [&](int a, int b, int cc, int e) {
      double s = 0.0;
      for (int f = 0; f < d; ++f) s += k.g[cc * d + f] * k.riem[((a * d + b) * d + f) * d + e];
      return s;
    };
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int cc = 0; cc < d; ++cc)
          for (int e = 0; e < d; ++e)
            CHECK(std::abs(rlow(a, b, cc, e) + rlow(b, cc, a, e) + rlow(cc, a, b, e)) < 1e-9);
  }
}

TEST_CASE("weyl is totally trace-free on a d=4 perturbed metric") {
  Chart c = catalog_chart("perturbed_flat:d=4");
  const int d = 4;
  for (const auto& p : points(c, 5)) {
    CurvaturePack k = curvature(c, p);
    double denom = std::max(1.0, max_abs(k.weyl));
    // contract every index pair with the inverse metric
    for (int slot = 0; slot < 3; ++slot) {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double tr = 0.0;
          for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
              int idx[4];
              if (slot == 0) { idx[0] = a; idx[1] = b; idx[2] = i; idx[3] = j; }
              else if (slot == 1) { idx[0] = a; idx[1] = i; idx[2] = b; idx[3] = j; }
              else { idx[0] = a; idx[1] = i; idx[2] = j; idx[3] = b; }
              tr += k.ginv[a * d + b] * k.weyl[((idx[0] * d + idx[1]) * d + idx[2]) * d + idx[3]];
            }
          CHECK(std::abs(tr) / denom < 1e-9);
        }
    }
  }
}

TEST_CASE("exact curvature matches the finite-difference oracle") {
  Chart c = catalog_chart("perturbed_flat:d=3");
  std::vector<double> p{0.31, -0.42, 0.11};
  CurvaturePack k = curvature(c, p);
  auto gamma_fd = fd_christoffel(c, p);
  for (size_t i = 0; i < gamma_fd.size(); ++i)
    CHECK(std::abs(gamma_fd[i] - k.gamma[i]) < 1e-7 * std::max(1.0, std::abs(k.gamma[i])));
  auto riem_fd = fd_riemann(c, p);
  for (size_t i = 0; i < riem_fd.size(); ++i)
    CHECK(std::abs(riem_fd[i] - k.riem[i]) < 2e-5 * std::max(1.0, std::abs(k.riem[i])));
}

TEST_CASE("covariant derivative: metricity and simple fields") {
  Chart c = catalog_chart("perturbed_flat:d=3");
  const int d = 3;
  TensorField gfield;
  gfield.nup = 0;
  gfield.ndown = 2;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) gfield.comp.push_back(c.metric(i, j));
  for (const auto& p : points(c, 6)) {
    auto nabla_g = covariant_derivative(c, gfield, p);
    CHECK(max_abs(nabla_g) < 1e-10);
  }

  Chart f = flat(3);
  TensorField coords;
  coords.nup = 1;
  coords.ndown = 0;
  for (int i = 0; i < d; ++i) coords.comp.push_back(x(i));
  for (const auto& p : points(f, 3)) {
    auto nabla = covariant_derivative(f, coords, p);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        CHECK(nabla[a * d + b] == doctest::Approx(a == b ? 1.0 : 0.0));
  }

  // rotations are Killing for the round metric
  Chart s = sphere3();
  TensorField rot;
  rot.nup = 0;
  rot.ndown = 1;
  ScalarExpr conf = ScalarExpr(4.0) / pow(ScalarExpr(1.0) + norm2_expr(3), 2);
  rot.comp = {conf * (ScalarExpr(0.0) - x(1)), conf * x(0), ScalarExpr(0.0)};
  for (const auto& p : points(s, 6)) {
    auto nabla = covariant_derivative(s, rot, p);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        CHECK(std::abs(nabla[a * d + b] + nabla[b * d + a]) < 1e-9);
  }

  TensorField bad;
  bad.nup = 1;
  bad.ndown = 3;
  CHECK_THROWS_AS(covariant_derivative(f, bad, std::vector<double>{0, 0, 0}), Error);
}

TEST_CASE("low-dimension Schouten from the mu datum") {
  Chart s2 = catalog_chart("sphere_stereo:d=2");
  for (const auto& p : points(s2, 6)) {
    CurvaturePack k = curvature(s2, p);
    for (int i = 0; i < 4; ++i) CHECK(k.schouten[i] == doctest::Approx(0.5 * k.g[i]).epsilon(1e-9));
    CHECK(k.jtrace == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(max_abs(k.weyl) == doctest::Approx(0.0));
  }
  Chart s1 = catalog_chart("circle:mu=0.5");
  std::vector<double> p{1.0};
  CurvaturePack k = curvature(s1, p);
  CHECK(k.schouten[0] == doctest::Approx(0.5));
  CHECK(k.jtrace == doctest::Approx(0.5));
}

TEST_CASE("dimension-2 chart registration demands the Einstein scale") {
  Box box;
  box.iv = {{-0.5, 0.5}, {-0.5, 0.5}};
  std::vector<ScalarExpr> metric{exp(x(0)) * ScalarExpr(1.0), ScalarExpr(0.0), ScalarExpr(0.0),
                                 ScalarExpr(1.0)};
  Chart bad(box, metric, 0.5);
  CHECK_THROWS_AS(bad.validate(), Error);

  // right Sc but wrong mu
  Chart s2 = catalog_chart("sphere_stereo:d=2");
  Chart wrongmu(s2.box(), s2.metric_entries(), 0.7);
  CHECK_THROWS_AS(wrongmu.validate(), Error);
}

TEST_SUITE_END();
