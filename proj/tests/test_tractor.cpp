#include <doctest.h>

#include <cmath>
#include <random>

#include "ctrac/almost_einstein.hpp"
#include "ctrac/product.hpp"
#include "ctrac/tractor.hpp"
#include "support/fixtures.hpp"

using namespace ctrac;
using namespace ctrac::testing;

namespace {

double max_abs(const std::vector<Vec>& rows) {
  double m = 0.0;
  for (const auto& r : rows)
    for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

TractorField constant_field(int d, double s, double r) {
  TractorField f;
  f.sigma = ScalarExpr(s);
  f.mu.assign(d, ScalarExpr(0.0));
  f.rho = ScalarExpr(r);
  return f;
}

TractorField random_field(std::mt19937_64& rng, int d) {
  TractorField f;
  f.sigma = random_expr(rng, d, 2);
  for (int a = 0; a < d; ++a) f.mu.push_back(random_expr(rng, d, 2));
  f.rho = random_expr(rng, d, 2);
  return f;
}

}  // namespace

TEST_SUITE_BEGIN("tractor");

TEST_CASE("tractor metric closed forms") {
  Chart c = flat(3);
  std::vector<double> p{0.2, -0.1, 0.4};
  Vec xnull{1, 0, 0, 0, 0};
  CHECK(tractor_metric(c, xnull, xnull, p) == doctest::Approx(0.0));
  Vec u{1, 0, 0, 0, 1};
  CHECK(tractor_metric(c, u, u, p) == doctest::Approx(2.0));

  // I = ((1-|x|^2)/2, -x, 1) has h(I,I) = 1 everywhere
  for (const auto& q : points(c, 8)) {
    double r2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
    Vec i{(1 - r2) / 2, -q[0], -q[1], -q[2], 1.0};
    CHECK(tractor_metric(c, i, i, q) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("scale mismatch is rejected") {
  Chart c = flat(3);
  ScaledTractor a{1, {1, 0, 0, 0, 0}}, b{2, {1, 0, 0, 0, 0}};
  CHECK_THROWS_AS(tractor_metric(c, a, b, std::vector<double>{0, 0, 0}), Error);
}

TEST_CASE("low-dimensional charts need the mu datum for the connection") {
  Box box;
  box.iv = {{0.0, 1.0}};
  Chart nomu(box, {ScalarExpr(1.0)});  // constructed without mu
  CHECK_THROWS_AS(connection_matrices(nomu, std::vector<double>{0.5}), Error);
  try {
    connection_matrices(nomu, std::vector<double>{0.5});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingMu);
  }
}

TEST_CASE("splitting change matches the textbook formula") {
  Chart c = flat(3);
  auto r = ConformalRescale::from_omega(x(0), 3);
  for (const auto& p : points(c, 6)) {
    Vec u{1, 0, 0, 0, 0};
    Vec got = transform_splitting(c, u, r, p);
    CHECK(got[0] == doctest::Approx(1.0));
    CHECK(got[1] == doctest::Approx(1.0));  // mu_b + sigma Upsilon_b, Upsilon = dx1
    CHECK(got[2] == doctest::Approx(0.0));
    CHECK(got[3] == doctest::Approx(0.0));
    CHECK(got[4] == doctest::Approx(-0.5));  // rho - 1/2 sigma |Upsilon|^2
  }
}

TEST_CASE("tractor metric is invariant under the transformation law") {
  std::mt19937_64 rng(5150);
  for (const Chart& c : {sphere3(), catalog_chart("perturbed_flat:d=3")}) {
    ScalarExpr om = ScalarExpr(0.4) * x(0) + ScalarExpr(0.2) * sin(x(1));
    Chart hat = rescale_chart(c, om);
    auto r = ConformalRescale::from_omega(om, 3);
    for (int k = 0; k < 4; ++k) {
      TractorField uf = random_field(rng, 3), vf = random_field(rng, 3);
      for (const auto& p : points(c, 4)) {
        Vec u(5), v(5);
        u[0] = uf.sigma.eval(p);
        v[0] = vf.sigma.eval(p);
        for (int a = 0; a < 3; ++a) {
          u[1 + a] = uf.mu[a].eval(p);
          v[1 + a] = vf.mu[a].eval(p);
        }
        u[4] = uf.rho.eval(p);
        v[4] = vf.rho.eval(p);
        double before = tractor_metric(c, u, v, p);
        Vec uh = transform_tractor(c, u, r, p), vh = transform_tractor(c, v, r, p);
        double after = tractor_metric(hat, uh, vh, p);
        CHECK(std::abs(before - after) < 1e-10 * std::max(1.0, std::abs(before)));
      }
    }
  }
}

TEST_CASE("parallel tractors on the flat chart") {
  Chart c = flat(3);
  ExprTractorField constant(constant_field(3, 1.0, 0.0));
  TractorField tf;
  tf.sigma = norm2_expr(3) / ScalarExpr(2.0);
  tf.mu = {x(0), x(1), x(2)};
  tf.rho = ScalarExpr(-1.0);
  ExprTractorField ripple(tf);
  for (const auto& p : points(c, 6)) {
    CHECK(max_abs(tractor_connection(c, constant, p)) < 1e-14);
    CHECK(max_abs(tractor_connection(c, ripple, p)) < 1e-13);
  }
}

TEST_CASE("einstein tractor on the round sphere is parallel") {
  Chart c = sphere3();
  ExprTractorField u(constant_field(3, 1.0, -0.5));
  for (const auto& p : points(c, 8)) CHECK(max_abs(tractor_connection(c, u, p)) < 1e-10);
}

TEST_CASE("thomas operator closed forms") {
  Chart c = flat(3);
  ScalarExpr half_r2 = norm2_expr(3) / ScalarExpr(2.0);
  for (const auto& p : points(c, 5)) {
    Vec dv = thomas_d(c, half_r2, 1.0, p);
    for (double& v : dv) v /= 3.0;
    double r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    CHECK(dv[0] == doctest::Approx(r2 / 2));
    for (int a = 0; a < 3; ++a) CHECK(dv[1 + a] == doctest::Approx(p[a]));
    CHECK(dv[4] == doctest::Approx(-1.0));

    Vec one = thomas_d(c, ScalarExpr(1.0), 1.0, p);
    for (double& v : one) v /= 3.0;
    CHECK(one[0] == doctest::Approx(1.0));
    CHECK(one[4] == doctest::Approx(0.0));
  }
  Chart s = sphere3();
  for (const auto& p : points(s, 5)) {
    Vec dv = thomas_d(s, ScalarExpr(1.0), 1.0, p);
    for (double& v : dv) v /= 3.0;
    CHECK(dv[0] == doctest::Approx(1.0));
    CHECK(dv[1] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(dv[4] == doctest::Approx(-0.5).epsilon(1e-10));
  }
}

TEST_CASE("connection is conformally covariant") {
  std::mt19937_64 rng(99);
  Chart c = sphere3();
  ScalarExpr om = ScalarExpr(0.3) * x(0) + ScalarExpr(0.15) * cos(x(2));
  Chart hat = rescale_chart(c, om);
  auto r = ConformalRescale::from_omega(om, 3);
  for (int k = 0; k < 3; ++k) {
    auto base = std::make_shared<ExprTractorField>(random_field(rng, 3));
    TransformedTractorField hatfield(base, c, om);
    for (const auto& p : points(c, 4)) {
      auto lhs_rows = tractor_connection(c, *base, p);      // nabla U in the old scale
      auto rhs_rows = tractor_connection(hat, hatfield, p); // nabla-hat U-hat
      double scale = std::max(1.0, max_abs(lhs_rows));
      for (int a = 0; a < 3; ++a) {
        Vec moved = transform_tractor(c, lhs_rows[a], r, p);
        for (int s = 0; s < 5; ++s) CHECK(std::abs(moved[s] - rhs_rows[a][s]) / scale < 1e-8);
      }
    }
  }
}

TEST_CASE("connection preserves the tractor metric") {
  std::mt19937_64 rng(123);
  Chart c = catalog_chart("perturbed_flat:d=3");
  for (int k = 0; k < 3; ++k) {
    TractorField uf = random_field(rng, 3), vf = random_field(rng, 3);
    ExprTractorField ue(uf), ve(vf);
    for (const auto& p : points(c, 4)) {
      CurvatureJet cj = curvature_jet(c, p);
      auto us = ue.slots(c, p), vs = ve.slots(c, p);
      // d_a h(U,V) via jets of the slots and of the inverse metric
      Jet h(0.0, 3);
      h = us[0] * vs[4] + us[4] * vs[0];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) h += cj.ginv[i * 3 + j] * us[1 + i] * vs[1 + j];
      auto nu = tractor_connection(c, ue, p), nv = tractor_connection(c, ve, p);
      Vec uval(5), vval(5);
      for (int s = 0; s < 5; ++s) {
        uval[s] = us[s].v;
        vval[s] = vs[s].v;
      }
      for (int a = 0; a < 3; ++a) {
        double rhs = tractor_metric(c, nu[a], vval, p) + tractor_metric(c, uval, nv[a], p);
        CHECK(std::abs(h.d[a] - rhs) < 1e-9 * std::max(1.0, std::abs(rhs)));
      }
    }
  }
}

TEST_CASE("derivative of the canonical tractor reproduces the soldering form") {
  Chart c = catalog_chart("perturbed_flat:d=3");
  ExprTractorField xfield(constant_field(3, 0.0, 1.0));  // rho -> rho X injection
  for (const auto& p : points(c, 5)) {
    CurvaturePack k = curvature(c, p);
    auto rows = tractor_connection(c, xfield, p);
    for (int a = 0; a < 3; ++a) {
      CHECK(rows[a][0] == doctest::Approx(0.0));  // sigma slot stays zero
      for (int b = 0; b < 3; ++b) {
        // mu-slot, raised, is the identity delta_a^b
        double up = 0.0;
        for (int e = 0; e < 3; ++e) up += k.ginv[b * 3 + e] * rows[a][1 + e];
        CHECK(up == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("parallel transport on the flat chart") {
  Chart c = flat(3);
  Curve curve;
  curve.comp = {ScalarExpr(-0.5) + x(0) * ScalarExpr(1.0),
                ScalarExpr(0.2) * sin(ScalarExpr(3.0) * x(0)), ScalarExpr(0.1)};
  Vec u0{1, 0, 0, 0, 0};
  auto res = parallel_transport(c, curve, u0);
  for (int s = 0; s < 5; ++s) CHECK(res.endpoint[s] == doctest::Approx(u0[s]).epsilon(1e-10));
  CHECK(res.metric_drift < 1e-9);

  // closed rectangle loop: trivial holonomy
  Vec base{0.1, -0.2, 0.0};
  auto segs = Curve::rectangle(base, 0, 1, 0.5, 0.4);
  Mat loop = transport_matrix_path(c, segs);
  Mat id = mat_identity(5);
  for (int i = 0; i < 25; ++i) CHECK(std::abs(loop[i] - id[i]) < 1e-9);
}

TEST_CASE("transport preserves h along curves of the curved fixtures") {
  for (const Chart& c : {sphere3(), catalog_chart("perturbed_flat:d=3")}) {
    Curve curve;
    curve.comp = {ScalarExpr(-0.4) + ScalarExpr(0.8) * x(0),
                  ScalarExpr(0.3) * sin(ScalarExpr(2.0) * x(0)), ScalarExpr(-0.1) + ScalarExpr(0.3) * x(0)};
    Vec u0{0.3, 1.0, -0.2, 0.5, -0.7};
    auto res = parallel_transport(c, curve, u0);
    CHECK(res.metric_drift < 1e-9);
  }
}

TEST_CASE("transport step budget failure") {
  Chart c = sphere3();
  Curve curve;
  curve.comp = {ScalarExpr(-0.4) + ScalarExpr(0.8) * x(0), ScalarExpr(0.0), ScalarExpr(0.0)};
  Defaults cfg;
  cfg.rk_max_steps = 4;
  Vec u0{1, 0, 0, 0, 0};
  CHECK_THROWS_AS(parallel_transport(c, curve, u0, cfg), Error);
}

TEST_CASE("low-dimensional connections and the circle ODE") {
  // mu = -1/2: (1, 0, 1/2) is parallel
  Chart neg = catalog_chart("circle:mu=-0.5");
  ExprTractorField i2(constant_field(1, 1.0, 0.5));
  for (const auto& p : points(neg, 5)) CHECK(max_abs(tractor_connection(neg, i2, p)) < 1e-12);

  // mu = 1/2: the triple of s = cos t is parallel
  Chart pos = catalog_chart("circle:mu=0.5");
  TractorField cosf;
  cosf.sigma = cos(x(0));
  cosf.mu = {ScalarExpr(0.0) - sin(x(0))};
  cosf.rho = ScalarExpr(0.5) * cos(x(0));
  ExprTractorField ce(cosf);
  for (const auto& p : points(pos, 5)) CHECK(max_abs(tractor_connection(pos, ce, p)) < 1e-12);

  auto basis = circle_ode_solutions(0.5);
  CHECK(basis.period() == doctest::Approx(2 * 3.14159265358979));
  auto triple = basis.triple(1, 0.7);
  CHECK(triple[0] == doctest::Approx(std::cos(0.7)));
  CHECK(triple[1] == doctest::Approx(-std::sin(0.7)));
  CHECK(triple[2] == doctest::Approx(0.5 * std::cos(0.7)));

  // non-constant solutions with mu > 0 have exactly two zeros per period
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int k = 0; k < 12; ++k) {
    double a = uni(rng), b = uni(rng);
    if (std::abs(a) + std::abs(b) < 0.1) continue;
    auto s = [&](double t) { return a * basis.s(1, t) + b * basis.s(2, t); };
    int zeros = 0;
    int nsteps = 2000;
    for (int i = 0; i < nsteps; ++i) {
      double t0 = basis.period() * i / nsteps, t1 = basis.period() * (i + 1) / nsteps;
      if ((s(t0) < 0) != (s(t1) < 0)) ++zeros;
    }
    CHECK(zeros == 2);
  }

  // mu = 0: s = t has a single zero on a bounded window containing 0
  auto flat_basis = circle_ode_solutions(0.0);
  int zeros = 0;
  for (int i = -1000; i < 1000; ++i)
    if ((flat_basis.s(1, i * 0.01) < 0) != (flat_basis.s(1, (i + 1) * 0.01) < 0)) ++zeros;
  CHECK(zeros == 1);

  // mu = -1/2: no non-trivial periodic solution over a 4 pi window
  auto hyp = circle_ode_solutions(-0.5);
  double window = 4 * 3.14159265358979323846;
  for (int k = 1; k < 3; ++k)
    CHECK(std::abs(hyp.s(k, window) - hyp.s(k, 0.0)) > 0.9);

  // transport over the full circle: mu = 1/2 gives the identity
  Mat m = transport_matrix(pos, Curve::segment(std::vector<double>{0.0},
                                               std::vector<double>{2 * 3.14159265358979323846}));
  Mat id = mat_identity(3);
  for (int i = 0; i < 9; ++i) CHECK(std::abs(m[i] - id[i]) < 1e-8);
  // ... and mu = -1/2 does not
  Mat mneg = transport_matrix(neg, Curve::segment(std::vector<double>{0.0},
                                                  std::vector<double>{2 * 3.14159265358979323846}));
  double dev = 0.0;
  for (int i = 0; i < 9; ++i) dev = std::max(dev, std::abs(mneg[i] - id[i]));
  CHECK(dev > 1.0);
}

TEST_CASE("scale tractor parallel iff the trace-free Hessian equation holds") {
  Chart c = flat(3);
  // solution family
  for (const ScalarExpr& good : {sigma_minus(3), sigma_plus(3), sigma_zero(3), ScalarExpr(1.0)}) {
    for (const auto& p : points(c, 4)) CHECK(ae_parallel_residual(c, good, p) < 1e-10);
  }
  // non-solution: sigma = x1 x2 has residual 1 and a non-parallel tractor
  ScalarExpr bad = x(0) * x(1);
  double worst = 0.0, res = 0.0;
  for (const auto& p : points(c, 6)) {
    worst = std::max(worst, ae_parallel_residual(c, bad, p));
    res = std::max(res, ae_residual(c, bad, p));
  }
  CHECK(res == doctest::Approx(1.0));
  CHECK(worst > 0.5);
}

TEST_SUITE_END();
