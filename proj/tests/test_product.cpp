#include <doctest.h>

#include <cmath>
#include <random>

#include "ctrac/product.hpp"
#include "support/fixtures.hpp"

using namespace ctrac;
using namespace ctrac::testing;

namespace {

Chart sphere2_wide() {
  // stereographic 2-sphere chart whose box covers the equator |y| = 1
  Box box;
  box.iv = {{-1.3, 1.3}, {-1.3, 1.3}};
  ScalarExpr conf = ScalarExpr(4.0) / pow(ScalarExpr(1.0) + norm2_expr(2), 2);
  std::vector<ScalarExpr> m{conf, ScalarExpr(0.0), ScalarExpr(0.0), conf};
  Chart c(box, m, 0.5);
  c.validate();
  return c;
}

Chart h2_ball() { return catalog_chart("hyperbolic_ball:d=2"); }

// ambient height of the round sphere in stereographic coordinates
ScalarExpr height2() {
  return (ScalarExpr(1.0) - norm2_expr(2)) / (ScalarExpr(1.0) + norm2_expr(2));
}

}  // namespace

TEST_SUITE_BEGIN("product");

TEST_CASE("special product validation") {
  Chart s2 = catalog_chart("sphere_stereo:d=2");
  Chart h2 = h2_ball();
  auto spec = validate_special_product(s2, h2);
  CHECK(spec.mu == doctest::Approx(0.5));
  CHECK(spec.m1 == 2);
  CHECK(spec.m2 == 2);

  CHECK_THROWS_AS(validate_special_product(s2, s2), Error);
  try {
    validate_special_product(s2, s2);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ScalarMismatch);
  }

  // exotic circle factor with |I_2|^2 = 1
  auto exotic = validate_special_product(s2, catalog_chart("circle:mu=-0.5"));
  CHECK(exotic.mu == doctest::Approx(0.5));

  // 3-sphere against hyperbolic 3-space
  auto spec3 = validate_special_product(sphere3(), ball3());
  CHECK(spec3.mu == doctest::Approx(0.5));
}

TEST_CASE("product chart: scalar curvature adds, Schouten is the pullback sum") {
  auto spec = validate_special_product(catalog_chart("sphere_stereo:d=2"), h2_ball());
  Chart prod = build_product_chart(spec);
  CHECK(prod.dim() == 4);
  REQUIRE(prod.product().has_value());
  CHECK(prod.product()->mu == doctest::Approx(0.5));

  for (const auto& p : points(prod, 6)) {
    CurvaturePack k = curvature(prod, p);
    CHECK(std::abs(k.sc) < 1e-9);
    Vec p1, p2;
    split_point(spec, p, p1, p2);
    CurvaturePack k1 = curvature(spec.chart1, p1);
    CurvaturePack k2 = curvature(spec.chart2, p2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        CHECK(k.schouten[i * 4 + j] == doctest::Approx(k1.schouten[i * 2 + j]).epsilon(1e-9));
        CHECK(k.schouten[(2 + i) * 4 + (2 + j)] ==
              doctest::Approx(k2.schouten[i * 2 + j]).epsilon(1e-9));
        CHECK(std::abs(k.schouten[i * 4 + (2 + j)]) < 1e-10);
      }
  }
}

TEST_CASE("pair/slot isomorphism and the canonical tractor") {
  auto spec = validate_special_product(catalog_chart("sphere_stereo:d=2"), h2_ball());
  const double mu = spec.mu;

  // X = (X1-perp, X2-perp) maps to the product canonical tractor (0, 0, 1)
  Vec x1perp{1.0 / (2 * mu), 0, 0, 0.5};
  Vec x2perp{-1.0 / (2 * mu), 0, 0, 0.5};
  Vec slots = pair_to_slots(spec, x1perp, x2perp);
  CHECK(slots[0] == doctest::Approx(0.0));
  for (int a = 1; a <= 4; ++a) CHECK(slots[a] == doctest::Approx(0.0));
  CHECK(slots[5] == doctest::Approx(1.0));

  // round trip and h additivity for constrained pairs
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Chart prod = build_product_chart(spec);
  for (int k = 0; k < 10; ++k) {
    Vec u1{uni(rng), uni(rng), uni(rng), 0.0};
    u1[3] = mu * u1[0];  // orthogonality to I1
    Vec u2{uni(rng), uni(rng), uni(rng), 0.0};
    u2[3] = -mu * u2[0];
    Vec s = pair_to_slots(spec, u1, u2);
    Vec b1, b2;
    slots_to_pair(spec, s, b1, b2);
    for (int i = 0; i < 4; ++i) {
      CHECK(b1[i] == doctest::Approx(u1[i]));
      CHECK(b2[i] == doctest::Approx(u2[i]));
    }
    for (const auto& p : points(prod, 2)) {
      Vec p1, p2;
      split_point(spec, p, p1, p2);
      double hsum = tractor_metric(spec.chart1, u1, u1, p1) +
                    tractor_metric(spec.chart2, u2, u2, p2);
      CHECK(tractor_metric(prod, s, s, p) == doctest::Approx(hsum).epsilon(1e-10));
    }
  }
}

TEST_CASE("the product connection is the direct sum") {
  auto spec = validate_special_product(catalog_chart("sphere_stereo:d=2"), h2_ball());
  Chart prod = build_product_chart(spec);
  const double mu = spec.mu;
  const int m1 = 2, m2 = 2, d = 4;

  std::mt19937_64 rng(417);
  for (int trial = 0; trial < 3; ++trial) {
    // random pair fields over all product coordinates, projected onto the
    // orthogonal complements of the factor scale tractors
    auto make_pair_field = [&](double einmu) {
      std::vector<ScalarExpr> f;  // sigma, mu_1, mu_2, rho
      for (int s = 0; s < 4; ++s) f.push_back(random_expr(rng, d, 2));
      // U -> U - h(U,I)/|I|^2 I with I = (1, 0, -einmu), |I|^2 = -2 einmu
      ScalarExpr pairing = f[3] - ScalarExpr(einmu) * f[0];
      ScalarExpr coef = pairing / ScalarExpr(-2.0 * einmu);
      f[0] = f[0] - coef;
      f[3] = f[3] - coef * ScalarExpr(-einmu);
      return f;
    };
    auto u1 = make_pair_field(mu);
    auto u2 = make_pair_field(-mu);

    // slot field on the product
    TractorField slot;
    slot.sigma = u1[0] + u2[0];
    slot.mu = {u1[1], u1[2], u2[1], u2[2]};
    slot.rho = u1[3] + u2[3];
    ExprTractorField slot_field(slot);

    for (const auto& p : points(prod, 4)) {
      Vec p1, p2;
      split_point(spec, p, p1, p2);
      auto rows = tractor_connection(prod, slot_field, p);

      std::vector<Mat> a1 = connection_matrices(spec.chart1, p1);
      std::vector<Mat> a2 = connection_matrices(spec.chart2, p2);
      auto eval4 = [&](const std::vector<ScalarExpr>& f, int deriv_axis) {
        Vec v(4);
        for (int s = 0; s < 4; ++s)
          v[s] = deriv_axis < 0 ? f[s].eval(p) : f[s].derivative(deriv_axis).eval(p);
        return v;
      };
      Vec u1v = eval4(u1, -1), u2v = eval4(u2, -1);

      for (int a = 0; a < d; ++a) {
        Vec d1 = eval4(u1, a), d2 = eval4(u2, a);
        if (a < m1) {
          for (int r = 0; r < m1 + 2; ++r)
            for (int c = 0; c < m1 + 2; ++c) d1[r] += a1[a][r * (m1 + 2) + c] * u1v[c];
        } else {
          for (int r = 0; r < m2 + 2; ++r)
            for (int c = 0; c < m2 + 2; ++c) d2[r] += a2[a - m1][r * (m2 + 2) + c] * u2v[c];
        }
        Vec want = pair_to_slots(spec, d1, d2);
        for (int s = 0; s < d + 2; ++s) CHECK(std::abs(rows[a][s] - want[s]) < 1e-8);
      }
    }
  }
}

TEST_CASE("lifting the equator scale from the sphere factor") {
  auto spec = validate_special_product(sphere2_wide(), h2_ball());
  LiftedAE lift = lift_tractor(spec, 1, height2());
  CHECK(lift.ae.s_const == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(lift.product_parallel_residual < 1e-7);

  // scale singularity set = equator x H^2
  Classification cls = classify(lift.product, lift.ae, Defaults{});
  CHECK(cls.kind == SingularityKind::Hypersurface);
  CHECK(cls.points.size() > 20);
  for (size_t i = 0; i < cls.points.size(); i += 5) {
    double r2 = cls.points[i][0] * cls.points[i][0] + cls.points[i][1] * cls.points[i][1];
    CHECK(std::abs(r2 - 1.0) < 1e-8);
  }
  CHECK(cls.max_einstein_residual < 1e-7);

  // h(X, lifted) is the pullback of the factor sigma
  for (const auto& p : points(lift.product, 4)) {
    Vec i = ae_tractor_value(lift.product, lift.ae.sigma, p);
    Vec p1, p2;
    split_point(spec, p, p1, p2);
    CHECK(i[0] == doctest::Approx(height2().eval(p1)).epsilon(1e-10));
  }
}

TEST_CASE("lift rejections") {
  auto spec = validate_special_product(sphere2_wide(), h2_ball());
  // sigma = 1 on the sphere factor is the scale tractor itself: not orthogonal
  CHECK_THROWS_AS(lift_tractor(spec, 1, ScalarExpr(1.0)), Error);
  try {
    lift_tractor(spec, 1, ScalarExpr(1.0));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotOrthogonal);
  }
  // a non-solution is not parallel
  CHECK_THROWS_AS(lift_tractor(spec, 1, x(0) * x(0)), Error);
}

TEST_CASE("regular circle products have two singular fibers per period") {
  auto spec = validate_special_product(catalog_chart("circle:mu=0.5"), h2_ball());
  LiftedAE lift = lift_tractor(spec, 1, cos(x(0)));
  // h(K,K) = cos^2 + sin^2 = 1 for the triple (cos, -sin, cos/2)
  CHECK(lift.ae.s_const == doctest::Approx(-1.0).epsilon(1e-8));

  Classification cls = classify(lift.product, lift.ae, Defaults{});
  CHECK(cls.kind == SingularityKind::Hypersurface);
  double pi = 3.14159265358979323846;
  for (size_t i = 0; i < cls.points.size(); i += 3) {
    double t = cls.points[i][0];
    bool near = std::abs(t - pi / 2) < 1e-8 || std::abs(t - 3 * pi / 2) < 1e-8;
    CHECK(near);
  }
}

TEST_CASE("collar metric is Einstein and matches the sinh/cosh form") {
  Chart c1 = catalog_chart("sphere_stereo:d=2");
  Chart c2 = h2_ball();
  Chart collar = build_collar(c1, &c2, 0.5, 0.1, 1.0);
  CHECK(collar.dim() == 5);
  for (const auto& p : points(collar, 25)) CHECK(einstein_residual(collar, -1.0, p) < 1e-7);

  // s = ln(sqrt(mu/2) r):  ds^2 + 2 mu (sinh^2 g1 + cosh^2 g2)
  const double mu = 0.5;
  for (const auto& p : points(collar, 10)) {
    double r = p[0];
    double s = std::log(std::sqrt(mu / 2.0) * r);
    double sh = std::sinh(s), ch = std::cosh(s);
    Vec py{p[1], p[2]};
    Vec pz{p[3], p[4]};
    // radial block: g_rr = (ds/dr)^2 = 1/r^2
    CHECK(collar.metric(0, 0).eval(p) == doctest::Approx(1.0 / (r * r)).epsilon(1e-12));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double want1 = 2 * mu * sh * sh * c1.metric(i, j).eval(py);
        double want2 = 2 * mu * ch * ch * c2.metric(i, j).eval(pz);
        CHECK(std::abs(collar.metric(1 + i, 1 + j).eval(p) - want1) < 1e-9);
        CHECK(std::abs(collar.metric(3 + i, 3 + j).eval(p) - want2) < 1e-9);
      }
  }

  // degenerate collar over the 4-sphere is hyperbolic 5-space
  Chart c4 = catalog_chart("sphere_stereo:d=4");
  Chart hyp = build_collar(c4, nullptr, 0.5, 0.1, 1.0);
  for (const auto& p : points(hyp, 15)) CHECK(einstein_residual(hyp, -1.0, p) < 1e-7);

  CHECK_THROWS_AS(build_collar(c1, &c2, 0.5, 0.1, 3.0), Error);  // 1 - mu r^2/2 vanishes
}

TEST_CASE("catalog") {
  auto names = catalog_names();
  CHECK(names.size() >= 8);
  for (const auto& n : names) CHECK_NOTHROW(catalog_chart(n));
  CHECK_THROWS_AS(catalog_chart("nonsense"), Error);

  // the scale-singular product fixture is Einstein with constant -1
  Chart ss = catalog_chart("scale_singular_product");
  for (const auto& p : points(ss, 10)) CHECK(einstein_residual(ss, -1.0, p) < 1e-7);

  // the curved-factor product is Einstein on its second factor only
  Chart curved = catalog_chart("einstein_h2xh2");
  CHECK(einstein_mu(curved) == doctest::Approx(-0.5).epsilon(1e-8));
}

TEST_SUITE_END();
