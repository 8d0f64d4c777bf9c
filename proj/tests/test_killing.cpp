#include <doctest.h>

#include <cmath>

#include "ctrac/killing.hpp"
#include "ctrac/product.hpp"
#include "support/fixtures.hpp"

using namespace ctrac;
using namespace ctrac::testing;

namespace {

std::vector<ScalarExpr> lower(const Chart& c, const std::vector<ScalarExpr>& k_up) {
  const int d = c.dim();
  std::vector<ScalarExpr> low(d, ScalarExpr(0.0));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) low[a] = low[a] + c.metric(a, b) * k_up[b];
  return low;
}

std::vector<ScalarExpr> dilation(int d) {
  std::vector<ScalarExpr> k;
  for (int a = 0; a < d; ++a) k.push_back(x(a));
  return k;
}

std::vector<ScalarExpr> rotation(int d) {
  std::vector<ScalarExpr> k{ScalarExpr(0.0) - x(1), x(0)};
  for (int a = 2; a < d; ++a) k.push_back(ScalarExpr(0.0));
  return k;
}

}  // namespace

TEST_SUITE_BEGIN("killing");

TEST_CASE("conformal Killing residuals on the flat chart") {
  Chart c = flat(3);
  auto rot = lower(c, rotation(3));
  auto dil = lower(c, dilation(3));
  std::vector<ScalarExpr> bad{x(0) * x(1), ScalarExpr(0.0), ScalarExpr(0.0)};
  double worst_bad = 0.0;
  for (const auto& p : points(c, 8)) {
    CHECK(ck_residual(c, rot, p) < 1e-13);
    CHECK(ck_residual(c, dil, p) < 1e-13);
    worst_bad = std::max(worst_bad, ck_residual(c, bad, p));
  }
  CHECK(worst_bad > 0.1);
}

TEST_CASE("prolongation slots of the dilation and rotation") {
  Chart c = flat(3);
  auto dil = lower(c, dilation(3));
  for (const auto& p : points(c, 6)) {
    KillingSlots s = kk_slots(c, dil, p);
    for (int a = 0; a < 3; ++a) {
      CHECK(s.k_low[a] == doctest::Approx(p[a]));
      CHECK(std::abs(s.x_low[a]) < 1e-12);
    }
    for (double v : s.curl_low) CHECK(std::abs(v) < 1e-12);
    CHECK(s.w == doctest::Approx(1.0));
  }
  auto rot = lower(c, rotation(3));
  for (const auto& p : points(c, 6)) {
    KillingSlots s = kk_slots(c, rot, p);
    CHECK(std::abs(s.w) < 1e-13);
    // curl of (-x2, x1, 0): nabla_[0 k_1] = 1
    CHECK(s.curl_low[0 * 3 + 1] == doctest::Approx(1.0));
    CHECK(s.curl_low[1 * 3 + 0] == doctest::Approx(-1.0));
  }
}

TEST_CASE("primary part is recovered from the two-form matrix") {
  Chart c = sphere3();
  auto rot = lower(c, rotation(3));
  for (const auto& p : points(c, 6)) {
    Mat m = kk_matrix(c, rot, p);
    CurvaturePack k = curvature(c, p);
    const int n = 5;
    for (int a = 0; a < 3; ++a) {
      double kup = 0.0;
      for (int b = 0; b < 3; ++b) kup += k.ginv[a * 3 + b] * rot[b].eval(p);
      CHECK(m[(n - 1) * n + (1 + a)] == doctest::Approx(kup).epsilon(1e-9));
    }
  }
}

TEST_CASE("transport equation residual vanishes for conformal Killing fields") {
  // conformally flat charts: plain parallelism
  Chart c = flat(3);
  auto dil = lower(c, dilation(3));
  Chart s = sphere3();
  auto srot = lower(s, rotation(3));
  for (const auto& p : points(c, 5)) {
    CHECK(cktreq_residual(c, dil, p) < 1e-10);
    CHECK(twoform_parallel_residual(c, dil, p) < 1e-10);
  }
  for (const auto& p : points(s, 5)) CHECK(cktreq_residual(s, srot, p) < 1e-8);

  // curved chart with nonzero tractor curvature: the modification matters
  Chart hh = catalog_chart("einstein_h2xh2");
  std::vector<ScalarExpr> rot4_up{ScalarExpr(0.0) - x(1), x(0), ScalarExpr(0.0), ScalarExpr(0.0)};
  auto rot4 = lower(hh, rot4_up);
  double plain = 0.0, modified = 0.0;
  for (const auto& p : points(hh, 5)) {
    CHECK(ck_residual(hh, rot4, p) < 1e-10);
    modified = std::max(modified, cktreq_residual(hh, rot4, p));
    plain = std::max(plain, twoform_parallel_residual(hh, rot4, p));
  }
  CHECK(modified < 1e-8);
  CHECK(plain > 1e-4);  // the curvature term is essential here
}

TEST_CASE("prolong_ck accepts conformal Killing fields only") {
  Chart c = flat(3);
  auto good = prolong_ck(c, lower(c, dilation(3)));
  CHECK(good.max_ck_residual < 1e-12);
  CHECK(good.max_cktreq_residual < 1e-10);
  std::vector<ScalarExpr> bad{x(0) * x(1), ScalarExpr(0.0), ScalarExpr(0.0)};
  CHECK_THROWS_AS(prolong_ck(c, bad), Error);
}

TEST_CASE("wedges of parallel tractors") {
  Chart c = flat(3);
  AEStructure flat_scale = make_ae(c, ScalarExpr(1.0));
  AEStructure neg = make_ae(c, sigma_minus(3));
  AEStructure pos = make_ae(c, sigma_plus(3));

  // sigma1 = 1: k = grad sigma2 = -x
  WedgeResult w1 = wedge_parallel(c, flat_scale, neg);
  CHECK(w1.max_ck_residual < 1e-10);
  CHECK(w1.max_slot_vs_wedge < 1e-10);
  CHECK(w1.max_parallel_residual < 1e-7);
  CHECK(w1.gradient_in_scale1);
  CHECK(w1.max_gradient_check < 1e-7);
  for (const auto& p : points(c, 4))
    for (int a = 0; a < 3; ++a) CHECK(w1.k_low[a].eval(p) == doctest::Approx(-p[a]));

  // the pair of hyperbolic/spherical scales produces the dilation
  WedgeResult w2 = wedge_parallel(c, neg, pos);
  for (const auto& p : points(c, 4))
    for (int a = 0; a < 3; ++a) CHECK(w2.k_low[a].eval(p) == doctest::Approx(p[a]));
  CHECK(w2.max_slot_vs_wedge < 1e-10);
  CHECK(w2.max_parallel_residual < 1e-7);

  // a pair whose wedge has a nonzero bottom slot pins the slot orientation
  AEStructure lin = make_ae(c, x(0));
  WedgeResult w3 = wedge_parallel(c, lin, make_ae(c, sigma_zero(3)));
  CHECK(w3.max_slot_vs_wedge < 1e-10);
  CHECK(w3.max_parallel_residual < 1e-7);

  // dependent scales have a vanishing wedge
  AEStructure doubled = make_ae(c, ScalarExpr(2.0) * sigma_minus(3));
  CHECK_THROWS_AS(wedge_parallel(c, neg, doubled), Error);
}

TEST_CASE("essential witnesses at zeros") {
  Chart c = flat(3);
  std::vector<double> origin{0.0, 0.0, 0.0};

  auto dil = lower(c, dilation(3));
  EssentialReport dil_report = essential_witness(c, dil, origin);
  CHECK(dil_report.verdict == Essentiality::Essential);
  CHECK(dil_report.slots.w == doctest::Approx(1.0));

  auto rot = lower(c, rotation(3));
  EssentialReport rot_report = essential_witness(c, rot, origin);
  CHECK(rot_report.verdict == Essentiality::NotApplicableNonGradient);

  // translation has no zero in the box
  std::vector<ScalarExpr> trans{ScalarExpr(1.0), ScalarExpr(0.0), ScalarExpr(0.0)};
  CHECK_THROWS_AS(essential_witness(c, trans, origin), Error);
  try {
    essential_witness(c, trans, origin);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotAZero);
  }
}

TEST_CASE("first-order covector-to-tractor map") {
  Chart c = flat(3);
  auto dil = lower(c, dilation(3));  // k_a = x_a, weight-2 covector
  for (const auto& p : points(c, 4)) {
    Vec m = m_operator(c, dil, 2.0, p);
    // (d + w - 2) Z k - X div k with div k = d
    for (int a = 0; a < 3; ++a) CHECK(m[1 + a] == doctest::Approx(3.0 * p[a]));
    CHECK(m[0] == doctest::Approx(-3.0));
  }
}

TEST_SUITE_END();
