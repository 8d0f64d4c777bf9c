#include "ctrac/product.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "ctrac/conformal.hpp"
#include "ctrac/errors.hpp"

namespace ctrac {

double einstein_mu(const Chart& chart, const Defaults& cfg) {
  const int d = chart.dim();
  if (d <= 2) {
    if (!chart.mu()) fail(ErrorKind::MissingMu, "low-dimensional chart without mu datum");
    return *chart.mu();
  }
  auto pts = sample_points(chart.box(), std::min(cfg.sample_points, 40), cfg.seed + 3);
  double sc0 = scalar_curvature(chart, pts.front());
  for (const auto& p : pts) {
    double sc = scalar_curvature(chart, p);
    if (std::abs(sc - sc0) > 1e-6 * (1.0 + std::abs(sc0)))
      fail(ErrorKind::NotEinsteinFactor, "scalar curvature is not constant over the chart");
  }
  double lambda = sc0 / (d * (d - 1));
  for (const auto& p : pts)
    if (einstein_residual(chart, lambda, p) > cfg.tol)
      fail(ErrorKind::NotEinsteinFactor, "chart is not Einstein at sampled points");
  return 0.5 * lambda;
}

SpecialProductSpec validate_special_product(const Chart& chart1, const Chart& chart2,
                                            const Defaults& cfg) {
  SpecialProductSpec spec;
  spec.chart1 = chart1;
  spec.chart2 = chart2;
  spec.m1 = chart1.dim();
  spec.m2 = chart2.dim();
  if (spec.m1 + spec.m2 < 3)
    fail(ErrorKind::BadChart, "special product needs total dimension at least 3");
  double mu1 = einstein_mu(chart1, cfg);
  double mu2 = einstein_mu(chart2, cfg);
  if (mu1 <= 0.0)
    fail(ErrorKind::ScalarMismatch,
         "factor 1 must carry positive Einstein constant, got mu1 = " + std::to_string(mu1));
  if (std::abs(mu1 + mu2) > 1e-8 * (1.0 + std::abs(mu1)))
    fail(ErrorKind::ScalarMismatch, "factor Einstein constants do not pair: mu1 = " +
                                        std::to_string(mu1) + ", mu2 = " + std::to_string(mu2));
  spec.mu = mu1;
  return spec;
}

Chart build_product_chart(const SpecialProductSpec& spec) {
  const int m1 = spec.m1, m2 = spec.m2, d = m1 + m2;
  Box box;
  box.iv = spec.chart1.box().iv;
  for (const auto& iv : spec.chart2.box().iv) box.iv.push_back(iv);
  std::vector<ScalarExpr> metric(d * d, ScalarExpr(0.0));
  for (int i = 0; i < m1; ++i)
    for (int j = 0; j < m1; ++j) metric[i * d + j] = spec.chart1.metric(i, j);
  for (int i = 0; i < m2; ++i)
    for (int j = 0; j < m2; ++j)
      metric[(m1 + i) * d + (m1 + j)] = spec.chart2.metric(i, j).shifted_vars(m1);
  Chart out(std::move(box), std::move(metric));
  out.set_product(ProductInfo{m1, m2, spec.mu});
  return out;
}

void split_point(const SpecialProductSpec& spec, std::span<const double> p, Vec& p1, Vec& p2) {
  p1.assign(p.begin(), p.begin() + spec.m1);
  p2.assign(p.begin() + spec.m1, p.end());
}

Vec pair_to_slots(const SpecialProductSpec& spec, std::span<const double> u1,
                  std::span<const double> u2) {
  const int m1 = spec.m1, m2 = spec.m2, d = m1 + m2;
  Vec out(d + 2, 0.0);
  out[0] = u1[0] + u2[0];
  for (int a = 0; a < m1; ++a) out[1 + a] = u1[1 + a];
  for (int a = 0; a < m2; ++a) out[1 + m1 + a] = u2[1 + a];
  out[d + 1] = u1[m1 + 1] + u2[m2 + 1];
  return out;
}

void slots_to_pair(const SpecialProductSpec& spec, std::span<const double> u, Vec& u1, Vec& u2) {
  const int m1 = spec.m1, m2 = spec.m2, d = m1 + m2;
  u1.assign(m1 + 2, 0.0);
  u2.assign(m2 + 2, 0.0);
  double sigma = u[0], rho = u[d + 1];
  double s1 = 0.5 * (sigma + rho / spec.mu);
  double s2 = 0.5 * (sigma - rho / spec.mu);
  u1[0] = s1;
  u2[0] = s2;
  for (int a = 0; a < m1; ++a) u1[1 + a] = u[1 + a];
  for (int a = 0; a < m2; ++a) u2[1 + a] = u[1 + m1 + a];
  u1[m1 + 1] = spec.mu * s1;
  u2[m2 + 1] = -spec.mu * s2;
}

std::pair<std::vector<Vec>, std::vector<Vec>> prodt_blocks(const SpecialProductSpec& spec,
                                                           std::span<const double> p) {
  Vec p1, p2;
  split_point(spec, p, p1, p2);
  auto block = [&](const Chart& factor, const Vec& pf, double einmu, bool first) {
    const int m = factor.dim();
    const int nf = m + 2;
    Vec scale(nf, 0.0);  // factor scale tractor (1, 0, -einmu)
    scale[0] = 1.0;
    scale[nf - 1] = -einmu;
    double norm2 = -2.0 * einmu;  // h(I,I)
    std::vector<Vec> out;
    for (int k = 0; k < nf; ++k) {
      Vec e(nf, 0.0);
      e[k] = 1.0;
      double pairing = tractor_metric(factor, e, scale, pf);
      Vec v(nf);
      for (int r = 0; r < nf; ++r) v[r] = e[r] - pairing / norm2 * scale[r];
      double mx = 0.0;
      for (double x : v) mx = std::max(mx, std::abs(x));
      if (mx < 1e-10) continue;
      // Gram-Schmidt against previous entries (plain euclidean, rank only)
      for (const Vec& b : out) {
        double dot = 0.0, nb = 0.0;
        for (int r = 0; r < nf; ++r) {
          dot += v[r] * b[r];
          nb += b[r] * b[r];
        }
        for (int r = 0; r < nf; ++r) v[r] -= dot / nb * b[r];
      }
      mx = 0.0;
      for (double x : v) mx = std::max(mx, std::abs(x));
      if (mx < 1e-8) continue;
      out.push_back(v);
    }
    std::vector<Vec> lifted;
    Vec zero1(spec.m1 + 2, 0.0), zero2(spec.m2 + 2, 0.0);
    for (const Vec& v : out)
      lifted.push_back(first ? pair_to_slots(spec, v, zero2) : pair_to_slots(spec, zero1, v));
    return lifted;
  };
  return {block(spec.chart1, p1, spec.mu, true), block(spec.chart2, p2, -spec.mu, false)};
}

LiftedAE lift_tractor(const SpecialProductSpec& spec, int which_factor, const ScalarExpr& sigma_k,
                      const Defaults& cfg) {
  if (which_factor != 1 && which_factor != 2)
    fail(ErrorKind::BadChart, "which_factor must be 1 or 2");
  const Chart& factor = which_factor == 1 ? spec.chart1 : spec.chart2;
  double einmu = which_factor == 1 ? spec.mu : -spec.mu;

  // orthogonality to the factor scale tractor and factor parallelism
  auto pts = sample_points(factor.box(), std::min(cfg.sample_points, 50), cfg.seed + 11);
  double ortho = 0.0, par = 0.0;
  for (const auto& p : pts) {
    Vec k = ae_tractor_value(factor, sigma_k, p);
    double h = k[factor.dim() + 1] - einmu * k[0];  // h(K, I) with I = (1,0,-einmu)
    ortho = std::max(ortho, std::abs(h));
    par = std::max(par, ae_parallel_residual(factor, sigma_k, p));
  }
  if (par > cfg.parallel_tol)
    fail(ErrorKind::NotParallel, "factor tractor is not parallel: " + std::to_string(par));
  if (ortho > cfg.tol * 10)
    fail(ErrorKind::NotOrthogonal,
         "factor tractor is not orthogonal to the factor scale tractor: " + std::to_string(ortho));

  LiftedAE out;
  out.product = build_product_chart(spec);
  out.factor_parallel_residual = par;
  ScalarExpr lifted = which_factor == 1 ? sigma_k : sigma_k.shifted_vars(spec.m1);

  auto prod_pts = sample_points(out.product.box(), std::min(cfg.sample_points, 50), cfg.seed + 13);
  double ppar = 0.0, smin = 0.0, smax = 0.0;
  bool first = true;
  for (const auto& p : prod_pts) {
    ppar = std::max(ppar, ae_parallel_residual(out.product, lifted, p));
    Vec i = ae_tractor_value(out.product, lifted, p);
    double s = -tractor_metric(out.product, i, i, p);
    smin = first ? s : std::min(smin, s);
    smax = first ? s : std::max(smax, s);
    first = false;
  }
  if (ppar > cfg.parallel_tol)
    fail(ErrorKind::NotParallel, "lifted tractor is not parallel on the product: " +
                                     std::to_string(ppar));
  out.product_parallel_residual = ppar;
  out.ae.sigma = lifted;
  out.ae.s_const = 0.5 * (smin + smax);
  return out;
}

Chart build_collar(const Chart& chart1, const Chart* chart2, double mu, double r_min,
                   double r_max, const Defaults& cfg) {
  if (mu <= 0.0) fail(ErrorKind::BadInterval, "collar parameter mu must be positive");
  if (!(0.0 < r_min && r_min < r_max)) fail(ErrorKind::BadInterval, "need 0 < r_min < r_max");
  if (mu * r_max * r_max / 2.0 >= 1.0)
    fail(ErrorKind::BadInterval, "(1 - mu r^2/2) vanishes inside the collar interval");

  const int m1 = chart1.dim();
  const int m2 = chart2 ? chart2->dim() : 0;
  const int d = 1 + m1 + m2;

  // scalar relations 2 m (m-1) mu = +-Sc
  double mu1 = einstein_mu(chart1, cfg);
  if (m1 >= 2 && std::abs(mu1 - mu) > 1e-8 * (1.0 + mu))
    fail(ErrorKind::ScalarMismatch, "factor 1 scalar curvature does not match 2 m1 (m1-1) mu");
  if (chart2) {
    double mu2 = einstein_mu(*chart2, cfg);
    if (m2 >= 2 && std::abs(mu2 + mu) > 1e-8 * (1.0 + mu))
      fail(ErrorKind::ScalarMismatch, "factor 2 scalar curvature does not match -2 m2 (m2-1) mu");
  }

  Box box;
  box.iv.push_back({r_min, r_max});
  for (const auto& iv : chart1.box().iv) box.iv.push_back(iv);
  if (chart2)
    for (const auto& iv : chart2->box().iv) box.iv.push_back(iv);

  ScalarExpr r = ScalarExpr::var(0);
  ScalarExpr r2inv = ScalarExpr(1.0) / (r * r);
  ScalarExpr w1 = ScalarExpr(1.0) - ScalarExpr(mu / 2.0) * r * r;
  ScalarExpr w2 = ScalarExpr(1.0) + ScalarExpr(mu / 2.0) * r * r;

  std::vector<ScalarExpr> metric(d * d, ScalarExpr(0.0));
  metric[0] = r2inv;
  for (int i = 0; i < m1; ++i)
    for (int j = 0; j < m1; ++j)
      metric[(1 + i) * d + (1 + j)] = r2inv * w1 * w1 * chart1.metric(i, j).shifted_vars(1);
  for (int i = 0; i < m2; ++i)
    for (int j = 0; j < m2; ++j)
      metric[(1 + m1 + i) * d + (1 + m1 + j)] =
          r2inv * w2 * w2 * chart2->metric(i, j).shifted_vars(1 + m1);
  return Chart(std::move(box), std::move(metric));
}

// ---------------------------------------------------------------------------
// fixture catalog

namespace {

Chart flat_chart(int d) {
  Box box;
  for (int a = 0; a < d; ++a) box.iv.push_back({-1.2, 1.2});
  std::vector<ScalarExpr> metric(d * d, ScalarExpr(0.0));
  for (int a = 0; a < d; ++a) metric[a * d + a] = ScalarExpr(1.0);
  std::optional<double> mu;
  if (d <= 2) mu = 0.0;
  return Chart(std::move(box), std::move(metric), mu);
}

ScalarExpr norm2(int d, int offset = 0) {
  ScalarExpr s(0.0);
  for (int a = 0; a < d; ++a) s = s + pow(ScalarExpr::var(offset + a), 2);
  return s;
}

Chart sphere_stereo(int d, double half_width = 0.8) {
  Box box;
  for (int a = 0; a < d; ++a) box.iv.push_back({-half_width, half_width});
  ScalarExpr conf = ScalarExpr(4.0) / pow(ScalarExpr(1.0) + norm2(d), 2);
  std::vector<ScalarExpr> metric(d * d, ScalarExpr(0.0));
  for (int a = 0; a < d; ++a) metric[a * d + a] = conf;
  std::optional<double> mu;
  if (d <= 2) mu = 0.5;
  return Chart(std::move(box), std::move(metric), mu);
}

Chart hyperbolic_ball(int d, double curv = 1.0, double half_width = 0.5) {
  // sectional curvature -curv: g = (4/curv) (1-|x|^2)^{-2} delta
  Box box;
  for (int a = 0; a < d; ++a) box.iv.push_back({-half_width, half_width});
  ScalarExpr conf = ScalarExpr(4.0 / curv) / pow(ScalarExpr(1.0) - norm2(d), 2);
  std::vector<ScalarExpr> metric(d * d, ScalarExpr(0.0));
  for (int a = 0; a < d; ++a) metric[a * d + a] = conf;
  std::optional<double> mu;
  if (d <= 2) mu = -0.5 * curv;
  return Chart(std::move(box), std::move(metric), mu);
}

Chart circle_chart(double mu) {
  Box box;
  box.iv.push_back({0.0, 2.0 * 3.14159265358979323846});
  return Chart(std::move(box), {ScalarExpr(1.0)}, mu);
}

Chart einstein_h2xh2() {
  // product of two hyperbolic planes of curvature -3: Einstein, Ric = -3 g,
  // Sc = -12, not conformally flat
  Chart h2 = hyperbolic_ball(2, 3.0);
  Box box;
  for (int k = 0; k < 2; ++k)
    for (const auto& iv : h2.box().iv) box.iv.push_back(iv);
  std::vector<ScalarExpr> metric(16, ScalarExpr(0.0));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      metric[i * 4 + j] = h2.metric(i, j);
      metric[(2 + i) * 4 + (2 + j)] = h2.metric(i, j).shifted_vars(2);
    }
  return Chart(std::move(box), std::move(metric));
}

Chart perturbed_flat(int d, double eps) {
  Chart flat = flat_chart(d);
  std::vector<ScalarExpr> metric(flat.metric_entries());
  // deterministic polynomial-times-transcendental bumps
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      ScalarExpr bump = ScalarExpr(eps) * sin(ScalarExpr(double(i + 1)) * ScalarExpr::var(i)) *
                        cos(ScalarExpr(double(j + 2)) * ScalarExpr::var(j % d)) *
                        (ScalarExpr(1.0) + ScalarExpr(0.5) * ScalarExpr::var((i + j) % d));
      if (i == j)
        metric[i * d + j] = metric[i * d + j] + bump;
      else {
        metric[i * d + j] = bump;
        metric[j * d + i] = bump;
      }
    }
  std::optional<double> mu;
  if (d <= 2) mu = 0.0;  // not used by perturbation tests
  return Chart(flat.box(), std::move(metric), mu);
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {
      "flat:d=3",
      "sphere_stereo:d=2",
      "sphere_stereo:d=3",
      "hyperbolic_ball:d=2",
      "hyperbolic_ball:d=3",
      "circle:mu=0.5",
      "circle:mu=-0.5",
      "product:s2xh2",
      "product:s2xs1",
      "product:s2xh2h2",
      "collar:s2xh2",
      "collar:s4",
      "scale_singular_product",
      "einstein_h2xh2",
      "perturbed_flat:d=3",
  };
}

Chart catalog_chart(const std::string& name, const Defaults& cfg) {
  std::string base = name;
  std::map<std::string, std::string> kv;
  if (auto pos = name.find(':'); pos != std::string::npos) {
    base = name.substr(0, pos);
    std::stringstream ss(name.substr(pos + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos) kv[item] = "";
      else kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  auto geti = [&](const std::string& k, int dflt) {
    return kv.count(k) ? std::stoi(kv[k]) : dflt;
  };
  auto getd = [&](const std::string& k, double dflt) {
    return kv.count(k) ? std::stod(kv[k]) : dflt;
  };

  Chart out;
  if (base == "flat") out = flat_chart(geti("d", 3));
  else if (base == "sphere_stereo") out = sphere_stereo(geti("d", 3));
  else if (base == "hyperbolic_ball") out = hyperbolic_ball(geti("d", 3), getd("curv", 1.0));
  else if (base == "circle") out = circle_chart(getd("mu", 0.5));
  else if (base == "einstein_h2xh2") out = einstein_h2xh2();
  else if (base == "perturbed_flat") out = perturbed_flat(geti("d", 3), getd("eps", 0.05));
  else if (base == "product") {
    std::string which = kv.count("which") ? kv["which"] : (kv.empty() ? "s2xh2" : kv.begin()->first);
    if (which == "s2xh2") {
      auto spec = validate_special_product(sphere_stereo(2), hyperbolic_ball(2), cfg);
      out = build_product_chart(spec);
    } else if (which == "s2xs1") {
      auto spec = validate_special_product(sphere_stereo(2), circle_chart(-0.5), cfg);
      out = build_product_chart(spec);
    } else if (which == "s2xh2h2") {
      auto spec = validate_special_product(sphere_stereo(2), einstein_h2xh2(), cfg);
      out = build_product_chart(spec);
    } else {
      fail(ErrorKind::UnknownFixture, "unknown product fixture " + which);
    }
  } else if (base == "collar") {
    std::string which = kv.count("which") ? kv["which"] : (kv.empty() ? "s2xh2" : kv.begin()->first);
    if (which == "s2xh2") {
      Chart c1 = sphere_stereo(2), c2 = hyperbolic_ball(2);
      out = build_collar(c1, &c2, 0.5, 0.1, 1.0, cfg);
    } else if (which == "s4") {
      Chart c1 = sphere_stereo(4);
      out = build_collar(c1, nullptr, 0.5, 0.1, 1.0, cfg);
    } else {
      fail(ErrorKind::UnknownFixture, "unknown collar fixture " + which);
    }
  } else if (base == "scale_singular_product") {
    auto spec = validate_special_product(sphere_stereo(2, 0.65), hyperbolic_ball(2), cfg);
    Chart prod = build_product_chart(spec);
    // Einstein scale sigma = pullback of the ambient height on the sphere
    ScalarExpr h = (ScalarExpr(1.0) - norm2(2)) / (ScalarExpr(1.0) + norm2(2));
    out = rescale_chart(prod, ScalarExpr(-1.0) * log(h));
  } else {
    fail(ErrorKind::UnknownFixture, "unknown fixture " + name);
  }
  out.validate(cfg);
  return out;
}

}  // namespace ctrac
