#include "ctrac/hypersurface.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "ctrac/almost_einstein.hpp"
#include "ctrac/errors.hpp"

namespace ctrac {

namespace {

Jet scalar_jet(const ScalarExpr& e, int d, std::span<const double> p) {
  Jet r(e.eval(p), d);
  for (int a = 0; a < d; ++a) r.d[a] = e.derivative(a).eval(p);
  return r;
}

// unit conormal n_a = grad sigma / |grad sigma| as jets, plus the curvature jet
struct SurfaceFrame {
  int d;
  CurvatureJet c;
  std::vector<Jet> n;      // lowered components
  std::vector<Jet> nup;    // raised
  Jet norm;
};

SurfaceFrame surface_frame(const Chart& chart, const ScalarExpr& sigma,
                           std::span<const double> p) {
  const int d = chart.dim();
  SurfaceFrame f;
  f.d = d;
  f.c = curvature_jet(chart, p);
  std::vector<Jet> grad(d);
  for (int a = 0; a < d; ++a) grad[a] = scalar_jet(sigma.derivative(a), d, p);
  Jet n2(0.0, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) n2 += f.c.ginv[a * d + b] * grad[a] * grad[b];
  if (n2.v < 1e-12)
    fail(ErrorKind::SingularLevelSet, "level set is not regular: |grad sigma| too small");
  f.norm = jsqrt(n2);
  f.n.resize(d);
  f.nup.assign(d, Jet(0.0, d));
  for (int a = 0; a < d; ++a) f.n[a] = grad[a] / f.norm;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) f.nup[a] += f.c.ginv[a * d + b] * f.n[b];
  return f;
}

// second fundamental form II_ab (tangentially projected nabla_a n_b) and the
// induced metric g_ab - n_a n_b, as plain values
struct SecondForm {
  int d;
  std::vector<double> ii, induced;
  double mean = 0.0;  // trace / (d-1)
};

SecondForm second_form(const Chart& chart, const ScalarExpr& sigma, std::span<const double> p) {
  SurfaceFrame f = surface_frame(chart, sigma, p);
  const int d = f.d;
  std::vector<double> gradn(d * d);  // nabla_a n_b values
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double s = f.n[b].d[a];
      for (int e = 0; e < d; ++e) s -= value_of(f.c.gamma[(e * d + a) * d + b]) * f.n[e].v;
      gradn[a * d + b] = s;
    }
  // tangential projector P_a^c = delta - n_a n^c
  auto proj = [&](int a, int c) { return (a == c ? 1.0 : 0.0) - f.n[a].v * f.nup[c].v; };
  SecondForm out;
  out.d = d;
  out.ii.assign(d * d, 0.0);
  out.induced.assign(d * d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double s = 0.0;
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) s += proj(a, c) * proj(b, e) * gradn[c * d + e];
      out.ii[a * d + b] = s;
      out.induced[a * d + b] = value_of(f.c.g[a * d + b]) - f.n[a].v * f.n[b].v;
    }
  double tr = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) tr += value_of(f.c.ginv[a * d + b]) * out.ii[a * d + b];
  out.mean = tr / (d - 1);
  return out;
}

}  // namespace

LevelSurface extract_level_surface(const Chart& chart, const ScalarExpr& sigma,
                                   const Defaults& cfg) {
  const int d = chart.dim();
  const int n = cfg.grid_for_dim(d);
  LevelSurface surf;
  surf.sigma = sigma;

  std::vector<double> vals;
  std::vector<Vec> nodes;
  for_each_grid_point(chart.box(), n, [&](std::span<const double> p) {
    nodes.emplace_back(p.begin(), p.end());
    vals.push_back(sigma.eval(p));
  });
  std::vector<size_t> stride(d);
  stride[0] = 1;
  for (int a = 1; a < d; ++a) stride[a] = stride[a - 1] * n;

  for (size_t idx = 0; idx < nodes.size() && surf.samples.size() < 2000; ++idx) {
    size_t rem = idx;
    for (int a = 0; a < d; ++a) {
      int k = static_cast<int>(rem % n);
      rem /= n;
      if (k + 1 >= n) continue;
      size_t jdx = idx + stride[a];
      if ((vals[idx] < 0) != (vals[jdx] < 0)) {
        // bisection along the edge
        Vec lo = nodes[idx], hi = nodes[jdx];
        double flo = vals[idx];
        for (int it = 0; it < 80; ++it) {
          Vec mid(d);
          for (int q = 0; q < d; ++q) mid[q] = 0.5 * (lo[q] + hi[q]);
          double fm = sigma.eval(mid);
          if (std::abs(fm) < cfg.zero_refine) {
            lo = mid;
            break;
          }
          if ((flo < 0) != (fm < 0)) hi = mid;
          else {
            lo = mid;
            flo = fm;
          }
        }
        surf.samples.push_back(lo);
      }
    }
  }
  if (surf.samples.empty())
    fail(ErrorKind::SingularLevelSet, "no regular zero crossing found on the grid");
  return surf;
}

Vec normal_tractor(const Chart& chart, const LevelSurface& surf, std::span<const double> p) {
  SurfaceFrame f = surface_frame(chart, surf.sigma, p);
  SecondForm s = second_form(chart, surf.sigma, p);
  const int d = chart.dim();
  Vec out(d + 2, 0.0);
  for (int a = 0; a < d; ++a) out[1 + a] = f.n[a].v;
  out[d + 1] = -s.mean;
  return out;
}

double generalized_mean_curvature(const Chart& chart, const AEStructure& k,
                                  const LevelSurface& surf, std::span<const double> p) {
  Vec n = normal_tractor(chart, surf, p);
  Vec kv = ae_tractor_value(chart, k.sigma, p);
  return -tractor_metric(chart, kv, n, p);
}

double umbilicity_residual(const Chart& chart, const LevelSurface& surf,
                           std::span<const double> p) {
  SecondForm s = second_form(chart, surf.sigma, p);
  const int d = s.d;
  double r = 0.0;
  for (int i = 0; i < d * d; ++i) r = std::max(r, std::abs(s.ii[i] - s.mean * s.induced[i]));
  return r;
}

std::vector<Vec> intersect_level_sets(const Chart& chart, const ScalarExpr& s1,
                                      const ScalarExpr& s2, int max_count, const Defaults& cfg) {
  const int d = chart.dim();
  std::vector<Vec> out;
  auto seeds = sample_points(chart.box(), 40 * std::max(1, max_count), cfg.seed + 5, 0.02);
  for (const auto& seed : seeds) {
    if (static_cast<int>(out.size()) >= max_count) break;
    Vec x(seed);
    bool ok = false;
    for (int it = 0; it < 80; ++it) {
      Eigen::Vector2d f(s1.eval(x), s2.eval(x));
      if (f.cwiseAbs().maxCoeff() < 1e-12) {
        ok = true;
        break;
      }
      Eigen::MatrixXd jac(2, d);
      for (int a = 0; a < d; ++a) {
        jac(0, a) = s1.derivative(a).eval(x);
        jac(1, a) = s2.derivative(a).eval(x);
      }
      Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(f);
      for (int a = 0; a < d; ++a) x[a] -= step(a);
      if (!chart.box().contains(x, 1e-6)) break;
    }
    if (!ok) continue;
    bool dup = false;
    for (const Vec& y : out) {
      double dist = 0.0;
      for (int a = 0; a < d; ++a) dist += (x[a] - y[a]) * (x[a] - y[a]);
      if (std::sqrt(dist) < 0.05) dup = true;
    }
    if (!dup) out.push_back(x);
  }
  return out;
}

double intersection_umbilicity_residual(const Chart& chart, const ScalarExpr& s1,
                                        const ScalarExpr& s2, std::span<const double> p) {
  const int d = chart.dim();
  if (d < 3)
    fail(ErrorKind::UnsupportedValence, "codimension-2 umbilicity needs chart dimension >= 3");
  CurvatureJet c = curvature_jet(chart, p);

  // jets of the ambient unit normal of {s2 = 0} and of the in-surface conormal
  // w = normalized tangential projection of grad s1
  std::vector<Jet> g1(d), g2(d);
  for (int a = 0; a < d; ++a) {
    g1[a] = scalar_jet(s1.derivative(a), d, p);
    g2[a] = scalar_jet(s2.derivative(a), d, p);
  }
  auto raise = [&](const std::vector<Jet>& v) {
    std::vector<Jet> up(d, Jet(0.0, d));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) up[a] += c.ginv[a * d + b] * v[b];
    return up;
  };
  auto dot = [&](const std::vector<Jet>& v, const std::vector<Jet>& wup) {
    Jet s(0.0, d);
    for (int a = 0; a < d; ++a) s += v[a] * wup[a];
    return s;
  };
  std::vector<Jet> g2up = raise(g2);
  Jet n2norm = jsqrt(dot(g2, g2up));
  std::vector<Jet> n2(d), n2up(d);
  for (int a = 0; a < d; ++a) {
    n2[a] = g2[a] / n2norm;
    n2up[a] = g2up[a] / n2norm;
  }
  // tangential part of grad s1 within the s2-surface
  Jet comp = dot(g1, n2up);
  std::vector<Jet> w(d);
  for (int a = 0; a < d; ++a) w[a] = g1[a] - comp * n2[a];
  std::vector<Jet> wup = raise(w);
  Jet wnorm = jsqrt(dot(w, wup));
  if (wnorm.v < 1e-8)
    fail(ErrorKind::SingularLevelSet, "level sets are tangent at the sample point");
  for (int a = 0; a < d; ++a) {
    w[a] = w[a] / wnorm;
    wup[a] = wup[a] / wnorm;
  }

  // nabla_a w_b, then project onto the intersection tangent space
  std::vector<double> gradw(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double s = w[b].d[a];
      for (int e = 0; e < d; ++e) s -= value_of(c.gamma[(e * d + a) * d + b]) * w[e].v;
      gradw[a * d + b] = s;
    }
  auto proj = [&](int a, int cc) {
    return (a == cc ? 1.0 : 0.0) - n2[a].v * n2up[cc].v - w[a].v * wup[cc].v;
  };
  std::vector<double> ii(d * d, 0.0), induced(d * d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double s = 0.0;
      for (int cc = 0; cc < d; ++cc)
        for (int e = 0; e < d; ++e) s += proj(a, cc) * proj(b, e) * gradw[cc * d + e];
      ii[a * d + b] = s;
      induced[a * d + b] =
          value_of(c.g[a * d + b]) - n2[a].v * n2[b].v - w[a].v * w[b].v;
    }
  double tr = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) tr += value_of(c.ginv[a * d + b]) * ii[a * d + b];
  double mean = tr / (d - 2);
  double r = 0.0;
  for (int i = 0; i < d * d; ++i) r = std::max(r, std::abs(ii[i] - mean * induced[i]));
  return r;
}

}  // namespace ctrac
