#include "ctrac/almost_einstein.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "ctrac/conformal.hpp"
#include "ctrac/errors.hpp"
#include "ctrac/hypersurface.hpp"

namespace ctrac {

double ae_residual(const Chart& chart, const ScalarExpr& sigma, std::span<const double> p) {
  const int d = chart.dim();
  CurvaturePack c = curvature(chart, p);
  double val = sigma.eval(p);
  std::vector<double> grad(d), hess(d * d);
  for (int a = 0; a < d; ++a) {
    ScalarExpr da = sigma.derivative(a);
    grad[a] = da.eval(p);
    for (int b = 0; b < d; ++b) hess[a * d + b] = da.derivative(b).eval(p);
  }
  std::vector<double> m(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double h2 = hess[a * d + b];
      for (int f = 0; f < d; ++f) h2 -= c.gamma[(f * d + a) * d + b] * grad[f];
      m[a * d + b] = h2 + c.schouten[a * d + b] * val;
    }
  double tr = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) tr += c.ginv[a * d + b] * m[a * d + b];
  double res = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      res = std::max(res, std::abs(m[a * d + b] - tr / d * c.g[a * d + b]));
  return res;
}

Vec ae_tractor_value(const Chart& chart, const ScalarExpr& sigma, std::span<const double> p) {
  Vec dv = thomas_d(chart, sigma, 1.0, p);
  for (double& x : dv) x /= chart.dim();
  return dv;
}

double ae_parallel_residual(const Chart& chart, const ScalarExpr& sigma,
                            std::span<const double> p) {
  ScaleTractorField f(sigma);
  std::vector<Vec> grad = tractor_connection(chart, f, p);
  double r = 0.0;
  for (const Vec& row : grad)
    for (double v : row) r = std::max(r, std::abs(v));
  return r;
}

AEStructure make_ae(const Chart& chart, const ScalarExpr& sigma, const Defaults& cfg) {
  auto pts = sample_points(chart.box(), cfg.sample_points, cfg.seed);
  double res = 0.0;
  for (const auto& p : pts) res = std::max(res, ae_residual(chart, sigma, p));
  if (res > cfg.tol)
    fail(ErrorKind::NotAlmostEinstein,
         "trace-free Hessian residual " + std::to_string(res) + " exceeds tolerance");

  double par = 0.0, smin = 0.0, smax = 0.0;
  bool first = true;
  for (const auto& p : pts) {
    par = std::max(par, ae_parallel_residual(chart, sigma, p));
    Vec i = ae_tractor_value(chart, sigma, p);
    double s = -tractor_metric(chart, i, i, p);
    smin = first ? s : std::min(smin, s);
    smax = first ? s : std::max(smax, s);
    first = false;
  }
  if (par > cfg.parallel_tol)
    fail(ErrorKind::NotParallel, "scale tractor is not parallel: residual " + std::to_string(par));
  if (smax - smin > 1e-8 * (1.0 + std::abs(smax)))
    fail(ErrorKind::NotParallel, "-h(I,I) is not constant over the chart");

  AEStructure ae;
  ae.sigma = sigma;
  ae.s_const = 0.5 * (smin + smax);
  return ae;
}

// ---------------------------------------------------------------------------
// classification

namespace {

Vec bisect_edge(const ScalarExpr& sigma, Vec a, Vec b, double target_width) {
  double fa = sigma.eval(a);
  for (int it = 0; it < 200; ++it) {
    Vec mid(a.size());
    double w = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
      mid[i] = 0.5 * (a[i] + b[i]);
      w = std::max(w, std::abs(b[i] - a[i]));
    }
    double fm = sigma.eval(mid);
    if (std::abs(fm) < target_width || w < target_width) return mid;
    if ((fa < 0) != (fm < 0)) {
      b = mid;
    } else {
      a = mid;
      fa = fm;
    }
  }
  return a;
}

// Newton iteration on grad sigma = 0, for zeros sigma touches without crossing
bool refine_touching_zero(const Chart& chart, const ScalarExpr& sigma, Vec& x) {
  const int d = chart.dim();
  std::vector<ScalarExpr> grad(d);
  std::vector<ScalarExpr> hess(d * d);
  for (int a = 0; a < d; ++a) {
    grad[a] = sigma.derivative(a);
    for (int b = 0; b < d; ++b) hess[a * d + b] = grad[a].derivative(b);
  }
  for (int it = 0; it < 60; ++it) {
    Eigen::VectorXd g(d);
    Eigen::MatrixXd h(d, d);
    for (int a = 0; a < d; ++a) {
      g(a) = grad[a].eval(x);
      for (int b = 0; b < d; ++b) h(a, b) = hess[a * d + b].eval(x);
    }
    if (g.norm() < 1e-14) break;
    Eigen::VectorXd step = h.fullPivLu().solve(g);
    if (!step.allFinite()) return false;
    for (int a = 0; a < d; ++a) x[a] -= step(a);
    if (!chart.box().contains(x, 1e-6)) return false;
  }
  return std::abs(sigma.eval(x)) < 1e-10;
}

}  // namespace

Classification classify(const Chart& chart, const AEStructure& ae, const Defaults& cfg) {
  const int d = chart.dim();
  const int n = cfg.grid_for_dim(d);
  const ScalarExpr& sigma = ae.sigma;

  // sample the grid
  std::vector<double> vals;
  std::vector<Vec> nodes;
  vals.reserve(static_cast<size_t>(std::pow(n, d)));
  for_each_grid_point(chart.box(), n, [&](std::span<const double> p) {
    nodes.emplace_back(p.begin(), p.end());
    vals.push_back(sigma.eval(p));
  });
  double vmax = 0.0;
  for (double v : vals) vmax = std::max(vmax, std::abs(v));

  // strides for neighbor lookup: axis 0 varies fastest (see for_each_grid_point)
  std::vector<size_t> stride(d);
  stride[0] = 1;
  for (int a = 1; a < d; ++a) stride[a] = stride[a - 1] * n;

  Classification out;
  out.s_const = ae.s_const;

  std::vector<Vec> crossing, touching;
  for (size_t idx = 0; idx < nodes.size(); ++idx) {
    // sign-change edges along each axis
    size_t rem = idx;
    std::vector<int> coord(d);
    for (int a = 0; a < d; ++a) {
      coord[a] = static_cast<int>(rem % n);
      rem /= n;
    }
    for (int a = 0; a < d; ++a) {
      if (coord[a] + 1 >= n) continue;
      size_t jdx = idx + stride[a];
      if ((vals[idx] < 0) != (vals[jdx] < 0)) {
        if (crossing.size() < 4000)
          crossing.push_back(bisect_edge(sigma, nodes[idx], nodes[jdx], cfg.zero_refine));
      }
    }
    // touching-zero candidates: local minimum of |sigma| below a cell-size band
    double cell = 0.0;
    for (int a = 0; a < d; ++a)
      cell = std::max(cell, (chart.box().hi(a) - chart.box().lo(a)) / (n - 1));
    double band = std::max(vmax, 1.0) * cell * cell;
    if (std::abs(vals[idx]) < band) {
      bool localmin = true;
      for (int a = 0; a < d && localmin; ++a) {
        if (coord[a] + 1 < n && std::abs(vals[idx + stride[a]]) < std::abs(vals[idx]))
          localmin = false;
        if (coord[a] > 0 && std::abs(vals[idx - stride[a]]) < std::abs(vals[idx])) localmin = false;
      }
      if (localmin) {
        Vec x = nodes[idx];
        if (refine_touching_zero(chart, sigma, x)) {
          bool dup = false;
          for (const Vec& y : touching) {
            double dist = 0.0;
            for (int a = 0; a < d; ++a) dist = std::max(dist, std::abs(x[a] - y[a]));
            if (dist < 2.0 * cell) dup = true;
          }
          if (!dup) touching.push_back(x);
        }
      }
    }
  }

  const double s_band = 1e-9;
  if (!crossing.empty() && !touching.empty())
    fail(ErrorKind::GridTooCoarse, "both crossing and touching zeros sampled; topology unclear");

  if (crossing.empty() && touching.empty()) {
    out.kind = SingularityKind::Empty;
    if (ae.s_const < -s_band)
      out.kind = SingularityKind::Empty;  // S<0 with empty zero set on this box is fine
  } else if (!crossing.empty()) {
    if (ae.s_const > -s_band)
      fail(ErrorKind::GridTooCoarse,
           "sign-crossing zero set but S is not negative; inconsistent sampling");
    out.kind = SingularityKind::Hypersurface;
    out.points = crossing;
  } else {
    if (std::abs(ae.s_const) > s_band)
      fail(ErrorKind::GridTooCoarse,
           "touching zeros require S = 0; inconsistent sampling");
    out.kind = SingularityKind::IsolatedPoints;
    out.points = touching;
    for (const Vec& x : touching) {
      double gn = 0.0;
      for (int a = 0; a < d; ++a) gn = std::max(gn, std::abs(sigma.derivative(a).eval(x)));
      out.max_gradient_at_zeros = std::max(out.max_gradient_at_zeros, gn);
    }
  }

  // umbilicity of the hypersurface case
  if (out.kind == SingularityKind::Hypersurface && d >= 3) {
    LevelSurface surf;
    surf.sigma = sigma;
    surf.samples = out.points;
    size_t step = std::max<size_t>(1, out.points.size() / 24);
    for (size_t i = 0; i < out.points.size(); i += step)
      out.max_umbilicity =
          std::max(out.max_umbilicity, umbilicity_residual(chart, surf, out.points[i]));
  }

  // off-singularity Einstein property of sigma^{-2} g
  if (std::abs(ae.s_const) > s_band) {
    ScalarExpr om = ScalarExpr(-0.5) * log(sigma * sigma);
    Chart rescaled = rescale_chart(chart, om);
    auto pts = sample_points(chart.box(), std::min(cfg.sample_points, 60), cfg.seed + 1);
    for (const auto& p : pts) {
      if (std::abs(sigma.eval(p)) <= 0.1) continue;
      out.max_einstein_residual =
          std::max(out.max_einstein_residual, einstein_residual(rescaled, ae.s_const, p));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// parallel tractors over the chart

namespace {

struct ConstraintSet {
  Eigen::MatrixXd gram;            // sum of M^T M over all constraint operators
  std::vector<Mat> loops;          // loop transport matrices at the base point
};

ConstraintSet gather_constraints(const Chart& chart, const Vec& base, int nsamples, int nloops,
                                 const Defaults& cfg) {
  const int d = chart.dim();
  const int n = d + 2;
  ConstraintSet cs;
  cs.gram = Eigen::MatrixXd::Zero(n, n);

  auto add_operator = [&](const Mat& op) {
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = op[r * n + c];
    cs.gram += m.transpose() * m;
  };

  // curvature operators and their derivatives at transported sample points
  auto pts = sample_points(chart.box(), nsamples, cfg.seed + 17, 0.1);
  pts.push_back(base);
  for (const auto& x : pts) {
    Curve seg = Curve::segment(base, x);
    Mat t = transport_matrix(chart, seg, cfg);
    auto add_conjugated = [&](const std::vector<Mat>& ops) {
      for (const Mat& om : ops) add_operator(mat_mul(om, t, n));
    };
    add_conjugated(tractor_curvature_all(chart, x));
    add_conjugated(tractor_curvature_derivs(chart, x));
  }

  // loop closures based at the base point
  int added = 0;
  for (int scale = 0; scale < 2 && added < nloops; ++scale) {
    double frac = scale == 0 ? 0.35 : 0.18;
    for (int a = 0; a < d && added < nloops; ++a)
      for (int b = a + 1; b < d && added < nloops; ++b) {
        double sign = scale == 0 ? 1.0 : -1.0;
        double wa = sign * frac * (chart.box().hi(a) - chart.box().lo(a));
        double wb = sign * frac * (chart.box().hi(b) - chart.box().lo(b));
        auto segs = Curve::rectangle(base, a, b, wa, wb);
        Mat loop = transport_matrix_path(chart, segs, cfg);
        Mat closing = loop;
        for (int i = 0; i < n; ++i) closing[i * n + i] -= 1.0;
        add_operator(closing);
        cs.loops.push_back(loop);
        ++added;
      }
  }
  if (d == 1) {
    // a 1-d "loop": traverse the whole box and back is trivial, so use the
    // full-interval transport against the closed-curve interpretation
    Vec from{chart.box().lo(0)}, to{chart.box().hi(0)};
    Mat loop = transport_matrix(chart, Curve::segment(from, to), cfg);
    cs.loops.push_back(loop);
  }
  return cs;
}

struct Extraction {
  int dim = 0;
  std::vector<Vec> basis;
  double closure = 0.0;
};

Extraction extract_nullspace(const ConstraintSet& cs, int n, const Defaults& cfg) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cs.gram);
  double lmax = eig.eigenvalues().cwiseAbs().maxCoeff();
  double thresh = std::max(1e-14, 1e-10 * lmax);
  Extraction ex;
  for (int i = 0; i < n; ++i) {
    if (eig.eigenvalues()(i) >= thresh) continue;
    Vec v(n);
    for (int r = 0; r < n; ++r) v[r] = eig.eigenvectors()(r, i);
    // verify against every sampled loop
    double worst = 0.0;
    for (const Mat& loop : cs.loops) {
      Vec lv = mat_apply(loop, v, n);
      for (int r = 0; r < n; ++r) worst = std::max(worst, std::abs(lv[r] - v[r]));
    }
    if (worst < cfg.parallel_tol) {
      ex.basis.push_back(v);
      ex.closure = std::max(ex.closure, worst);
    }
  }
  ex.dim = static_cast<int>(ex.basis.size());
  return ex;
}

}  // namespace

ParallelSpace parallel_space(const Chart& chart, const Defaults& cfg) {
  const int d = chart.dim();
  const int n = d + 2;
  Vec base = chart.box().center();

  ConstraintSet coarse = gather_constraints(chart, base, 4, 2 * d, cfg);
  Extraction e1 = extract_nullspace(coarse, n, cfg);
  ConstraintSet fine = gather_constraints(chart, base, 8, 2 * d, cfg);
  fine.gram += coarse.gram;
  for (const Mat& l : coarse.loops) fine.loops.push_back(l);
  Extraction e2 = extract_nullspace(fine, n, cfg);
  if (e1.dim != e2.dim)
    fail(ErrorKind::RankUnstable, "parallel-space dimension changed under sample refinement: " +
                                      std::to_string(e1.dim) + " vs " + std::to_string(e2.dim));
  ParallelSpace out;
  out.dim = e2.dim;
  out.base = base;
  out.basis = e2.basis;
  out.max_closure_residual = e2.closure;
  return out;
}

}  // namespace ctrac
