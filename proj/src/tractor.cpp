#include "ctrac/tractor.hpp"

#include <algorithm>
#include <cmath>

#include "ctrac/errors.hpp"

namespace ctrac {

namespace {

int slot_count(const Chart& chart) { return chart.dim() + 2; }

Jet expr_jet(const ScalarExpr& e, int d, std::span<const double> p) {
  Jet r(e.eval(p), d);
  for (int a = 0; a < d; ++a) r.d[a] = e.derivative(a).eval(p);
  return r;
}

}  // namespace

std::vector<Jet> ExprTractorField::slots(const Chart& chart, std::span<const double> p) const {
  const int d = chart.dim();
  if (static_cast<int>(f_.mu.size()) != d) fail(ErrorKind::BadChart, "tractor mu slot count");
  std::vector<Jet> out;
  out.reserve(d + 2);
  out.push_back(expr_jet(f_.sigma, d, p));
  for (int a = 0; a < d; ++a) out.push_back(expr_jet(f_.mu[a], d, p));
  out.push_back(expr_jet(f_.rho, d, p));
  return out;
}

std::vector<Jet> ScaleTractorField::slots(const Chart& chart, std::span<const double> p) const {
  const int d = chart.dim();
  CurvatureJet c = curvature_jet(chart, p);

  // exact sigma derivatives to third order
  std::vector<ScalarExpr> ds(d), dds(d * d), ddds(d * d * d);
  for (int a = 0; a < d; ++a) {
    ds[a] = sigma_.derivative(a);
    for (int b = 0; b < d; ++b) {
      dds[a * d + b] = ds[a].derivative(b);
      for (int e = 0; e < d; ++e) ddds[(a * d + b) * d + e] = dds[a * d + b].derivative(e);
    }
  }
  Jet sig(sigma_.eval(p), d);
  std::vector<Jet> grad(d), hess(d * d);
  for (int a = 0; a < d; ++a) {
    sig.d[a] = ds[a].eval(p);
    grad[a] = Jet(ds[a].eval(p), d);
    for (int b = 0; b < d; ++b) grad[a].d[b] = dds[a * d + b].eval(p);
  }
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      hess[a * d + b] = Jet(dds[a * d + b].eval(p), d);
      for (int e = 0; e < d; ++e) hess[a * d + b].d[e] = ddds[(a * d + b) * d + e].eval(p);
    }

  // rho = -(1/d)(g^{be}(d_b d_e - Gamma^f_be d_f) sigma + J sigma)
  Jet box(0.0, d);
  for (int b = 0; b < d; ++b)
    for (int e = 0; e < d; ++e) {
      Jet h2 = hess[b * d + e];
      for (int f = 0; f < d; ++f) h2 -= c.gamma[(f * d + b) * d + e] * grad[f];
      box += c.ginv[b * d + e] * h2;
    }
  Jet rho = (-1.0 / d) * (box + c.jtrace * sig);

  std::vector<Jet> out;
  out.reserve(d + 2);
  out.push_back(sig);
  for (int a = 0; a < d; ++a) out.push_back(grad[a]);
  out.push_back(rho);
  return out;
}

TransformedTractorField::TransformedTractorField(std::shared_ptr<const TractorFieldEval> base,
                                                 Chart source, ScalarExpr omega)
    : base_(std::move(base)), source_(std::move(source)),
      rescale_(ConformalRescale::from_omega(omega, source_.dim())) {}

std::vector<Jet> TransformedTractorField::slots(const Chart& chart, std::span<const double> p) const {
  (void)chart;
  const int d = source_.dim();
  std::vector<Jet> u = base_->slots(source_, p);
  CurvatureJet c = curvature_jet(source_, p);
  Jet om = expr_jet(rescale_.omega, d, p);
  std::vector<Jet> ups(d);
  for (int a = 0; a < d; ++a) ups[a] = expr_jet(rescale_.upsilon[a], d, p);

  Jet eo = jexp(om), eoinv = jexp(-1.0 * om);
  Jet upsdot(0.0, d), ups2(0.0, d);
  for (int b = 0; b < d; ++b)
    for (int e = 0; e < d; ++e) {
      upsdot += c.ginv[b * d + e] * ups[b] * u[1 + e];
      ups2 += c.ginv[b * d + e] * ups[b] * ups[e];
    }

  std::vector<Jet> out(d + 2, Jet(0.0, d));
  out[0] = eo * u[0];
  for (int b = 0; b < d; ++b) out[1 + b] = eo * (u[1 + b] + u[0] * ups[b]);
  out[d + 1] = eoinv * (u[d + 1] - upsdot - 0.5 * u[0] * ups2);
  return out;
}

// ---------------------------------------------------------------------------

Mat tractor_metric_matrix(const Chart& chart, std::span<const double> p) {
  const int d = chart.dim();
  const int n = d + 2;
  MetricEval m = chart.metric_eval(p, 0);
  std::vector<double> g(m.v[0]);
  // invert in place (small
  // symmetric matrix)
  std::vector<double> gi(d * d, 0.0);
  {
    std::vector<double> a(g);
    for (int i = 0; i < d; ++i) gi[i * d + i] = 1.0;
    for (int col = 0; col < d; ++col) {
      int piv = col;
      for (int r = col + 1; r < d; ++r)
        if (std::abs(a[r * d + col]) > std::abs(a[piv * d + col])) piv = r;
      for (int j = 0; j < d; ++j) {
        std::swap(a[piv * d + j], a[col * d + j]);
        std::swap(gi[piv * d + j], gi[col * d + j]);
      }
      double dd = a[col * d + col];
      for (int j = 0; j < d; ++j) {
        a[col * d + j] /= dd;
        gi[col * d + j] /= dd;
      }
      for (int r = 0; r < d; ++r) {
        if (r == col) continue;
        double f = a[r * d + col];
        for (int j = 0; j < d; ++j) {
          a[r * d + j] -= f * a[col * d + j];
          gi[r * d + j] -= f * gi[col * d + j];
        }
      }
    }
  }
  Mat h(n * n, 0.0);
  h[0 * n + (n - 1)] = 1.0;
  h[(n - 1) * n + 0] = 1.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) h[(1 + i) * n + (1 + j)] = gi[i * d + j];
  return h;
}

double tractor_metric(const Chart& chart, std::span<const double> u, std::span<const double> v,
                      std::span<const double> p) {
  const int n = slot_count(chart);
  if (static_cast<int>(u.size()) != n || static_cast<int>(v.size()) != n)
    fail(ErrorKind::BadChart, "tractor value has wrong slot count");
  Mat h = tractor_metric_matrix(chart, p);
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += u[i] * h[i * n + j] * v[j];
  return s;
}

double tractor_metric(const Chart& chart, const ScaledTractor& u, const ScaledTractor& v,
                      std::span<const double> p) {
  if (u.scale != v.scale)
    fail(ErrorKind::ScaleMismatch, "tractor values are expressed in different scales");
  return tractor_metric(chart, u.u, v.u, p);
}

Vec transform_splitting(const Chart& chart, std::span<const double> u, const ConformalRescale& r,
                        std::span<const double> p) {
  const int d = chart.dim();
  CurvaturePack c = curvature(chart, p);
  std::vector<double> ups(d);
  for (int a = 0; a < d; ++a) ups[a] = r.upsilon[a].eval(p);
  double upsdot = 0.0, ups2 = 0.0;
  for (int b = 0; b < d; ++b)
    for (int e = 0; e < d; ++e) {
      upsdot += c.ginv[b * d + e] * ups[b] * u[1 + e];
      ups2 += c.ginv[b * d + e] * ups[b] * ups[e];
    }
  Vec out(d + 2, 0.0);
  out[0] = u[0];
  for (int b = 0; b < d; ++b) out[1 + b] = u[1 + b] + u[0] * ups[b];
  out[d + 1] = u[d + 1] - upsdot - 0.5 * u[0] * ups2;
  return out;
}

Vec transform_tractor(const Chart& chart, std::span<const double> u, const ConformalRescale& r,
                      std::span<const double> p) {
  const int d = chart.dim();
  Vec out = transform_splitting(chart, u, r, p);
  double eo = std::exp(r.omega.eval(p));
  out[0] *= eo;
  for (int b = 0; b < d; ++b) out[1 + b] *= eo;
  out[d + 1] /= eo;
  return out;
}

// ---------------------------------------------------------------------------
// connection

namespace {

// scalar "one" with matching jet dimension
inline double identity_helper(double) { return 1.0; }
inline Jet identity_helper(const Jet& z) { return Jet(1.0, z.n); }
inline Jet2 identity_helper(const Jet2& z) { return Jet2(Jet(1.0, z.v.n), z.n); }

}  // namespace

std::vector<Mat> connection_matrices(const Chart& chart, std::span<const double> p) {
  const int d = chart.dim();
  const int n = d + 2;
  CurvaturePack c = curvature(chart, p);
  std::vector<Mat> A(d, Mat(n * n, 0.0));
  for (int a = 0; a < d; ++a) {
    A[a][0 * n + (1 + a)] = -1.0;
    for (int b = 0; b < d; ++b) {
      A[a][(1 + b) * n + 0] = c.schouten[a * d + b];
      for (int cc = 0; cc < d; ++cc) A[a][(1 + b) * n + (1 + cc)] = -c.gamma[(cc * d + a) * d + b];
      A[a][(1 + b) * n + (n - 1)] = c.g[a * d + b];
    }
    for (int cc = 0; cc < d; ++cc) {
      double s = 0.0;
      for (int e = 0; e < d; ++e) s += c.schouten[a * d + e] * c.ginv[e * d + cc];
      A[a][(n - 1) * n + (1 + cc)] = -s;
    }
  }
  return A;
}

std::vector<Vec> tractor_connection(const Chart& chart, const TractorFieldEval& field,
                                    std::span<const double> p) {
  const int d = chart.dim();
  const int n = d + 2;
  std::vector<Jet> u = field.slots(chart, p);
  std::vector<Mat> A = connection_matrices(chart, p);
  std::vector<Vec> out(d, Vec(n, 0.0));
  for (int a = 0; a < d; ++a)
    for (int r = 0; r < n; ++r) {
      double s = u[r].d[a];
      for (int cdx = 0; cdx < n; ++cdx) s += A[a][r * n + cdx] * u[cdx].v;
      out[a][r] = s;
    }
  return out;
}

Vec thomas_d(const Chart& chart, const ScalarExpr& v, double w, std::span<const double> p) {
  const int d = chart.dim();
  CurvaturePack c = curvature(chart, p);
  double val = v.eval(p);
  std::vector<double> grad(d), hess(d * d);
  for (int a = 0; a < d; ++a) {
    ScalarExpr da = v.derivative(a);
    grad[a] = da.eval(p);
    for (int b = 0; b < d; ++b) hess[a * d + b] = da.derivative(b).eval(p);
  }
  double box = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double h2 = hess[a * d + b];
      for (int f = 0; f < d; ++f) h2 -= c.gamma[(f * d + a) * d + b] * grad[f];
      box += c.ginv[a * d + b] * h2;
    }
  double fac = d + 2.0 * w - 2.0;
  Vec out(d + 2, 0.0);
  out[0] = fac * w * val;
  for (int a = 0; a < d; ++a) out[1 + a] = fac * grad[a];
  out[d + 1] = -box - w * c.jtrace * val;  // (Delta - w J) V with Delta = -nabla^b nabla_b
  return out;
}

// ---------------------------------------------------------------------------
// tractor curvature

namespace {

template <class T>
std::vector<std::vector<T>> connection_jets(int d, const std::vector<T>& g,
                                            const std::vector<T>& ginv,
                                            const std::vector<T>& gamma,
                                            const std::vector<T>& schouten, const T& zero) {
  const int n = d + 2;
  std::vector<std::vector<T>> A(d, std::vector<T>(n * n, zero));
  T one = identity_helper(zero);
  for (int a = 0; a < d; ++a) {
    A[a][0 * n + (1 + a)] = -one;
    for (int b = 0; b < d; ++b) {
      A[a][(1 + b) * n + 0] = schouten[a * d + b];
      for (int cc = 0; cc < d; ++cc) A[a][(1 + b) * n + (1 + cc)] = -gamma[(cc * d + a) * d + b];
      A[a][(1 + b) * n + (n - 1)] = g[a * d + b];
    }
    for (int cc = 0; cc < d; ++cc) {
      T s = zero;
      for (int e = 0; e < d; ++e) s += schouten[a * d + e] * ginv[e * d + cc];
      A[a][(n - 1) * n + (1 + cc)] = -s;
    }
  }
  return A;
}

// Omega_ab = d_a A_b - d_b A_a + [A_a, A_b] from jet-valued connection
// matrices; the result scalar type is one jet level below the input.
std::vector<Jet> omega_from_jets(int n, const std::vector<Jet2>& Aa, const std::vector<Jet2>& Ab,
                                 int a, int b, int d) {
  std::vector<Jet> out(n * n, Jet(0.0, d));
  for (int r = 0; r < n; ++r)
    for (int cdx = 0; cdx < n; ++cdx) {
      Jet s = Ab[r * n + cdx].d[a] - Aa[r * n + cdx].d[b];
      for (int k = 0; k < n; ++k)
        s += Aa[r * n + k].v * Ab[k * n + cdx].v - Ab[r * n + k].v * Aa[k * n + cdx].v;
      out[r * n + cdx] = s;
    }
  return out;
}

std::vector<double> omega_from_jet1(int n, const std::vector<Jet>& Aa, const std::vector<Jet>& Ab,
                                    int a, int b) {
  std::vector<double> out(n * n, 0.0);
  for (int r = 0; r < n; ++r)
    for (int cdx = 0; cdx < n; ++cdx) {
      double s = Ab[r * n + cdx].d[a] - Aa[r * n + cdx].d[b];
      for (int k = 0; k < n; ++k)
        s += Aa[r * n + k].v * Ab[k * n + cdx].v - Ab[r * n + k].v * Aa[k * n + cdx].v;
      out[r * n + cdx] = s;
    }
  return out;
}

}  // namespace

Mat tractor_curvature(const Chart& chart, std::span<const double> p, int a, int b) {
  const int d = chart.dim();
  const int n = d + 2;
  CurvatureJet c = curvature_jet(chart, p);
  auto A = connection_jets<Jet>(d, c.g, c.ginv, c.gamma, c.schouten, Jet(0.0, d));
  return omega_from_jet1(n, A[a], A[b], a, b);
}

std::vector<Mat> tractor_curvature_all(const Chart& chart, std::span<const double> p) {
  const int d = chart.dim();
  const int n = d + 2;
  CurvatureJet c = curvature_jet(chart, p);
  auto A = connection_jets<Jet>(d, c.g, c.ginv, c.gamma, c.schouten, Jet(0.0, d));
  std::vector<Mat> out;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) out.push_back(omega_from_jet1(n, A[a], A[b], a, b));
  return out;
}

std::vector<Mat> tractor_curvature_derivs(const Chart& chart, std::span<const double> p) {
  const int d = chart.dim();
  const int n = d + 2;
  CurvatureJet2 c2 = curvature_jet2(chart, p);
  Jet2 zero2(Jet(0.0, d), d);
  auto A2 = connection_jets<Jet2>(d, c2.g, c2.ginv, c2.gamma, c2.schouten, zero2);

  // demote to values for the commutator/Christoffel corrections
  std::vector<Mat> Av(d, Mat(n * n, 0.0));
  std::vector<double> gammav(d * d * d);
  for (int a = 0; a < d; ++a)
    for (int i = 0; i < n * n; ++i) Av[a][i] = value_of(A2[a][i]);
  for (int i = 0; i < d * d * d; ++i) gammav[i] = value_of(c2.gamma[i]);

  std::vector<std::vector<Jet>> omegas;  // a<b pairs
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      omegas.push_back(omega_from_jets(n, A2[a], A2[b], a, b, d));
      pairs.emplace_back(a, b);
    }

  auto omega_value = [&](int a, int b, Mat& m) {
    // looks up Omega_ab with sign for a>b
    m.assign(n * n, 0.0);
    if (a == b) return;
    double sgn = a < b ? 1.0 : -1.0;
    int aa = std::min(a, b), bb = std::max(a, b);
    for (size_t q = 0; q < pairs.size(); ++q)
      if (pairs[q].first == aa && pairs[q].second == bb) {
        for (int i = 0; i < n * n; ++i) m[i] = sgn * omegas[q][i].v;
        return;
      }
  };

  std::vector<Mat> out;
  Mat tmp(n * n), tmp2(n * n);
  for (int cdir = 0; cdir < d; ++cdir)
    for (size_t q = 0; q < pairs.size(); ++q) {
      auto [a, b] = pairs[q];
      Mat der(n * n, 0.0);
      for (int i = 0; i < n * n; ++i) der[i] = omegas[q][i].d[cdir];
      // + [A_c, Omega_ab]
      for (int r = 0; r < n; ++r)
        for (int cc = 0; cc < n; ++cc) {
          double s = 0.0;
          for (int k = 0; k < n; ++k)
            s += Av[cdir][r * n + k] * omegas[q][k * n + cc].v -
                 omegas[q][r * n + k].v * Av[cdir][k * n + cc];
          der[r * n + cc] += s;
        }
      // - Gamma^e_{c a} Omega_eb - Gamma^e_{c b} Omega_ae
      for (int e = 0; e < d; ++e) {
        omega_value(e, b, tmp);
        omega_value(a, e, tmp2);
        double ga = gammav[(e * d + cdir) * d + a];
        double gb = gammav[(e * d + cdir) * d + b];
        for (int i = 0; i < n * n; ++i) der[i] -= ga * tmp[i] + gb * tmp2[i];
      }
      out.push_back(std::move(der));
    }
  return out;
}

// ---------------------------------------------------------------------------
// parallel transport

Vec Curve::point(double t) const {
  Vec p(comp.size());
  double arg[1] = {t};
  for (size_t i = 0; i < comp.size(); ++i) p[i] = comp[i].eval(std::span<const double>(arg, 1));
  return p;
}

Vec Curve::velocity(double t) const {
  Vec v(comp.size());
  double arg[1] = {t};
  for (size_t i = 0; i < comp.size(); ++i)
    v[i] = comp[i].derivative(0).eval(std::span<const double>(arg, 1));
  return v;
}

Curve Curve::segment(std::span<const double> from, std::span<const double> to) {
  Curve c;
  ScalarExpr t = ScalarExpr::var(0);
  for (size_t i = 0; i < from.size(); ++i)
    c.comp.push_back(ScalarExpr(from[i]) + (ScalarExpr(to[i]) - ScalarExpr(from[i])) * t);
  return c;
}

std::vector<Curve> Curve::rectangle(std::span<const double> base, int a, int b, double wa,
                                    double wb) {
  // loop based at `base` itself: base -> +wa e_a -> +wb e_b -> back
  std::vector<Vec> corners(4, Vec(base.begin(), base.end()));
  corners[1][a] += wa;
  corners[2][a] += wa;
  corners[2][b] += wb;
  corners[3][b] += wb;
  std::vector<Curve> segs;
  for (int k = 0; k < 4; ++k) segs.push_back(segment(corners[k], corners[(k + 1) % 4]));
  return segs;
}

namespace {

// one classical RK4 step of u' = f(t, u)
template <class Rhs>
Vec rk4_step(const Rhs& f, double t, const Vec& u, double h) {
  Vec k1 = f(t, u);
  Vec tmp(u.size());
  for (size_t i = 0; i < u.size(); ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
  Vec k2 = f(t + 0.5 * h, tmp);
  for (size_t i = 0; i < u.size(); ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
  Vec k3 = f(t + 0.5 * h, tmp);
  for (size_t i = 0; i < u.size(); ++i) tmp[i] = u[i] + h * k3[i];
  Vec k4 = f(t + h, tmp);
  Vec out(u.size());
  for (size_t i = 0; i < u.size(); ++i)
    out[i] = u[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

struct IntegrateOut {
  Vec state;
  double max_err = 0.0;
  long steps = 0;
};

// adaptive step-doubling RK4 over t in [0,1]
template <class Rhs>
IntegrateOut integrate(const Rhs& f, Vec u0, const Defaults& cfg) {
  IntegrateOut out;
  out.state = std::move(u0);
  double t = 0.0, h = 0.05;
  while (t < 1.0) {
    if (out.steps >= cfg.rk_max_steps)
      fail(ErrorKind::StepFailure, "transport exceeded the step budget");
    h = std::min(h, 1.0 - t);
    Vec big = rk4_step(f, t, out.state, h);
    Vec half = rk4_step(f, t, out.state, 0.5 * h);
    half = rk4_step(f, t + 0.5 * h, half, 0.5 * h);
    double err = 0.0;
    for (size_t i = 0; i < big.size(); ++i) err = std::max(err, std::abs(big[i] - half[i]));
    err /= 15.0;
    out.steps += 3;
    if (err > cfg.rk_tol && h > 1e-12) {
      h *= 0.5;
      continue;
    }
    t += h;
    out.state = std::move(half);
    out.max_err = std::max(out.max_err, err);
    if (err < cfg.rk_tol / 64.0) h *= 2.0;
  }
  return out;
}

}  // namespace

TransportResult parallel_transport(const Chart& chart, const Curve& curve,
                                   std::span<const double> u0, const Defaults& cfg) {
  const int d = chart.dim();
  const int n = d + 2;
  if (static_cast<int>(curve.comp.size()) != d) fail(ErrorKind::BadChart, "curve dimension mismatch");
  if (static_cast<int>(u0.size()) != n) fail(ErrorKind::BadChart, "tractor slot count mismatch");
  std::vector<ScalarExpr> vel;
  for (const auto& e : curve.comp) vel.push_back(e.derivative(0));

  auto rhs = [&](double t, const Vec& u) {
    double arg[1] = {t};
    Vec x(d), v(d);
    for (int i = 0; i < d; ++i) {
      x[i] = curve.comp[i].eval(std::span<const double>(arg, 1));
      v[i] = vel[i].eval(std::span<const double>(arg, 1));
    }
    if (!chart.box().contains(x, 1e-9)) fail(ErrorKind::DomainError, "curve leaves the chart box");
    std::vector<Mat> A = connection_matrices(chart, x);
    Vec du(n, 0.0);
    for (int a = 0; a < d; ++a)
      for (int r = 0; r < n; ++r) {
        double s = 0.0;
        for (int c = 0; c < n; ++c) s += A[a][r * n + c] * u[c];
        du[r] -= v[a] * s;
      }
    return du;
  };

  Vec start(u0.begin(), u0.end());
  double h0 = tractor_metric(chart, start, start, curve.point(0.0));
  IntegrateOut r = integrate(rhs, start, cfg);
  TransportResult res;
  res.endpoint = r.state;
  res.max_local_error = r.max_err;
  res.steps = r.steps;
  double h1 = tractor_metric(chart, res.endpoint, res.endpoint, curve.point(1.0));
  res.metric_drift = std::abs(h1 - h0);
  return res;
}

Mat transport_matrix(const Chart& chart, const Curve& curve, const Defaults& cfg) {
  const int d = chart.dim();
  const int n = d + 2;
  std::vector<ScalarExpr> vel;
  for (const auto& e : curve.comp) vel.push_back(e.derivative(0));

  auto rhs = [&](double t, const Vec& m) {
    double arg[1] = {t};
    Vec x(d), v(d);
    for (int i = 0; i < d; ++i) {
      x[i] = curve.comp[i].eval(std::span<const double>(arg, 1));
      v[i] = vel[i].eval(std::span<const double>(arg, 1));
    }
    std::vector<Mat> A = connection_matrices(chart, x);
    Mat va(n * n, 0.0);
    for (int a = 0; a < d; ++a)
      for (int i = 0; i < n * n; ++i) va[i] += v[a] * A[a][i];
    Vec dm(n * n, 0.0);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += va[r * n + k] * m[k * n + c];
        dm[r * n + c] = -s;
      }
    return dm;
  };

  IntegrateOut r = integrate(rhs, mat_identity(n), cfg);
  return r.state;
}

Mat transport_matrix_path(const Chart& chart, std::span<const Curve> pieces, const Defaults& cfg) {
  const int n = chart.dim() + 2;
  Mat m = mat_identity(n);
  for (const Curve& piece : pieces) m = mat_mul(transport_matrix(chart, piece, cfg), m, n);
  return m;
}

// ---------------------------------------------------------------------------
// circle ODE

CircleOdeBasis circle_ode_solutions(double mu) { return CircleOdeBasis{mu}; }

double CircleOdeBasis::s(int k, double t) const {
  if (k == 0) return 1.0;
  if (mu > 0.0) {
    double w = std::sqrt(2.0 * mu);
    return k == 1 ? std::cos(w * t) : std::sin(w * t);
  }
  if (mu == 0.0) return k == 1 ? t : t * t;
  double l = std::sqrt(-2.0 * mu);
  return k == 1 ? std::exp(l * t) : std::exp(-l * t);
}

double CircleOdeBasis::ds(int k, double t) const {
  if (k == 0) return 0.0;
  if (mu > 0.0) {
    double w = std::sqrt(2.0 * mu);
    return k == 1 ? -w * std::sin(w * t) : w * std::cos(w * t);
  }
  if (mu == 0.0) return k == 1 ? 1.0 : 2.0 * t;
  double l = std::sqrt(-2.0 * mu);
  return k == 1 ? l * std::exp(l * t) : -l * std::exp(-l * t);
}

double CircleOdeBasis::dds(int k, double t) const {
  if (k == 0) return 0.0;
  if (mu > 0.0) {
    double w = std::sqrt(2.0 * mu);
    return k == 1 ? -w * w * std::cos(w * t) : -w * w * std::sin(w * t);
  }
  if (mu == 0.0) return k == 1 ? 0.0 : 2.0;
  double l = std::sqrt(-2.0 * mu);
  return l * l * s(k, t);
}

std::array<double, 3> CircleOdeBasis::triple(int k, double t) const {
  return {s(k, t), ds(k, t), -(dds(k, t) + mu * s(k, t))};
}

double CircleOdeBasis::period() const {
  return mu > 0.0 ? 2.0 * 3.14159265358979323846 / std::sqrt(2.0 * mu) : 0.0;
}

// ---------------------------------------------------------------------------

Mat mat_mul(const Mat& a, const Mat& b, int n) {
  Mat out(n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double aik = a[i * n + k];
      for (int j = 0; j < n; ++j) out[i * n + j] += aik * b[k * n + j];
    }
  return out;
}

Mat mat_identity(int n) {
  Mat out(n * n, 0.0);
  for (int i = 0; i < n; ++i) out[i * n + i] = 1.0;
  return out;
}

double mat_max_abs(const Mat& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

Vec mat_apply(const Mat& a, std::span<const double> v, int n) {
  Vec out(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i] += a[i * n + j] * v[j];
  return out;
}

}  // namespace ctrac
