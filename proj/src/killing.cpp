#include "ctrac/killing.hpp"

#include <algorithm>
#include <cmath>

#include "ctrac/errors.hpp"

namespace ctrac {

namespace {

Jet expr_jet(const ScalarExpr& e, int d, std::span<const double> p) {
  Jet r(e.eval(p), d);
  for (int a = 0; a < d; ++a) r.d[a] = e.derivative(a).eval(p);
  return r;
}

Jet2 expr_jet2(const ScalarExpr& e, int d, std::span<const double> p) {
  Jet2 r(expr_jet(e, d, p), d);
  for (int a = 0; a < d; ++a) r.d[a] = expr_jet(e.derivative(a), d, p);
  return r;
}

// every slot of the 2-form tractor, as first-order jets
struct KKJets {
  int d;
  std::vector<Jet> klow, kup, xup;
  std::vector<Jet> fup;  // d*d, raised curl
  Jet w;
  CurvatureJet curv;
};

KKJets compute_kk_jets(const Chart& chart, std::span<const ScalarExpr> k_low,
                       std::span<const double> p) {
  const int d = chart.dim();
  if (static_cast<int>(k_low.size()) != d) fail(ErrorKind::BadChart, "field component count");
  KKJets out;
  out.d = d;
  out.curv = curvature_jet(chart, p);
  CurvatureJet2 c2 = curvature_jet2(chart, p);

  std::vector<Jet2> k2(d), dk2(d * d);
  for (int b = 0; b < d; ++b) {
    k2[b] = expr_jet2(k_low[b], d, p);
    for (int a = 0; a < d; ++a) dk2[a * d + b] = expr_jet2(k_low[b].derivative(a), d, p);
  }

  // nabla_a k_b and the divergence, at second-jet depth
  std::vector<Jet2> gradk(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      Jet2 s = dk2[a * d + b];
      for (int e = 0; e < d; ++e) s -= c2.gamma[(e * d + a) * d + b] * k2[e];
      gradk[a * d + b] = s;
    }
  Jet2 div(Jet(0.0, d), d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) div += c2.ginv[a * d + b] * gradk[a * d + b];

  // trace-free symmetric part S_ab
  std::vector<Jet2> sform(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      sform[a * d + b] =
          0.5 * (gradk[a * d + b] + gradk[b * d + a]) - (1.0 / d) * div * c2.g[a * d + b];

  // div^c S_ca  (first-order jet output)
  std::vector<Jet> divs(d, Jet(0.0, d));
  for (int a = 0; a < d; ++a) {
    Jet s(0.0, d);
    for (int c = 0; c < d; ++c)
      for (int e = 0; e < d; ++e) {
        // nabla_e S_ca as a jet
        Jet nes = sform[c * d + a].d[e];
        for (int f = 0; f < d; ++f)
          nes -= jet_of(c2.gamma[(f * d + e) * d + c]) * jet_of(sform[f * d + a]) +
                 jet_of(c2.gamma[(f * d + e) * d + a]) * jet_of(sform[c * d + f]);
        s += jet_of(c2.ginv[e * d + c]) * nes;
      }
    divs[a] = s;
  }

  out.klow.resize(d);
  out.kup.assign(d, Jet(0.0, d));
  out.xup.assign(d, Jet(0.0, d));
  out.fup.assign(d * d, Jet(0.0, d));
  out.w = jet_of(div) * (1.0 / d);

  std::vector<Jet> xlow(d);
  for (int a = 0; a < d; ++a) {
    Jet pk(0.0, d);
    for (int c = 0; c < d; ++c)
      for (int e = 0; e < d; ++e)
        pk += out.curv.schouten[a * d + e] * out.curv.ginv[e * d + c] * jet_of(k2[c]);
    xlow[a] = (1.0 / d) * (divs[a] - div.d[a]) - pk;
    out.klow[a] = jet_of(k2[a]);
  }
  // raise everything with the chart metric
  std::vector<Jet> flow(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      flow[a * d + b] = 0.5 * (jet_of(gradk[a * d + b]) - jet_of(gradk[b * d + a]));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      out.kup[a] += out.curv.ginv[a * d + b] * out.klow[b];
      out.xup[a] += out.curv.ginv[a * d + b] * xlow[b];
    }
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      Jet s(0.0, d);
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          s += out.curv.ginv[a * d + c] * out.curv.ginv[b * d + e] * flow[c * d + e];
      out.fup[a * d + b] = s;
    }
  return out;
}

std::vector<Jet> kk_matrix_jets(const KKJets& kj) {
  // The bottom slot enters with the orientation fixed by the wedge identity
  // K(I1, I2) = matrix(slots of sigma1 d sigma2 - sigma2 d sigma1); the same
  // orientation makes K parallel for Killing fields of curved Einstein charts.
  const int d = kj.d;
  const int n = d + 2;
  std::vector<Jet> m(n * n, Jet(0.0, d));
  m[0 * n + (n - 1)] = kj.w;
  m[(n - 1) * n + 0] = -kj.w;
  for (int c = 0; c < d; ++c) {
    m[0 * n + (1 + c)] = -kj.xup[c];
    m[(1 + c) * n + 0] = kj.xup[c];
    m[(n - 1) * n + (1 + c)] = kj.kup[c];
    m[(1 + c) * n + (n - 1)] = -kj.kup[c];
    for (int e = 0; e < d; ++e) m[(1 + c) * n + (1 + e)] = kj.fup[c * d + e];
  }
  return m;
}

}  // namespace

double ck_residual(const Chart& chart, std::span<const ScalarExpr> k_low,
                   std::span<const double> p) {
  const int d = chart.dim();
  CurvaturePack c = curvature(chart, p);
  std::vector<double> gradk(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double s = k_low[b].derivative(a).eval(p);
      for (int e = 0; e < d; ++e) s -= c.gamma[(e * d + a) * d + b] * k_low[e].eval(p);
      gradk[a * d + b] = s;
    }
  double div = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) div += c.ginv[a * d + b] * gradk[a * d + b];
  double r = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      r = std::max(r, std::abs(0.5 * (gradk[a * d + b] + gradk[b * d + a]) -
                               div / d * c.g[a * d + b]));
  return r;
}

KillingSlots kk_slots(const Chart& chart, std::span<const ScalarExpr> k_low,
                      std::span<const double> p) {
  KKJets kj = compute_kk_jets(chart, k_low, p);
  const int d = kj.d;
  KillingSlots out;
  out.w = kj.w.v;
  out.k_low.resize(d);
  out.k_up.resize(d);
  out.x_up.resize(d);
  out.x_low.assign(d, 0.0);
  out.curl_low.assign(d * d, 0.0);
  for (int a = 0; a < d; ++a) {
    out.k_low[a] = kj.klow[a].v;
    out.k_up[a] = kj.kup[a].v;
    out.x_up[a] = kj.xup[a].v;
  }
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      out.x_low[a] += value_of(kj.curv.g[a * d + b]) * kj.xup[b].v;
      double s = 0.0;
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          s += value_of(kj.curv.g[a * d + c]) * value_of(kj.curv.g[b * d + e]) *
               kj.fup[c * d + e].v;
      out.curl_low[a * d + b] = s;
    }
  return out;
}

Mat kk_matrix(const Chart& chart, std::span<const ScalarExpr> k_low, std::span<const double> p) {
  KKJets kj = compute_kk_jets(chart, k_low, p);
  std::vector<Jet> m = kk_matrix_jets(kj);
  Mat out(m.size());
  for (size_t i = 0; i < m.size(); ++i) out[i] = m[i].v;
  return out;
}

Mat wedge_matrix(const Chart& chart, std::span<const double> u, std::span<const double> v,
                 std::span<const double> p) {
  const int n = chart.dim() + 2;
  Mat h = tractor_metric_matrix(chart, p);
  Vec hu = mat_apply(h, u, n), hv = mat_apply(h, v, n);
  Mat out(n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i * n + j] = hu[i] * hv[j] - hv[i] * hu[j];
  return out;
}

namespace {

// nabla_a K for the 2-form connection, optionally subtracting the curvature
// modification k^b Omega_{ab}
double twoform_residual_impl(const Chart& chart, std::span<const ScalarExpr> k_low,
                             std::span<const double> p, bool subtract_curvature) {
  const int d = chart.dim();
  const int n = d + 2;
  KKJets kj = compute_kk_jets(chart, k_low, p);
  std::vector<Jet> m = kk_matrix_jets(kj);
  std::vector<Mat> A = connection_matrices(chart, p);
  std::vector<Mat> omega;
  if (subtract_curvature) {
    omega.assign(d * d, Mat());
    auto all = tractor_curvature_all(chart, p);
    int q = 0;
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b, ++q) {
        omega[a * d + b] = all[q];
        Mat neg = all[q];
        for (double& x : neg) x = -x;
        omega[b * d + a] = std::move(neg);
      }
  }
  Mat hmat = tractor_metric_matrix(chart, p);
  double worst = 0.0;
  for (int a = 0; a < d; ++a) {
    Mat res(n * n, 0.0);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        double s = m[r * n + c].d[a];
        for (int k = 0; k < n; ++k)
          s -= A[a][k * n + r] * m[k * n + c].v + A[a][k * n + c] * m[r * n + k].v;
        res[r * n + c] = s;
      }
    if (subtract_curvature) {
      // modification term k^b Omega_{ba} lowered with h; the orientation is
      // pinned by Killing fields of curved Einstein charts, whose two-form
      // satisfies the modified transport equation exactly
      for (int b = 0; b < d; ++b) {
        if (omega[a * d + b].empty()) continue;
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += hmat[r * n + k] * omega[a * d + b][k * n + c];
            res[r * n + c] += kj.kup[b].v * s;
          }
      }
    }
    for (double v : res) worst = std::max(worst, std::abs(v));
  }
  return worst;
}

}  // namespace

double cktreq_residual(const Chart& chart, std::span<const ScalarExpr> k_low,
                       std::span<const double> p) {
  return twoform_residual_impl(chart, k_low, p, true);
}

double twoform_parallel_residual(const Chart& chart, std::span<const ScalarExpr> k_low,
                                 std::span<const double> p) {
  return twoform_residual_impl(chart, k_low, p, false);
}

ProlongResult prolong_ck(const Chart& chart, std::span<const ScalarExpr> k_low,
                         const Defaults& cfg) {
  auto pts = sample_points(chart.box(), std::min(cfg.sample_points, 40), cfg.seed + 23);
  ProlongResult out;
  for (const auto& p : pts) out.max_ck_residual = std::max(out.max_ck_residual, ck_residual(chart, k_low, p));
  if (out.max_ck_residual > cfg.tol)
    fail(ErrorKind::NotConformalKilling,
         "conformal Killing residual " + std::to_string(out.max_ck_residual));
  for (const auto& p : pts)
    out.max_cktreq_residual = std::max(out.max_cktreq_residual, cktreq_residual(chart, k_low, p));
  return out;
}

WedgeResult wedge_parallel(const Chart& chart, const AEStructure& ae1, const AEStructure& ae2,
                           const Defaults& cfg) {
  const int d = chart.dim();
  WedgeResult out;
  for (int a = 0; a < d; ++a)
    out.k_low.push_back(ae1.sigma * ae2.sigma.derivative(a) - ae2.sigma * ae1.sigma.derivative(a));

  auto pts = sample_points(chart.box(), std::min(cfg.sample_points, 30), cfg.seed + 29);

  // wedge must not vanish identically
  double kk_max = 0.0;
  for (const auto& p : pts) {
    Vec i1 = ae_tractor_value(chart, ae1.sigma, p);
    Vec i2 = ae_tractor_value(chart, ae2.sigma, p);
    kk_max = std::max(kk_max, mat_max_abs(wedge_matrix(chart, i1, i2, p)));
  }
  if (kk_max < 1e-10)
    fail(ErrorKind::LinearlyDependent, "tractor wedge vanishes identically on the grid");

  double sigma1_min = 1e300;
  for (const auto& p : pts) {
    out.max_ck_residual = std::max(out.max_ck_residual, ck_residual(chart, out.k_low, p));
    Vec i1 = ae_tractor_value(chart, ae1.sigma, p);
    Vec i2 = ae_tractor_value(chart, ae2.sigma, p);
    Mat w = wedge_matrix(chart, i1, i2, p);
    Mat s = kk_matrix(chart, out.k_low, p);
    double diff = 0.0;
    for (size_t i = 0; i < w.size(); ++i) diff = std::max(diff, std::abs(w[i] - s[i]));
    out.max_slot_vs_wedge = std::max(out.max_slot_vs_wedge, diff);
    out.max_parallel_residual =
        std::max(out.max_parallel_residual, twoform_parallel_residual(chart, out.k_low, p));
    sigma1_min = std::min(sigma1_min, std::abs(ae1.sigma.eval(p)));
  }

  if (sigma1_min > 1e-3) {
    out.gradient_in_scale1 = true;
    // k^a (raised with g) must equal ghat^{-1} d(sigma2/sigma1), ghat = sigma1^{-2} g
    for (const auto& p : pts) {
      CurvaturePack c = curvature(chart, p);
      double s1 = ae1.sigma.eval(p);
      double check = 0.0;
      for (int a = 0; a < d; ++a) {
        double kup = 0.0, grad = 0.0;
        for (int b = 0; b < d; ++b) {
          kup += c.ginv[a * d + b] * out.k_low[b].eval(p);
          double ds = (ae2.sigma.derivative(b).eval(p) * s1 -
                       ae2.sigma.eval(p) * ae1.sigma.derivative(b).eval(p)) /
                      (s1 * s1);
          grad += s1 * s1 * c.ginv[a * d + b] * ds;
        }
        check = std::max(check, std::abs(kup - grad));
      }
      out.max_gradient_check = std::max(out.max_gradient_check, check);
    }
  }
  return out;
}

EssentialReport essential_witness(const Chart& chart, std::span<const ScalarExpr> k_low,
                                  std::span<const double> p, const Defaults& cfg) {
  const int d = chart.dim();
  CurvaturePack c = curvature(chart, p);
  double knorm = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      knorm += c.ginv[a * d + b] * k_low[a].eval(p) * k_low[b].eval(p);
  if (std::sqrt(std::abs(knorm)) > 1e-10)
    fail(ErrorKind::NotAZero, "field does not vanish at the requested point");

  auto pts = sample_points(chart.box(), std::min(cfg.sample_points, 40), cfg.seed + 31);
  double ck = 0.0, curl = 0.0;
  for (const auto& q : pts) {
    ck = std::max(ck, ck_residual(chart, k_low, q));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        curl = std::max(curl, std::abs(0.5 * (k_low[b].derivative(a).eval(q) -
                                              k_low[a].derivative(b).eval(q))));
  }
  if (ck > cfg.tol) fail(ErrorKind::NotConformalKilling, "residual " + std::to_string(ck));

  EssentialReport out;
  out.slots = kk_slots(chart, k_low, p);
  if (curl > cfg.tol) {
    out.verdict = Essentiality::NotApplicableNonGradient;
    return out;
  }
  double nonprimary = std::abs(out.slots.w);
  for (double v : out.slots.curl_low) nonprimary = std::max(nonprimary, std::abs(v));
  for (double v : out.slots.x_low) nonprimary = std::max(nonprimary, std::abs(v));
  out.verdict = nonprimary > 1e-8 ? Essentiality::Essential : Essentiality::Inconclusive;
  return out;
}

Vec m_operator(const Chart& chart, std::span<const ScalarExpr> u_low, double w,
               std::span<const double> p) {
  const int d = chart.dim();
  CurvaturePack c = curvature(chart, p);
  std::vector<double> gradu(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double s = u_low[b].derivative(a).eval(p);
      for (int e = 0; e < d; ++e) s -= c.gamma[(e * d + a) * d + b] * u_low[e].eval(p);
      gradu[a * d + b] = s;
    }
  double div = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) div += c.ginv[a * d + b] * gradu[a * d + b];
  // covector tractor in the dual slot order (pairs against (sigma, mu, rho))
  Vec out(d + 2, 0.0);
  for (int a = 0; a < d; ++a) {
    double up = 0.0;
    for (int b = 0; b < d; ++b) up += c.ginv[a * d + b] * u_low[b].eval(p);
    out[1 + a] = (d + w - 2.0) * up;
  }
  out[0] = -div;  // -X_A div u pairs against the sigma slot
  return out;
}

}  // namespace ctrac
