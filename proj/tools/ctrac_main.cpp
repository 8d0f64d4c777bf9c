// Command-line front end: chart registration, verification pipelines, the
// fixture catalog, and machine-readable certificates on stdout.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctrac/almost_einstein.hpp"
#include "ctrac/conformal.hpp"
#include "ctrac/holonomy.hpp"
#include "ctrac/hypersurface.hpp"
#include "ctrac/killing.hpp"
#include "ctrac/product.hpp"
#include "ctrac/selftest.hpp"

using nlohmann::json;
using namespace ctrac;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CertBuilder {
  json j;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  bool ok = true;

  explicit CertBuilder(const std::string& command, const Defaults& cfg) {
    j["command"] = command;
    j["tool_version"] = kVersion;
    j["tolerances"] = {{"tol", cfg.tol},
                       {"parallel_tol", cfg.parallel_tol},
                       {"rk_tol", cfg.rk_tol},
                       {"grid", cfg.grid_axis}};
    j["residuals"] = json::object();
    j["verdicts"] = json::object();
    j["outputs"] = json::object();
  }

  void chart_digest(const Chart& c) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(c.digest()));
    j["chart_digest"] = buf;
  }
  void residual(const std::string& name, double v) { j["residuals"][name] = v; }
  void verdict(const std::string& name, bool pass) {
    j["verdicts"][name] = pass;
    ok = ok && pass;
  }

  int emit(bool compact = false, std::ostream& os = std::cout) {
    j["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    os << j.dump(compact ? -1 : 2) << "\n";
    return ok ? 0 : 1;
  }
};

std::vector<double> parse_point(const std::string& text, int dim) {
  std::vector<double> p;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) p.push_back(std::stod(item));
  if (static_cast<int>(p.size()) != dim)
    fail(ErrorKind::IoError, "point has " + std::to_string(p.size()) + " coordinates, chart needs " +
                                 std::to_string(dim));
  return p;
}

std::vector<ScalarExpr> parse_expr_list(const std::string& text, int dim) {
  std::vector<ScalarExpr> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_expr(item, dim));
  return out;
}

json point_json(std::span<const double> p) {
  json out = json::array();
  for (double v : p) out.push_back(v);
  return out;
}

json matrix_json(const std::vector<double>& m, int rows, int cols) {
  json out = json::array();
  for (int r = 0; r < rows; ++r) {
    json row = json::array();
    for (int c = 0; c < cols; ++c) row.push_back(m[r * cols + c]);
    out.push_back(row);
  }
  return out;
}

uint64_t digest_matrices(const std::vector<LoopSample>& loops) {
  uint64_t h = 1469598103934665603ULL;
  for (const auto& l : loops)
    for (double v : l.transport) {
      // quantized so reruns reproduce the digest bit for bit
      long long q = static_cast<long long>(std::llround(v * 1e10));
      for (int k = 0; k < 8; ++k) {
        h ^= static_cast<unsigned char>(q >> (8 * k));
        h *= 1099511628211ULL;
      }
    }
  return h;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conformal tractor calculus on coordinate charts"};
  app.require_subcommand(1);

  Defaults cfg = Defaults::from_env();
  std::string chart_file, chart2_file, sigma_s, omega_s, field_s, point_s, curve_s, tractor_s,
      out_file, name_s, ae_s;
  int grid = 0, loops = 24;
  double tol = 0.0, mu = 0.5, rmin = 0.1, rmax = 1.0;
  bool list = false, compact = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--tol", tol, "override the residual tolerance")->envname("CTRAC_TOL");
    cmd->add_option("--grid", grid, "verification grid points per axis")->envname("CTRAC_GRID");
    cmd->add_option("--out", out_file, "write the produced chart/report to this file");
    cmd->add_flag("--json", compact, "compact single-line certificate");
  };

  auto* c_curv = app.add_subcommand("curvature", "curvature stack at a point");
  c_curv->add_option("--chart", chart_file)->required();
  c_curv->add_option("--point", point_s)->required();
  add_common(c_curv);

  auto* c_resc = app.add_subcommand("rescale", "conformally rescale a chart");
  c_resc->add_option("--chart", chart_file)->required();
  c_resc->add_option("--omega", omega_s)->required();
  add_common(c_resc);

  auto* c_tran = app.add_subcommand("transport", "parallel transport along a curve");
  c_tran->add_option("--chart", chart_file)->required();
  c_tran->add_option("--curve", curve_s, "comma-separated expressions of t (t in [0,1])")->required();
  c_tran->add_option("--tractor", tractor_s, "slots as \"s;m1,...,md;r\"")->required();
  add_common(c_tran);

  auto* c_ae = app.add_subcommand("verify-ae", "verify and classify an almost-Einstein scale");
  c_ae->add_option("--chart", chart_file)->required();
  c_ae->add_option("--sigma", sigma_s)->required();
  add_common(c_ae);

  auto* c_par = app.add_subcommand("parallel-space", "dimension and basis of parallel tractors");
  c_par->add_option("--chart", chart_file)->required();
  add_common(c_par);

  auto* c_prod = app.add_subcommand("build-product", "assemble a special Einstein product");
  c_prod->add_option("--chart1", chart_file)->required();
  c_prod->add_option("--chart2", chart2_file)->required();
  add_common(c_prod);

  auto* c_col = app.add_subcommand("build-collar", "assemble the Poincare-Einstein collar");
  c_col->add_option("--chart1", chart_file)->required();
  c_col->add_option("--chart2", chart2_file);
  c_col->add_option("--mu", mu);
  c_col->add_option("--rmin", rmin);
  c_col->add_option("--rmax", rmax);
  add_common(c_col);

  auto* c_cat = app.add_subcommand("catalog", "fixture chart catalog");
  c_cat->add_flag("--list", list);
  c_cat->add_option("--name", name_s);
  add_common(c_cat);

  auto* c_kil = app.add_subcommand("killing", "conformal Killing analysis");
  c_kil->add_option("--chart", chart_file)->required();
  c_kil->add_option("--field", field_s, "contravariant components, comma separated")->required();
  c_kil->add_option("--point", point_s, "evaluate slots / essentiality at this point");
  add_common(c_kil);

  auto* c_sur = app.add_subcommand("surface", "level-set hypersurface analysis");
  c_sur->add_option("--chart", chart_file)->required();
  c_sur->add_option("--sigma", sigma_s)->required();
  c_sur->add_option("--ae", ae_s, "almost-Einstein scale pairing against the normal tractor");
  add_common(c_sur);

  auto* c_hol = app.add_subcommand("holonomy", "loop transport sampling and splitting detection");
  c_hol->add_option("--chart", chart_file)->required();
  c_hol->add_option("--loops", loops);
  add_common(c_hol);

  auto* c_self = app.add_subcommand("selftest", "run the acceptance criteria");
  add_common(c_self);

  CLI11_PARSE(app, argc, argv);

  if (tol > 0.0) {
    cfg.tol = tol;
    cfg.parallel_tol = 10.0 * tol;
  }
  if (grid > 0) cfg.grid_axis = grid;

  try {
    auto load_chart = [&](const std::string& file) {
      Chart c = Chart::load_file(file);
      c.validate(cfg);
      return c;
    };

    if (*c_curv) {
      Chart chart = load_chart(chart_file);
      CertBuilder cert("curvature", cfg);
      cert.chart_digest(chart);
      auto p = parse_point(point_s, chart.dim());
      CurvaturePack k = curvature(chart, p);
      const int d = chart.dim();
      cert.j["outputs"] = {{"point", point_json(p)},
                          {"metric", matrix_json(k.g, d, d)},
                          {"christoffel", k.gamma},
                          {"riemann", k.riem},
                          {"ricci", matrix_json(k.ric, d, d)},
                          {"scalar", k.sc},
                          {"schouten", matrix_json(k.schouten, d, d)},
                          {"jtrace", k.jtrace},
                          {"weyl", k.weyl}};
      double idres = 0.0;
      if (d >= 3)
        for (int i = 0; i < d * d; ++i)
          idres = std::max(idres, std::abs(k.ric[i] - ((d - 2) * k.schouten[i] + k.g[i] * k.jtrace)) /
                                      std::max(1.0, std::abs(k.ric[i])));
      cert.residual("ricci_schouten_identity", idres);
      cert.verdict("identities", idres < cfg.tol);
      return cert.emit(compact);
    }

    if (*c_resc) {
      Chart chart = load_chart(chart_file);
      CertBuilder cert("rescale", cfg);
      cert.chart_digest(chart);
      ScalarExpr om = parse_expr(omega_s, chart.dim());
      Chart hat = rescale_chart(chart, om);
      hat.validate(cfg);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hat.digest()));
      cert.j["outputs"] = {{"rescaled_digest", buf}};
      if (!out_file.empty()) hat.save_file(out_file);
      else cert.j["outputs"]["chart"] = json::parse(hat.to_json_string());
      cert.verdict("rescaled", true);
      return cert.emit(compact);
    }

    if (*c_tran) {
      Chart chart = load_chart(chart_file);
      CertBuilder cert("transport", cfg);
      cert.chart_digest(chart);
      Curve curve;
      curve.comp = parse_expr_list(curve_s, 1);
      if (static_cast<int>(curve.comp.size()) != chart.dim())
        fail(ErrorKind::IoError, "curve needs one expression per chart dimension");
      // tractor slots "s;m1,...,md;r"
      std::stringstream ss(tractor_s);
      std::string s_part, m_part, r_part;
      if (!std::getline(ss, s_part, ';') || !std::getline(ss, m_part, ';') ||
          !std::getline(ss, r_part, ';'))
        fail(ErrorKind::IoError, "tractor must be given as \"s;m1,...,md;r\"");
      Vec u0;
      u0.push_back(std::stod(s_part));
      {
        std::stringstream ms(m_part);
        std::string item;
        while (std::getline(ms, item, ',')) u0.push_back(std::stod(item));
      }
      u0.push_back(std::stod(r_part));
      if (static_cast<int>(u0.size()) != chart.dim() + 2)
        fail(ErrorKind::IoError, "tractor slot count mismatch");
      TransportResult res = parallel_transport(chart, curve, u0, cfg);
      cert.j["outputs"] = {{"endpoint", point_json(res.endpoint)},
                          {"steps", res.steps},
                          {"start_point", point_json(curve.point(0.0))},
                          {"end_point", point_json(curve.point(1.0))}};
      cert.residual("max_local_error", res.max_local_error);
      cert.residual("metric_drift", res.metric_drift);
      cert.verdict("metric_preserved", res.metric_drift < cfg.parallel_tol);
      return cert.emit(compact);
    }

    if (*c_ae) {
      Chart chart = load_chart(chart_file);
      CertBuilder cert("verify-ae", cfg);
      cert.chart_digest(chart);
      ScalarExpr sigma = parse_expr(sigma_s, chart.dim());
      double res = 0.0;
      for (const auto& p : sample_points(chart.box(), cfg.sample_points, cfg.seed))
        res = std::max(res, ae_residual(chart, sigma, p));
      cert.residual("trace_free_hessian", res);
      cert.verdict("almost_einstein", res < cfg.tol);
      if (res < cfg.tol) {
        AEStructure ae = make_ae(chart, sigma, cfg);
        Classification cls = classify(chart, ae, cfg);
        const char* kind = cls.kind == SingularityKind::Empty ? "empty"
                           : cls.kind == SingularityKind::IsolatedPoints ? "isolated-points"
                                                                         : "hypersurface";
        json pts = json::array();
        size_t step = std::max<size_t>(1, cls.points.size() / 16);
        for (size_t i = 0; i < cls.points.size(); i += step) pts.push_back(point_json(cls.points[i]));
        cert.j["outputs"] = {{"S", ae.s_const}, {"classification", kind}, {"singular_points", pts}};
        cert.residual("einstein_off_singularity", cls.max_einstein_residual);
        cert.residual("umbilicity", cls.max_umbilicity);
        cert.verdict("einstein_off_singularity", cls.max_einstein_residual < cfg.parallel_tol);
      }
      return cert.emit(compact);
    }

    if (*c_par) {
      Chart chart = load_chart(chart_file);
      CertBuilder cert("parallel-space", cfg);
      cert.chart_digest(chart);
      ParallelSpace ps = parallel_space(chart, cfg);
      json basis = json::array();
      for (const auto& b : ps.basis) basis.push_back(point_json(b));
      cert.j["outputs"] = {{"dim", ps.dim}, {"base", point_json(ps.base)}, {"basis", basis}};
      cert.residual("closure", ps.max_closure_residual);
      cert.verdict("closure", ps.max_closure_residual < cfg.parallel_tol);
      return cert.emit(compact);
    }

    if (*c_prod) {
      Chart c1 = load_chart(chart_file), c2 = load_chart(chart2_file);
      CertBuilder cert("build-product", cfg);
      SpecialProductSpec spec = validate_special_product(c1, c2, cfg);
      Chart prod = build_product_chart(spec);
      prod.validate(cfg);
      cert.chart_digest(prod);
      cert.j["outputs"] = {{"mu", spec.mu}, {"m1", spec.m1}, {"m2", spec.m2}};
      if (!out_file.empty()) prod.save_file(out_file);
      else cert.j["outputs"]["chart"] = json::parse(prod.to_json_string());
      double sc_res = 0.0;  // Schouten of the product = pullback sum, spot check
      for (const auto& p : sample_points(prod.box(), 10, cfg.seed)) {
        CurvaturePack k = curvature(prod, p);
        Vec p1, p2;
        split_point(spec, p, p1, p2);
        CurvaturePack k1 = curvature(spec.chart1, p1), k2 = curvature(spec.chart2, p2);
        int d = prod.dim();
        for (int i = 0; i < spec.m1; ++i)
          for (int j = 0; j < spec.m1; ++j)
            sc_res = std::max(sc_res, std::abs(k.schouten[i * d + j] - k1.schouten[i * spec.m1 + j]));
        for (int i = 0; i < spec.m2; ++i)
          for (int j = 0; j < spec.m2; ++j)
            sc_res = std::max(sc_res, std::abs(k.schouten[(spec.m1 + i) * d + spec.m1 + j] -
                                               k2.schouten[i * spec.m2 + j]));
      }
      cert.residual("schouten_pullback_sum", sc_res);
      cert.verdict("schouten_pullback_sum", sc_res < cfg.tol);
      return cert.emit(compact);
    }

    if (*c_col) {
      Chart c1 = load_chart(chart_file);
      CertBuilder cert("build-collar", cfg);
      Chart collar;
      if (!chart2_file.empty()) {
        Chart c2 = load_chart(chart2_file);
        collar = build_collar(c1, &c2, mu, rmin, rmax, cfg);
      } else {
        collar = build_collar(c1, nullptr, mu, rmin, rmax, cfg);
      }
      collar.validate(cfg);
      cert.chart_digest(collar);
      double worst = 0.0;
      for (const auto& p : sample_points(collar.box(), 60, cfg.seed))
        worst = std::max(worst, einstein_residual(collar, -1.0, p));
      cert.residual("einstein_minus_one", worst);
      cert.verdict("einstein", worst < cfg.parallel_tol);
      if (!out_file.empty()) collar.save_file(out_file);
      else cert.j["outputs"] = {{"chart", json::parse(collar.to_json_string())}};
      return cert.emit(compact);
    }

    if (*c_cat) {
      CertBuilder cert("catalog", cfg);
      if (list || name_s.empty()) {
        cert.j["outputs"] = {{"fixtures", catalog_names()}};
        cert.verdict("catalog", catalog_names().size() >= 8);
        return cert.emit(compact);
      }
      Chart c = catalog_chart(name_s, cfg);
      cert.chart_digest(c);
      if (!out_file.empty()) c.save_file(out_file);
      else cert.j["outputs"] = {{"chart", json::parse(c.to_json_string())}};
      cert.verdict("built", true);
      return cert.emit(compact);
    }

    if (*c_kil) {
      Chart chart = load_chart(chart_file);
      CertBuilder cert("killing", cfg);
      cert.chart_digest(chart);
      const int d = chart.dim();
      std::vector<ScalarExpr> up = parse_expr_list(field_s, d);
      if (static_cast<int>(up.size()) != d)
        fail(ErrorKind::IoError, "field needs one component per dimension");
      std::vector<ScalarExpr> low(d, ScalarExpr(0.0));
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) low[a] = low[a] + chart.metric(a, b) * up[b];
      double ck = 0.0;
      for (const auto& p : sample_points(chart.box(), std::min(cfg.sample_points, 40), cfg.seed))
        ck = std::max(ck, ck_residual(chart, low, p));
      cert.residual("conformal_killing", ck);
      cert.verdict("conformal_killing", ck < cfg.tol);
      if (ck < cfg.tol) {
        ProlongResult pr = prolong_ck(chart, low, cfg);
        cert.residual("transport_equation", pr.max_cktreq_residual);
        cert.verdict("transport_equation", pr.max_cktreq_residual < cfg.parallel_tol);
        if (!point_s.empty()) {
          auto p = parse_point(point_s, d);
          KillingSlots slots = kk_slots(chart, low, p);
          cert.j["outputs"] = {{"point", point_json(p)},
                              {"k", point_json(slots.k_low)},
                              {"curl", slots.curl_low},
                              {"divergence_over_d", slots.w},
                              {"bottom_slot", point_json(slots.x_low)}};
          try {
            EssentialReport rep = essential_witness(chart, low, p, cfg);
            const char* v = rep.verdict == Essentiality::Essential ? "ESSENTIAL"
                            : rep.verdict == Essentiality::Inconclusive
                                ? "INCONCLUSIVE"
                                : "NOT-APPLICABLE-NONGRADIENT";
            cert.j["outputs"]["essential"] = v;
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::NotAZero) throw;
            cert.j["outputs"]["essential"] = "NOT-A-ZERO";
          }
        }
      }
      return cert.emit(compact);
    }

    if (*c_sur) {
      Chart chart = load_chart(chart_file);
      CertBuilder cert("surface", cfg);
      cert.chart_digest(chart);
      ScalarExpr sigma = parse_expr(sigma_s, chart.dim());
      LevelSurface surf = extract_level_surface(chart, sigma, cfg);
      double umb = 0.0;
      size_t step = std::max<size_t>(1, surf.samples.size() / 32);
      for (size_t i = 0; i < surf.samples.size(); i += step)
        umb = std::max(umb, umbilicity_residual(chart, surf, surf.samples[i]));
      cert.residual("umbilicity", umb);
      cert.j["outputs"] = {{"surface_samples", surf.samples.size()}};
      if (!ae_s.empty()) {
        AEStructure k = make_ae(chart, parse_expr(ae_s, chart.dim()), cfg);
        double lo = 1e300, hi = -1e300;
        json hvals = json::array();
        int count = 0;
        for (size_t i = 0; i < surf.samples.size() && count < 50; i += step, ++count) {
          double h = generalized_mean_curvature(chart, k, surf, surf.samples[i]);
          hvals.push_back(h);
          lo = std::min(lo, h);
          hi = std::max(hi, h);
        }
        cert.j["outputs"]["mean_curvature"] = hvals;
        cert.residual("mean_curvature_spread", hi - lo);
        cert.verdict("constant_mean_curvature", hi - lo < cfg.parallel_tol);
      }
      cert.verdict("surface", true);
      return cert.emit(compact);
    }

    if (*c_hol) {
      Chart chart = load_chart(chart_file);
      CertBuilder cert("holonomy", cfg);
      cert.chart_digest(chart);
      HolonomySample hs = holonomy_sample(chart, loops, cfg);
      SplitVerdict v = detect_splitting(hs, cfg);
      const char* kind = v.kind == SplitVerdict::Kind::TrivialHolonomy ? "TRIVIAL-HOLONOMY"
                         : v.kind == SplitVerdict::Kind::Witness ? "DECOMPOSABLE-WITNESS"
                                                                 : "NO-WITNESS";
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%016llx",
                    static_cast<unsigned long long>(digest_matrices(hs.loops)));
      cert.j["outputs"] = {{"loops", hs.loops.size()},
                          {"matrices_digest", buf},
                          {"splitting", kind},
                          {"block_dims", v.dims}};
      cert.residual("metric_preservation", hs.max_metric_residual);
      cert.residual("offblock", v.max_offblock);
      cert.verdict("metric_preserved", hs.max_metric_residual < cfg.parallel_tol);
      return cert.emit(compact);
    }

    if (*c_self) {
      CertBuilder cert("selftest", cfg);
      auto results = run_acceptance(cfg);
      json arr = json::array();
      for (const auto& r : results) {
        arr.push_back({{"id", r.id},
                       {"name", r.name},
                       {"pass", r.pass},
                       {"worst", r.worst},
                       {"seconds", r.seconds},
                       {"detail", r.detail}});
        cert.verdict("criterion_" + std::to_string(r.id), r.pass);
      }
      cert.j["outputs"] = {{"criteria", arr}};
      return cert.emit(compact);
    }
  } catch (const Error& e) {
    bool malformed = e.kind() == ErrorKind::IoError || e.kind() == ErrorKind::ParseError ||
                     e.kind() == ErrorKind::BadChart || e.kind() == ErrorKind::MissingMu ||
                     e.kind() == ErrorKind::UnknownFixture;
    json err = {{"error", e.what()}, {"kind", error_kind_name(e.kind())}};
    std::cout << err.dump(2) << "\n";
    return malformed ? 2 : 1;
  } catch (const std::exception& e) {
    json err = {{"error", e.what()}};
    std::cout << err.dump(2) << "\n";
    return 2;
  }
  return 2;
}
