// Python bindings for the main chart / tractor operations.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ctrac/almost_einstein.hpp"
#include "ctrac/conformal.hpp"
#include "ctrac/holonomy.hpp"
#include "ctrac/hypersurface.hpp"
#include "ctrac/killing.hpp"
#include "ctrac/product.hpp"
#include "ctrac/selftest.hpp"

namespace py = pybind11;
using namespace ctrac;

namespace {

ScalarExpr parse_for(const Chart& c, const std::string& text) {
  return parse_expr(text, c.dim());
}

std::vector<ScalarExpr> lower_field(const Chart& c, const std::vector<std::string>& comps) {
  const int d = c.dim();
  if (static_cast<int>(comps.size()) != d)
    fail(ErrorKind::IoError, "field needs one component per dimension");
  std::vector<ScalarExpr> low(d, ScalarExpr(0.0));
  for (int a = 0; a < d; ++a) {
    ScalarExpr up = parse_expr(comps[a], d);
    for (int b = 0; b < d; ++b) low[b] = low[b] + c.metric(b, a) * up;
  }
  return low;
}

}  // namespace

PYBIND11_MODULE(_ctrac, m) {
  m.doc() = "conformal tractor calculus on coordinate charts";

  py::register_exception<Error>(m, "CtracError");

  py::class_<Defaults>(m, "Defaults")
      .def(py::init<>())
      .def_readwrite("tol", &Defaults::tol)
      .def_readwrite("parallel_tol", &Defaults::parallel_tol)
      .def_readwrite("rk_tol", &Defaults::rk_tol)
      .def_readwrite("grid_axis", &Defaults::grid_axis)
      .def_readwrite("sample_points", &Defaults::sample_points);

  py::class_<Chart>(m, "Chart")
      .def_static("from_json", &Chart::from_json_string)
      .def_static("load", &Chart::load_file)
      .def("save", &Chart::save_file)
      .def("to_json", &Chart::to_json_string)
      .def_property_readonly("dim", &Chart::dim)
      .def_property_readonly("mu", [](const Chart& c) { return c.mu(); })
      .def("validate", [](const Chart& c) { c.validate(); })
      .def("digest", &Chart::digest)
      .def("box",
           [](const Chart& c) {
             std::vector<std::pair<double, double>> out;
             for (const auto& iv : c.box().iv) out.emplace_back(iv[0], iv[1]);
             return out;
           })
      .def("metric_entry",
           [](const Chart& c, int i, int j) { return c.metric(i, j).str(); });

  m.def("catalog_names", &catalog_names);
  m.def("catalog_chart",
        [](const std::string& name) { return catalog_chart(name); },
        py::arg("name"));

  m.def("eval_expr", [](const std::string& text, std::vector<double> p) {
    return parse_expr(text, static_cast<int>(p.size())).eval(p);
  });
  m.def("derivative_expr", [](const std::string& text, int dim, int axis) {
    return parse_expr(text, dim).derivative(axis).str();
  });

  m.def("curvature", [](const Chart& c, std::vector<double> p) {
    CurvaturePack k = curvature(c, p);
    py::dict out;
    out["metric"] = k.g;
    out["christoffel"] = k.gamma;
    out["riemann"] = k.riem;
    out["ricci"] = k.ric;
    out["scalar"] = k.sc;
    out["schouten"] = k.schouten;
    out["jtrace"] = k.jtrace;
    out["weyl"] = k.weyl;
    return out;
  });
  m.def("einstein_residual", [](const Chart& c, double lam, std::vector<double> p) {
    return einstein_residual(c, lam, p);
  });
  m.def("scalar_curvature",
        [](const Chart& c, std::vector<double> p) { return scalar_curvature(c, p); });

  m.def("rescale_chart", [](const Chart& c, const std::string& omega) {
    return rescale_chart(c, parse_for(c, omega));
  });

  m.def("tractor_metric", [](const Chart& c, Vec u, Vec v, std::vector<double> p) {
    return tractor_metric(c, u, v, p);
  });
  m.def("thomas_d", [](const Chart& c, const std::string& v, double w, std::vector<double> p) {
    return thomas_d(c, parse_for(c, v), w, p);
  });
  m.def("scale_tractor", [](const Chart& c, const std::string& sigma, std::vector<double> p) {
    return ae_tractor_value(c, parse_for(c, sigma), p);
  });

  m.def("ae_residual", [](const Chart& c, const std::string& sigma, std::vector<double> p) {
    return ae_residual(c, parse_for(c, sigma), p);
  });
  m.def("verify_ae", [](const Chart& c, const std::string& sigma) {
    AEStructure ae = make_ae(c, parse_for(c, sigma));
    Classification cls = classify(c, ae);
    py::dict out;
    out["S"] = ae.s_const;
    out["classification"] = cls.kind == SingularityKind::Empty ? "empty"
                            : cls.kind == SingularityKind::IsolatedPoints ? "isolated-points"
                                                                          : "hypersurface";
    out["singular_points"] = cls.points;
    out["einstein_residual"] = cls.max_einstein_residual;
    out["umbilicity"] = cls.max_umbilicity;
    return out;
  });

  m.def("parallel_space", [](const Chart& c) {
    ParallelSpace ps = parallel_space(c);
    py::dict out;
    out["dim"] = ps.dim;
    out["base"] = ps.base;
    out["basis"] = ps.basis;
    out["closure_residual"] = ps.max_closure_residual;
    return out;
  });

  m.def("parallel_transport",
        [](const Chart& c, const std::vector<std::string>& curve, Vec u0) {
          Curve cv;
          for (const auto& s : curve) cv.comp.push_back(parse_expr(s, 1));
          TransportResult r = parallel_transport(c, cv, u0);
          py::dict out;
          out["endpoint"] = r.endpoint;
          out["steps"] = r.steps;
          out["metric_drift"] = r.metric_drift;
          out["max_local_error"] = r.max_local_error;
          return out;
        });

  m.def("build_product", [](const Chart& c1, const Chart& c2) {
    return build_product_chart(validate_special_product(c1, c2));
  });
  m.def("build_collar", [](const Chart& c1, py::object c2, double mu, double rmin, double rmax) {
    if (c2.is_none()) return build_collar(c1, nullptr, mu, rmin, rmax);
    const Chart& f2 = c2.cast<const Chart&>();
    return build_collar(c1, &f2, mu, rmin, rmax);
  }, py::arg("chart1"), py::arg("chart2") = py::none(), py::arg("mu") = 0.5,
     py::arg("rmin") = 0.1, py::arg("rmax") = 1.0);

  m.def("ck_residual", [](const Chart& c, const std::vector<std::string>& field,
                          std::vector<double> p) {
    return ck_residual(c, lower_field(c, field), p);
  });

  m.def("holonomy", [](const Chart& c, int loops) {
    HolonomySample hs = holonomy_sample(c, loops);
    SplitVerdict v = detect_splitting(hs);
    py::dict out;
    out["loops"] = hs.loops.size();
    out["metric_residual"] = hs.max_metric_residual;
    out["splitting"] = v.kind == SplitVerdict::Kind::TrivialHolonomy ? "TRIVIAL-HOLONOMY"
                       : v.kind == SplitVerdict::Kind::Witness ? "DECOMPOSABLE-WITNESS"
                                                               : "NO-WITNESS";
    out["block_dims"] = v.dims;
    return out;
  }, py::arg("chart"), py::arg("loops") = 12);

  m.def("circle_ode_zeros_per_period", [](double mu, double a, double b) {
    auto basis = circle_ode_solutions(mu);
    if (basis.period() <= 0.0) return -1;
    int zeros = 0;
    const int nsteps = 4000;
    for (int i = 0; i < nsteps; ++i) {
      double t0 = basis.period() * i / nsteps, t1 = basis.period() * (i + 1) / nsteps;
      double s0 = a * basis.s(1, t0) + b * basis.s(2, t0);
      double s1 = a * basis.s(1, t1) + b * basis.s(2, t1);
      if ((s0 < 0) != (s1 < 0)) ++zeros;
    }
    return zeros;
  });

  m.def("run_acceptance", []() {
    py::list out;
    for (const auto& r : run_acceptance()) {
      py::dict d;
      d["id"] = r.id;
      d["name"] = r.name;
      d["pass"] = r.pass;
      d["worst"] = r.worst;
      d["seconds"] = r.seconds;
      out.append(d);
    }
    return out;
  });
}
