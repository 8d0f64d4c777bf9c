#include "ctrac/chart.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ctrac/curvature.hpp"
#include "ctrac/errors.hpp"

namespace ctrac {

bool Box::contains(std::span<const double> p, double slack) const {
  if (static_cast<int>(p.size()) != dim()) return false;
  for (int a = 0; a < dim(); ++a)
    if (p[a] < iv[a][0] - slack || p[a] > iv[a][1] + slack) return false;
  return true;
}

std::vector<double> Box::center() const {
  std::vector<double> c(dim());
  for (int a = 0; a < dim(); ++a) c[a] = 0.5 * (iv[a][0] + iv[a][1]);
  return c;
}

Chart::Chart(Box box, std::vector<ScalarExpr> metric, std::optional<double> mu,
             ScalarExpr einstein_omega)
    : box_(std::move(box)), metric_(std::move(metric)), mu_(mu),
      einstein_omega_(std::move(einstein_omega)) {
  const int d = box_.dim();
  if (d < 1 || d > kMaxDim) fail(ErrorKind::BadChart, "dimension out of range");
  if (static_cast<int>(metric_.size()) != d * d)
    fail(ErrorKind::BadChart, "metric must have dim*dim entries");
  tables_ = std::make_shared<std::array<std::shared_ptr<DerivTable>, 5>>();
  omega_tables_ = std::make_shared<std::array<std::shared_ptr<std::vector<ScalarExpr>>, 5>>();
}

// ---------------------------------------------------------------------------
// Derivative tables. Canonical entries are symmetric in the derivative
// multi-index and in (i,j); the full arrays used by evaluation are scattered
// from the canonical ones.

struct Chart::DerivTable {
  int order = 0;
  std::vector<ScalarExpr> exprs;  // canonical entries
  std::vector<int> scatter;       // full array index -> canonical id
};

namespace {

uint64_t encode_key(std::span<const int> deriv, int i, int j) {
  uint64_t k = 0;
  for (int a : deriv) k = k * 16 + static_cast<uint64_t>(a + 1);
  k = k * 16 + static_cast<uint64_t>(i + 1);
  k = k * 16 + static_cast<uint64_t>(j + 1);
  return k;
}

}  // namespace

const Chart::DerivTable& Chart::table(int order) const {
  static std::recursive_mutex mtx;
  std::lock_guard<std::recursive_mutex> lock(mtx);
  auto& slot = (*tables_)[order];
  if (slot) return *slot;

  const int d = dim();
  auto t = std::make_shared<DerivTable>();
  t->order = order;

  if (order == 0) {
    t->scatter.resize(d * d);
    std::vector<int> none;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        t->exprs.push_back(metric_[i * d + j]);
        int id = static_cast<int>(t->exprs.size()) - 1;
        t->scatter[i * d + j] = id;
        t->scatter[j * d + i] = id;
      }
    slot = std::move(t);
    return *slot;
  }

  const DerivTable& parent = table(order - 1);
  size_t full = 1;
  for (int k = 0; k < order; ++k) full *= d;
  t->scatter.resize(full * d * d);

  std::vector<int> idx(order, 0);
  std::unordered_map<uint64_t, int> ids;
  for (size_t flat = 0; flat < full; ++flat) {
    size_t rem = flat;
    for (int k = order - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(rem % d);
      rem /= d;
    }
    std::vector<int> canon(idx);
    std::sort(canon.begin(), canon.end());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        int ci = std::min(i, j), cj = std::max(i, j);
        uint64_t key = encode_key(canon, ci, cj);
        auto it = ids.find(key);
        int id;
        if (it != ids.end()) {
          id = it->second;
        } else {
          // differentiate the parent canonical entry along the first axis
          std::vector<int> rest(canon.begin() + 1, canon.end());
          size_t pflat = 0;
          for (int a : rest) pflat = pflat * d + static_cast<size_t>(a);
          int pid = parent.scatter[(pflat * d + ci) * d + cj];
          t->exprs.push_back(parent.exprs[pid].derivative(canon[0]));
          id = static_cast<int>(t->exprs.size()) - 1;
          ids.emplace(key, id);
        }
        t->scatter[(flat * d + i) * d + j] = id;
      }
  }
  slot = std::move(t);
  return *slot;
}

const std::vector<ScalarExpr>& Chart::omega_derivs(int order) const {
  static std::recursive_mutex mtx;
  std::lock_guard<std::recursive_mutex> lock(mtx);
  auto& slot = (*omega_tables_)[order];
  if (slot) return *slot;
  const int d = dim();
  auto t = std::make_shared<std::vector<ScalarExpr>>();
  if (order == 0) {
    t->push_back(einstein_omega_);
  } else {
    const std::vector<ScalarExpr>& parent = omega_derivs(order - 1);
    for (int a = 0; a < d; ++a)
      for (const ScalarExpr& e : parent) t->push_back(e.derivative(a));
  }
  slot = std::move(t);
  return *slot;
}

MetricEval Chart::metric_eval(std::span<const double> p, int order) const {
  MetricEval m;
  m.d = dim();
  m.order = order;
  std::vector<double> vals;
  for (int k = 0; k <= order; ++k) {
    const DerivTable& t = table(k);
    vals.resize(t.exprs.size());
    for (size_t u = 0; u < t.exprs.size(); ++u) vals[u] = t.exprs[u].eval(p);
    m.v[k].resize(t.scatter.size());
    for (size_t f = 0; f < t.scatter.size(); ++f) m.v[k][f] = vals[t.scatter[f]];
  }
  return m;
}

// ---------------------------------------------------------------------------

namespace {

bool positive_definite(int d, std::span<const double> g) {
  // Cholesky with a tiny tolerance
  std::vector<double> a(g.begin(), g.end());
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i * d + j];
      for (int k = 0; k < j; ++k) s -= a[i * d + k] * a[j * d + k];
      if (i == j) {
        if (s <= 0.0) return false;
        a[i * d + i] = std::sqrt(s);
      } else {
        a[i * d + j] = s / a[j * d + j];
      }
    }
  }
  return true;
}

}  // namespace

void Chart::validate(const Defaults& cfg) const {
  const int d = dim();
  if (mu_.has_value() != (d <= 2))
    fail(d <= 2 ? ErrorKind::MissingMu : ErrorKind::BadChart,
         "mu must be present exactly for dimensions 1 and 2");
  for (const ScalarExpr& e : metric_)
    if (e.max_var() >= d) fail(ErrorKind::BadChart, "metric entry uses out-of-range coordinate");

  int n = std::max(3, cfg.grid_for_dim(d) / 4);
  Box inner = box_;
  for (auto& iv : inner.iv) {
    double w = iv[1] - iv[0];
    iv[0] += 0.02 * w;
    iv[1] -= 0.02 * w;
  }
  std::vector<double> g(d * d);
  double sc_min = 0.0, sc_max = 0.0;
  bool first = true;
  for_each_grid_point(inner, n, [&](std::span<const double> p) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        g[i * d + j] = metric(i, j).eval(p);
        double gt = metric(j, i).eval(p);
        if (std::abs(g[i * d + j] - gt) > 1e-12 * (1.0 + std::abs(gt)))
          fail(ErrorKind::BadChart, "metric is not symmetric");
      }
    if (!positive_definite(d, g))
      fail(ErrorKind::BadChart, "metric is not positive definite on the sample grid");
    if (d == 2 && einstein_omega_.is_zero()) {
      double sc = scalar_curvature(*this, p);
      sc_min = first ? sc : std::min(sc_min, sc);
      sc_max = first ? sc : std::max(sc_max, sc);
      first = false;
    }
  });
  if (d == 2 && einstein_omega_.is_zero()) {
    if (sc_max - sc_min > cfg.tol * (1.0 + std::abs(sc_max)))
      fail(ErrorKind::NotEinstein, "dimension-2 chart must have constant scalar curvature");
    double want_mu = 0.25 * 0.5 * (sc_min + sc_max);
    if (std::abs(*mu_ - want_mu) > 1e-6 * (1.0 + std::abs(want_mu)))
      fail(ErrorKind::NotEinstein,
           "dimension-2 mu datum disagrees with Sc/4 of the Einstein-scale metric");
  }
}

// ---------------------------------------------------------------------------
// JSON round trip

uint64_t Chart::digest() const {
  std::string s = to_json_string();
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string Chart::to_json_string() const {
  nlohmann::json j;
  const int d = dim();
  j["dim"] = d;
  auto& box = j["box"] = nlohmann::json::array();
  for (const auto& iv : box_.iv) box.push_back({iv[0], iv[1]});
  auto& m = j["metric"] = nlohmann::json::array();
  for (int i = 0; i < d; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int jj = 0; jj < d; ++jj) row.push_back(metric(i, jj).str());
    m.push_back(row);
  }
  if (mu_) j["mu"] = *mu_;
  if (!einstein_omega_.is_zero()) j["einstein_omega"] = einstein_omega_.str();
  if (product_) j["product"] = {{"m1", product_->m1}, {"m2", product_->m2}, {"mu", product_->mu}};
  return j.dump(2);
}

Chart Chart::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorKind::IoError, std::string("bad chart JSON: ") + e.what());
  }
  if (!j.contains("dim") || !j.contains("box") || !j.contains("metric"))
    fail(ErrorKind::IoError, "chart JSON needs dim, box, metric");
  int d = j["dim"].get<int>();
  if (d < 1 || d > kMaxDim) fail(ErrorKind::BadChart, "dimension out of range");
  Box box;
  for (const auto& iv : j["box"]) {
    if (iv.size() != 2) fail(ErrorKind::IoError, "box entries must be [lo, hi]");
    box.iv.push_back({iv[0].get<double>(), iv[1].get<double>()});
    if (!(box.iv.back()[0] < box.iv.back()[1])) fail(ErrorKind::BadChart, "empty box interval");
  }
  if (box.dim() != d) fail(ErrorKind::BadChart, "box size does not match dim");
  std::vector<ScalarExpr> metric(d * d, ScalarExpr(0.0));
  const auto& m = j["metric"];
  if (static_cast<int>(m.size()) != d) fail(ErrorKind::IoError, "metric must be a dim x dim array");
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(m[i].size()) != d) fail(ErrorKind::IoError, "metric row has wrong size");
    for (int jj = 0; jj < d; ++jj) metric[i * d + jj] = parse_expr(m[i][jj].get<std::string>(), d);
  }
  std::optional<double> mu;
  if (j.contains("mu")) mu = j["mu"].get<double>();
  ScalarExpr omega(0.0);
  if (j.contains("einstein_omega")) omega = parse_expr(j["einstein_omega"].get<std::string>(), d);
  Chart c(std::move(box), std::move(metric), mu, std::move(omega));
  if (j.contains("product")) {
    ProductInfo info;
    info.m1 = j["product"]["m1"].get<int>();
    info.m2 = j["product"]["m2"].get<int>();
    info.mu = j["product"]["mu"].get<double>();
    c.set_product(info);
  }
  return c;
}

Chart Chart::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

void Chart::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path);
  out << to_json_string() << "\n";
}

// ---------------------------------------------------------------------------

std::vector<std::vector<double>> sample_points(const Box& box, int count, unsigned long long seed,
                                               double margin) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(margin, 1.0 - margin);
  std::vector<std::vector<double>> pts(count, std::vector<double>(box.dim()));
  for (auto& p : pts)
    for (int a = 0; a < box.dim(); ++a) p[a] = box.lo(a) + uni(rng) * (box.hi(a) - box.lo(a));
  return pts;
}

void for_each_grid_point(const Box& box, int n_per_axis,
                         const std::function<void(std::span<const double>)>& fn) {
  const int d = box.dim();
  std::vector<int> k(d, 0);
  std::vector<double> p(d);
  while (true) {
    for (int a = 0; a < d; ++a)
      p[a] = n_per_axis == 1 ? 0.5 * (box.lo(a) + box.hi(a))
                             : box.lo(a) + (box.hi(a) - box.lo(a)) * k[a] / double(n_per_axis - 1);
    fn(p);
    int a = 0;
    while (a < d && ++k[a] == n_per_axis) k[a++] = 0;
    if (a == d) return;
  }
}

Defaults Defaults::from_env() {
  Defaults cfg;
  auto getd = [](const char* name, double& out) {
    if (const char* v = std::getenv(name)) out = std::atof(v);
  };
  auto geti = [](const char* name, int& out) {
    if (const char* v = std::getenv(name)) out = std::atoi(v);
  };
  getd("CTRAC_TOL", cfg.tol);
  getd("CTRAC_PARALLEL_TOL", cfg.parallel_tol);
  getd("CTRAC_RK_TOL", cfg.rk_tol);
  geti("CTRAC_GRID", cfg.grid_axis);
  geti("CTRAC_SAMPLES", cfg.sample_points);
  return cfg;
}

}  // namespace ctrac
