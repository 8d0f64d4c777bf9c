#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctrac/config.hpp"
#include "ctrac/expr.hpp"

namespace ctrac {

struct Box {
  std::vector<std::array<double, 2>> iv;

  int dim() const { return static_cast<int>(iv.size()); }
  double lo(int a) const { return iv[a][0]; }
  double hi(int a) const { return iv[a][1]; }
  bool contains(std::span<const double> p, double slack = 1e-12) const;
  std::vector<double> center() const;
};

struct ProductInfo {
  int m1 = 0, m2 = 0;
  double mu = 0.0;
};

// Derivatives of every metric entry up to some order, evaluated at a point.
// Arrays are fully materialized; entry (a1..ak, i, j) of order k lives at
// ((a1*d + a2)*d + ... )*d*d + i*d + j.
struct MetricEval {
  int d = 0;
  int order = 0;
  std::array<std::vector<double>, 5> v;

  double g(int i, int j) const { return v[0][i * d + j]; }
  double dg(int a, int i, int j) const { return v[1][(a * d + i) * d + j]; }
  double ddg(int a, int b, int i, int j) const { return v[2][((a * d + b) * d + i) * d + j]; }
  double d3g(int a, int b, int c, int i, int j) const {
    return v[3][(((a * d + b) * d + c) * d + i) * d + j];
  }
  double d4g(int a, int b, int c, int e, int i, int j) const {
    return v[4][((((a * d + b) * d + c) * d + e) * d + i) * d + j];
  }
};

// Coordinate chart: a box, a symmetric metric of closed-form entries, and for
// d <= 2 the Einstein constant datum mu (plus a record of the conformal factor
// back to the Einstein-scale representative, used by the low-dimension
// Schouten tensor).
class Chart {
 public:
  Chart() = default;
  Chart(Box box, std::vector<ScalarExpr> metric, std::optional<double> mu = std::nullopt,
        ScalarExpr einstein_omega = ScalarExpr(0.0));

  int dim() const { return box_.dim(); }
  const Box& box() const { return box_; }
  const ScalarExpr& metric(int i, int j) const { return metric_[i * dim() + j]; }
  const std::vector<ScalarExpr>& metric_entries() const { return metric_; }
  std::optional<double> mu() const { return mu_; }
  const ScalarExpr& einstein_omega() const { return einstein_omega_; }

  const std::optional<ProductInfo>& product() const { return product_; }
  void set_product(ProductInfo info) { product_ = info; }

  // Registration checks: box/metric shapes, symmetry and positive definiteness
  // over a sample grid, finite evaluation, mu present iff d <= 2, and for
  // d = 2 in the Einstein scale, constant Sc with mu = Sc/4.
  void validate(const Defaults& cfg = Defaults{}) const;

  // Evaluates metric entries and their partial derivatives up to `order`
  // (expressions are differentiated exactly once and cached per chart).
  MetricEval metric_eval(std::span<const double> p, int order) const;

  // Exact partials of einstein_omega of the given order, full multi-index
  // layout (size dim^order). Only meaningful for d <= 2.
  const std::vector<ScalarExpr>& omega_derivs(int order) const;

  uint64_t digest() const;
  std::string to_json_string() const;
  static Chart from_json_string(const std::string& text);
  static Chart load_file(const std::string& path);
  void save_file(const std::string& path) const;

 private:
  struct DerivTable;
  const DerivTable& table(int order) const;

  Box box_;
  std::vector<ScalarExpr> metric_;
  std::optional<double> mu_;
  ScalarExpr einstein_omega_{0.0};
  std::optional<ProductInfo> product_;
  mutable std::shared_ptr<std::array<std::shared_ptr<DerivTable>, 5>> tables_;
  mutable std::shared_ptr<std::array<std::shared_ptr<std::vector<ScalarExpr>>, 5>> omega_tables_;
};

// Deterministic sample points strictly inside the box (margin is a fraction of
// each axis length kept away from the faces).
std::vector<std::vector<double>> sample_points(const Box& box, int count, unsigned long long seed,
                                               double margin = 0.05);

// Uniform grid sweep, n points per axis; fn(point). Does not materialize the grid.
void for_each_grid_point(const Box& box, int n_per_axis,
                         const std::function<void(std::span<const double>)>& fn);

}  // namespace ctrac
