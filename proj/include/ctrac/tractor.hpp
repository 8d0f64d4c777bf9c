#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "ctrac/chart.hpp"
#include "ctrac/conformal.hpp"
#include "ctrac/curvature.hpp"

namespace ctrac {

// Tractor values are (d+2)-vectors in slot order (sigma, mu_1..mu_d, rho),
// with the middle slot carrying the lowered index. Components are plain
// functions trivialized by the chart's own metric.
using Vec = std::vector<double>;
using Mat = std::vector<double>;  // (d+2)^2 row-major

struct TractorField {
  ScalarExpr sigma;
  std::vector<ScalarExpr> mu;
  ScalarExpr rho;
};

// Tractor value tagged with the chart (scale) its components refer to.
struct ScaledTractor {
  uint64_t scale = 0;
  Vec u;
};

// A tractor field that can report slot values and exact first partials.
class TractorFieldEval {
 public:
  virtual ~TractorFieldEval() = default;
  virtual std::vector<Jet> slots(const Chart& chart, std::span<const double> p) const = 0;
};

class ExprTractorField : public TractorFieldEval {
 public:
  explicit ExprTractorField(TractorField f) : f_(std::move(f)) {}
  std::vector<Jet> slots(const Chart& chart, std::span<const double> p) const override;
  const TractorField& field() const { return f_; }

 private:
  TractorField f_;
};

// I = (1/d) D sigma for a weight-1 density sigma (Einstein/almost-Einstein
// scale tractor).
class ScaleTractorField : public TractorFieldEval {
 public:
  explicit ScaleTractorField(ScalarExpr sigma) : sigma_(std::move(sigma)) {}
  std::vector<Jet> slots(const Chart& chart, std::span<const double> p) const override;
  const ScalarExpr& sigma() const { return sigma_; }

 private:
  ScalarExpr sigma_;
};

// Components of a source-scale field re-expressed in the chart rescaled by
// omega (tractor transformation law combined with the density
// retrivialization e^{w omega} per slot).
class TransformedTractorField : public TractorFieldEval {
 public:
  TransformedTractorField(std::shared_ptr<const TractorFieldEval> base, Chart source,
                          ScalarExpr omega);
  std::vector<Jet> slots(const Chart& chart, std::span<const double> p) const override;

 private:
  std::shared_ptr<const TractorFieldEval> base_;
  Chart source_;
  ConformalRescale rescale_;
};

// ---------------------------------------------------------------------------
// metric and transformation law

// h as a matrix in slot coordinates at p: h(U,V) = sigma_U rho_V + rho_U
// sigma_V + g^{ab} mu_Ua mu_Vb.
Mat tractor_metric_matrix(const Chart& chart, std::span<const double> p);
double tractor_metric(const Chart& chart, std::span<const double> u, std::span<const double> v,
                      std::span<const double> p);
double tractor_metric(const Chart& chart, const ScaledTractor& u, const ScaledTractor& v,
                      std::span<const double> p);  // throws ScaleMismatch

// The splitting change of Eq-level tractor components under g -> e^{2w}g,
// without retrivialization (each slot is the same conformal density).
Vec transform_splitting(const Chart& chart, std::span<const double> u, const ConformalRescale& r,
                        std::span<const double> p);
// Full component transformation into the rescaled chart's own trivialization.
Vec transform_tractor(const Chart& chart, std::span<const double> u, const ConformalRescale& r,
                      std::span<const double> p);

// ---------------------------------------------------------------------------
// connection

// Connection matrices A_a with nabla_a u = d_a u + A_a u in slot coordinates.
// Valid for every dimension (d <= 2 uses the mu-datum Schouten tensor; throws
// MissingMu if absent).
std::vector<Mat> connection_matrices(const Chart& chart, std::span<const double> p);

// nabla_a U at p for all a; rows indexed by direction a.
std::vector<Vec> tractor_connection(const Chart& chart, const TractorFieldEval& field,
                                    std::span<const double> p);

// Thomas operator D V for a weight-w scalar density:
// ((d+2w-2) w V, (d+2w-2) nabla_a V, (Delta - w J) V), Delta = -nabla^b nabla_b.
Vec thomas_d(const Chart& chart, const ScalarExpr& v, double w, std::span<const double> p);

// Tractor curvature Omega_ab as a slot matrix, and its covariant derivatives
// nabla_c Omega_ab (all c and a<b, c-major order).
Mat tractor_curvature(const Chart& chart, std::span<const double> p, int a, int b);
std::vector<Mat> tractor_curvature_all(const Chart& chart, std::span<const double> p);
std::vector<Mat> tractor_curvature_derivs(const Chart& chart, std::span<const double> p);

// ---------------------------------------------------------------------------
// parallel transport

struct Curve {
  std::vector<ScalarExpr> comp;  // functions of x1 = t, t in [0,1]

  Vec point(double t) const;
  Vec velocity(double t) const;
  static Curve segment(std::span<const double> from, std::span<const double> to);
  // Axis-aligned rectangle loop in the (a,b) plane based at `base` (start and
  // end point), extending by the signed widths wa, wb; the four sides are
  // returned as separate segments.
  static std::vector<Curve> rectangle(std::span<const double> base, int a, int b, double wa,
                                      double wb);
};

struct TransportResult {
  Vec endpoint;
  double max_local_error = 0.0;
  long steps = 0;
  double metric_drift = 0.0;  // |h(u,u)| end vs start
};

TransportResult parallel_transport(const Chart& chart, const Curve& curve,
                                   std::span<const double> u0, const Defaults& cfg = Defaults{});
// Fundamental solution over the curve (maps start values to end values).
Mat transport_matrix(const Chart& chart, const Curve& curve, const Defaults& cfg = Defaults{});
Mat transport_matrix_path(const Chart& chart, std::span<const Curve> pieces,
                          const Defaults& cfg = Defaults{});

// ---------------------------------------------------------------------------
// dimension-1 circle ODE (s'' + 2 mu s)' = 0

struct CircleOdeBasis {
  double mu = 0.0;

  static constexpr int size = 3;
  double s(int k, double t) const;
  double ds(int k, double t) const;
  double dds(int k, double t) const;
  // induced parallel triple (s, s', -(s'' + mu s))
  std::array<double, 3> triple(int k, double t) const;
  double period() const;  // 2 pi / sqrt(2 mu) for mu > 0, else 0
};

CircleOdeBasis circle_ode_solutions(double mu);

// ---------------------------------------------------------------------------
// small matrix helpers shared by holonomy / nullspace code

Mat mat_mul(const Mat& a, const Mat& b, int n);
Mat mat_identity(int n);
double mat_max_abs(const Mat& a);
Vec mat_apply(const Mat& a, std::span<const double> v, int n);

}  // namespace ctrac
