#include "ctrac/holonomy.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "ctrac/errors.hpp"

namespace ctrac {

namespace {

Eigen::MatrixXd to_eigen(const Mat& m, int n) {
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = m[i * n + j];
  return out;
}

Mat from_eigen(const Eigen::MatrixXd& m) {
  int n = static_cast<int>(m.rows());
  Mat out(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i * n + j] = m(i, j);
  return out;
}

}  // namespace

HolonomySample holonomy_sample(const Chart& chart, int max_loops, const Defaults& cfg) {
  const int d = chart.dim();
  const int n = d + 2;
  HolonomySample out;
  out.n = n;
  out.base = chart.box().center();
  out.hbase = tractor_metric_matrix(chart, out.base);
  Eigen::MatrixXd H = to_eigen(out.hbase, n);

  auto record = [&](const std::string& id, Mat m) {
    Eigen::MatrixXd M = to_eigen(m, n);
    double res = (M.transpose() * H * M - H).cwiseAbs().maxCoeff();
    out.loops.push_back({id, std::move(m), res});
    out.max_metric_residual = std::max(out.max_metric_residual, res);
  };

  if (d == 1) {
    Vec from{chart.box().lo(0)}, to{chart.box().hi(0)};
    record("traversal", transport_matrix(chart, Curve::segment(from, to), cfg));
    return out;
  }

  // five deterministic base points: center plus four shifted copies
  std::vector<Vec> bases{out.base};
  for (int k = 0; k < 4 && static_cast<int>(bases.size()) < 5; ++k) {
    Vec b = out.base;
    int axis = k % d;
    double shift = (k % 2 == 0 ? 0.18 : -0.18) * (chart.box().hi(axis) - chart.box().lo(axis));
    b[axis] += shift;
    bases.push_back(b);
  }
  const double scales[3] = {0.28, 0.18, 0.10};

  int count = 0;
  for (int s = 0; s < 3 && count < max_loops; ++s)
    for (size_t bi = 0; bi < bases.size() && count < max_loops; ++bi)
      for (int a = 0; a < d && count < max_loops; ++a)
        for (int b = a + 1; b < d && count < max_loops; ++b) {
          // keep the family spread out rather than exhausting one plane
          if (static_cast<int>((a * d + b + bi + s)) % 2 == 1 && d > 2) continue;
          double wa = scales[s] * (chart.box().hi(a) - chart.box().lo(a));
          double wb = scales[s] * (chart.box().hi(b) - chart.box().lo(b));
          Vec base = bases[bi];
          // keep the rectangle inside the box
          base[a] = std::clamp(base[a], chart.box().lo(a) + 0.02 * wa, chart.box().hi(a) - 1.02 * wa);
          base[b] = std::clamp(base[b], chart.box().lo(b) + 0.02 * wb, chart.box().hi(b) - 1.02 * wb);
          auto segs = Curve::rectangle(base, a, b, wa, wb);
          Mat loop = transport_matrix_path(chart, segs, cfg);
          if (bi != 0) {
            Mat t = transport_matrix(chart, Curve::segment(out.base, base), cfg);
            Eigen::MatrixXd T = to_eigen(t, n);
            Eigen::MatrixXd M = T.inverse() * to_eigen(loop, n) * T;
            loop = from_eigen(M);
          }
          record("rect_b" + std::to_string(bi) + "_p" + std::to_string(a) + std::to_string(b) +
                     "_s" + std::to_string(s),
                 std::move(loop));
          ++count;
        }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// orthonormalized columns spanning the (near-)eigenspace for a cluster
std::vector<Eigen::VectorXd> cluster_basis(const Eigen::MatrixXd& vecs,
                                           const std::vector<int>& members) {
  std::vector<Eigen::VectorXd> basis;
  for (int idx : members) {
    Eigen::VectorXd v = vecs.col(idx);
    for (const auto& b : basis) v -= b.dot(v) * b;
    if (v.norm() > 1e-8) basis.push_back(v.normalized());
  }
  return basis;
}

double offblock_of(const std::vector<Mat>& loops, const Eigen::MatrixXd& B, int n,
                   const std::vector<int>& dims) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
  if (!lu.isInvertible()) return 1e30;
  double worst = 0.0;
  for (const Mat& m : loops) {
    Eigen::MatrixXd t = lu.solve(to_eigen(m, n) * B);
    int r0 = 0;
    for (size_t bi = 0; bi < dims.size(); ++bi) {
      int rows = dims[bi];
      for (int r = r0; r < r0 + rows; ++r)
        for (int c = 0; c < n; ++c) {
          if (c >= r0 && c < r0 + rows) continue;
          worst = std::max(worst, std::abs(t(r, c)));
        }
      r0 += rows;
    }
  }
  return worst;
}

}  // namespace

SplitVerdict detect_splitting(const HolonomySample& sample, const Defaults& cfg) {
  const int n = sample.n;
  SplitVerdict out;
  if (sample.loops.size() < 1) return out;

  double maxdev = 0.0;
  std::vector<std::pair<double, Mat>> devs;
  for (const auto& l : sample.loops) {
    Mat dev = l.transport;
    for (int i = 0; i < n; ++i) dev[i * n + i] -= 1.0;
    double norm = mat_max_abs(dev);
    maxdev = std::max(maxdev, norm);
    devs.emplace_back(norm, std::move(dev));
  }
  if (maxdev < 100.0 * cfg.parallel_tol * 1e-1) {  // ~1e-8 with defaults
    out.kind = SplitVerdict::Kind::TrivialHolonomy;
    return out;
  }
  // normalize the generators, dropping loops that are transport noise rather
  // than holonomy (they would otherwise be amplified into garbage)
  std::vector<Mat> gens;
  double floor = std::max(1e-8, 1e-5 * maxdev);
  for (auto& [norm, dev] : devs) {
    if (norm < floor) continue;
    for (double& x : dev) x /= norm;
    gens.push_back(std::move(dev));
  }

  // commutant of the generators: Q with [M_i, Q] = 0 for all i
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n * n, n * n);
  for (const Mat& g : gens) {
    Eigen::MatrixXd M = to_eigen(g, n);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n * n, n * n);  // vec(MQ - QM), row-major vec
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        for (int k = 0; k < n; ++k) {
          K(r * n + c, k * n + c) += M(r, k);
          K(r * n + c, r * n + k) -= M(k, c);
        }
    gram += K.transpose() * K;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  double lmax = eig.eigenvalues().cwiseAbs().maxCoeff();
  double thresh = std::max(1e-14, 1e-10 * lmax);
  std::vector<Eigen::MatrixXd> commutant;
  for (int i = 0; i < n * n; ++i) {
    if (eig.eigenvalues()(i) >= thresh) continue;
    Eigen::MatrixXd q(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) q(r, c) = eig.eigenvectors()(r * n + c, i);
    commutant.push_back(q);
  }
  out.commutant_dim = static_cast<int>(commutant.size());
  if (out.commutant_dim <= 1) {
    out.kind = SplitVerdict::Kind::NoWitness;
    return out;
  }

  Eigen::MatrixXd H = to_eigen(sample.hbase, n);
  Eigen::MatrixXd Hinv = H.inverse();
  std::vector<Mat> loops;
  for (const auto& l : sample.loops) loops.push_back(l.transport);

  // try h-self-adjoint elements of the commutant; their eigenspaces are the
  // candidate invariant blocks
  for (size_t attempt = 0; attempt < commutant.size() + 3; ++attempt) {
    Eigen::MatrixXd q;
    if (attempt < commutant.size()) {
      q = commutant[attempt];
    } else {
      q = Eigen::MatrixXd::Zero(n, n);
      for (size_t j = 0; j < commutant.size(); ++j)
        q += std::cos(double(attempt * 7 + j * 3 + 1)) * commutant[j];
    }
    Eigen::MatrixXd qs = 0.5 * (q + Hinv * q.transpose() * H);
    Eigen::MatrixXd centered = qs - (qs.trace() / n) * Eigen::MatrixXd::Identity(n, n);
    if (centered.cwiseAbs().maxCoeff() < 1e-7 * std::max(1.0, qs.cwiseAbs().maxCoeff())) continue;

    Eigen::EigenSolver<Eigen::MatrixXd> es(qs);
    bool complex_spectrum = false;
    for (int i = 0; i < n; ++i)
      if (std::abs(es.eigenvalues()(i).imag()) > 1e-7 * (1.0 + std::abs(es.eigenvalues()(i))))
        complex_spectrum = true;
    if (complex_spectrum) continue;

    // cluster eigenvalues
    std::vector<double> lambda(n);
    for (int i = 0; i < n; ++i) lambda[i] = es.eigenvalues()(i).real();
    double spread = *std::max_element(lambda.begin(), lambda.end()) -
                    *std::min_element(lambda.begin(), lambda.end());
    if (spread < 1e-8) continue;
    double ctol = std::max(1e-6, 1e-6 * spread);
    std::vector<int> assigned(n, -1);
    std::vector<double> reps;
    for (int i = 0; i < n; ++i) {
      for (size_t r = 0; r < reps.size(); ++r)
        if (std::abs(lambda[i] - reps[r]) < ctol) assigned[i] = static_cast<int>(r);
      if (assigned[i] < 0) {
        reps.push_back(lambda[i]);
        assigned[i] = static_cast<int>(reps.size()) - 1;
      }
    }
    if (reps.size() < 2) continue;

    Eigen::MatrixXd vecs = es.eigenvectors().real();
    Eigen::MatrixXd B(n, n);
    std::vector<int> dims;
    int col = 0;
    bool degenerate = false;
    for (size_t r = 0; r < reps.size(); ++r) {
      std::vector<int> members;
      for (int i = 0; i < n; ++i)
        if (assigned[i] == static_cast<int>(r)) members.push_back(i);
      auto basis = cluster_basis(vecs, members);
      if (basis.empty()) degenerate = true;
      dims.push_back(static_cast<int>(basis.size()));
      for (const auto& b : basis) B.col(col++) = b;
    }
    if (degenerate || col != n) continue;

    double off = offblock_of(loops, B, n, dims);
    if (off < 1e-6) {
      out.kind = SplitVerdict::Kind::Witness;
      out.dims = dims;
      out.max_offblock = off;
      for (int c = 0; c < n; ++c) {
        Vec v(n);
        for (int r = 0; r < n; ++r) v[r] = B(r, c);
        out.basis.push_back(v);
      }
      return out;
    }
  }
  out.kind = SplitVerdict::Kind::NoWitness;
  return out;
}

double offblock_residual(const HolonomySample& sample, const std::vector<Vec>& block1,
                         const std::vector<Vec>& block2) {
  const int n = sample.n;
  if (static_cast<int>(block1.size() + block2.size()) != n)
    fail(ErrorKind::BadChart, "splitting blocks must span the tractor fibre");
  Eigen::MatrixXd B(n, n);
  int col = 0;
  for (const Vec& v : block1) {
    for (int r = 0; r < n; ++r) B(r, col) = v[r];
    ++col;
  }
  for (const Vec& v : block2) {
    for (int r = 0; r < n; ++r) B(r, col) = v[r];
    ++col;
  }
  std::vector<Mat> loops;
  for (const auto& l : sample.loops) loops.push_back(l.transport);
  return offblock_of(loops, B, n,
                     {static_cast<int>(block1.size()), static_cast<int>(block2.size())});
}

}  // namespace ctrac
