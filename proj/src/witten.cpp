#include "wit/witten.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wit {

FieldSamples sample_field(const CellComplex& cc, const MorseFunction& mf) {
  FieldSamples f;
  f.per_degree.resize(cc.dimension + 1);
  for (int q = 0; q <= cc.dimension; ++q) {
    VectorXd v(cc.cells(q));
    for (int i = 0; i < cc.cells(q); ++i)
      v[i] = mf.mesh_value(cc.barycenters[q].row(i).transpose());
    f.per_degree[q] = std::move(v);
  }
  return f;
}

FieldSamples constant_field(const InnerProductComplex& ipc, double c) {
  FieldSamples f;
  for (int q = 0; q <= ipc.length(); ++q)
    f.per_degree.push_back(VectorXd::Constant(ipc.dim(q), c));
  return f;
}

namespace {

SpMat prune_zeros(const SpMat& m) {
  std::vector<Triplet> trips;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      if (it.value() != 0.0) trips.emplace_back(it.row(), it.col(), it.value());
  SpMat out(m.rows(), m.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

SpMat conjugate(const SpMat& m, const VectorXd& row_f, const VectorXd& col_f, double t) {
  // entries m_ij * exp(t (col_f_j - row_f_i))
  std::vector<Triplet> trips;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      trips.emplace_back(it.row(), it.col(),
                         it.value() * std::exp(t * (col_f[it.col()] - row_f[it.row()])));
  SpMat out(m.rows(), m.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

}  // namespace

DeformedComplex deform(const InnerProductComplex& ipc, const FieldSamples& f, double t) {
  if (static_cast<int>(f.per_degree.size()) != ipc.length() + 1)
    throw InvalidArgument("deform: field samples must cover every degree");
  for (int q = 0; q <= ipc.length(); ++q) {
    if (f.per_degree[q].size() != ipc.dim(q))
      throw InvalidArgument("deform: field sample length mismatch at degree " +
                            std::to_string(q));
    if (f.per_degree[q].size() &&
        (t * f.per_degree[q].array()).abs().maxCoeff() > 300.0)
      throw InvalidArgument("deform: |t f| > 300; normalize f to avoid overflow");
  }
  DeformedComplex dc;
  dc.base = &ipc;
  dc.t = t;
  dc.weights.resize(ipc.length() + 1);
  for (int q = 0; q <= ipc.length(); ++q)
    dc.weights[q] = (t * f.per_degree[q].array()).exp();
  dc.materialized.resize(ipc.length());
  for (int q = 0; q < ipc.length(); ++q)
    dc.materialized[q] = conjugate(ipc.d[q], f.per_degree[q + 1], f.per_degree[q], t);
  return dc;
}

InnerProductComplex DeformedComplex::as_complex() const {
  InnerProductComplex out;
  out.d = materialized;
  out.metric = base->metric;
  return out;
}

SpMat deformed_dd(const DeformedComplex& dc, int q) {
  if (q < 0 || q + 1 >= dc.base->length())
    throw InvalidArgument("deformed_dd: degree out of range");
  SpMat base_dd = prune_zeros(SpMat(dc.base->d[q + 1] * dc.base->d[q]));
  // Conjugating the exact base composition keeps exact zeros exact.
  if (dc.t == 0.0) return base_dd;
  std::vector<Triplet> trips;
  for (int k = 0; k < base_dd.outerSize(); ++k)
    for (SpMat::InnerIterator it(base_dd, k); it; ++it)
      trips.emplace_back(it.row(), it.col(),
                         it.value() * dc.weights[q][it.col()] / dc.weights[q + 2][it.row()]);
  SpMat out(base_dd.rows(), base_dd.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

SpMat witten_laplacian(const DeformedComplex& dc, int q) {
  return laplacian(dc.as_complex(), q);
}

SpMat witten_sym_laplacian(const DeformedComplex& dc, int q) {
  return sym_laplacian(dc.as_complex(), q);
}

DeformedSpectrum deformed_spectrum(const InnerProductComplex& ipc, const FieldSamples& f,
                                   double t, int q, int count, const EigenOptions& opts) {
  DeformedComplex dc = deform(ipc, f, t);
  auto spec = lowest_eigenpairs(witten_sym_laplacian(dc, q), count, opts);
  DeformedSpectrum out;
  out.t = t;
  out.eigenvalues = spec.values;
  out.vectors = ipc.metric[q].isqrt_apply(spec.vectors);
  return out;
}

QuadraticDecomposition quadratic_decomposition(const InnerProductComplex& ipc,
                                               const FieldSamples& f, int q,
                                               double verify_tol) {
  SpMat L0 = witten_laplacian(deform(ipc, f, 0.0), q);
  SpMat Lp = witten_laplacian(deform(ipc, f, 1.0), q);
  SpMat Lm = witten_laplacian(deform(ipc, f, -1.0), q);
  QuadraticDecomposition qd;
  qd.A = L0;
  qd.B = 0.5 * (Lp - Lm);
  qd.C = 0.5 * (Lp + Lm) - L0;
  SpMat L2 = witten_laplacian(deform(ipc, f, 2.0), q);
  SpMat model = qd.A + 2.0 * qd.B + 4.0 * qd.C;
  const double scale = std::max(1.0, sparse_max_abs(L2));
  qd.verification_residual = sparse_max_abs(SpMat(L2 - model)) / scale;
  if (qd.verification_residual > verify_tol)
    throw NumericError("quadratic_decomposition: verification residual " +
                       std::to_string(qd.verification_residual) +
                       " exceeds tolerance (family not quadratic at this mesh)");
  return qd;
}

// ---------------------------------------------------------------------------
// Branch tracking

namespace {

struct EigData {
  double t = 0.0;
  VectorXd evals;
  MatrixXd vecs;  // M-orthonormal columns
};

struct Tracker {
  const InnerProductComplex& ipc;
  const FieldSamples& f;
  int q;
  int m;
  TrackOptions opts;
  BranchFamily out;

  EigData solve(double t) const {
    auto s = deformed_spectrum(ipc, f, t, q, m, opts.eig);
    return {t, s.eigenvalues, s.vectors};
  }

  void push(const EigData& d, bool primary, double overlap) {
    out.t_grid.push_back(d.t);
    out.primary.push_back(primary ? 1 : 0);
    out.vectors.push_back(d.vecs);
    if (overlap >= 0.0) out.step_overlap.push_back(overlap);
    rows_.push_back(d.evals);
  }

  void finish() {
    out.eigenvalues.resize(static_cast<Eigen::Index>(rows_.size()), m);
    for (size_t i = 0; i < rows_.size(); ++i) out.eigenvalues.row(i) = rows_[i];
  }

  /// Match branches of `a` to eigenpairs of `b`; reorder/rotate b in place.
  double match(const EigData& a, EigData& b) const {
    const MatrixXd Ma = ipc.metric[q].apply(a.vecs);
    MatrixXd overlap = (Ma.transpose() * b.vecs).cwiseAbs();
    std::vector<int> assign = optimal_assignment(overlap);

    MatrixXd newvecs(b.vecs.rows(), m);
    VectorXd newvals(m);
    for (int i = 0; i < m; ++i) {
      newvecs.col(i) = b.vecs.col(assign[i]);
      newvals[i] = b.evals[assign[i]];
    }

    // Near-degenerate groups of b: subspace-match by orthogonal Procrustes.
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return newvals[i] < newvals[j]; });
    for (int s = 0; s < m;) {
      int e = s + 1;
      while (e < m && std::abs(newvals[order[e]] - newvals[order[e - 1]]) <=
                          opts.tol_group * (1.0 + std::abs(newvals[order[e]])))
        ++e;
      if (e - s > 1) {
        std::vector<int> g(order.begin() + s, order.begin() + e);
        MatrixXd B(b.vecs.rows(), g.size()), A(b.vecs.rows(), g.size());
        for (size_t c = 0; c < g.size(); ++c) {
          B.col(c) = newvecs.col(g[c]);
          A.col(c) = a.vecs.col(g[c]);
        }
        MatrixXd X = B.transpose() * ipc.metric[q].apply(A);
        Eigen::JacobiSVD<MatrixXd> svd(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
        MatrixXd rot = svd.matrixU() * svd.matrixV().transpose();
        MatrixXd Brot = B * rot;
        for (size_t c = 0; c < g.size(); ++c) newvecs.col(g[c]) = Brot.col(c);
      }
      s = e;
    }

    double worst = 1.0;
    for (int i = 0; i < m; ++i) {
      double ip = ipc.metric[q].inner(a.vecs.col(i), newvecs.col(i));
      if (ip < 0) newvecs.col(i) *= -1.0;
      worst = std::min(worst, std::abs(ip));
    }
    b.vecs = std::move(newvecs);
    b.evals = std::move(newvals);
    return worst;
  }

  void advance(EigData& cur, double t_target, bool primary, int depth) {
    EigData next = solve(t_target);
    double worst = match(cur, next);
    if (worst < opts.overlap_min && depth < opts.max_depth) {
      double t_mid = 0.5 * (cur.t + t_target);
      advance(cur, t_mid, false, depth + 1);
      advance(cur, t_target, primary, depth + 1);
      return;
    }
    if (worst < opts.overlap_min) {
      const MatrixXd Mc = ipc.metric[q].apply(cur.vecs);
      for (int i = 0; i < m; ++i) {
        double ip = std::abs((Mc.col(i).transpose() * next.vecs.col(i))(0, 0));
        if (ip < opts.overlap_min) out.resolved[i] = 0;  // never silently permuted
      }
    }
    push(next, primary, worst);
    cur = std::move(next);
  }

  std::vector<VectorXd> rows_;
};

}  // namespace

BranchFamily track_branches(const InnerProductComplex& ipc, const FieldSamples& f,
                            int q, const std::vector<double>& t_grid, int m,
                            const TrackOptions& opts, double mesh_spacing) {
  if (t_grid.size() < 2) throw InvalidArgument("track_branches: need at least two t values");
  for (size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw InvalidArgument("track_branches: t_grid must be strictly increasing");
  if (m < 1 || m > ipc.dim(q)) throw InvalidArgument("track_branches: bad branch count");
  if (!(opts.overlap_min > 0.5 && opts.overlap_min < 1.0))
    throw InvalidArgument("track_branches: overlap_min must lie in (0.5, 1)");
  const double t_max = t_grid.back();
  if (mesh_spacing > 0.0 && t_max > 0.0 &&
      mesh_spacing > opts.resolution_cap / std::sqrt(t_max))
    throw InvalidArgument(
        "track_branches: grid spacing h violates the resolution cap h <= " +
        std::to_string(opts.resolution_cap) + "/sqrt(t_max)");

  Tracker tracker{ipc, f, q, m, opts, {}, {}};
  tracker.out.degree = q;
  tracker.out.branch_count = m;
  tracker.out.resolved.assign(m, 1);
  tracker.out.labels.assign(m, -1);

  EigData cur = tracker.solve(t_grid.front());
  tracker.push(cur, true, -1.0);
  for (size_t i = 1; i < t_grid.size(); ++i)
    tracker.advance(cur, t_grid[i], true, 0);
  tracker.finish();
  return tracker.out;
}

GapReport gap_from_eigenvalues(const VectorXd& evals, int q, double t) {
  GapReport rep;
  rep.degree = q;
  rep.t = t;
  const int m = static_cast<int>(evals.size());
  if (m < 2) throw InvalidArgument("gap detection: need at least two eigenvalues");
  const double floor_val = std::max(1e-4 * std::abs(evals[m - 1]), 1e-300);
  double best = -1.0;
  int best_i = 0;
  for (int i = 0; i + 1 < m; ++i) {
    double r = evals[i + 1] / std::max(evals[i], floor_val);
    if (r > best) { best = r; best_i = i; }
  }
  rep.lower = evals[best_i];
  rep.upper = evals[best_i + 1];
  rep.count_below = best_i + 1;
  rep.ratio = best;
  rep.no_gap = best < 10.0;
  return rep;
}

GapReport detect_gap(const InnerProductComplex& ipc, const FieldSamples& f, int q,
                     double t, int m, const EigenOptions& opts) {
  auto spec = deformed_spectrum(ipc, f, t, q, m, opts);
  return gap_from_eigenvalues(spec.eigenvalues, q, t);
}

void classify_clusters(BranchFamily& bf) {
  // The two largest primary grid points drive the Richardson correction
  // s = (l(t2) - l(t1)) / (2 (t2 - t1)) of l/(2t).
  int i2 = -1, i1 = -1;
  for (int i = static_cast<int>(bf.t_grid.size()) - 1; i >= 0; --i) {
    if (!bf.primary[i]) continue;
    if (i2 < 0) i2 = i;
    else { i1 = i; break; }
  }
  if (i1 < 0) throw InvalidArgument("classify_clusters: need two primary grid points");
  const double t1 = bf.t_grid[i1], t2 = bf.t_grid[i2];
  bf.label_slopes.resize(bf.branch_count);
  for (int a = 0; a < bf.branch_count; ++a) {
    double s = (bf.eigenvalues(i2, a) - bf.eigenvalues(i1, a)) / (2.0 * (t2 - t1));
    bf.label_slopes[a] = s;
    if (!bf.resolved[a]) { bf.labels[a] = -1; continue; }
    double r = std::round(s);
    bf.labels[a] = (std::abs(s - r) < 0.25 && r >= 0.0) ? static_cast<int>(r) : -1;
  }
}

VsPackage virtually_small_package(const BranchFamily& bf, double at_t) {
  int gi = -1;
  for (size_t i = 0; i < bf.t_grid.size(); ++i)
    if (std::abs(bf.t_grid[i] - at_t) <= 1e-12 * (1.0 + std::abs(at_t))) {
      gi = static_cast<int>(i);
      break;
    }
  if (gi < 0) throw InvalidArgument("virtually_small_package: t not on the tracked grid");
  if (bf.labels.empty() || bf.label_slopes.size() == 0)
    throw InvalidArgument("virtually_small_package: classify_clusters must run first");

  std::vector<int> vs;
  for (int a = 0; a < bf.branch_count; ++a) {
    if (bf.labels[a] == 0) {
      if (!bf.resolved[a])
        throw NumericError("virtually_small_package: unresolved label-0 branch " +
                           std::to_string(a) + "; package incomplete");
      vs.push_back(a);
    }
  }
  std::sort(vs.begin(), vs.end(), [&](int a, int b) {
    return bf.eigenvalues(gi, a) < bf.eigenvalues(gi, b);
  });

  VsPackage pkg;
  pkg.degree = bf.degree;
  pkg.t = bf.t_grid[gi];
  pkg.branch_ids = vs;
  pkg.eigenvalues.resize(vs.size());
  pkg.vectors.resize(bf.vectors[gi].rows(), static_cast<Eigen::Index>(vs.size()));
  for (size_t i = 0; i < vs.size(); ++i) {
    pkg.eigenvalues[static_cast<Eigen::Index>(i)] = bf.eigenvalues(gi, vs[i]);
    pkg.vectors.col(static_cast<Eigen::Index>(i)) = bf.vectors[gi].col(vs[i]);
  }
  pkg.vs_zero_count =
      pkg.eigenvalues.size() ? kernel_dimension(pkg.eigenvalues, 1e-6, 10.0) : 0;
  return pkg;
}

VectorXd outside_mass_fraction(const CellComplex& cc, const InnerProductComplex& ipc,
                               int q, const MatrixXd& vectors,
                               const std::vector<CriticalPoint>& points, double eps) {
  const VectorXd& mass = ipc.metric[q].diagonal_values();
  VectorXd inside = VectorXd::Zero(cc.cells(q));
  for (int i = 0; i < cc.cells(q); ++i) {
    for (const auto& cp : points)
      if (cc.torus_distance(cc.barycenters[q].row(i).transpose(), cp.location) < eps) {
        inside[i] = 1.0;
        break;
      }
  }
  VectorXd out(vectors.cols());
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    VectorXd v2 = vectors.col(c).cwiseProduct(vectors.col(c)).cwiseProduct(mass);
    double total = v2.sum();
    out[c] = (total > 0) ? (v2.array() * (1.0 - inside.array())).sum() / total : 0.0;
  }
  return out;
}

GapConstants gap_constants(const CellComplex& cc, const MorseFunction& mf,
                           const std::vector<CriticalPoint>& points, double eps) {
  GapConstants gc;
  gc.inf_gradient_off_balls = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cc.cells(0); ++i) {
    VectorXd x = cc.barycenters[0].row(i).transpose();
    double grad = mf.gradient(x, 0).norm();
    gc.sup_hessian_trace = std::max(gc.sup_hessian_trace, std::abs(mf.hessian(x, 0).trace()));
    bool off = true;
    for (const auto& cp : points)
      if (cc.torus_distance(x, cp.location) < eps) { off = false; break; }
    if (off) gc.inf_gradient_off_balls = std::min(gc.inf_gradient_off_balls, grad);
  }
  return gc;
}

}  // namespace wit
