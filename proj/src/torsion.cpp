#include "wit/torsion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace wit {

namespace {

VectorXd laplacian_eigenvalues(const InnerProductComplex& ipc, int q) {
  MatrixXd s = sym_laplacian_dense(ipc, q);
  if (s.rows() == 0) return VectorXd();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
  return es.eigenvalues().cwiseMax(0.0);
}

}  // namespace

double detprime_laplacian(const InnerProductComplex& ipc, int q, double tol_zero) {
  VectorXd ev = laplacian_eigenvalues(ipc, q);
  if (ev.size() == 0) return 1.0;
  int k = kernel_dimension(ev, tol_zero);
  double logdet = 0.0;
  for (int i = k; i < ev.size(); ++i) logdet += std::log(ev[i]);
  return std::exp(logdet);
}

double torsion(const InnerProductComplex& ipc, double tol_zero) {
  double logt = 0.0;
  for (int q = 0; q <= ipc.length(); ++q) {
    if (ipc.dim(q) == 0) continue;
    double sign = (q % 2 == 0) ? -1.0 : 1.0;  // (-1)^{q+1}
    VectorXd ev = laplacian_eigenvalues(ipc, q);
    int k = kernel_dimension(ev, tol_zero);
    double logdet = 0.0;
    for (int i = k; i < ev.size(); ++i) logdet += std::log(ev[i]);
    logt += sign * 0.5 * q * logdet;
  }
  return std::exp(logt);
}

double vol_map(const MatrixXd& phi, const Metric& source, const Metric& target) {
  if (phi.cols() == 0) return 1.0;  // empty product
  MatrixXd gram = phi.transpose() * target.apply(phi);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (gram + gram.transpose()));
  double tiny = 1e-14 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < tiny) return 0.0;  // not injective
  double logdet = es.eigenvalues().array().log().sum() - source.log_det();
  return std::exp(0.5 * logdet);
}

void ChainMap::validate(double tol) const {
  if (!source || !target) throw InvalidArgument("ChainMap: missing complexes");
  if (source->length() != target->length())
    throw InvalidArgument("ChainMap: length mismatch");
  if (static_cast<int>(maps.size()) != source->length() + 1)
    throw InvalidArgument("ChainMap: one matrix per degree required");
  for (int q = 0; q < source->length(); ++q) {
    MatrixXd lhs = MatrixXd(target->d[q]) * maps[q];
    MatrixXd rhs = maps[q + 1] * MatrixXd(source->d[q]);
    double scale = std::max(1.0, lhs.cwiseAbs().maxCoeff() + rhs.cwiseAbs().maxCoeff());
    if ((lhs - rhs).cwiseAbs().maxCoeff() > tol * scale)
      throw NumericError("ChainMap: chain property fails at degree " + std::to_string(q));
  }
}

double vol_alternating(const ChainMap& phi) {
  phi.validate();
  double logv = 0.0;
  for (size_t q = 0; q < phi.maps.size(); ++q) {
    double v = vol_map(phi.maps[q], phi.source->metric[q], phi.target->metric[q]);
    if (v == 0.0)
      throw NumericError("vol_alternating: phi^" + std::to_string(q) +
                         " is not injective (zero volume)");
    logv += (q % 2 == 0 ? 1.0 : -1.0) * std::log(v);
  }
  return std::exp(logv);
}

namespace {

/// M-orthonormal harmonic basis (kernel of the degree-q Laplacian).
MatrixXd harmonic_basis(const InnerProductComplex& ipc, int q) {
  if (ipc.dim(q) == 0) return MatrixXd(0, 0);
  MatrixXd s = sym_laplacian_dense(ipc, q);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
  int k = kernel_dimension(es.eigenvalues().cwiseMax(0.0));
  return ipc.metric[q].isqrt_apply(MatrixXd(es.eigenvectors().leftCols(k)));
}

}  // namespace

double vol_cohomology(const ChainMap& phi) {
  double logv = 0.0;
  for (int q = 0; q <= phi.source->length(); ++q) {
    MatrixXd h1 = harmonic_basis(*phi.source, q);
    MatrixXd h2 = harmonic_basis(*phi.target, q);
    if (h1.cols() != h2.cols())
      throw NumericError("vol_cohomology: cohomology dimensions differ at degree " +
                         std::to_string(q));
    if (h1.cols() == 0) continue;
    // Coordinates of the projected images in the orthonormal harmonic basis.
    MatrixXd c = h2.transpose() * phi.target->apply_metric(q, phi.maps[q] * h1);
    double det = std::abs(c.determinant());
    if (det == 0.0) throw NumericError("vol_cohomology: induced map is singular");
    logv += (q % 2 == 0 ? 1.0 : -1.0) * std::log(det);
  }
  return std::exp(logv);
}

Identity63Result check_identity_63(const ChainMap& phi) {
  phi.validate();
  for (size_t q = 0; q < phi.maps.size(); ++q) {
    if (phi.maps[q].rows() != phi.maps[q].cols())
      throw InvalidArgument("check_identity_63: phi^q must be isomorphisms");
  }
  Identity63Result res;
  res.lhs = torsion(*phi.target) / torsion(*phi.source);
  res.rhs = vol_cohomology(phi) / vol_alternating(phi);
  res.relative_error =
      std::abs(res.lhs - res.rhs) / std::max({std::abs(res.lhs), std::abs(res.rhs), 1e-300});
  return res;
}

// ---------------------------------------------------------------------------
// Random corpus

namespace {

MatrixXd random_invertible(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  for (;;) {
    MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = dist(rng);
    Eigen::JacobiSVD<MatrixXd> svd(a);
    if (svd.singularValues()(n - 1) > 0.05 * svd.singularValues()(0)) return a;
  }
}

Metric random_metric(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = dist(rng);
  MatrixXd m = a * a.transpose() + 0.4 * MatrixXd::Identity(n, n);
  return Metric::dense(m);
}

}  // namespace

RandomComplexCase random_complex_case(std::uint64_t seed, int max_length, int max_dim) {
  std::mt19937_64 rng(seed);
  auto randint = [&](int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  const int n = randint(1, max_length);
  std::vector<int> dims(n + 1);
  for (auto& d : dims) d = randint(1, max_dim);
  std::vector<int> ranks(n, 0);
  int prev = 0;
  for (int q = 0; q < n; ++q) {
    int cap = std::min(dims[q] - prev, dims[q + 1]);
    ranks[q] = cap > 0 ? randint(0, cap) : 0;
    prev = ranks[q];
  }

  std::vector<MatrixXd> P(n + 1), Pinv(n + 1);
  for (int q = 0; q <= n; ++q) {
    P[q] = random_invertible(rng, dims[q]);
    Pinv[q] = P[q].inverse();
  }

  RandomComplexCase rc;
  std::uniform_real_distribution<double> coef(0.5, 2.0);
  for (int q = 0; q <= n; ++q) rc.c1.metric.push_back(random_metric(rng, dims[q]));
  rc.c1.d.resize(n);
  for (int q = 0; q < n; ++q) {
    MatrixXd e = MatrixXd::Zero(dims[q + 1], dims[q]);
    for (int i = 0; i < ranks[q]; ++i)
      e(i, dims[q] - ranks[q] + i) = coef(rng) * (rng() % 2 ? 1.0 : -1.0);
    MatrixXd d = P[q + 1] * e * Pinv[q];
    rc.c1.d[q] = d.sparseView();
  }

  rc.maps.resize(n + 1);
  for (int q = 0; q <= n; ++q) rc.maps[q] = random_invertible(rng, dims[q]);
  rc.c2.d.resize(n);
  for (int q = 0; q < n; ++q) {
    MatrixXd d2 = rc.maps[q + 1] * MatrixXd(rc.c1.d[q]) * rc.maps[q].inverse();
    rc.c2.d[q] = d2.sparseView();
  }
  for (int q = 0; q <= n; ++q) rc.c2.metric.push_back(random_metric(rng, dims[q]));
  return rc;
}

// ---------------------------------------------------------------------------
// Integer lattice reference

namespace {

using IMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

/// Column Hermite reduction: returns (H, U) with A * U = H, U unimodular.
void column_hnf(IMat a, IMat& h, IMat& u) {
  const int rows = static_cast<int>(a.rows()), cols = static_cast<int>(a.cols());
  u = IMat::Identity(cols, cols);
  int pivot_col = 0;
  for (int r = 0; r < rows && pivot_col < cols; ++r) {
    // Euclidean elimination across columns pivot_col..cols-1 in row r.
    for (;;) {
      int nz = -1;
      for (int c = pivot_col; c < cols; ++c)
        if (a(r, c) != 0 && (nz < 0 || std::abs(a(r, c)) < std::abs(a(r, nz)))) nz = c;
      if (nz < 0) break;
      a.col(nz).swap(a.col(pivot_col));
      u.col(nz).swap(u.col(pivot_col));
      bool clean = true;
      for (int c = pivot_col + 1; c < cols; ++c) {
        long long f = a(r, c) / a(r, pivot_col);
        if (f != 0) {
          a.col(c) -= f * a.col(pivot_col);
          u.col(c) -= f * u.col(pivot_col);
        }
        if (a(r, c) != 0) clean = false;
      }
      if (clean) break;
    }
    if (a(r, pivot_col) != 0) ++pivot_col;
  }
  h = std::move(a);
}

double log_covolume(const IMat& basis) {
  if (basis.cols() == 0) return 0.0;
  MatrixXd b = basis.cast<double>();
  MatrixXd g = b.transpose() * b;
  return 0.5 * std::log(g.determinant());
}

}  // namespace

double integer_torsion_reference(const std::vector<Eigen::MatrixXi>& d) {
  double logt = 0.0;
  for (size_t q = 0; q < d.size(); ++q) {
    if (d[q].size() == 0) continue;
    IMat a = d[q].cast<long long>();
    IMat h, u;
    column_hnf(a, h, u);
    // image basis: nonzero columns of h; kernel basis: matching columns of u.
    std::vector<int> img_cols, ker_cols;
    for (int c = 0; c < h.cols(); ++c) {
      if (h.col(c).cwiseAbs().maxCoeff() != 0) img_cols.push_back(c);
      else ker_cols.push_back(c);
    }
    IMat img(h.rows(), static_cast<int>(img_cols.size()));
    for (size_t i = 0; i < img_cols.size(); ++i) img.col(i) = h.col(img_cols[i]);
    IMat ker(u.rows(), static_cast<int>(ker_cols.size()));
    for (size_t i = 0; i < ker_cols.size(); ++i) ker.col(i) = u.col(ker_cols[i]);
    const double sign = (q % 2 == 0) ? 1.0 : -1.0;
    logt += sign * (log_covolume(img) + log_covolume(ker));
  }
  return std::exp(logt);
}

// ---------------------------------------------------------------------------
// Comparison bundle and a(t)

ComparisonBundle build_comparison(const CellComplex& cc, const InnerProductComplex& ipc,
                                  const MorseData& md, const MorseFunction& mf,
                                  const VsPackage& vs, const CutoffProfile& profile,
                                  const FlowControls& controls) {
  const int q = vs.degree;
  const auto& ids = md.by_index[q];
  const int c = static_cast<int>(ids.size());
  if (c != vs.eigenvalues.size())
    throw InvalidArgument("build_comparison: virtually small dimension " +
                          std::to_string(vs.eigenvalues.size()) +
                          " does not match the critical point count " + std::to_string(c));

  ComparisonBundle cb;
  cb.degree = q;
  cb.t = vs.t;

  std::vector<CriticalPoint> crit;
  for (int id : ids) crit.push_back(md.points[id]);
  cb.J = place_on_mesh(cc, ipc, crit, q, vs.t, profile);
  MatrixXd gram = cb.J.transpose() * ipc.apply_metric(q, cb.J);
  cb.j_gram_defect = (gram - MatrixXd::Identity(c, c)).cwiseAbs().maxCoeff();

  cb.I_tilde = vs.vectors.transpose() * ipc.apply_metric(q, cb.J);
  Eigen::JacobiSVD<MatrixXd> svd(cb.I_tilde);
  cb.min_singular_value = svd.singularValues().minCoeff();
  if (cb.min_singular_value < 1e-8)
    throw NumericError("build_comparison: I(t) numerically singular (smallest "
                       "singular value " + std::to_string(cb.min_singular_value) +
                       "); t too small or mesh too coarse");

  MatrixXd ii = cb.I_tilde.transpose() * cb.I_tilde;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(ii);
  MatrixXd inv_sqrt = es.eigenvectors() *
                      es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                      es.eigenvectors().transpose();
  cb.R = cb.I_tilde * inv_sqrt;

  VectorXd s = scaling_map(md, cc.dimension, q, vs.t);
  cb.L.resize(c, vs.eigenvalues.size());
  for (int xi = 0; xi < c; ++xi) {
    UnstableCell cell = realize_unstable_cell(cc, md, mf, ids[xi], controls);
    for (Eigen::Index a = 0; a < vs.vectors.cols(); ++a) {
      Cochain omega{q, vs.vectors.col(a)};
      cb.L(xi, a) = s[xi] * integrate_over_unstable(cc, cell, md, mf, omega, vs.t);
    }
  }
  cb.LR = cb.L * cb.R;
  return cb;
}

double a_value(const CellComplex& cc, const InnerProductComplex& ipc,
               const MorseData& md, const MorseFunction& mf, const VsPackage& vs,
               const FlowControls& controls) {
  (void)ipc;
  const int q = vs.degree;
  const auto& ids = md.by_index[q];
  if (ids.empty()) return 1.0;  // empty determinant
  MatrixXd N(static_cast<int>(ids.size()), vs.vectors.cols());
  for (size_t xi = 0; xi < ids.size(); ++xi) {
    UnstableCell cell = realize_unstable_cell(cc, md, mf, ids[xi], controls);
    for (Eigen::Index a = 0; a < vs.vectors.cols(); ++a) {
      Cochain omega{q, vs.vectors.col(a)};
      N(static_cast<int>(xi), a) = integrate_over_unstable(cc, cell, md, mf, omega, vs.t);
    }
  }
  MatrixXd g = N.transpose() * N;
  double det = g.determinant();
  return det > 0.0 ? std::sqrt(det) : 0.0;
}

AFunction a_function(const CellComplex& cc, const InnerProductComplex& ipc,
                     const MorseData& md, const MorseFunction& mf,
                     const BranchFamily& bf, const FlowControls& controls) {
  AFunction af;
  af.degree = bf.degree;
  for (size_t i = 0; i < bf.t_grid.size(); ++i) {
    if (!bf.primary[i]) continue;
    VsPackage vs = virtually_small_package(bf, bf.t_grid[i]);
    af.t.push_back(bf.t_grid[i]);
    af.value.push_back(a_value(cc, ipc, md, mf, vs, controls));
  }
  return af;
}

double theorem62_rhs(const std::vector<VsPackage>& vs_at_zero, double a_zero,
                     const std::vector<double>& lattice_volumes) {
  double sum = 0.0;
  for (const auto& vs : vs_at_zero) {
    const int q = vs.degree;
    double inner = 0.0;
    for (Eigen::Index i = vs.vs_zero_count; i < vs.eigenvalues.size(); ++i)
      inner += std::log(vs.eigenvalues[i]);
    sum += 0.5 * (q % 2 == 0 ? -1.0 : 1.0) * q * inner;
  }
  sum += std::log(a_zero);
  for (size_t i = 0; i < lattice_volumes.size(); ++i)
    sum -= (i % 2 == 0 ? 1.0 : -1.0) * std::log(lattice_volumes[i]);
  return sum;
}

}  // namespace wit
