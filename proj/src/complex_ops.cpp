#include "wit/complex_ops.hpp"

#include <cmath>

namespace wit {

const SpMat& InnerProductComplex::diff(int q) const {
  static const SpMat empty;
  if (q < 0 || q >= static_cast<int>(d.size())) return empty;
  return d[q];
}

void InnerProductComplex::validate(double tol) const {
  for (int q = 0; q + 1 < static_cast<int>(d.size()); ++q) {
    if (d[q].rows() != d[q + 1].cols())
      throw InvalidArgument("InnerProductComplex: differential shape mismatch");
    SpMat dd = d[q + 1] * d[q];
    double bound = tol * std::max(1.0, sparse_max_abs(d[q + 1]) * sparse_max_abs(d[q]));
    if (sparse_max_abs(dd) > bound)
      throw NumericError("InnerProductComplex: d•d != 0 at degree " + std::to_string(q));
  }
  for (size_t q = 0; q < metric.size(); ++q)
    if (metric[q].smallest_eigenvalue() <= 0.0)
      throw InvalidArgument("InnerProductComplex: metric not positive definite");
}

InnerProductComplex make_inner_product_complex(const CellComplex& cc) {
  InnerProductComplex ipc;
  auto mass = hodge_inner_products(cc);
  for (auto& m : mass) ipc.metric.push_back(Metric::diagonal(std::move(m)));

  ipc.d.resize(cc.dimension);
  for (int q = 0; q < cc.dimension; ++q) {
    if (cc.topology == Topology::Sphere) {
      ipc.d[q] = cc.coboundary[q];
      continue;
    }
    // Scale each incidence entry by 1/h of the axis the row cell adds.
    std::vector<Triplet> trips;
    const SpMat& D = cc.coboundary[q];
    for (int k = 0; k < D.outerSize(); ++k)
      for (SpMat::InnerIterator it(D, k); it; ++it) {
        unsigned added = cc.cell_axes[q + 1][it.row()] & ~cc.cell_axes[q][it.col()];
        int axis = __builtin_ctz(added);
        trips.emplace_back(it.row(), it.col(), it.value() / cc.spacing(axis));
      }
    SpMat d(D.rows(), D.cols());
    d.setFromTriplets(trips.begin(), trips.end());
    d.makeCompressed();
    ipc.d[q] = std::move(d);
  }
  return ipc;
}

namespace {

SpMat diag_sparse(const VectorXd& v) {
  SpMat m(v.size(), v.size());
  m.reserve(VectorXi::Constant(v.size(), 1));
  for (Eigen::Index i = 0; i < v.size(); ++i) m.insert(i, i) = v[i];
  m.makeCompressed();
  return m;
}

/// M_{q+1}^{1/2} d_q M_q^{-1/2} for diagonal metrics.
SpMat normalized_diff(const InnerProductComplex& ipc, int q) {
  const SpMat& d = ipc.d[q];
  double clo = 0.0, chi = 0.0;
  if (ipc.metric[q].is_uniform(&clo) && ipc.metric[q + 1].is_uniform(&chi) && clo == chi)
    return d;
  VectorXd shi = ipc.metric[q + 1].diagonal_values().cwiseSqrt();
  VectorXd slo = ipc.metric[q].diagonal_values().cwiseSqrt().cwiseInverse();
  return diag_sparse(shi) * d * diag_sparse(slo);
}

SpMat exact_symmetrize(SpMat s) {
  SpMat st = SpMat(s.transpose());
  SpMat sum = s + st;
  sum *= 0.5;
  sum.prune(0.0);
  return sum;
}

bool all_diagonal(const InnerProductComplex& ipc) {
  for (const auto& m : ipc.metric)
    if (!m.is_diagonal()) return false;
  return true;
}

}  // namespace

SpMat adjoint_differential(const InnerProductComplex& ipc, int q) {
  if (q < 1 || q > ipc.length())
    throw InvalidArgument("adjoint_differential: degree out of range");
  const SpMat& d = ipc.d[q - 1];
  double clo = 0.0, chi = 0.0;
  if (ipc.metric[q - 1].is_uniform(&clo) && ipc.metric[q].is_uniform(&chi) &&
      clo == chi)
    return SpMat(d.transpose());
  if (all_diagonal(ipc)) {
    const VectorXd& mlo = ipc.metric[q - 1].diagonal_values();
    const VectorXd& mhi = ipc.metric[q].diagonal_values();
    std::vector<Triplet> trips;
    for (int k = 0; k < d.outerSize(); ++k)
      for (SpMat::InnerIterator it(d, k); it; ++it)
        trips.emplace_back(it.col(), it.row(),
                           it.value() * mhi[it.row()] / mlo[it.col()]);
    SpMat adj(d.cols(), d.rows());
    adj.setFromTriplets(trips.begin(), trips.end());
    adj.makeCompressed();
    return adj;
  }
  MatrixXd dd = MatrixXd(d);
  MatrixXd adj = ipc.metric[q].apply(dd).transpose();
  MatrixXd out(adj.rows(), adj.cols());
  for (Eigen::Index j = 0; j < adj.cols(); ++j)
    out.col(j) = ipc.metric[q - 1].solve(VectorXd(adj.col(j)));
  return out.sparseView();
}

SpMat laplacian(const InnerProductComplex& ipc, int q) {
  const Eigen::Index n = ipc.dim(q);
  SpMat lap(n, n);
  // Uniform equal masses around degree q: Laplacian equals its symmetric form.
  if (all_diagonal(ipc)) {
    bool uniform = true;
    double c0 = 0.0;
    for (int p = std::max(0, q - 1); p <= std::min(ipc.length(), q + 1); ++p) {
      double c = 0.0;
      if (!ipc.metric[p].is_uniform(&c) || (p > std::max(0, q - 1) && c != c0)) {
        uniform = false;
        break;
      }
      c0 = c;
    }
    if (uniform) return sym_laplacian(ipc, q);
  }
  if (q < ipc.length()) lap = lap + SpMat(adjoint_differential(ipc, q + 1) * ipc.d[q]);
  if (q > 0) lap = lap + SpMat(ipc.d[q - 1] * adjoint_differential(ipc, q));
  return lap;
}

SpMat sym_laplacian(const InnerProductComplex& ipc, int q) {
  if (!all_diagonal(ipc))
    throw InvalidArgument("sym_laplacian: requires diagonal metrics; use the dense path");
  const Eigen::Index n = ipc.dim(q);
  SpMat s(n, n);
  if (q < ipc.length()) {
    SpMat g = normalized_diff(ipc, q);
    s = s + SpMat(SpMat(g.transpose()) * g);
  }
  if (q > 0) {
    SpMat g = normalized_diff(ipc, q - 1);
    s = s + SpMat(g * SpMat(g.transpose()));
  }
  return exact_symmetrize(std::move(s));
}

MatrixXd sym_laplacian_dense(const InnerProductComplex& ipc, int q) {
  const Eigen::Index n = ipc.dim(q);
  MatrixXd s = MatrixXd::Zero(n, n);
  if (q < ipc.length()) {
    MatrixXd dt = MatrixXd(ipc.d[q]).transpose();
    MatrixXd g = ipc.metric[q + 1].sqrt_apply(
        MatrixXd(ipc.metric[q].isqrt_apply(dt).transpose()));
    s += g.transpose() * g;
  }
  if (q > 0) {
    MatrixXd dt = MatrixXd(ipc.d[q - 1]).transpose();
    MatrixXd g = ipc.metric[q].sqrt_apply(
        MatrixXd(ipc.metric[q - 1].isqrt_apply(dt).transpose()));
    s += g * g.transpose();
  }
  return 0.5 * (s + s.transpose());
}

double self_adjointness_defect(const InnerProductComplex& ipc, const SpMat& lap, int q) {
  SpMat ml = ipc.metric[q].is_diagonal()
                 ? SpMat(diag_sparse(ipc.metric[q].diagonal_values()) * lap)
                 : SpMat((ipc.metric[q].matrix() * MatrixXd(lap)).sparseView());
  SpMat defect = ml - SpMat(ml.transpose());
  double scale = std::max(1.0, sparse_max_abs(ml));
  return sparse_max_abs(defect) / scale;
}

}  // namespace wit
