#pragma once

#include "wit/cell_complex.hpp"
#include "wit/metric.hpp"
#include "wit/types.hpp"

namespace wit {

struct Cochain {
  int degree = 0;
  VectorXd values;
};

/// Finite cochain complex with a positive-definite inner product per degree.
/// d[q] maps degree-q cochains to degree q+1; metric has length()+1 entries.
struct InnerProductComplex {
  std::vector<SpMat> d;
  std::vector<Metric> metric;

  int length() const { return static_cast<int>(metric.size()) - 1; }
  Eigen::Index dim(int q) const {
    return (q >= 0 && q < static_cast<int>(metric.size())) ? metric[q].dim() : 0;
  }
  MatrixXd apply_metric(int q, const MatrixXd& x) const { return metric[q].apply(x); }
  const SpMat& diff(int q) const;
  void validate(double nilpotency_tol = 1e-12) const;
};

/// Real differentials from the integer coboundary plus the diagonal masses.
/// Torus grids use barycenter-sampled coefficients, so each incidence entry is
/// scaled by 1/h along the axis the cell gains; sphere cochains are integrated
/// values and keep integer entries.
InnerProductComplex make_inner_product_complex(const CellComplex& cc);

/// delta^q = M_{q-1}^{-1} d_{q-1}^T M_q, the formal adjoint of d^{q-1}.
SpMat adjoint_differential(const InnerProductComplex& ipc, int q);

/// Hodge Laplacian delta^{q+1} d^q + d^{q-1} delta^q (M-self-adjoint).
SpMat laplacian(const InnerProductComplex& ipc, int q);

/// Euclidean-symmetric form M^{1/2} Laplacian M^{-1/2}; exactly symmetric.
SpMat sym_laplacian(const InnerProductComplex& ipc, int q);

/// Same spectrum path for small complexes with dense metrics.
MatrixXd sym_laplacian_dense(const InnerProductComplex& ipc, int q);

/// M-self-adjointness defect |M Lap - (M Lap)^T|_max relative to scale.
double self_adjointness_defect(const InnerProductComplex& ipc, const SpMat& lap, int q);

}  // namespace wit
