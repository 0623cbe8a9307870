#pragma once

#include "wit/types.hpp"

namespace wit {

/// Per-degree inner product on cochains. Mesh complexes use diagonal
/// (lumped) masses; small algebraic complexes may carry a dense SPD matrix.
class Metric {
 public:
  Metric() = default;

  static Metric identity(Eigen::Index n);
  static Metric diagonal(VectorXd masses);       // entries must be > 0
  static Metric dense(MatrixXd spd);             // symmetrized, must be PD

  Eigen::Index dim() const { return dim_; }
  bool is_diagonal() const { return diagonal_; }
  bool is_identity() const;
  /// True if the metric is c * Id; returns c through `c`.
  bool is_uniform(double* c = nullptr) const;

  const VectorXd& diagonal_values() const;
  MatrixXd matrix() const;                        // dense M
  double smallest_eigenvalue() const { return min_eig_; }

  VectorXd apply(const VectorXd& x) const;        // M x
  MatrixXd apply(const MatrixXd& x) const;
  VectorXd solve(const VectorXd& x) const;        // M^{-1} x
  VectorXd sqrt_apply(const VectorXd& x) const;   // M^{1/2} x
  MatrixXd sqrt_apply(const MatrixXd& x) const;
  VectorXd isqrt_apply(const VectorXd& x) const;  // M^{-1/2} x
  MatrixXd isqrt_apply(const MatrixXd& x) const;

  double inner(const VectorXd& a, const VectorXd& b) const;
  double norm(const VectorXd& a) const;
  double log_det() const;

 private:
  bool diagonal_ = true;
  Eigen::Index dim_ = 0;
  VectorXd diag_;        // diagonal case
  MatrixXd mat_;         // dense case
  MatrixXd sqrt_, isqrt_;
  double min_eig_ = 0.0;
  double log_det_ = 0.0;
};

}  // namespace wit
