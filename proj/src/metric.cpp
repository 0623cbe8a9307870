#include "wit/metric.hpp"

#include <cmath>

namespace wit {

Metric Metric::identity(Eigen::Index n) {
  return diagonal(VectorXd::Ones(n));
}

Metric Metric::diagonal(VectorXd masses) {
  Metric m;
  m.diagonal_ = true;
  m.dim_ = masses.size();
  if (m.dim_ > 0 && masses.minCoeff() <= 0.0)
    throw InvalidArgument("Metric::diagonal: non-positive mass entry");
  m.min_eig_ = m.dim_ > 0 ? masses.minCoeff() : 0.0;
  m.log_det_ = masses.array().log().sum();
  m.diag_ = std::move(masses);
  return m;
}

Metric Metric::dense(MatrixXd spd) {
  Metric m;
  m.diagonal_ = false;
  m.dim_ = spd.rows();
  m.mat_ = 0.5 * (spd + spd.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m.mat_);
  if (es.info() != Eigen::Success)
    throw NumericError("Metric::dense: eigendecomposition failed");
  m.min_eig_ = es.eigenvalues().minCoeff();
  if (m.min_eig_ <= 0.0)
    throw InvalidArgument("Metric::dense: matrix is not positive definite");
  VectorXd s = es.eigenvalues().array().sqrt();
  m.sqrt_ = es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
  m.isqrt_ = es.eigenvectors() * s.cwiseInverse().asDiagonal() *
             es.eigenvectors().transpose();
  m.log_det_ = es.eigenvalues().array().log().sum();
  return m;
}

bool Metric::is_identity() const {
  if (!diagonal_) return false;
  return dim_ == 0 || ((diag_.array() - 1.0).abs().maxCoeff() == 0.0);
}

bool Metric::is_uniform(double* c) const {
  if (!diagonal_ || dim_ == 0) return false;
  double v = diag_[0];
  if ((diag_.array() - v).abs().maxCoeff() != 0.0) return false;
  if (c) *c = v;
  return true;
}

const VectorXd& Metric::diagonal_values() const {
  if (!diagonal_) throw InvalidArgument("Metric: not diagonal");
  return diag_;
}

MatrixXd Metric::matrix() const {
  if (diagonal_) return MatrixXd(diag_.asDiagonal());
  return mat_;
}

VectorXd Metric::apply(const VectorXd& x) const {
  return diagonal_ ? VectorXd(diag_.cwiseProduct(x)) : VectorXd(mat_ * x);
}

MatrixXd Metric::apply(const MatrixXd& x) const {
  return diagonal_ ? MatrixXd(diag_.asDiagonal() * x) : MatrixXd(mat_ * x);
}

VectorXd Metric::solve(const VectorXd& x) const {
  if (diagonal_) return x.cwiseQuotient(diag_);
  return isqrt_ * (isqrt_ * x);
}

VectorXd Metric::sqrt_apply(const VectorXd& x) const {
  if (diagonal_) return diag_.cwiseSqrt().cwiseProduct(x);
  return sqrt_ * x;
}

MatrixXd Metric::sqrt_apply(const MatrixXd& x) const {
  if (diagonal_) return diag_.cwiseSqrt().asDiagonal() * x;
  return sqrt_ * x;
}

VectorXd Metric::isqrt_apply(const VectorXd& x) const {
  if (diagonal_) return x.cwiseQuotient(diag_.cwiseSqrt());
  return isqrt_ * x;
}

MatrixXd Metric::isqrt_apply(const MatrixXd& x) const {
  if (diagonal_) return diag_.cwiseSqrt().cwiseInverse().asDiagonal() * x;
  return isqrt_ * x;
}

double Metric::inner(const VectorXd& a, const VectorXd& b) const {
  return a.dot(apply(b));
}

double Metric::norm(const VectorXd& a) const {
  return std::sqrt(std::max(0.0, inner(a, a)));
}

double Metric::log_det() const { return log_det_; }

}  // namespace wit
