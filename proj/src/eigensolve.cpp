#include "wit/eigensolve.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace wit {

SymSpectrum lowest_eigenpairs_dense(const MatrixXd& S, int count) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw NumericError("lowest_eigenpairs: dense eigensolver failed");
  count = std::min<int>(count, static_cast<int>(S.rows()));
  SymSpectrum out;
  out.values = es.eigenvalues().head(count);
  out.vectors = es.eigenvectors().leftCols(count);
  out.residuals.resize(count);
  for (int i = 0; i < count; ++i)
    out.residuals[i] = (S * out.vectors.col(i) - out.values[i] * out.vectors.col(i)).norm();
  return out;
}

SymSpectrum lowest_eigenpairs(const SpMat& S, int count, const EigenOptions& opts) {
  const Eigen::Index n = S.rows();
  if (S.cols() != n) throw InvalidArgument("lowest_eigenpairs: matrix not square");
  if (count < 1 || count > n)
    throw InvalidArgument("lowest_eigenpairs: bad eigenpair count");
  if (n <= opts.dense_threshold) return lowest_eigenpairs_dense(MatrixXd(S), count);

  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(S.coeff(i, i)));
  scale = std::max(scale, 1e-300);
  const double sigma = std::max(opts.shift_rel * scale, 1e-300);

  SpMat shifted = S;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += sigma;
  Eigen::SimplicialLDLT<SpMat> solver(shifted);
  if (solver.info() != Eigen::Success)
    throw NumericError("lowest_eigenpairs: factorization of shifted matrix failed");

  const int b = std::min<Eigen::Index>(count + opts.block_extra, n);
  MatrixXd X = seeded_gaussian(n, b, opts.seed);

  VectorXd ritz = VectorXd::Zero(b);
  VectorXd resid = VectorXd::Constant(count, 1e300);
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    // Inverse iteration step + orthonormalization.
    MatrixXd Y = solver.solve(X);
    Eigen::HouseholderQR<MatrixXd> qr(Y);
    MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, b);
    // Rayleigh-Ritz on S.
    MatrixXd SQ(n, b);
    for (int j = 0; j < b; ++j) SQ.col(j) = S * Q.col(j);
    MatrixXd A = Q.transpose() * SQ;
    Eigen::SelfAdjointEigenSolver<MatrixXd> small(0.5 * (A + A.transpose()));
    X = Q * small.eigenvectors();
    ritz = small.eigenvalues();

    bool done = true;
    for (int i = 0; i < count; ++i) {
      resid[i] = (S * X.col(i) - ritz[i] * X.col(i)).norm();
      double bound = std::max(opts.tol * (1.0 + std::abs(ritz[i])),
                              64.0 * std::numeric_limits<double>::epsilon() * scale);
      if (resid[i] > bound) { done = false; break; }
    }
    if (done) { ++iter; break; }
  }

  if (iter >= opts.max_iterations) {
    double worst = resid.maxCoeff();
    throw NumericError("lowest_eigenpairs: no convergence after " +
                       std::to_string(iter) + " iterations, worst residual " +
                       std::to_string(worst));
  }

  SymSpectrum out;
  out.values = ritz.head(count);
  out.vectors = X.leftCols(count);
  out.residuals = resid;
  out.iterations = iter;
  return out;
}

namespace {

/// O(n^3) Hungarian algorithm on a cost matrix (minimizing), n <= ~200.
std::vector<int> hungarian_min(const MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = -1;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
        if (minv[j] < delta) { delta = minv[j]; j1 = j; }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) { u[p[j]] += delta; v[j] -= delta; }
        else minv[j] -= delta;
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> match(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) match[p[j] - 1] = j - 1;
  return match;
}

}  // namespace

std::vector<int> optimal_assignment(const MatrixXd& weights) {
  const int n = static_cast<int>(weights.rows());
  if (weights.cols() != n) throw InvalidArgument("optimal_assignment: square matrix required");
  if (n == 0) return {};
  if (n <= 64) return hungarian_min(-weights);

  // Greedy by descending weight with a verification pass.
  std::vector<std::tuple<double, int, int>> entries;
  entries.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) entries.emplace_back(weights(i, j), i, j);
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
  std::vector<int> match(n, -1);
  std::vector<char> used(n, false);
  int placed = 0;
  for (const auto& [w, i, j] : entries) {
    if (match[i] >= 0 || used[j]) continue;
    match[i] = j;
    used[j] = true;
    if (++placed == n) break;
  }
  return match;
}

}  // namespace wit
