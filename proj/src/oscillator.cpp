#include "wit/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace wit {

double hermite(int j, double x) {
  if (j < 0) throw InvalidArgument("hermite: negative degree");
  double hm1 = 0.0, h = 1.0;
  for (int i = 0; i < j; ++i) {
    double next = 2.0 * x * h - 2.0 * i * hm1;
    hm1 = h;
    h = next;
  }
  return h;
}

int OscSymbol::order() const {
  int s = std::accumulate(P.begin(), P.end(), 0);
  int nk = 0;
  for (int j : I)
    if (j <= k) ++nk;
  return s + q + k - 2 * nk;
}

int epsilon_coeff(int n, int q, int k, const std::vector<int>& I) {
  if (static_cast<int>(I.size()) != q)
    throw InvalidArgument("epsilon_coeff: |I| must equal q");
  int above = 0;
  for (int j : I) {
    if (j < 1 || j > n) throw InvalidArgument("epsilon_coeff: I entries must be in 1..n");
    if (j >= k + 1) ++above;
  }
  return -n + 2 * k - 2 * q + 4 * above;
}

namespace {

void subsets_rec(int n, int q, int start, std::vector<int>& cur,
                 std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == q) {
    out.push_back(cur);
    return;
  }
  for (int j = start; j <= n; ++j) {
    cur.push_back(j);
    subsets_rec(n, q, j + 1, cur, out);
    cur.pop_back();
  }
}

std::vector<std::vector<int>> index_sets(int n, int q) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  subsets_rec(n, q, 1, cur, out);
  return out;
}

void multi_indices_rec(int n, int budget, std::vector<int>& cur,
                       const std::function<void(const std::vector<int>&)>& emit) {
  if (static_cast<int>(cur.size()) == n) {
    emit(cur);
    return;
  }
  for (int p = 0; p <= budget; ++p) {
    cur.push_back(p);
    multi_indices_rec(n, budget - p, cur, emit);
    cur.pop_back();
  }
}

}  // namespace

SymbolTable enumerate_symbols(int n, int q, int k, int max_order) {
  if (max_order < 0) throw InvalidArgument("enumerate_symbols: max_order < 0");
  SymbolTable table;
  table.count_per_order.assign(max_order + 1, 0);
  for (const auto& I : index_sets(n, q)) {
    OscSymbol base{n, q, k, I, std::vector<int>(n, 0)};
    int o0 = base.order();  // P = 0 gives the minimal order for this I
    if (o0 > max_order) continue;
    int budget = max_order - o0;
    std::vector<int> cur;
    multi_indices_rec(n, budget, cur, [&](const std::vector<int>& P) {
      OscSymbol sym{n, q, k, I, P};
      int o = sym.order();
      if (o <= max_order) {
        table.count_per_order[o] += 1;
        table.symbols.push_back(std::move(sym));
      }
    });
  }
  return table;
}

double model_eigenvalue(const OscSymbol& sym, double t) {
  if (!(t > 0.0)) throw InvalidArgument("model_eigenvalue: t must be > 0");
  return 2.0 * t * sym.order();
}

double model_eigenform(const OscSymbol& sym, double t, const VectorXd& x) {
  if (!(t > 0.0)) throw InvalidArgument("model_eigenform: t must be > 0");
  if (x.size() != sym.n) throw InvalidArgument("model_eigenform: dimension mismatch");
  const double sq = std::sqrt(t);
  double value = std::pow(t / M_PI, sym.n / 4.0);
  for (int i = 0; i < sym.n; ++i) value *= hermite(sym.P[i], sq * x[i]);
  return value * std::exp(-0.5 * t * x.squaredNorm());
}

namespace {

/// Gauss-Hermite nodes/weights for weight e^{-x^2} via Golub-Welsch.
void gauss_hermite(int m, VectorXd& nodes, VectorXd& weights) {
  VectorXd diag = VectorXd::Zero(m);
  VectorXd sub(m - 1);
  for (int i = 1; i < m; ++i) sub[i - 1] = std::sqrt(i / 2.0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es;
  es.computeFromTridiagonal(diag, sub);
  nodes = es.eigenvalues();
  weights.resize(m);
  const double mu0 = std::sqrt(M_PI);
  for (int i = 0; i < m; ++i) {
    double v = es.eigenvectors()(0, i);
    weights[i] = mu0 * v * v;
  }
}

/// Matrix of t*(-d^2/dxi^2 + xi^2) in the first `b` normalized Hermite
/// functions, assembled by quadrature (exact for this polynomial basis).
MatrixXd oscillator_1d_matrix(int b, double t) {
  const int m = b + 6;
  VectorXd xi, w;
  gauss_hermite(m, xi, w);
  // psi_p(x) = H_p(x) / sqrt(2^p p! sqrt(pi)); tabulate psi and psi' values
  // with the Gaussian weight handled by the quadrature.
  MatrixXd psi(b, m), dpsi(b, m);
  for (int i = 0; i < m; ++i) {
    double x = xi[i];
    double norm = std::pow(M_PI, -0.25);
    double hm1 = 0.0, h = 1.0;
    for (int p = 0; p < b; ++p) {
      double c = norm / std::sqrt(std::pow(2.0, p) * std::tgamma(p + 1.0));
      psi(p, i) = c * h;
      // (H_p e^{-x^2/2})' = (H_p' - x H_p) e^{-x^2/2}, H_p' = 2p H_{p-1}
      dpsi(p, i) = c * (2.0 * p * hm1 - x * h);
      double next = 2.0 * x * h - 2.0 * p * hm1;
      hm1 = h;
      h = next;
    }
  }
  MatrixXd A(b, b);
  for (int a = 0; a < b; ++a)
    for (int c = a; c < b; ++c) {
      double kin = 0.0, pot = 0.0;
      for (int i = 0; i < m; ++i) {
        kin += w[i] * dpsi(a, i) * dpsi(c, i);
        pot += w[i] * xi[i] * xi[i] * psi(a, i) * psi(c, i);
      }
      A(a, c) = A(c, a) = t * (kin + pot);
    }
  return A;
}

}  // namespace

VectorXd brute_force_model_spectrum(int n, int q, int k, double t, int basis_size) {
  if (basis_size < 4)
    throw InvalidArgument("brute_force_model_spectrum: basis too small");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(oscillator_1d_matrix(basis_size, t));
  const VectorXd base = es.eigenvalues();

  std::vector<double> all;
  for (const auto& I : index_sets(n, q)) {
    const double shift = t * epsilon_coeff(n, q, k, I);
    std::vector<double> sums = {shift};
    for (int axis = 0; axis < n; ++axis) {
      std::vector<double> next;
      next.reserve(sums.size() * basis_size);
      for (double s : sums)
        for (int p = 0; p < basis_size; ++p) next.push_back(s + base[p]);
      sums = std::move(next);
    }
    all.insert(all.end(), sums.begin(), sums.end());
  }
  std::sort(all.begin(), all.end());
  return Eigen::Map<VectorXd>(all.data(), static_cast<Eigen::Index>(all.size()));
}

std::vector<long> cluster_cardinalities(const std::vector<int>& critical_indices,
                                        int n, int q, int max_k) {
  std::vector<long> counts(max_k + 1, 0);
  for (int idx : critical_indices) {
    auto table = enumerate_symbols(n, q, idx, max_k);
    for (int j = 0; j <= max_k; ++j) counts[j] += table.count_per_order[j];
  }
  return counts;
}

double CutoffProfile::operator()(double r) const {
  if (kind == Kind::None) return 1.0;
  if (r <= 0.5 * eta) return 1.0;
  if (r >= eta) return 0.0;
  const double s = (r - 0.5 * eta) / (0.5 * eta);  // in (0,1)
  const double b1 = std::exp(-1.0 / (1.0 - s));
  const double b0 = std::exp(-1.0 / s);
  return b1 / (b1 + b0);
}

namespace {

double adaptive_simpson(const std::function<double(double)>& g, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth, double* achieved) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = g(lm), frm = g(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double err = (left + right - whole) / 15.0;
  if (depth <= 0) {
    *achieved = std::max(*achieved, std::abs(err));
    return left + right + err;
  }
  if (std::abs(err) <= tol) return left + right + err;
  double l = adaptive_simpson(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, achieved);
  double r = adaptive_simpson(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, achieved);
  return l + r;
}

double integrate_adaptive(const std::function<double(double)>& g, double a, double b,
                          double rel_tol) {
  const double fa = g(a), fb = g(b), fm = g(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double scale = std::max(std::abs(whole), 1e-30);
  double achieved = 0.0;
  double out = adaptive_simpson(g, a, b, fa, fm, fb, whole, rel_tol * scale, 48, &achieved);
  if (achieved > 10.0 * rel_tol * std::max(std::abs(out), 1e-30))
    throw NumericError("cutoff_normalization: quadrature did not reach tolerance, achieved " +
                       std::to_string(achieved));
  return out;
}

double sphere_surface(int n) {
  switch (n) {
    case 1: return 2.0;
    case 2: return 2.0 * M_PI;
    case 3: return 4.0 * M_PI;
    default: throw InvalidArgument("sphere_surface: dimension must be 1..3");
  }
}

}  // namespace

double cutoff_normalization(int n, int /*q*/, double eta, double t,
                            const CutoffProfile& profile) {
  if (!(t > 0.0) || !(eta > 0.0))
    throw InvalidArgument("cutoff_normalization: t and eta must be > 0");
  if (profile.kind == CutoffProfile::Kind::None) return 1.0;  // full Gaussian
  auto g = [&](double r) {
    double gm = profile(r);
    return gm * gm * std::exp(-t * r * r) * std::pow(r, n - 1);
  };
  const double integral = integrate_adaptive(g, 0.0, eta, 1e-10);
  return std::pow(t / M_PI, n / 4.0) * std::sqrt(sphere_surface(n) * integral);
}

MatrixXd place_on_mesh(const CellComplex& cc, const InnerProductComplex& ipc,
                       const std::vector<CriticalPoint>& critical_q, int q,
                       double t, const CutoffProfile& profile) {
  if (cc.topology != Topology::Torus)
    throw InvalidArgument("place_on_mesh: flat torus models required");
  const int n = cc.dimension;
  const double eta = profile.eta;
  for (size_t a = 0; a < critical_q.size(); ++a)
    for (size_t b = a + 1; b < critical_q.size(); ++b)
      if (cc.torus_distance(critical_q[a].location, critical_q[b].location) <= 2.0 * eta)
        throw InvalidArgument("place_on_mesh: cutoff balls of critical points " +
                              std::to_string(a) + " and " + std::to_string(b) + " overlap");
  if (cc.max_spacing() > 0.5 / std::sqrt(std::max(t, 1.0)))
    throw InvalidArgument("place_on_mesh: grid spacing exceeds the resolution cap 0.5/sqrt(t)");

  const double beta = cutoff_normalization(n, q, eta, t, profile);
  const double amp = std::pow(t / M_PI, n / 4.0) / beta;
  const auto subs = cc.axis_subsets(q);

  MatrixXd J = MatrixXd::Zero(ipc.dim(q), static_cast<Eigen::Index>(critical_q.size()));
  for (size_t c = 0; c < critical_q.size(); ++c) {
    const auto& cp = critical_q[c];
    if (cp.index != q)
      throw InvalidArgument("place_on_mesh: critical point index mismatch");
    const MatrixXd frame_unstable = cp.frame.leftCols(q);
    for (int cell = 0; cell < cc.cells(q); ++cell) {
      VectorXd delta = cc.torus_delta(cc.barycenters[q].row(cell).transpose(),
                                      cp.location);
      const double r = delta.norm();
      if (r >= eta) continue;
      // component of dxi_1 ^ ... ^ dxi_q on this cell's axis set
      unsigned mask = cc.cell_axes[q][cell];
      MatrixXd sub(q, q);
      int row = 0;
      for (int a = 0; a < n; ++a)
        if ((mask >> a) & 1u) sub.row(row++) = frame_unstable.row(a);
      const double comp = q == 0 ? 1.0 : sub.determinant();
      if (comp == 0.0) continue;
      J(cell, static_cast<Eigen::Index>(c)) =
          amp * profile(r) * std::exp(-0.5 * t * r * r) * comp;
    }
  }
  return J;
}

bool gap_certificate(const MatrixXd& A, const MatrixXd& M, const MatrixXd& H1,
                     double a, double b) {
  if (!(0.0 < a && a < b)) throw InvalidArgument("gap_certificate: need 0 < a < b");
  const Eigen::Index n = A.rows();
  if (H1.rows() != n || H1.cols() < 1 || H1.cols() >= n)
    throw InvalidArgument("gap_certificate: bad H1 basis");

  auto rayleigh_extremes = [&](const MatrixXd& B) {
    MatrixXd num = B.transpose() * A * B;
    MatrixXd den = B.transpose() * M * B;
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(
        0.5 * (num + num.transpose()), 0.5 * (den + den.transpose()));
    return std::make_pair(es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff());
  };

  auto [lo1, hi1] = rayleigh_extremes(H1);
  if (hi1 > a) return false;

  // M-orthogonal complement of span(H1).
  MatrixXd G = H1.transpose() * M * H1;
  MatrixXd P = MatrixXd::Identity(n, n) - H1 * G.ldlt().solve(H1.transpose() * M);
  Eigen::JacobiSVD<MatrixXd> svd(P, Eigen::ComputeThinU);
  const double cut = 0.5;
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > cut) ++rank;
  MatrixXd H2 = svd.matrixU().leftCols(rank);
  auto [lo2, hi2] = rayleigh_extremes(H2);
  return lo2 >= b;
}

}  // namespace wit
