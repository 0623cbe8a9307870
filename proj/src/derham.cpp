#include "wit/derham.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>

namespace wit {

namespace {

bool all_diagonal(const InnerProductComplex& ipc) {
  for (const auto& m : ipc.metric)
    if (!m.is_diagonal()) return false;
  return true;
}

}  // namespace

SpectralPackage spectral_package(const InnerProductComplex& ipc, int q, int count,
                                 double tol_group, const EigenOptions& opts) {
  if (q < 0 || q > ipc.length())
    throw InvalidArgument("spectral_package: degree out of range");
  const Eigen::Index n = ipc.dim(q);
  if (count < 1 || count > n)
    throw InvalidArgument("spectral_package: count must be in 1..dim");

  SymSpectrum spec;
  if (all_diagonal(ipc)) {
    spec = lowest_eigenpairs(sym_laplacian(ipc, q), count, opts);
  } else {
    spec = lowest_eigenpairs_dense(sym_laplacian_dense(ipc, q), count);
  }

  SpectralPackage pkg;
  pkg.degree = q;
  pkg.eigenvalues = spec.values;
  pkg.eigenvectors = ipc.metric[q].isqrt_apply(spec.vectors);
  pkg.residuals = spec.residuals;
  pkg.tol_group = tol_group;
  for (int i = 0; i < count; ++i) {
    if (pkg.groups.empty() ||
        std::abs(pkg.eigenvalues[i] - pkg.eigenvalues[pkg.groups.back().back()]) >
            tol_group * (1.0 + std::abs(pkg.eigenvalues[i])))
      pkg.groups.push_back({});
    pkg.groups.back().push_back(i);
  }
  return pkg;
}

namespace {

VectorXd cg_least_squares(const SpMat& A, const VectorXd& rhs) {
  // Minimize |A x - rhs|_2 via the (possibly singular, consistent) normal
  // equations; CG returns the min-norm-ish solution which suffices for A x.
  SpMat At = SpMat(A.transpose());
  SpMat AtA = SpMat(At * A);
  VectorXd Atb = At * rhs;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-14);
  cg.setMaxIterations(8 * A.cols() + 200);
  cg.compute(AtA);
  return cg.solve(Atb);
}

SpMat normalized_diff_of(const InnerProductComplex& ipc, int q) {
  // M_{q+1}^{1/2} d_q M_q^{-1/2} as a sparse matrix (diagonal metrics).
  const SpMat& d = ipc.d[q];
  VectorXd shi = ipc.metric[q + 1].diagonal_values().cwiseSqrt();
  VectorXd slo = ipc.metric[q].diagonal_values().cwiseSqrt().cwiseInverse();
  std::vector<Triplet> trips;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SpMat::InnerIterator it(d, k); it; ++it)
      trips.emplace_back(it.row(), it.col(), shi[it.row()] * it.value() * slo[it.col()]);
  SpMat g(d.rows(), d.cols());
  g.setFromTriplets(trips.begin(), trips.end());
  return g;
}

}  // namespace

HodgeSplit hodge_decompose(const InnerProductComplex& ipc, const Cochain& omega) {
  const int q = omega.degree;
  if (q < 0 || q > ipc.length())
    throw InvalidArgument("hodge_decompose: degree out of range");
  if (omega.values.size() != ipc.dim(q))
    throw InvalidArgument("hodge_decompose: cochain length mismatch");
  if (!all_diagonal(ipc))
    throw InvalidArgument("hodge_decompose: diagonal metrics required");

  const VectorXd u = ipc.metric[q].sqrt_apply(omega.values);
  VectorXd exact_sym = VectorXd::Zero(u.size());
  VectorXd coexact_sym = VectorXd::Zero(u.size());
  if (q > 0) {
    SpMat G = normalized_diff_of(ipc, q - 1);
    exact_sym = G * cg_least_squares(G, u);
  }
  if (q < ipc.length()) {
    SpMat Gt = SpMat(normalized_diff_of(ipc, q).transpose());
    coexact_sym = Gt * cg_least_squares(Gt, u);
  }
  HodgeSplit split;
  split.exact = {q, ipc.metric[q].isqrt_apply(exact_sym)};
  split.coexact = {q, ipc.metric[q].isqrt_apply(coexact_sym)};
  split.harmonic = {q, ipc.metric[q].isqrt_apply(VectorXd(u - exact_sym - coexact_sym))};
  return split;
}

int kernel_dimension(const VectorXd& eigenvalues, double tol_zero,
                     double min_gap_ratio) {
  const int m = static_cast<int>(eigenvalues.size());
  if (m == 0) return 0;
  VectorXd ev = eigenvalues.cwiseMax(0.0);
  if (ev[m - 1] <= 0.0) return m;  // identically zero operator

  // Largest self-consistent split: k zeros with every zero < tol_zero * l_k.
  int kernel = 0;
  for (int k = m - 1; k >= 1; --k) {
    int below = 0;
    for (int i = 0; i < m; ++i)
      if (ev[i] < tol_zero * ev[k]) ++below;
    if (below == k) { kernel = k; break; }
  }
  if (kernel > 0) {
    double last_zero = std::max(ev[kernel - 1], 1e-300);
    double ratio = ev[kernel] / last_zero;
    if (ratio < min_gap_ratio)
      throw NumericError(
          "kernel_dimension: ambiguous kernel threshold (gap ratio " +
          std::to_string(ratio) + " < " + std::to_string(min_gap_ratio) +
          "); refine the mesh");
  }
  return kernel;
}

int euler_characteristic(const InnerProductComplex& ipc) {
  int chi = 0;
  for (int q = 0; q <= ipc.length(); ++q)
    chi += (q % 2 == 0 ? 1 : -1) * static_cast<int>(ipc.dim(q));
  return chi;
}

std::vector<int> betti_numbers(const InnerProductComplex& ipc,
                               const EigenOptions& opts) {
  std::vector<int> betti(ipc.length() + 1, 0);
  for (int q = 0; q <= ipc.length(); ++q) {
    const int count = static_cast<int>(std::min<Eigen::Index>(ipc.dim(q), 12));
    auto pkg = spectral_package(ipc, q, count, 1e-8, opts);
    int k = kernel_dimension(pkg.eigenvalues);
    if (k == count && count < ipc.dim(q))
      throw NumericError("betti_numbers: kernel not separated within computed window");
    betti[q] = k;
  }
  return betti;
}

int harmonic_euler(const InnerProductComplex& ipc, const EigenOptions& opts) {
  auto betti = betti_numbers(ipc, opts);
  int chi = 0;
  for (int q = 0; q < static_cast<int>(betti.size()); ++q)
    chi += (q % 2 == 0 ? 1 : -1) * betti[q];
  return chi;
}

VectorXd cycle_periods(const CellComplex& cc, const Cochain& omega) {
  if (cc.topology != Topology::Torus)
    throw InvalidArgument("cycle_periods: torus topology required");
  const int q = omega.degree;
  auto subs = cc.axis_subsets(q);
  VectorXd periods(subs.size());
  double tangential = 1.0;
  for (size_t s = 0; s < subs.size(); ++s) {
    unsigned mask = subs[s];
    tangential = 1.0;
    for (int a = 0; a < cc.dimension; ++a)
      if ((mask >> a) & 1u) tangential *= cc.spacing(a);
    // Sum over cells of the coordinate subtorus through the origin.
    double total = 0.0;
    std::vector<int> coords(cc.dimension, 0);
    std::vector<int> axes;
    for (int a = 0; a < cc.dimension; ++a)
      if ((mask >> a) & 1u) axes.push_back(a);
    const int per_axis = cc.resolution;
    int ncells = 1;
    for (size_t i = 0; i < axes.size(); ++i) ncells *= per_axis;
    for (int lin = 0; lin < ncells; ++lin) {
      int rem = lin;
      std::fill(coords.begin(), coords.end(), 0);
      for (size_t i = 0; i < axes.size(); ++i) {
        coords[axes[i]] = rem % per_axis;
        rem /= per_axis;
      }
      total += omega.values[cc.torus_cell_id(q, mask, coords)];
    }
    periods[s] = total * tangential;
  }
  return periods;
}

double lattice_volume(const InnerProductComplex& ipc, const CellComplex& cc, int q,
                      const MatrixXd* harmonic_basis, const EigenOptions& opts) {
  if (cc.topology != Topology::Torus)
    throw InvalidArgument("lattice_volume: torus topology with known cycles required");
  MatrixXd basis;
  if (harmonic_basis) {
    basis = *harmonic_basis;
  } else {
    const int expected = static_cast<int>(cc.axis_subsets(q).size());
    const int count = static_cast<int>(
        std::min<Eigen::Index>(ipc.dim(q), expected + 5));
    auto pkg = spectral_package(ipc, q, count, 1e-8, opts);
    int k = kernel_dimension(pkg.eigenvalues);
    if (k != expected)
      throw NumericError("lattice_volume: harmonic dimension " + std::to_string(k) +
                         " does not match cycle count " + std::to_string(expected));
    basis = pkg.eigenvectors.leftCols(k);
  }
  const int b = static_cast<int>(basis.cols());
  MatrixXd G(b, b), P(b, b);
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < b; ++j)
      G(i, j) = ipc.metric[q].inner(basis.col(i), basis.col(j));
  for (int i = 0; i < b; ++i)
    P.row(i) = cycle_periods(cc, {q, basis.col(i)});
  if (std::abs(P.determinant()) < 1e-12 * std::max(1.0, P.cwiseAbs().maxCoeff()))
    throw NumericError("lattice_volume: singular period matrix; harmonic basis "
                       "failed to pair with the cycles");
  return (P.transpose() * G.ldlt().solve(P)).determinant();
}

double volume_product(const std::vector<double>& vols) {
  double out = 1.0;
  for (size_t q = 0; q < vols.size(); ++q)
    out *= (q % 2 == 0) ? vols[q] : 1.0 / vols[q];
  return out;
}

}  // namespace wit
