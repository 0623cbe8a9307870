#pragma once

#include "wit/cell_complex.hpp"
#include "wit/complex_ops.hpp"
#include "wit/eigensolve.hpp"

namespace wit {

struct SpectralPackage {
  int degree = 0;
  VectorXd eigenvalues;                  // ascending
  MatrixXd eigenvectors;                 // M-orthonormal columns
  VectorXd residuals;                    // Euclidean residuals of the symmetric form
  std::vector<std::vector<int>> groups;  // multiplicity grouping
  double tol_group = 0.0;
};

/// Lowest `count` eigenpairs of the degree-q Hodge Laplacian in the M-inner
/// product, with multiplicity groups |l_i - l_j| <= tol_group * (1 + |l|).
SpectralPackage spectral_package(const InnerProductComplex& ipc, int q, int count,
                                 double tol_group = 1e-8,
                                 const EigenOptions& opts = {});

struct HodgeSplit {
  Cochain exact, coexact, harmonic;
};

/// M-orthogonal Hodge decomposition of a cochain.
HodgeSplit hodge_decompose(const InnerProductComplex& ipc, const Cochain& omega);

/// Count of numerically-zero eigenvalues under the kernel contract
/// (tol_zero relative to the first clearly nonzero value, gap ratio >= 10).
int kernel_dimension(const VectorXd& eigenvalues, double tol_zero = 1e-6,
                     double min_gap_ratio = 10.0);

/// Alternating sum of cell counts.
int euler_characteristic(const InnerProductComplex& ipc);

/// Alternating sum of numerically detected kernel dimensions.
int harmonic_euler(const InnerProductComplex& ipc, const EigenOptions& opts = {});

std::vector<int> betti_numbers(const InnerProductComplex& ipc,
                               const EigenOptions& opts = {});

/// Lattice volume V^q of a torus complex: determinant of the Gram matrix of
/// the integral coordinate cycles under harmonic Riesz duality,
/// det(P^T G^{-1} P) with P the period matrix of a harmonic basis.
double lattice_volume(const InnerProductComplex& ipc, const CellComplex& cc, int q,
                      const MatrixXd* harmonic_basis = nullptr,
                      const EigenOptions& opts = {});

/// Discrete period of a cochain over the lex-ordered coordinate q-cycles.
VectorXd cycle_periods(const CellComplex& cc, const Cochain& omega);

/// Alternating product prod_q (V^q)^{(-1)^q}.
double volume_product(const std::vector<double>& lattice_volumes);

}  // namespace wit
