#pragma once

#include "wit/cell_complex.hpp"
#include "wit/complex_ops.hpp"
#include "wit/critical_point.hpp"
#include "wit/derham.hpp"
#include "wit/eigensolve.hpp"
#include "wit/morse.hpp"

namespace wit {

/// Scalar field sampled at every cell barycenter of every degree.
struct FieldSamples {
  std::vector<VectorXd> per_degree;
};

FieldSamples sample_field(const CellComplex& cc, const MorseFunction& mf);
FieldSamples constant_field(const InnerProductComplex& ipc, double c);

/// The deformed complex d^q(t) = W_{q+1}(-t) d^q W_q(t) with diagonal
/// W_q(t) = exp(t f) at degree-q barycenters. Nilpotency is exact by
/// conjugation; `materialized` carries the assembled sparse operators.
struct DeformedComplex {
  const InnerProductComplex* base = nullptr;
  double t = 0.0;
  std::vector<VectorXd> weights;  // e^{t f} per degree
  std::vector<SpMat> materialized;

  const SpMat& diff(int q) const { return materialized[q]; }
  InnerProductComplex as_complex() const;  // deformed differentials, same metrics
};

/// Requires |t * f| <= 300 everywhere (else the weights overflow).
DeformedComplex deform(const InnerProductComplex& ipc, const FieldSamples& f, double t);

/// Composition d^{q+1}(t) d^q(t), computed through the conjugation identity
/// W_{q+2}(-t) (d^{q+1} d^q) W_q(t); exactly zero for nilpotent bases.
SpMat deformed_dd(const DeformedComplex& dc, int q);

SpMat witten_laplacian(const DeformedComplex& dc, int q);
SpMat witten_sym_laplacian(const DeformedComplex& dc, int q);

/// Lowest eigenpairs of the Witten Laplacian at one t (vectors M-orthonormal).
struct DeformedSpectrum {
  double t = 0.0;
  VectorXd eigenvalues;
  MatrixXd vectors;
};
DeformedSpectrum deformed_spectrum(const InnerProductComplex& ipc, const FieldSamples& f,
                                   double t, int q, int count,
                                   const EigenOptions& opts = {});

/// Delta^q(t) = A + t B + t^2 C recovered by polynomial interpolation at
/// t in {0, 1, -1}; the residual at the verification point t = 2 measures the
/// departure of the discrete family from an exact quadratic.
struct QuadraticDecomposition {
  SpMat A, B, C;
  double verification_residual = 0.0;
};
QuadraticDecomposition quadratic_decomposition(const InnerProductComplex& ipc,
                                               const FieldSamples& f, int q,
                                               double verify_tol = 1e-8);

struct TrackOptions {
  double overlap_min = 0.8;
  double tol_group = 1e-8;
  int max_depth = 12;
  double resolution_cap = 0.5;  // require h <= cap / sqrt(t_max); 0 disables
  EigenOptions eig;
};

struct BranchFamily {
  int degree = 0;
  int branch_count = 0;
  std::vector<double> t_grid;        // including refinement points
  std::vector<char> primary;         // 1 for requested grid points
  MatrixXd eigenvalues;              // (#grid x m), column per branch
  std::vector<MatrixXd> vectors;     // per grid point, column per branch
  std::vector<double> step_overlap;  // worst matched overlap per step
  std::vector<char> resolved;        // per branch
  std::vector<int> labels;           // cluster labels, -1 = unresolved
  VectorXd label_slopes;
};

/// Eigenvalue/eigenvector branches of the m lowest eigenvalues over a t-grid,
/// matched by maximal M-overlap assignment with adaptive step bisection.
BranchFamily track_branches(const InnerProductComplex& ipc, const FieldSamples& f,
                            int q, const std::vector<double>& t_grid, int m,
                            const TrackOptions& opts = {}, double mesh_spacing = 0.0);

struct GapReport {
  int degree = 0;
  double t = 0.0;
  double lower = 0.0, upper = 0.0;  // gap interval (a, b)
  int count_below = 0;
  double ratio = 0.0;
  bool no_gap = false;
};

GapReport detect_gap(const InnerProductComplex& ipc, const FieldSamples& f, int q,
                     double t, int m, const EigenOptions& opts = {});
GapReport gap_from_eigenvalues(const VectorXd& evals, int q, double t);

/// Per branch, Richardson-corrected slope of lambda/(2t) from the two largest
/// primary grid points; label k = round(slope) when within 0.25.
void classify_clusters(BranchFamily& bf);

struct VsPackage {
  int degree = 0;
  double t = 0.0;
  VectorXd eigenvalues;   // ascending over the label-0 branches
  MatrixXd vectors;       // matching M-orthonormal columns
  int vs_zero_count = 0;  // harmonic part
  std::vector<int> branch_ids;
};

VsPackage virtually_small_package(const BranchFamily& bf, double at_t);

/// M-mass fraction of each vector outside radius-eps balls at the critical
/// points (localization diagnostic).
VectorXd outside_mass_fraction(const CellComplex& cc, const InnerProductComplex& ipc,
                               int q, const MatrixXd& vectors,
                               const std::vector<CriticalPoint>& points, double eps);

/// Geometric quantities behind the gap estimates: inf |grad f| off the
/// critical balls and sup |trace Hess f| over the mesh (diagnostics only).
struct GapConstants {
  double inf_gradient_off_balls = 0.0;
  double sup_hessian_trace = 0.0;
};
GapConstants gap_constants(const CellComplex& cc, const MorseFunction& mf,
                           const std::vector<CriticalPoint>& points, double eps);

}  // namespace wit
