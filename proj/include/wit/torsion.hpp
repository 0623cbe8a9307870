#pragma once

#include "wit/complex_ops.hpp"
#include "wit/morse.hpp"
#include "wit/oscillator.hpp"
#include "wit/witten.hpp"

namespace wit {

/// Product of the nonzero eigenvalues of the degree-q complex Laplacian
/// (kernel split under the usual threshold contract). Desk-scale (dense).
double detprime_laplacian(const InnerProductComplex& ipc, int q,
                          double tol_zero = 1e-6);

/// T(C) = prod_q (det' Delta^q)^{(-1)^{q+1} q/2}.
double torsion(const InnerProductComplex& ipc, double tol_zero = 1e-6);

/// Vol(phi) = det(phi^# phi)^{1/2} between inner-product spaces; 0 when phi
/// is not injective.
double vol_map(const MatrixXd& phi, const Metric& source, const Metric& target);

struct ChainMap {
  const InnerProductComplex* source = nullptr;
  const InnerProductComplex* target = nullptr;
  std::vector<MatrixXd> maps;  // per degree 0..n

  void validate(double tol = 1e-10) const;
};

/// prod_q vol(phi^q)^{(-1)^q}; refuses zero volumes.
double vol_alternating(const ChainMap& phi);

/// Volume of the induced map on cohomology, realized on harmonic
/// representatives with the induced inner products.
double vol_cohomology(const ChainMap& phi);

struct Identity63Result {
  double lhs = 0.0;  // T(C2) / T(C1)
  double rhs = 0.0;  // Vol(H(phi)) / Vol(phi)
  double relative_error = 0.0;
};
Identity63Result check_identity_63(const ChainMap& phi);

/// A seeded random pair (C1, C2 = phi . C1 . phi^{-1}) with random SPD inner
/// products and a random compatible isomorphism, for the identity corpus.
struct RandomComplexCase {
  InnerProductComplex c1, c2;
  std::vector<MatrixXd> maps;
  ChainMap chain_map() const { return {&c1, &c2, maps}; }
};
RandomComplexCase random_complex_case(std::uint64_t seed, int max_length = 4,
                                      int max_dim = 5);

/// Torsion of an integer complex with orthonormal bases computed purely by
/// integer lattice algebra: prod_q [covol(img_Z d^q) covol(ker_Z d^q)]^{(-1)^q}
/// via column Hermite normal forms.
double integer_torsion_reference(const std::vector<Eigen::MatrixXi>& d);

/// Comparison maps between the virtually small package and the geometric
/// complex at one t: J (cutoff Gaussians), I = Q J in branch coordinates,
/// the polar isometry R, and L = S(t) Int(t).
struct ComparisonBundle {
  int degree = 0;
  double t = 0.0;
  MatrixXd J;        // mesh cochains, column per index-q critical point
  MatrixXd I_tilde;  // branch coordinates of Q J
  MatrixXd R;        // c x c, columns orthonormal
  MatrixXd L;        // c x c
  MatrixXd LR;       // L * R, compare against identity
  double min_singular_value = 0.0;
  double j_gram_defect = 0.0;  // max |J^T M J - Id|
};

ComparisonBundle build_comparison(const CellComplex& cc, const InnerProductComplex& ipc,
                                  const MorseData& md, const MorseFunction& mf,
                                  const VsPackage& vs, const CutoffProfile& profile,
                                  const FlowControls& controls = {});

/// a^q(t) = Vol(Int_vs^q(t)) on the tracked branch basis, over the grid of a
/// classified branch family. Zeros are recorded, not errors.
struct AFunction {
  int degree = 0;
  std::vector<double> t;
  std::vector<double> value;
};
AFunction a_function(const CellComplex& cc, const InnerProductComplex& ipc,
                     const MorseData& md, const MorseFunction& mf,
                     const BranchFamily& bf, const FlowControls& controls = {});

/// Vol(Int_vs) at a single package.
double a_value(const CellComplex& cc, const InnerProductComplex& ipc,
               const MorseData& md, const MorseFunction& mf, const VsPackage& vs,
               const FlowControls& controls = {});

/// 1/2 sum_q (-1)^{q+1} q sum_{vs,+} ln lambda(0) + ln a(0) - sum (-1)^i ln V^i.
double theorem62_rhs(const std::vector<VsPackage>& vs_at_zero, double a_zero,
                     const std::vector<double>& lattice_volumes);

}  // namespace wit
