#pragma once

#include "wit/cell_complex.hpp"
#include "wit/complex_ops.hpp"
#include "wit/critical_point.hpp"
#include "wit/types.hpp"

namespace wit {

/// Physicists' Hermite polynomial H_j by three-term recurrence.
double hermite(int j, double x);

/// Index data of one eigenform of the multivariable oscillator model at a
/// critical point of index k: component dx_I (1-based ascending axes) and
/// Hermite multi-index P.
struct OscSymbol {
  int n = 0, q = 0, k = 0;
  std::vector<int> I;  // ascending, values in 1..n, size q
  std::vector<int> P;  // size n, nonnegative
  int order() const;   // sum P + q + k - 2 #{j in I : j <= k}
};

/// Coefficient of t in the zeroth-order term of the model operator on the
/// dx_I component: -n + 2k - 2q + 4 #{j in I : k+1 <= j <= n}.
int epsilon_coeff(int n, int q, int k, const std::vector<int>& I);

struct SymbolTable {
  std::vector<OscSymbol> symbols;       // all with order <= max_order
  std::vector<long> count_per_order;    // size max_order + 1
};

/// Exhaustive, duplicate-free enumeration of symbols with order <= max_order.
SymbolTable enumerate_symbols(int n, int q, int k, int max_order);

double model_eigenvalue(const OscSymbol& sym, double t);

/// Coefficient of the model eigenform on its dx_I component at x, including
/// the (t/pi)^{n/4} Gaussian normalization (so the ground form has unit L2
/// norm over R^n).
double model_eigenform(const OscSymbol& sym, double t, const VectorXd& x);

/// Independent oracle: spectrum of the model operator via Gauss-Hermite
/// quadrature matrices per axis and Kronecker sums over components.
/// Returns all basis_size^n * C(n,q) eigenvalues, sorted.
VectorXd brute_force_model_spectrum(int n, int q, int k, double t, int basis_size);

/// #A^q(j) for j = 0..max_k given the Morse indices of the critical points.
std::vector<long> cluster_cardinalities(const std::vector<int>& critical_indices,
                                        int n, int q, int max_k);

struct CutoffProfile {
  enum class Kind { SmoothBump, None };
  Kind kind = Kind::SmoothBump;
  double eta = 0.5;

  /// 1 on [0, eta/2], 0 on [eta, inf), smooth monotone in between.
  double operator()(double r) const;
};

/// Normalization beta(t) of the cutoff Gaussian form, adaptive radial
/// quadrature to 1e-10 relative.
double cutoff_normalization(int n, int q, double eta, double t,
                            const CutoffProfile& profile);

/// J^q(t): places the normalized cutoff Gaussian q-form at each index-q
/// critical point in its Morse frame; columns are mesh cochains.
MatrixXd place_on_mesh(const CellComplex& cc, const InnerProductComplex& ipc,
                       const std::vector<CriticalPoint>& critical_q, int q,
                       double t, const CutoffProfile& profile);

/// Lemma-style two-subspace test: true iff the Rayleigh quotient of A (in the
/// M-inner product) is <= a on span(H1) and >= b on its M-orthogonal
/// complement, certifying spect(A) does not meet (a, b).
bool gap_certificate(const MatrixXd& A, const MatrixXd& M, const MatrixXd& H1,
                     double a, double b);

}  // namespace wit
