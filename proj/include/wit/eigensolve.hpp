#pragma once

#include "wit/types.hpp"

namespace wit {

struct EigenOptions {
  int dense_threshold = 1100;   // densify below this dimension
  std::uint64_t seed = 0x5eed0fULL;
  double tol = 1e-10;           // residual |S x - lambda x| <= tol * (1 + |lambda|)
  int max_iterations = 300;
  int block_extra = 14;         // extra subspace vectors beyond the requested count
  double shift_rel = 1e-8;      // shift = shift_rel * max |diag|
};

struct SymSpectrum {
  VectorXd values;     // ascending
  MatrixXd vectors;    // orthonormal columns
  VectorXd residuals;  // |S v - lambda v| per pair
  int iterations = 0;
};

/// Lowest `count` eigenpairs of a sparse symmetric positive-semidefinite
/// matrix. Dense solve below `dense_threshold`, otherwise deterministic
/// shift-invert subspace iteration with Rayleigh-Ritz extraction.
SymSpectrum lowest_eigenpairs(const SpMat& S, int count,
                              const EigenOptions& opts = {});

SymSpectrum lowest_eigenpairs_dense(const MatrixXd& S, int count);

/// Best assignment (maximum total weight) of rows to columns of a square
/// weight matrix; Hungarian algorithm for n <= 64, verified greedy above.
std::vector<int> optimal_assignment(const MatrixXd& weights);

}  // namespace wit
