#pragma once

#include "wit/types.hpp"

namespace wit {

/// Nondegenerate critical point of a Morse function.
/// The frame columns are orthonormal Hessian eigenvectors in ascending
/// eigenvalue order, so the first `index` columns span the unstable
/// directions; their ordering fixes the orientation of the unstable cell.
struct CriticalPoint {
  VectorXd location;            // fundamental-domain (torus) or chart coords
  int chart = 0;
  int index = 0;                // number of negative Hessian eigenvalues
  double f_value = 0.0;
  VectorXd hessian_eigenvalues; // ascending
  MatrixXd frame;
};

}  // namespace wit
