#pragma once

#include "wit/metric.hpp"
#include "wit/types.hpp"

namespace wit {

enum class Topology { Torus, Sphere };

/// Oriented cell complex of a discretized closed manifold.
///
/// Tori are cubical product grids in covering-space coordinates; cells of
/// degree q are grouped in blocks by the axis subset they extend along
/// (subset bitmasks ascending), row-major lattice order within a block.
/// Spheres are subdivided icosahedra with outward-oriented triangles.
struct CellComplex {
  int dimension = 0;
  Topology topology = Topology::Torus;
  std::vector<double> periods;   // torus only, size == dimension
  int resolution = 0;            // torus: cells per axis
  int subdivisions = 0;          // sphere

  std::vector<SpMat> coboundary;               // D^q, integer entries
  std::vector<MatrixXd> barycenters;           // per degree, rows are cells
  std::vector<std::vector<unsigned>> cell_axes;  // torus: axis bitmask per cell

  int cells(int q) const {
    return q >= 0 && q <= dimension ? static_cast<int>(barycenters[q].rows()) : 0;
  }
  double spacing(int axis) const { return periods[axis] / resolution; }
  double max_spacing() const;

  /// Torus cell id from its axis mask and base lattice coordinates.
  int torus_cell_id(int q, unsigned mask, const std::vector<int>& coords) const;
  /// Axis subsets of degree q in block order.
  std::vector<unsigned> axis_subsets(int q) const;

  /// Signed distance vector a-b on the torus (shortest representative).
  VectorXd torus_delta(const VectorXd& a, const VectorXd& b) const;
  double torus_distance(const VectorXd& a, const VectorXd& b) const;
};

/// Cubical complex of the flat torus R^n/(periods * Z^n), `resolution` cells
/// per axis. Requires n in 1..3, resolution >= 4, periods > 0.
CellComplex build_torus_grid(int n, int resolution, std::vector<double> periods);

/// Triangulated unit 2-sphere; `subdivisions` in 0..6.
CellComplex build_icosphere(int subdivisions);

/// Diagonal Hodge-star mass matrices (one positive weight per cell).
std::vector<VectorXd> hodge_inner_products(const CellComplex& cc);

}  // namespace wit
