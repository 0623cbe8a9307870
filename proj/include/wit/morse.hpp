#pragma once

#include "wit/cell_complex.hpp"
#include "wit/complex_ops.hpp"
#include "wit/critical_point.hpp"
#include "wit/types.hpp"

#include <memory>

namespace wit {

/// Smooth function with analytic gradient/Hessian oracles in covering-space
/// coordinates (torus) or chart coordinates (sphere).
class MorseFunction {
 public:
  virtual ~MorseFunction() = default;
  virtual int dimension() const = 0;
  virtual int chart_count() const { return 1; }
  /// Covering-space periods; empty for chart-based domains (sphere).
  virtual std::vector<double> periods() const { return {}; }

  virtual double value(const VectorXd& x, int chart = 0) const = 0;
  virtual VectorXd gradient(const VectorXd& x, int chart = 0) const = 0;
  virtual MatrixXd hessian(const VectorXd& x, int chart = 0) const = 0;

  /// Value at a mesh point (covering coordinates for tori, R^3 for spheres).
  virtual double mesh_value(const VectorXd& p) const { return value(p); }
};

/// f(x) = amplitude * sum_a cos(2 pi k_a x_a / L_a).
class ProductCosine : public MorseFunction {
 public:
  ProductCosine(std::vector<double> periods, std::vector<int> waves, double amplitude);
  int dimension() const override { return static_cast<int>(periods_.size()); }
  std::vector<double> periods() const override { return periods_; }
  double value(const VectorXd& x, int chart) const override;
  VectorXd gradient(const VectorXd& x, int chart) const override;
  MatrixXd hessian(const VectorXd& x, int chart) const override;

 private:
  std::vector<double> periods_;
  std::vector<int> waves_;
  double amplitude_;
};

/// Exact-Morse-chart product wells: per axis, `wells` minima alternating with
/// maxima at equal spacing; f is exactly quadratic (unit Hessian) around every
/// critical point, C^1 at the cap joins. Minima sit at f = 0 per axis.
class QuadraticWells : public MorseFunction {
 public:
  QuadraticWells(std::vector<double> periods, std::vector<int> wells);
  int dimension() const override { return static_cast<int>(periods_.size()); }
  std::vector<double> periods() const override { return periods_; }
  double value(const VectorXd& x, int chart) const override;
  VectorXd gradient(const VectorXd& x, int chart) const override;
  MatrixXd hessian(const VectorXd& x, int chart) const override;
  double axis_barrier(int axis) const;  // f(max) - f(min) along one axis

 private:
  void reduce(int axis, double x, double* u, int* branch) const;
  std::vector<double> periods_;
  std::vector<int> wells_;
};

class ConstantFunction : public MorseFunction {
 public:
  ConstantFunction(std::vector<double> periods, double c)
      : periods_(std::move(periods)), c_(c) {}
  int dimension() const override { return static_cast<int>(periods_.size()); }
  std::vector<double> periods() const override { return periods_; }
  double value(const VectorXd&, int) const override { return c_; }
  VectorXd gradient(const VectorXd& x, int) const override {
    return VectorXd::Zero(x.size());
  }
  MatrixXd hessian(const VectorXd& x, int) const override {
    return MatrixXd::Zero(x.size(), x.size());
  }

 private:
  std::vector<double> periods_;
  double c_;
};

/// Height function z on the unit sphere in two orthographic chart
/// coordinates: chart 0 covers z > 0, chart 1 covers z < 0.
class SphereHeight : public MorseFunction {
 public:
  int dimension() const override { return 2; }
  int chart_count() const override { return 2; }
  double value(const VectorXd& x, int chart) const override;
  VectorXd gradient(const VectorXd& x, int chart) const override;
  MatrixXd hessian(const VectorXd& x, int chart) const override;
  double mesh_value(const VectorXd& p) const override { return p[2]; }
  VectorXd embed(const VectorXd& x, int chart) const;
};

/// Newton search from a dense seed grid; deduplicated, validated points
/// sorted by (index, location).
std::vector<CriticalPoint> find_critical_points(const MorseFunction& mf,
                                                int seed_grid_resolution);

struct FlowControls {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  int max_steps = 200000;
  double capture_radius_rel = 1e-4;  // of the largest period
  double shoot_radius_rel = 1e-3;
};

struct Trajectory {
  std::vector<VectorXd> points;  // covering coordinates, unwrapped
  int limit = -1;                // index into the critical point list
  int sign = 0;                  // epsilon(gamma) when computed
};

/// Integrate direction * (-grad f) from x0 until capture at a critical point.
Trajectory integrate_flow(const MorseFunction& mf, const VectorXd& x0, int direction,
                          const std::vector<CriticalPoint>& points,
                          const FlowControls& controls = {});

struct TrajectoryCount {
  int incidence = 0;                  // I(x, y)
  std::vector<Trajectory> connecting;  // trajectories from x to y with signs
};

/// Signed count of negative-gradient trajectories from `x` (index k+1) to
/// `y` (index k). Unstable spheres of dimension 0 and 1 are supported.
TrajectoryCount count_signed_trajectories(const MorseFunction& mf,
                                          const std::vector<CriticalPoint>& points,
                                          int x, int y,
                                          const FlowControls& controls = {},
                                          int circle_samples = 64);

struct MorseData {
  std::vector<CriticalPoint> points;          // sorted by index, then location
  std::vector<std::vector<int>> by_index;     // point ids per Morse index
  std::vector<Eigen::MatrixXi> incidence;     // incidence[k]: c_{k+1} x c_k
  std::vector<std::vector<Trajectory>> separatrices;  // per point, outgoing (index-1 cells)
};

/// Full pipeline: critical points, trajectory counts for all adjacent index
/// pairs, chain property check.
MorseData build_morse_data(const MorseFunction& mf, int seed_grid_resolution,
                           const FlowControls& controls = {});

/// The geometric complex: C^k = Maps(Cr_k, R) with orthonormal E_x basis.
InnerProductComplex geometric_complex(const MorseData& md);

/// Diagonal of S^q(t) on C^q: (pi/t)^{(n-2q)/4} e^{-t f(x)} per index-q point.
VectorXd scaling_map(const MorseData& md, int n, int q, double t);

/// Mesh realization of the unstable cell of one critical point.
struct UnstableCell {
  enum class Kind { Point, Polyline, Box };
  Kind kind = Kind::Point;
  int point = -1;
  MatrixXd polyline;          // resampled, covering coords (rows)
  std::vector<int> box_cells; // ids of degree-q mesh cells in the box
  double box_weight = 0.0;    // tangential cell volume
  int orientation = 1;
};

UnstableCell realize_unstable_cell(const CellComplex& cc, const MorseData& md,
                                   const MorseFunction& mf, int point_id,
                                   const FlowControls& controls = {});

/// Pairing of a degree-q mesh cochain with the unstable cell of an index-q
/// critical point; with twist_t != 0 the integrand carries e^{t f}.
double integrate_over_unstable(const CellComplex& cc, const UnstableCell& cell,
                               const MorseData& md, const MorseFunction& mf,
                               const Cochain& omega, double twist_t = 0.0);

double integrate_over_unstable(const CellComplex& cc, const MorseData& md,
                               const MorseFunction& mf, const Cochain& omega,
                               int point_id, double twist_t = 0.0,
                               const FlowControls& controls = {});

/// Multilinear periodic interpolation of one axis-component of a cochain.
double interpolate_component(const CellComplex& cc, const Cochain& omega,
                             unsigned axes_mask, const VectorXd& x);

}  // namespace wit
