#include "wit/morse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace wit {

namespace {

double wrap_coord(double x, double L) { return x - L * std::floor(x / L); }

VectorXd wrap_point(const VectorXd& x, const std::vector<double>& periods) {
  if (periods.empty()) return x;
  VectorXd y = x;
  for (int i = 0; i < y.size(); ++i) y[i] = wrap_coord(y[i], periods[i]);
  return y;
}

VectorXd periodic_delta(const VectorXd& a, const VectorXd& b,
                        const std::vector<double>& periods) {
  VectorXd d = a - b;
  for (size_t i = 0; i < periods.size(); ++i)
    d[static_cast<int>(i)] -= periods[i] * std::floor(d[static_cast<int>(i)] / periods[i] + 0.5);
  return d;
}

double max_period(const std::vector<double>& periods) {
  double L = 1.0;
  for (double p : periods) L = std::max(L, p);
  return L;
}

}  // namespace

// ---------------------------------------------------------------------------
// Function families

ProductCosine::ProductCosine(std::vector<double> periods, std::vector<int> waves,
                             double amplitude)
    : periods_(std::move(periods)), waves_(std::move(waves)), amplitude_(amplitude) {
  if (periods_.size() != waves_.size())
    throw InvalidArgument("ProductCosine: periods/waves size mismatch");
  for (int k : waves_)
    if (k < 1) throw InvalidArgument("ProductCosine: wave counts must be >= 1");
}

double ProductCosine::value(const VectorXd& x, int) const {
  double s = 0.0;
  for (int a = 0; a < dimension(); ++a)
    s += std::cos(2.0 * M_PI * waves_[a] * x[a] / periods_[a]);
  return amplitude_ * s;
}

VectorXd ProductCosine::gradient(const VectorXd& x, int) const {
  VectorXd g(dimension());
  for (int a = 0; a < dimension(); ++a) {
    double w = 2.0 * M_PI * waves_[a] / periods_[a];
    g[a] = -amplitude_ * w * std::sin(w * x[a]);
  }
  return g;
}

MatrixXd ProductCosine::hessian(const VectorXd& x, int) const {
  MatrixXd h = MatrixXd::Zero(dimension(), dimension());
  for (int a = 0; a < dimension(); ++a) {
    double w = 2.0 * M_PI * waves_[a] / periods_[a];
    h(a, a) = -amplitude_ * w * w * std::cos(w * x[a]);
  }
  return h;
}

QuadraticWells::QuadraticWells(std::vector<double> periods, std::vector<int> wells)
    : periods_(std::move(periods)), wells_(std::move(wells)) {
  if (periods_.size() != wells_.size())
    throw InvalidArgument("QuadraticWells: periods/wells size mismatch");
  for (int w : wells_)
    if (w < 1) throw InvalidArgument("QuadraticWells: wells must be >= 1");
}

/// Reduce x to the signed offset u from the nearest axis minimum.
/// branch = +1 inside the minimum cap, -1 inside the maximum cap.
void QuadraticWells::reduce(int axis, double x, double* u, int* branch) const {
  const double per = periods_[axis] / wells_[axis];  // one min + one max
  const double seg = 0.5 * per;                      // min-to-max distance
  const double rho = 0.5 * seg;                      // cap radius
  double y = wrap_coord(x, per);                     // min at 0, max at seg
  if (y > per / 2) y -= per;                         // y in [-per/2, per/2)
  if (std::abs(y) <= rho) {
    *u = y;
    *branch = +1;
  } else {
    *u = y - (y > 0 ? seg : -seg);  // offset from the max
    *branch = -1;
  }
}

double QuadraticWells::axis_barrier(int axis) const {
  const double rho = periods_[axis] / (4.0 * wells_[axis]);
  return rho * rho;  // two-parabola wells: H = rho^2
}

double QuadraticWells::value(const VectorXd& x, int) const {
  double s = 0.0;
  for (int a = 0; a < dimension(); ++a) {
    double u;
    int branch;
    reduce(a, x[a], &u, &branch);
    s += branch > 0 ? 0.5 * u * u : axis_barrier(a) - 0.5 * u * u;
  }
  return s;
}

VectorXd QuadraticWells::gradient(const VectorXd& x, int) const {
  VectorXd g(dimension());
  for (int a = 0; a < dimension(); ++a) {
    double u;
    int branch;
    reduce(a, x[a], &u, &branch);
    g[a] = branch > 0 ? u : -u;
  }
  return g;
}

MatrixXd QuadraticWells::hessian(const VectorXd& x, int) const {
  MatrixXd h = MatrixXd::Zero(dimension(), dimension());
  for (int a = 0; a < dimension(); ++a) {
    double u;
    int branch;
    reduce(a, x[a], &u, &branch);
    h(a, a) = branch;
  }
  return h;
}

double SphereHeight::value(const VectorXd& x, int chart) const {
  const double w2 = 1.0 - x.squaredNorm();
  if (w2 <= 0.0) throw InvalidArgument("SphereHeight: point outside chart disk");
  return (chart == 0 ? 1.0 : -1.0) * std::sqrt(w2);
}

VectorXd SphereHeight::gradient(const VectorXd& x, int chart) const {
  const double w = std::sqrt(1.0 - x.squaredNorm());
  return (chart == 0 ? -1.0 : 1.0) * x / w;
}

MatrixXd SphereHeight::hessian(const VectorXd& x, int chart) const {
  const double w2 = 1.0 - x.squaredNorm();
  const double w = std::sqrt(w2);
  MatrixXd h = MatrixXd::Identity(2, 2) / w + x * x.transpose() / (w * w2);
  return (chart == 0 ? -1.0 : 1.0) * h;
}

VectorXd SphereHeight::embed(const VectorXd& x, int chart) const {
  VectorXd p(3);
  p << x[0], x[1], value(x, chart);
  return p;
}

// ---------------------------------------------------------------------------
// Critical points

std::vector<CriticalPoint> find_critical_points(const MorseFunction& mf,
                                                int seed_grid_resolution) {
  if (seed_grid_resolution < 8)
    throw InvalidArgument("find_critical_points: seed grid resolution must be >= 8");
  const int n = mf.dimension();
  const auto periods = mf.periods();
  const bool on_torus = !periods.empty();
  const double diam = on_torus ? max_period(periods) : 2.0;

  // Gradient scale for convergence thresholds.
  double gscale = 0.0;

  std::vector<std::pair<VectorXd, int>> found;  // (location, chart)
  auto try_seed = [&](VectorXd x, int chart) {
    for (int it = 0; it < 80; ++it) {
      VectorXd g = mf.gradient(x, chart);
      gscale = std::max(gscale, g.norm());
      MatrixXd h = mf.hessian(x, chart);
      Eigen::PartialPivLU<MatrixXd> lu(h);
      VectorXd step = lu.solve(g);
      if (!step.allFinite() || step.norm() > 0.5 * diam) return;
      x -= step;
      if (!on_torus && x.norm() > 0.92) return;  // left the chart
      if (step.norm() < 1e-14 * diam) break;
    }
    if (mf.gradient(x, chart).norm() > 1e-11 * std::max(1.0, gscale)) return;
    found.emplace_back(wrap_point(x, periods), chart);
  };

  if (on_torus) {
    std::vector<int> idx(n, 0);
    const int R = seed_grid_resolution;
    int total = 1;
    for (int a = 0; a < n; ++a) total *= R;
    for (int lin = 0; lin < total; ++lin) {
      int rem = lin;
      VectorXd x(n);
      for (int a = 0; a < n; ++a) {
        x[a] = ((rem % R) + 0.37) * periods[a] / R;
        rem /= R;
      }
      try_seed(x, 0);
    }
  } else {
    const int R = seed_grid_resolution;
    for (int chart = 0; chart < mf.chart_count(); ++chart)
      for (int i = 0; i < R; ++i)
        for (int j = 0; j < R; ++j) {
          VectorXd x(2);
          x << -0.7 + 1.4 * (i + 0.5) / R, -0.7 + 1.4 * (j + 0.5) / R;
          try_seed(x, chart);
        }
  }

  // Deduplicate.
  std::vector<std::pair<VectorXd, int>> unique;
  const auto* sphere = dynamic_cast<const SphereHeight*>(&mf);
  for (const auto& [x, chart] : found) {
    bool dup = false;
    for (const auto& [y, chart2] : unique) {
      double dist;
      if (on_torus) dist = periodic_delta(x, y, periods).norm();
      else if (sphere) dist = (sphere->embed(x, chart) - sphere->embed(y, chart2)).norm();
      else dist = chart == chart2 ? (x - y).norm() : 1e300;
      if (dist < 1e-6 * std::max(1.0, diam)) { dup = true; break; }
    }
    if (!dup) unique.emplace_back(x, chart);
  }

  if (unique.empty())
    throw NumericError("find_critical_points: no critical points found; "
                       "not a Morse function on a compact manifold");

  std::vector<CriticalPoint> points;
  for (const auto& [x, chart] : unique) {
    CriticalPoint cp;
    cp.location = x;
    cp.chart = chart;
    cp.f_value = mf.value(x, chart);
    MatrixXd h = mf.hessian(x, chart);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (h + h.transpose()));
    cp.hessian_eigenvalues = es.eigenvalues();
    if (cp.hessian_eigenvalues.cwiseAbs().minCoeff() < 1e-6) {
      std::ostringstream os;
      os << "find_critical_points: degenerate Hessian at (" << x.transpose() << ")";
      throw NumericError(os.str());
    }
    cp.frame = es.eigenvectors();
    // Deterministic column signs: largest-magnitude entry positive.
    for (int c = 0; c < cp.frame.cols(); ++c) {
      int imax = 0;
      cp.frame.col(c).cwiseAbs().maxCoeff(&imax);
      if (cp.frame(imax, c) < 0) cp.frame.col(c) *= -1.0;
    }
    cp.index = static_cast<int>((cp.hessian_eigenvalues.array() < 0.0).count());
    points.push_back(std::move(cp));
  }

  std::sort(points.begin(), points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.index != b.index) return a.index < b.index;
    for (int i = 0; i < a.location.size(); ++i) {
      double da = std::round(a.location[i] * 1e9), db = std::round(b.location[i] * 1e9);
      if (da != db) return da < db;
    }
    return a.chart < b.chart;
  });
  return points;
}

// ---------------------------------------------------------------------------
// Flow integration (Dormand-Prince 4(5), adaptive)

namespace {

struct RKStep {
  VectorXd x5;
  double error = 0.0;
};

template <typename F>
RKStep dopri_step(const F& g, const VectorXd& x, double h) {
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                      e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

  VectorXd k1 = g(x);
  VectorXd k2 = g(x + h * a21 * k1);
  VectorXd k3 = g(x + h * (a31 * k1 + a32 * k2));
  VectorXd k4 = g(x + h * (a41 * k1 + a42 * k2 + a43 * k3));
  VectorXd k5 = g(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  VectorXd k6 = g(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  VectorXd x5 = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  VectorXd k7 = g(x5);
  VectorXd x4 = x + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  return {x5, (x5 - x4).norm()};
}

}  // namespace

Trajectory integrate_flow(const MorseFunction& mf, const VectorXd& x0, int direction,
                          const std::vector<CriticalPoint>& points,
                          const FlowControls& controls) {
  const auto periods = mf.periods();
  if (periods.empty())
    throw InvalidArgument("integrate_flow: covering-space flow requires a torus domain");
  const double diam = max_period(periods);
  const double r_cap = controls.capture_radius_rel * diam;
  const double dir = direction >= 0 ? 1.0 : -1.0;

  auto g = [&](const VectorXd& x) -> VectorXd { return -dir * mf.gradient(x, 0); };

  Trajectory traj;
  traj.points.push_back(x0);
  VectorXd x = x0;
  double h = 1e-3;
  for (int step = 0; step < controls.max_steps; ++step) {
    RKStep rk = dopri_step(g, x, h);
    const double tol = controls.abs_tol + controls.rel_tol * x.norm();
    if (rk.error > tol) {
      h *= std::max(0.2, 0.9 * std::pow(tol / rk.error, 0.2));
      continue;
    }
    x = rk.x5;
    traj.points.push_back(x);
    if (rk.error > 0.0)
      h = std::min(h * std::min(5.0, 0.9 * std::pow(tol / rk.error, 0.2)), 1.0);
    else
      h = std::min(5.0 * h, 1.0);

    for (size_t c = 0; c < points.size(); ++c) {
      if (periodic_delta(x, points[c].location, periods).norm() < r_cap) {
        traj.limit = static_cast<int>(c);
        // Land exactly on the point, in the unwrapped sheet of x.
        VectorXd d = periodic_delta(points[c].location, x, periods);
        traj.points.push_back(x + d);
        return traj;
      }
    }
  }
  throw NumericError("integrate_flow: step limit exceeded without capture "
                     "(suspected non-Morse-Smale tangency)");
}

// ---------------------------------------------------------------------------
// Trajectory counting with orientation transport

namespace {

/// Transport the unstable frame of `points[x]` along a trajectory by the
/// linearized flow dF/dt = -Hess(f) F, re-orthonormalized each substep, and
/// compare with [flow direction | unstable frame of the limit point].
int trajectory_sign(const MorseFunction& mf, const std::vector<CriticalPoint>& points,
                    int x, const Trajectory& traj) {
  const auto periods = mf.periods();
  const int n = mf.dimension();
  const int k1 = points[x].index;
  const auto& y = points[traj.limit];
  const double diam = max_period(periods);
  // Compare frames at moderate distance from the limit point: past it the
  // transport time diverges and the frame conditioning degrades.
  const double r_compare = 0.02 * diam;
  MatrixXd F = points[x].frame.leftCols(k1);

  auto reorth = [&](MatrixXd& m) {
    Eigen::HouseholderQR<MatrixXd> qr(m);
    MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, k1);
    MatrixXd R = Q.transpose() * m;
    for (int c = 0; c < k1; ++c)
      if (R(c, c) < 0) Q.col(c) *= -1.0;  // keep orientation continuous
    m = Q;
  };

  VectorXd stop = traj.points.back();
  for (size_t i = 0; i + 1 < traj.points.size(); ++i) {
    VectorXd a = traj.points[i], b = traj.points[i + 1];
    if (periodic_delta(a, y.location, periods).norm() < r_compare) { stop = a; break; }
    double seg = (b - a).norm();
    if (seg == 0.0) continue;
    VectorXd mid0 = wrap_point(0.5 * (a + b), periods);
    double speed0 = std::max(mf.gradient(mid0, 0).norm(), 1e-12);
    // Substeps resolve both the path and the flow time of the segment.
    int sub = std::max<int>(static_cast<int>(std::ceil(seg / 0.02)),
                            static_cast<int>(std::ceil(seg / speed0 / 0.05)));
    sub = std::min(sub, 20000);
    for (int s = 0; s < sub; ++s) {
      VectorXd m = wrap_point(a + (s + 0.5) / sub * (b - a), periods);
      double speed = std::max(mf.gradient(m, 0).norm(), 1e-12);
      MatrixXd H = mf.hessian(m, 0);
      double dt = seg / sub / speed;  // time spent on the substep
      MatrixXd k1m = -(H * F);
      MatrixXd Fm = F + 0.5 * dt * k1m;
      MatrixXd k2m = -(H * Fm);
      F += dt * k2m;
      reorth(F);
    }
    stop = b;
  }

  VectorXd p = wrap_point(stop, periods);
  VectorXd v = -mf.gradient(p, 0);
  if (v.norm() < 1e-14) v = periodic_delta(y.location, p, periods);
  v.normalize();
  MatrixXd cmp(n, k1);
  cmp.col(0) = v;
  if (k1 > 1) cmp.rightCols(k1 - 1) = y.frame.leftCols(k1 - 1);
  const double det = (F.transpose() * cmp).determinant();
  return det >= 0 ? 1 : -1;
}

/// All separatrix trajectories leaving critical point x toward points of
/// index one lower, with signs.
std::vector<Trajectory> unstable_separatrices(const MorseFunction& mf,
                                              const std::vector<CriticalPoint>& points,
                                              int x, const FlowControls& controls,
                                              int circle_samples) {
  const auto periods = mf.periods();
  if (periods.empty())
    throw InvalidArgument("count_signed_trajectories: torus domain required");
  const int k1 = points[x].index;
  const double r = controls.shoot_radius_rel * max_period(periods);
  std::vector<Trajectory> out;

  auto flow_from = [&](const VectorXd& dirvec) {
    return integrate_flow(mf, points[x].location + r * dirvec, +1, points, controls);
  };

  if (k1 == 1) {
    VectorXd u = points[x].frame.col(0);
    for (double s : {1.0, -1.0}) {
      Trajectory t = flow_from(s * u);
      if (points[t.limit].index != k1 - 1)
        throw NumericError("count_signed_trajectories: separatrix did not reach "
                           "an index-" + std::to_string(k1 - 1) + " point");
      t.points.insert(t.points.begin(), points[x].location);
      t.sign = trajectory_sign(mf, points, x, t);
      out.push_back(std::move(t));
    }
    return out;
  }
  if (k1 != 2)
    throw InvalidArgument("count_signed_trajectories: unstable spheres of dimension >= 2 "
                          "are not supported");

  VectorXd u1 = points[x].frame.col(0), u2 = points[x].frame.col(1);
  auto dir_at = [&](double theta) -> VectorXd {
    return std::cos(theta) * u1 + std::sin(theta) * u2;
  };

  std::vector<double> thetas(circle_samples);
  std::vector<int> limits(circle_samples);
  for (int i = 0; i < circle_samples; ++i) {
    thetas[i] = 2.0 * M_PI * i / circle_samples;
    limits[i] = flow_from(dir_at(thetas[i])).limit;
  }

  for (int i = 0; i < circle_samples; ++i) {
    const int j = (i + 1) % circle_samples;
    // A sample captured directly at an index-(k1-1) point is itself a
    // separatrix; record it once and skip the surrounding bisections.
    if (points[limits[i]].index == k1 - 1) {
      const int prev = (i - 1 + circle_samples) % circle_samples;
      if (limits[prev] != limits[i]) {
        Trajectory t = flow_from(dir_at(thetas[i]));
        t.points.insert(t.points.begin(), points[x].location);
        t.sign = trajectory_sign(mf, points, x, t);
        out.push_back(std::move(t));
      }
      continue;
    }
    if (limits[j] == limits[i] || points[limits[j]].index == k1 - 1) continue;

    double lo = thetas[i], hi = thetas[i] + 2.0 * M_PI / circle_samples;
    int lo_limit = limits[i];
    Trajectory found;
    bool ok = false;
    for (int b = 0; b < 90; ++b) {
      double mid = 0.5 * (lo + hi);
      Trajectory t = flow_from(dir_at(mid));
      if (points[t.limit].index == k1 - 1) {
        t.points.insert(t.points.begin(), points[x].location);
        found = std::move(t);
        ok = true;
        break;
      }
      if (t.limit == lo_limit) lo = mid;
      else hi = mid;
    }
    if (!ok)
      throw NumericError("count_signed_trajectories: basin boundary did not resolve "
                         "to a lower critical point (unstable trajectory cluster)");
    found.sign = trajectory_sign(mf, points, x, found);
    out.push_back(std::move(found));
  }
  return out;
}

}  // namespace

TrajectoryCount count_signed_trajectories(const MorseFunction& mf,
                                          const std::vector<CriticalPoint>& points,
                                          int x, int y, const FlowControls& controls,
                                          int circle_samples) {
  if (points[x].index != points[y].index + 1)
    throw InvalidArgument("count_signed_trajectories: index difference must be 1");

  auto run = [&](int samples) {
    TrajectoryCount tc;
    for (auto& t : unstable_separatrices(mf, points, x, controls, samples)) {
      if (t.limit != y) continue;
      tc.incidence += t.sign;
      tc.connecting.push_back(std::move(t));
    }
    return tc;
  };

  TrajectoryCount tc = run(circle_samples);
  if (points[x].index == 2) {
    TrajectoryCount check = run(2 * circle_samples);
    if (check.incidence != tc.incidence ||
        check.connecting.size() != tc.connecting.size())
      throw NumericError("count_signed_trajectories: trajectory count unstable "
                         "under sample refinement");
  }
  return tc;
}

// ---------------------------------------------------------------------------
// Morse data and the geometric complex

MorseData build_morse_data(const MorseFunction& mf, int seed_grid_resolution,
                           const FlowControls& controls) {
  MorseData md;
  md.points = find_critical_points(mf, seed_grid_resolution);
  const int n = mf.dimension();
  md.by_index.assign(n + 1, {});
  for (size_t i = 0; i < md.points.size(); ++i)
    md.by_index[md.points[i].index].push_back(static_cast<int>(i));

  md.separatrices.assign(md.points.size(), {});
  md.incidence.resize(n);
  for (int k = 0; k + 1 <= n; ++k) {
    const auto& hi = md.by_index[k + 1];
    const auto& lo = md.by_index[k];
    Eigen::MatrixXi I = Eigen::MatrixXi::Zero(static_cast<int>(hi.size()),
                                              static_cast<int>(lo.size()));
    if (!hi.empty() && !lo.empty() && !mf.periods().empty() && k + 1 <= 2) {
      for (size_t xi = 0; xi < hi.size(); ++xi) {
        auto seps = unstable_separatrices(mf, md.points, hi[xi], controls, 64);
        for (auto& t : seps) {
          for (size_t yi = 0; yi < lo.size(); ++yi)
            if (t.limit == lo[yi]) I(static_cast<int>(xi), static_cast<int>(yi)) += t.sign;
        }
        md.separatrices[hi[xi]] = std::move(seps);
      }
    }
    md.incidence[k] = std::move(I);
  }

  for (int k = 0; k + 2 <= n; ++k) {
    if (md.incidence[k].size() == 0 || md.incidence[k + 1].size() == 0) continue;
    Eigen::MatrixXi dd = md.incidence[k + 1] * md.incidence[k];
    if (dd.cwiseAbs().maxCoeff() != 0)
      throw NumericError("build_morse_data: boundary of boundary is nonzero "
                         "(orientation or trajectory count bug)");
  }
  return md;
}

InnerProductComplex geometric_complex(const MorseData& md) {
  InnerProductComplex ipc;
  const int n = static_cast<int>(md.by_index.size()) - 1;
  for (int q = 0; q <= n; ++q)
    ipc.metric.push_back(Metric::identity(static_cast<Eigen::Index>(md.by_index[q].size())));
  ipc.d.resize(n);
  for (int q = 0; q < n; ++q) {
    MatrixXd dq = md.incidence[q].cast<double>();
    if (dq.size() == 0)
      dq = MatrixXd::Zero(static_cast<int>(md.by_index[q + 1].size()),
                          static_cast<int>(md.by_index[q].size()));
    ipc.d[q] = dq.sparseView();
  }
  return ipc;
}

VectorXd scaling_map(const MorseData& md, int n, int q, double t) {
  if (!(t > 0.0)) throw InvalidArgument("scaling_map: t must be > 0");
  const auto& ids = md.by_index[q];
  VectorXd s(ids.size());
  const double pre = std::pow(M_PI / t, (n - 2.0 * q) / 4.0);
  for (size_t i = 0; i < ids.size(); ++i)
    s[static_cast<int>(i)] = pre * std::exp(-t * md.points[ids[i]].f_value);
  return s;
}

// ---------------------------------------------------------------------------
// Unstable-cell realization and integration

double interpolate_component(const CellComplex& cc, const Cochain& omega,
                             unsigned axes_mask, const VectorXd& x) {
  const int n = cc.dimension;
  const int N = cc.resolution;
  std::vector<int> base(n);
  std::vector<double> w(n);
  for (int a = 0; a < n; ++a) {
    const double h = cc.spacing(a);
    const double off = ((axes_mask >> a) & 1u) ? 0.5 * h : 0.0;
    double u = (x[a] - off) / h;
    double fl = std::floor(u);
    base[a] = static_cast<int>(fl);
    w[a] = u - fl;
  }
  double total = 0.0;
  for (unsigned corner = 0; corner < (1u << n); ++corner) {
    double weight = 1.0;
    std::vector<int> coords(n);
    for (int a = 0; a < n; ++a) {
      const bool up = (corner >> a) & 1u;
      weight *= up ? w[a] : 1.0 - w[a];
      coords[a] = ((base[a] + (up ? 1 : 0)) % N + N) % N;
    }
    if (weight == 0.0) continue;
    total += weight *
             omega.values[cc.torus_cell_id(__builtin_popcount(axes_mask), axes_mask, coords)];
  }
  return total;
}

UnstableCell realize_unstable_cell(const CellComplex& cc, const MorseData& md,
                                   const MorseFunction& mf, int point_id,
                                   const FlowControls& controls) {
  const auto& cp = md.points[point_id];
  const int q = cp.index;
  const int n = cc.dimension;
  UnstableCell cell;
  cell.point = point_id;

  if (q == 0) {
    cell.kind = UnstableCell::Kind::Point;
    return cell;
  }

  if (q == 1) {
    cell.kind = UnstableCell::Kind::Polyline;
    VectorXd u = cp.frame.col(0);
    std::vector<Trajectory> branches;
    if (md.separatrices[point_id].size() == 2) {
      branches = md.separatrices[point_id];
    } else {
      const double r = controls.shoot_radius_rel * max_period(mf.periods());
      for (double s : {1.0, -1.0}) {
        Trajectory t = integrate_flow(mf, cp.location + s * r * u, +1, md.points, controls);
        t.points.insert(t.points.begin(), cp.location);
        branches.push_back(std::move(t));
      }
    }
    // Oriented from the -u end through x to the +u end; resample to ~h/2.
    std::vector<VectorXd> pts;
    for (auto it = branches[1].points.rbegin(); it != branches[1].points.rend(); ++it)
      pts.push_back(*it);
    for (size_t i = 1; i < branches[0].points.size(); ++i) pts.push_back(branches[0].points[i]);
    const double target = 0.5 * cc.max_spacing();
    std::vector<VectorXd> dense;
    dense.push_back(pts.front());
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      double seg = (pts[i + 1] - pts[i]).norm();
      int sub = std::max(1, static_cast<int>(std::ceil(seg / target)));
      for (int s = 1; s <= sub; ++s)
        dense.push_back(pts[i] + (static_cast<double>(s) / sub) * (pts[i + 1] - pts[i]));
    }
    cell.polyline.resize(static_cast<Eigen::Index>(dense.size()), n);
    for (size_t i = 0; i < dense.size(); ++i)
      cell.polyline.row(static_cast<Eigen::Index>(i)) = dense[i];
    cell.orientation = 1;
    return cell;
  }

  // q >= 2: axis-aligned box between adjacent stable critical points.
  cell.kind = UnstableCell::Kind::Box;
  const double tol = 1e-6;
  std::vector<int> axes;
  MatrixXd uf = cp.frame.leftCols(q);
  for (int c = 0; c < q; ++c) {
    int axis = -1;
    for (int a = 0; a < n; ++a)
      if (std::abs(std::abs(uf(a, c)) - 1.0) < tol) axis = a;
    if (axis < 0)
      throw InvalidArgument("integrate_over_unstable: unstable cell not representable "
                            "at this mesh (unstable frame is not axis-aligned)");
    axes.push_back(axis);
  }
  unsigned mask = 0;
  for (int a : axes) mask |= 1u << a;
  if (static_cast<int>(axes.size()) != __builtin_popcount(mask))
    throw InvalidArgument("integrate_over_unstable: repeated unstable axis");

  // Box extents: distance to the nearest critical point along +-axis that is
  // stable in that axis and differs only in that coordinate.
  const auto periods = mf.periods();
  std::vector<double> lo(n, 0.0), hi(n, 0.0);
  for (int a : axes) {
    double best_pos = periods[a] / 2, best_neg = periods[a] / 2;
    bool found = false;
    for (const auto& other : md.points) {
      bool along_axis = true;
      for (int bb = 0; bb < n; ++bb) {
        if (bb == a) continue;
        double d = other.location[bb] - cp.location[bb];
        d -= periods[bb] * std::floor(d / periods[bb] + 0.5);
        if (std::abs(d) > 1e-7 * periods[bb]) { along_axis = false; break; }
      }
      if (!along_axis) continue;
      if (other.hessian_eigenvalues.size() && other.frame.cols() == n) {
        // axis a stable for `other` iff no unstable column aligns with e_a
        bool a_unstable = false;
        for (int c = 0; c < other.index; ++c)
          if (std::abs(std::abs(other.frame(a, c)) - 1.0) < tol) a_unstable = true;
        if (a_unstable) continue;
      }
      double d = other.location[a] - cp.location[a];
      d -= periods[a] * std::floor(d / periods[a] + 0.5);
      if (d > 1e-9) { best_pos = std::min(best_pos, d); found = true; }
      else if (d < -1e-9) { best_neg = std::min(best_neg, -d); found = true; }
      else if (&other != &cp) { found = true; }
    }
    (void)found;
    hi[a] = best_pos;
    lo[a] = best_neg;
  }

  // Collect degree-q cells with the matching axis set inside the box.
  cell.box_weight = 1.0;
  for (int a : axes) cell.box_weight *= cc.spacing(a);
  for (int id = 0; id < cc.cells(q); ++id) {
    if (cc.cell_axes[q][id] != mask) continue;
    VectorXd delta = cc.torus_delta(cc.barycenters[q].row(id).transpose(), cp.location);
    bool inside = true;
    for (int a = 0; a < n; ++a) {
      if ((mask >> a) & 1u) {
        if (!(delta[a] > -lo[a] && delta[a] < hi[a])) { inside = false; break; }
      } else {
        if (std::abs(delta[a]) > 0.25 * cc.spacing(a)) { inside = false; break; }
      }
    }
    if (inside) cell.box_cells.push_back(id);
  }
  if (cell.box_cells.empty())
    throw InvalidArgument("integrate_over_unstable: unstable box contains no mesh cells");

  // Orientation: unstable frame against the ascending-axis ordering.
  MatrixXd sgn = MatrixXd::Zero(q, q);
  std::vector<int> sorted_axes = axes;
  std::sort(sorted_axes.begin(), sorted_axes.end());
  for (int i = 0; i < q; ++i)
    for (int c = 0; c < q; ++c) sgn(i, c) = uf(sorted_axes[i], c);
  cell.orientation = sgn.determinant() >= 0 ? 1 : -1;
  return cell;
}

double integrate_over_unstable(const CellComplex& cc, const UnstableCell& cell,
                               const MorseData& md, const MorseFunction& mf,
                               const Cochain& omega, double twist_t) {
  const auto& cp = md.points[cell.point];
  if (omega.degree != cp.index)
    throw InvalidArgument("integrate_over_unstable: cochain degree must equal the "
                          "critical point index");
  const auto periods = mf.periods();
  auto twist = [&](const VectorXd& p) {
    return twist_t == 0.0 ? 1.0 : std::exp(twist_t * mf.value(wrap_point(p, periods), 0));
  };

  switch (cell.kind) {
    case UnstableCell::Kind::Point: {
      VectorXd x = cp.location;
      return interpolate_component(cc, omega, 0u, x) * twist(x);
    }
    case UnstableCell::Kind::Polyline: {
      double total = 0.0;
      for (Eigen::Index i = 0; i + 1 < cell.polyline.rows(); ++i) {
        VectorXd a = cell.polyline.row(i), b = cell.polyline.row(i + 1);
        VectorXd m = wrap_point(0.5 * (a + b), periods);
        VectorXd dl = b - a;
        double tw = twist(m);
        for (int ax = 0; ax < cc.dimension; ++ax) {
          if (dl[ax] == 0.0) continue;
          total += dl[ax] * interpolate_component(cc, omega, 1u << ax, m) * tw;
        }
      }
      return total;
    }
    case UnstableCell::Kind::Box: {
      double total = 0.0;
      for (int id : cell.box_cells) {
        VectorXd b = cc.barycenters[omega.degree].row(id);
        total += omega.values[id] * twist(b);
      }
      return total * cell.box_weight * cell.orientation;
    }
  }
  throw Error("integrate_over_unstable: unreachable");
}

double integrate_over_unstable(const CellComplex& cc, const MorseData& md,
                               const MorseFunction& mf, const Cochain& omega,
                               int point_id, double twist_t,
                               const FlowControls& controls) {
  UnstableCell cell = realize_unstable_cell(cc, md, mf, point_id, controls);
  return integrate_over_unstable(cc, cell, md, mf, omega, twist_t);
}

}  // namespace wit
