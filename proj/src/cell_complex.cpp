#include "wit/cell_complex.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numeric>

namespace wit {

namespace {

int popcount(unsigned m) { return __builtin_popcount(m); }

std::vector<unsigned> subsets_of_size(int n, int q) {
  std::vector<unsigned> out;
  for (unsigned m = 0; m < (1u << n); ++m)
    if (popcount(m) == q) out.push_back(m);
  return out;
}

}  // namespace

double CellComplex::max_spacing() const {
  double h = 0.0;
  for (int a = 0; a < dimension; ++a) h = std::max(h, spacing(a));
  return h;
}

int CellComplex::torus_cell_id(int q, unsigned mask,
                               const std::vector<int>& coords) const {
  const auto subs = axis_subsets(q);
  int block = -1;
  for (size_t s = 0; s < subs.size(); ++s)
    if (subs[s] == mask) { block = static_cast<int>(s); break; }
  if (block < 0) throw InvalidArgument("torus_cell_id: bad axis mask");
  int lin = 0;
  for (int a = 0; a < dimension; ++a) {
    int c = coords[a] % resolution;
    if (c < 0) c += resolution;
    lin = lin * resolution + c;
  }
  int block_size = 1;
  for (int a = 0; a < dimension; ++a) block_size *= resolution;
  return block * block_size + lin;
}

std::vector<unsigned> CellComplex::axis_subsets(int q) const {
  return subsets_of_size(dimension, q);
}

VectorXd CellComplex::torus_delta(const VectorXd& a, const VectorXd& b) const {
  VectorXd d = a - b;
  for (int i = 0; i < dimension; ++i) {
    double L = periods[i];
    d[i] -= L * std::floor(d[i] / L + 0.5);
  }
  return d;
}

double CellComplex::torus_distance(const VectorXd& a, const VectorXd& b) const {
  return torus_delta(a, b).norm();
}

CellComplex build_torus_grid(int n, int resolution, std::vector<double> periods) {
  if (n < 1 || n > 3)
    throw InvalidArgument("build_torus_grid: dimension must be 1..3");
  if (resolution < 4)
    throw InvalidArgument("build_torus_grid: resolution < 4 gives degenerate stencils");
  if (static_cast<int>(periods.size()) != n)
    throw InvalidArgument("build_torus_grid: periods size mismatch");
  for (double L : periods)
    if (!(L > 0.0)) throw InvalidArgument("build_torus_grid: periods must be > 0");

  CellComplex cc;
  cc.dimension = n;
  cc.topology = Topology::Torus;
  cc.periods = periods;
  cc.resolution = resolution;

  const int N = resolution;
  int block_size = 1;
  for (int a = 0; a < n; ++a) block_size *= N;

  cc.barycenters.resize(n + 1);
  cc.cell_axes.resize(n + 1);
  for (int q = 0; q <= n; ++q) {
    auto subs = subsets_of_size(n, q);
    const int count = static_cast<int>(subs.size()) * block_size;
    cc.barycenters[q].resize(count, n);
    cc.cell_axes[q].resize(count);
    int id = 0;
    for (unsigned mask : subs) {
      std::vector<int> coord(n, 0);
      for (int lin = 0; lin < block_size; ++lin, ++id) {
        int rem = lin;
        for (int a = n - 1; a >= 0; --a) { coord[a] = rem % N; rem /= N; }
        for (int a = 0; a < n; ++a) {
          double h = periods[a] / N;
          double x = coord[a] * h + ((mask >> a) & 1u ? 0.5 * h : 0.0);
          cc.barycenters[q](id, a) = x;
        }
        cc.cell_axes[q][id] = mask;
      }
    }
  }

  // Coboundary D^q: rows are (q+1)-cells. A (q+1)-cell with axes
  // T = {a_1 < ... < a_{q+1}} at base i has boundary
  //   sum_j (-1)^{j-1} ( [T\a_j at i+e_{a_j}] - [T\a_j at i] ).
  cc.coboundary.resize(n);
  for (int q = 0; q < n; ++q) {
    auto subs_hi = subsets_of_size(n, q + 1);
    std::vector<Triplet> trips;
    int row = 0;
    std::vector<int> coord(n, 0);
    for (unsigned T : subs_hi) {
      std::vector<int> axes;
      for (int a = 0; a < n; ++a)
        if ((T >> a) & 1u) axes.push_back(a);
      for (int lin = 0; lin < block_size; ++lin, ++row) {
        int rem = lin;
        for (int a = n - 1; a >= 0; --a) { coord[a] = rem % N; rem /= N; }
        for (size_t j = 0; j < axes.size(); ++j) {
          const int a = axes[j];
          const double sign = (j % 2 == 0) ? 1.0 : -1.0;
          const unsigned S = T & ~(1u << a);
          std::vector<int> up = coord;
          up[a] = (up[a] + 1) % N;
          trips.emplace_back(row, cc.torus_cell_id(q, S, up), sign);
          trips.emplace_back(row, cc.torus_cell_id(q, S, coord), -sign);
        }
      }
    }
    SpMat D(cc.cells(q + 1), cc.cells(q));
    D.setFromTriplets(trips.begin(), trips.end());
    D.makeCompressed();
    cc.coboundary[q] = std::move(D);
  }
  return cc;
}

namespace {

struct IcoMesh {
  std::vector<Eigen::Vector3d> verts;
  std::vector<std::array<int, 3>> faces;
};

IcoMesh icosahedron() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<int, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return {v, f};
}

IcoMesh subdivide(const IcoMesh& in) {
  IcoMesh out;
  out.verts = in.verts;
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Eigen::Vector3d m = (out.verts[a] + out.verts[b]).normalized();
    out.verts.push_back(m);
    int id = static_cast<int>(out.verts.size()) - 1;
    midpoint[key] = id;
    return id;
  };
  for (const auto& f : in.faces) {
    int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
    out.faces.push_back({f[0], ab, ca});
    out.faces.push_back({f[1], bc, ab});
    out.faces.push_back({f[2], ca, bc});
    out.faces.push_back({ab, bc, ca});
  }
  return out;
}

}  // namespace

CellComplex build_icosphere(int subdivisions) {
  if (subdivisions < 0 || subdivisions > 6)
    throw InvalidArgument("build_icosphere: subdivisions must be 0..6");

  IcoMesh mesh = icosahedron();
  for (int s = 0; s < subdivisions; ++s) mesh = subdivide(mesh);

  // Orient all faces outward.
  for (auto& f : mesh.faces) {
    const auto &a = mesh.verts[f[0]], &b = mesh.verts[f[1]], &c = mesh.verts[f[2]];
    if ((b - a).cross(c - a).dot(a + b + c) < 0.0) std::swap(f[1], f[2]);
  }

  // Canonical edges: (u < v), directed u -> v.
  std::map<std::pair<int, int>, int> edge_id;
  std::vector<std::pair<int, int>> edges;
  for (const auto& f : mesh.faces)
    for (int k = 0; k < 3; ++k) {
      auto key = std::minmax(f[k], f[(k + 1) % 3]);
      if (!edge_id.count(key)) {
        edge_id[key] = static_cast<int>(edges.size());
        edges.push_back(key);
      }
    }

  CellComplex cc;
  cc.dimension = 2;
  cc.topology = Topology::Sphere;
  cc.subdivisions = subdivisions;

  const int nv = static_cast<int>(mesh.verts.size());
  const int ne = static_cast<int>(edges.size());
  const int nf = static_cast<int>(mesh.faces.size());

  cc.barycenters.resize(3);
  cc.cell_axes.resize(3);
  cc.barycenters[0].resize(nv, 3);
  for (int i = 0; i < nv; ++i) cc.barycenters[0].row(i) = mesh.verts[i];
  cc.barycenters[1].resize(ne, 3);
  for (int e = 0; e < ne; ++e)
    cc.barycenters[1].row(e) =
        0.5 * (mesh.verts[edges[e].first] + mesh.verts[edges[e].second]);
  cc.barycenters[2].resize(nf, 3);
  for (int fi = 0; fi < nf; ++fi)
    cc.barycenters[2].row(fi) = (mesh.verts[mesh.faces[fi][0]] +
                                 mesh.verts[mesh.faces[fi][1]] +
                                 mesh.verts[mesh.faces[fi][2]]) / 3.0;

  cc.coboundary.resize(2);
  {
    std::vector<Triplet> trips;
    for (int e = 0; e < ne; ++e) {
      trips.emplace_back(e, edges[e].second, 1.0);
      trips.emplace_back(e, edges[e].first, -1.0);
    }
    SpMat D0(ne, nv);
    D0.setFromTriplets(trips.begin(), trips.end());
    cc.coboundary[0] = std::move(D0);
  }
  {
    std::vector<Triplet> trips;
    for (int fi = 0; fi < nf; ++fi) {
      const auto& f = mesh.faces[fi];
      for (int k = 0; k < 3; ++k) {
        int u = f[k], v = f[(k + 1) % 3];
        auto key = std::minmax(u, v);
        double sign = (u < v) ? 1.0 : -1.0;
        trips.emplace_back(fi, edge_id[key], sign);
      }
    }
    SpMat D1(nf, ne);
    D1.setFromTriplets(trips.begin(), trips.end());
    cc.coboundary[1] = std::move(D1);
  }

  return cc;
}

std::vector<VectorXd> hodge_inner_products(const CellComplex& cc) {
  std::vector<VectorXd> mass(cc.dimension + 1);
  if (cc.topology == Topology::Torus) {
    double cellvol = 1.0;
    for (int a = 0; a < cc.dimension; ++a) cellvol *= cc.spacing(a);
    // Each cell's primal-dual diamond has the same volume on a product grid.
    for (int q = 0; q <= cc.dimension; ++q)
      mass[q] = VectorXd::Constant(cc.cells(q), cellvol);
    return mass;
  }

  // Sphere: circumcentric duals. Integrated-cochain (ratio) convention:
  //   M^0 = dual area, M^1 = |*e| / |e|, M^2 = 1 / area.
  const int nv = cc.cells(0), ne = cc.cells(1), nf = cc.cells(2);
  mass[0] = VectorXd::Zero(nv);
  mass[1] = VectorXd::Zero(ne);
  mass[2] = VectorXd::Zero(nf);

  // Recover face->edge and edge->vertex incidence from coboundary patterns.
  std::vector<std::array<int, 2>> everts(ne, {-1, -1});
  for (int k = 0; k < cc.coboundary[0].outerSize(); ++k)
    for (SpMat::InnerIterator it(cc.coboundary[0], k); it; ++it) {
      if (it.value() < 0) everts[it.row()][0] = static_cast<int>(it.col());
      else everts[it.row()][1] = static_cast<int>(it.col());
    }
  std::vector<std::vector<int>> fedges(nf);
  for (int k = 0; k < cc.coboundary[1].outerSize(); ++k)
    for (SpMat::InnerIterator it(cc.coboundary[1], k); it; ++it)
      fedges[it.row()].push_back(static_cast<int>(it.col()));

  std::vector<double> edge_len(ne), dual_len(ne, 0.0);
  for (int e = 0; e < ne; ++e)
    edge_len[e] = (cc.barycenters[0].row(everts[e][0]) -
                   cc.barycenters[0].row(everts[e][1])).norm();

  for (int fi = 0; fi < nf; ++fi) {
    // face vertex set
    std::array<int, 3> fv{};
    {
      std::vector<int> vs;
      for (int e : fedges[fi])
        for (int v : everts[e])
          if (std::find(vs.begin(), vs.end(), v) == vs.end()) vs.push_back(v);
      if (vs.size() != 3) throw NumericError("icosphere: face without 3 vertices");
      std::copy(vs.begin(), vs.end(), fv.begin());
    }
    Eigen::Vector3d A = cc.barycenters[0].row(fv[0]);
    Eigen::Vector3d B = cc.barycenters[0].row(fv[1]);
    Eigen::Vector3d C = cc.barycenters[0].row(fv[2]);
    const double area = 0.5 * (B - A).cross(C - A).norm();
    if (!(area > 0.0))
      throw NumericError("hodge_inner_products: degenerate face " + std::to_string(fi));
    mass[2][fi] = 1.0 / area;

    // Planar circumcenter of the face.
    Eigen::Vector3d ab = B - A, ac = C - A, nrm = ab.cross(ac);
    Eigen::Vector3d cc3 = A + (ac.squaredNorm() * nrm.cross(ab) +
                               ab.squaredNorm() * ac.cross(nrm)) /
                              (2.0 * nrm.squaredNorm());

    for (int e : fedges[fi]) {
      Eigen::Vector3d P = cc.barycenters[0].row(everts[e][0]);
      Eigen::Vector3d Q = cc.barycenters[0].row(everts[e][1]);
      Eigen::Vector3d m = 0.5 * (P + Q);
      dual_len[e] += (cc3 - m).norm();
      // Voronoi quad {v, mid(v,other), circumcenter, mid(v, third)} split into
      // two triangles sharing (v, circumcenter): accumulate per edge end.
      for (int v : everts[e]) {
        Eigen::Vector3d V = cc.barycenters[0].row(v);
        mass[0][v] += 0.5 * (m - V).cross(cc3 - V).norm();
      }
    }
  }
  for (int e = 0; e < ne; ++e) mass[1][e] = dual_len[e] / edge_len[e];

  for (int q = 0; q <= 2; ++q) {
    for (int i = 0; i < mass[q].size(); ++i)
      if (!(mass[q][i] > 0.0))
        throw NumericError("hodge_inner_products: non-positive dual volume at degree " +
                           std::to_string(q) + " cell " + std::to_string(i));
  }
  return mass;
}

}  // namespace wit
