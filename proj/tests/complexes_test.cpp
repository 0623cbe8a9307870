#include "doctest.h"

#include "wit/cell_complex.hpp"
#include "wit/complex_ops.hpp"
#include "wit/io.hpp"

#include <random>

using namespace wit;

namespace {

double dd_max_norm(const CellComplex& cc) {
  double worst = 0.0;
  for (int q = 0; q + 1 < cc.dimension; ++q)
    worst = std::max(worst, sparse_max_abs(SpMat(cc.coboundary[q + 1] * cc.coboundary[q])));
  return worst;
}

}  // namespace

TEST_CASE("torus grid combinatorics") {
  auto c1 = build_torus_grid(1, 8, {1.0});
  CHECK(c1.cells(0) == 8);
  CHECK(c1.cells(1) == 8);
  // D^0 is the signed cyclic difference matrix.
  MatrixXd d0 = MatrixXd(c1.coboundary[0]);
  for (int i = 0; i < 8; ++i) {
    CHECK(d0(i, i) == -1.0);
    CHECK(d0(i, (i + 1) % 8) == 1.0);
    CHECK(d0.row(i).cwiseAbs().sum() == 2.0);
  }

  auto c2 = build_torus_grid(2, 4, {1.0, 1.0});
  CHECK(c2.cells(0) == 16);
  CHECK(c2.cells(1) == 32);
  CHECK(c2.cells(2) == 16);
  CHECK(c2.cells(0) - c2.cells(1) + c2.cells(2) == 0);
  CHECK(dd_max_norm(c2) == 0.0);

  auto c3 = build_torus_grid(3, 4, {1.0, 2.0, 3.0});
  CHECK(c3.cells(0) == 64);
  CHECK(c3.cells(1) == 3 * 64);
  CHECK(dd_max_norm(c3) == 0.0);

  CHECK_THROWS_AS(build_torus_grid(2, 3, {1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(build_torus_grid(2, 8, {1.0, -1.0}), InvalidArgument);

  // Barycenters lie in the fundamental domain.
  for (int q = 0; q <= 3; ++q)
    for (int i = 0; i < c3.cells(q); ++i)
      for (int a = 0; a < 3; ++a) {
        CHECK(c3.barycenters[q](i, a) >= 0.0);
        CHECK(c3.barycenters[q](i, a) < c3.periods[a]);
      }
}

TEST_CASE("icosphere combinatorics") {
  auto s0 = build_icosphere(0);
  CHECK(s0.cells(0) == 12);
  CHECK(s0.cells(1) == 30);
  CHECK(s0.cells(2) == 20);
  CHECK(s0.cells(0) - s0.cells(1) + s0.cells(2) == 2);

  auto s1 = build_icosphere(1);
  CHECK(s1.cells(0) == 42);
  CHECK(s1.cells(1) == 120);
  CHECK(s1.cells(2) == 80);

  CHECK(sparse_max_abs(SpMat(s1.coboundary[1] * s1.coboundary[0])) == 0.0);
  CHECK_THROWS_AS(build_icosphere(7), InvalidArgument);
}

TEST_CASE("hodge inner products") {
  auto circle = build_torus_grid(1, 8, {1.0});
  auto mass = hodge_inner_products(circle);
  for (int q = 0; q <= 1; ++q) {
    CHECK(mass[q].size() == 8);
    CHECK(mass[q].minCoeff() == doctest::Approx(1.0 / 8).epsilon(1e-14));
    CHECK(mass[q].maxCoeff() == doctest::Approx(1.0 / 8).epsilon(1e-14));
  }

  auto t2 = build_torus_grid(2, 6, {1.0, 1.0});
  auto ipc = make_inner_product_complex(t2);
  VectorXd ones = VectorXd::Ones(t2.cells(0));
  CHECK(ipc.metric[0].inner(ones, ones) == doctest::Approx(1.0).epsilon(1e-13));

  auto sph = build_icosphere(2);
  auto smass = hodge_inner_products(sph);
  for (int q = 0; q <= 2; ++q) CHECK(smass[q].minCoeff() > 0.0);
  // Vertex dual areas tile the sphere's triangulated surface.
  double area0 = smass[0].sum();
  double area2 = 0.0;
  for (int f = 0; f < sph.cells(2); ++f) area2 += 1.0 / smass[2][f];
  CHECK(area0 == doctest::Approx(area2).epsilon(1e-10));
}

TEST_CASE("adjoint differential") {
  auto circle = build_torus_grid(1, 8, {1.0});
  auto ipc = make_inner_product_complex(circle);

  SUBCASE("uniform equal masses give the plain transpose") {
    SpMat adj = adjoint_differential(ipc, 1);
    CHECK(sparse_max_abs(SpMat(adj - SpMat(ipc.d[0].transpose()))) == 0.0);
  }

  SUBCASE("scalar masses scale the transpose") {
    InnerProductComplex scaled = ipc;
    scaled.metric[0] = Metric::diagonal(VectorXd::Constant(8, 2.0));
    scaled.metric[1] = Metric::diagonal(VectorXd::Constant(8, 6.0));
    SpMat adj = adjoint_differential(scaled, 1);
    SpMat expect = SpMat(3.0 * SpMat(scaled.d[0].transpose()));
    CHECK(sparse_max_abs(SpMat(adj - expect)) < 1e-14);
  }

  SUBCASE("adjoint identity with random SPD masses") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist;
    auto spd = [&](int n) {
      MatrixXd a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = dist(rng);
      return Metric::dense(MatrixXd(a * a.transpose() + 0.5 * MatrixXd::Identity(n, n)));
    };
    InnerProductComplex rnd = ipc;
    rnd.metric[0] = spd(8);
    rnd.metric[1] = spd(8);
    SpMat adj = adjoint_differential(rnd, 1);
    for (int trial = 0; trial < 5; ++trial) {
      VectorXd alpha(8), beta(8);
      for (int i = 0; i < 8; ++i) { alpha[i] = dist(rng); beta[i] = dist(rng); }
      double lhs = rnd.metric[1].inner(VectorXd(rnd.d[0] * alpha), beta);
      double rhs = rnd.metric[0].inner(alpha, VectorXd(adj * beta));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("laplacian spectra") {
  SUBCASE("circle eigenvalues follow the cyclic closed form") {
    const int N = 16;
    auto circle = build_torus_grid(1, N, {1.0});
    auto ipc = make_inner_product_complex(circle);
    MatrixXd lap = MatrixXd(laplacian(ipc, 0));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(lap);
    std::vector<double> oracle;
    for (int k = 0; k < N; ++k) {
      double v = 2.0 * N * std::sin(M_PI * k / N);
      oracle.push_back(v * v);
    }
    std::sort(oracle.begin(), oracle.end());
    for (int k = 0; k < N; ++k)
      CHECK(es.eigenvalues()[k] == doctest::Approx(oracle[k]).epsilon(1e-11));
  }

  SUBCASE("kernel of degree 0 is the constants") {
    auto t2 = build_torus_grid(2, 6, {1.0, 1.0});
    auto ipc = make_inner_product_complex(t2);
    MatrixXd lap = MatrixXd(laplacian(ipc, 0));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(lap);
    CHECK(es.eigenvalues()[0] < 1e-12);
    CHECK(es.eigenvalues()[1] > 1e-3);
    VectorXd v = es.eigenvectors().col(0);
    CHECK((v.array() - v.mean()).abs().maxCoeff() < 1e-10);
  }

  SUBCASE("torus duality: degree 0 and degree n spectra agree") {
    auto t2 = build_torus_grid(2, 6, {1.0, 1.0});
    auto ipc = make_inner_product_complex(t2);
    Eigen::SelfAdjointEigenSolver<MatrixXd> e0(MatrixXd(laplacian(ipc, 0)));
    Eigen::SelfAdjointEigenSolver<MatrixXd> e2(MatrixXd(laplacian(ipc, 2)));
    double scale = std::max(1.0, e0.eigenvalues().cwiseAbs().maxCoeff());
    CHECK((e0.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff() / scale < 1e-9);
  }

  SUBCASE("spectra nonnegative and M-self-adjoint") {
    for (auto cc : {build_torus_grid(2, 4, {2.0, 1.0})}) {
      auto ipc = make_inner_product_complex(cc);
      for (int q = 0; q <= 2; ++q) {
        SpMat lap = laplacian(ipc, q);
        CHECK(self_adjointness_defect(ipc, lap, q) < 1e-12);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym_laplacian_dense(ipc, q));
        double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
        CHECK(es.eigenvalues().minCoeff() > -1e-10 * scale);
      }
    }
    auto sph = build_icosphere(1);
    auto ipc = make_inner_product_complex(sph);
    for (int q = 0; q <= 2; ++q)
      CHECK(self_adjointness_defect(ipc, laplacian(ipc, q), q) < 1e-12);
  }
}

TEST_CASE("complex validation and export") {
  auto t2 = build_torus_grid(2, 4, {1.0, 1.0});
  auto ipc = make_inner_product_complex(t2);
  CHECK_NOTHROW(ipc.validate());

  std::string doc = io::complex_description_json(t2);
  CHECK(doc.find("\"torus\"") != std::string::npos);
  CHECK(doc.find("\"cell_counts\"") != std::string::npos);

  auto tmp = std::filesystem::temp_directory_path() / "wit_d0.csv";
  io::write_coboundary_csv(tmp, t2.coboundary[0]);
  CHECK(std::filesystem::file_size(tmp) > 0);
  std::filesystem::remove(tmp);
}
