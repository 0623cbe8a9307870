#include "doctest.h"

#include "wit/derham.hpp"

#include <random>

using namespace wit;

TEST_CASE("spectral package on the circle") {
  const int N = 64;
  auto cc = build_torus_grid(1, N, {1.0});
  auto ipc = make_inner_product_complex(cc);
  auto pkg = spectral_package(ipc, 0, 8);

  const double l1 = std::pow(2.0 * N * std::sin(M_PI / N), 2);
  CHECK(pkg.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(pkg.eigenvalues[1] == doctest::Approx(l1).epsilon(1e-10));
  CHECK(pkg.eigenvalues[2] == doctest::Approx(l1).epsilon(1e-10));
  CHECK(pkg.groups.size() >= 3);
  CHECK(pkg.groups[0].size() == 1);   // zero is simple
  CHECK(pkg.groups[1].size() == 2);   // first pair is double

  // M-orthonormality of the eigenvectors.
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j <= i; ++j) {
      double ip = ipc.metric[0].inner(pkg.eigenvectors.col(i), pkg.eigenvectors.col(j));
      CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-9);
    }
  for (int i = 0; i < 8; ++i)
    CHECK(pkg.residuals[i] <= 1e-8 * (1.0 + std::abs(pkg.eigenvalues[i])));
}

TEST_CASE("betti numbers across models") {
  auto t2 = make_inner_product_complex(build_torus_grid(2, 8, {1.0, 1.0}));
  CHECK(betti_numbers(t2) == std::vector<int>{1, 2, 1});
  CHECK(euler_characteristic(t2) == 0);
  CHECK(harmonic_euler(t2) == 0);

  auto sph = make_inner_product_complex(build_icosphere(2));
  CHECK(betti_numbers(sph) == std::vector<int>{1, 0, 1});
  CHECK(euler_characteristic(sph) == 2);
  CHECK(harmonic_euler(sph) == 2);

  auto t3 = make_inner_product_complex(build_torus_grid(3, 8, {1.0, 1.0, 1.0}));
  CHECK(betti_numbers(t3) == std::vector<int>{1, 3, 3, 1});
  CHECK(euler_characteristic(t3) == 0);
  CHECK(harmonic_euler(t3) == 0);

  // Kernel dimensions stable under refinement.
  auto t2f = make_inner_product_complex(build_torus_grid(2, 16, {1.0, 1.0}));
  CHECK(betti_numbers(t2f) == std::vector<int>{1, 2, 1});
}

TEST_CASE("kernel detection contract") {
  VectorXd clean(5);
  clean << 1e-14, 1e-13, 0.5, 1.0, 2.0;
  CHECK(kernel_dimension(clean) == 2);

  VectorXd none(4);
  none << 0.3, 0.5, 1.0, 2.0;
  CHECK(kernel_dimension(none) == 0);

  VectorXd ambiguous(4);
  ambiguous << 1e-9, 5e-9, 1.1e-8, 1.0;  // zeros not separated by a factor 10
  CHECK_THROWS_AS(kernel_dimension(ambiguous), NumericError);

  VectorXd zero = VectorXd::Zero(3);
  CHECK(kernel_dimension(zero) == 3);
}

TEST_CASE("hodge decomposition") {
  auto cc = build_torus_grid(2, 8, {1.0, 1.0});
  auto ipc = make_inner_product_complex(cc);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> dist;
  auto rand_vec = [&](Eigen::Index n) {
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
  };

  SUBCASE("an exact cochain has no coexact or harmonic part") {
    VectorXd alpha = rand_vec(ipc.dim(0));
    Cochain omega{1, VectorXd(ipc.d[0] * alpha)};
    auto split = hodge_decompose(ipc, omega);
    double norm = ipc.metric[1].norm(omega.values);
    CHECK(ipc.metric[1].norm(split.coexact.values) <= 1e-10 * norm);
    CHECK(ipc.metric[1].norm(split.harmonic.values) <= 1e-10 * norm);
  }

  SUBCASE("a harmonic cochain is its own harmonic part") {
    auto pkg = spectral_package(ipc, 1, 4);
    Cochain omega{1, VectorXd(pkg.eigenvectors.col(0))};
    auto split = hodge_decompose(ipc, omega);
    CHECK(ipc.metric[1].norm(split.exact.values) <= 1e-10);
    CHECK(ipc.metric[1].norm(split.coexact.values) <= 1e-10);
  }

  SUBCASE("random cochains recombine with orthogonal parts") {
    Cochain omega{1, rand_vec(ipc.dim(1))};
    auto split = hodge_decompose(ipc, omega);
    VectorXd sum = split.exact.values + split.coexact.values + split.harmonic.values;
    double norm = ipc.metric[1].norm(omega.values);
    CHECK(ipc.metric[1].norm(VectorXd(sum - omega.values)) <= 1e-10 * norm);
    CHECK(std::abs(ipc.metric[1].inner(split.exact.values, split.coexact.values)) <=
          1e-10 * norm * norm);
    CHECK(std::abs(ipc.metric[1].inner(split.exact.values, split.harmonic.values)) <=
          1e-10 * norm * norm);
    CHECK(std::abs(ipc.metric[1].inner(split.coexact.values, split.harmonic.values)) <=
          1e-10 * norm * norm);
  }
}

TEST_CASE("lattice volumes") {
  SUBCASE("unit torus has unit volumes") {
    auto cc = build_torus_grid(2, 12, {1.0, 1.0});
    auto ipc = make_inner_product_complex(cc);
    for (int q = 0; q <= 2; ++q)
      CHECK(lattice_volume(ipc, cc, q) == doctest::Approx(1.0).epsilon(1e-6));
    std::vector<double> vols = {lattice_volume(ipc, cc, 0), lattice_volume(ipc, cc, 1),
                                lattice_volume(ipc, cc, 2)};
    CHECK(volume_product(vols) == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("periods (2,1): top volume is the area") {
    auto cc = build_torus_grid(2, 12, {2.0, 1.0});
    auto ipc = make_inner_product_complex(cc);
    CHECK(lattice_volume(ipc, cc, 2) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(lattice_volume(ipc, cc, 1) == doctest::Approx(1.0).epsilon(1e-6));
    // Cycle-lattice Gram convention: V^0 = 1/vol on a non-unit torus.
    CHECK(lattice_volume(ipc, cc, 0) == doctest::Approx(0.5).epsilon(1e-6));
  }

  SUBCASE("invariance under harmonic basis change") {
    auto cc = build_torus_grid(2, 8, {1.0, 1.0});
    auto ipc = make_inner_product_complex(cc);
    auto pkg = spectral_package(ipc, 1, 6);
    MatrixXd basis = pkg.eigenvectors.leftCols(2);
    double v1 = lattice_volume(ipc, cc, 1, &basis);
    MatrixXd trans(2, 2);
    trans << 2.0, 1.0, -0.5, 3.0;
    MatrixXd basis2 = basis * trans;
    double v2 = lattice_volume(ipc, cc, 1, &basis2);
    CHECK(std::abs(v1 - v2) <= 1e-10 * std::abs(v1));
  }

  SUBCASE("volume product conventions") {
    CHECK(volume_product({}) == 1.0);  // single-point complex
    CHECK(volume_product({2.0, 4.0, 8.0}) == doctest::Approx(4.0));
  }
}
