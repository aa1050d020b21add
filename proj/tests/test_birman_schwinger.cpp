#include <catch2/catch_amalgamated.hpp>

#include "anderson/experiments.hpp"

using namespace anderson;

TEST_CASE("2x2 closed-form correspondence") {
  // H0 = [[0,1],[1,0]], V = e_0 e_0^T, H_lam = H0 + lam V. The eigenvector
  // correspondence must hold exactly in this tiny closed-form case.
  Matrix h0(2, 2);
  h0 << 0, 1, 1, 0;
  SitePotential v;
  v.support = {0};
  v.v = Matrix::Ones(1, 1);
  v.sqrt_v = Matrix::Ones(1, 1);
  const double lam = 0.7;
  Matrix hlam = h0;
  hlam(0, 0) += lam;
  CorrespondenceReport rep = bs_correspondence(hlam, h0, v, lam);
  REQUIRE(rep.rows.size() == 2);
  REQUIRE(rep.max_residual < 1e-12);
  // closed form: eigenvalues of H_lam are (lam +- sqrt(lam^2+4))/2 and
  // G(E) = e_0^T (H0-E)^{-1} e_0 = -E/(E^2-1) must equal -1/lam there
  for (const auto& row : rep.rows) {
    const double e = row.e;
    REQUIRE(std::abs(-e / (e * e - 1.0) + 1.0 / lam) < 1e-12);
  }
}

TEST_CASE("bs_block is Herglotz: imaginary part positive semidefinite in the upper half plane") {
  LatticeBox box({0, 0}, {3, 3});
  Vector omega = sample_omega({DisorderLaw::Uniform, 0, 1, 0, 1, 17}, box.size(), 0);
  Matrix h0 = build_discrete_anderson(box, omega).matrix;
  TileGeometry geom({2, 2});
  SitePotential v = model_b_site_potential(box, geom, Vector{{1.0, 0.5, 1.5, 0.7}}, {0, 0});
  for (Complex z : {Complex(0.3, 0.5), Complex(-2, 0.01), Complex(1, 3)}) {
    BSBlock g = bs_block(h0, v, z);
    CMatrix im = (g.block - g.block.adjoint()) / Complex(0, 2);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(im);
    REQUIRE(es.eigenvalues().minCoeff() > -1e-13);
  }
}

TEST_CASE("bs_block refuses real energies inside the spectrum") {
  LatticeBox box({0}, {5});
  Matrix h0 = laplacian_matrix(box);
  SitePotential v = discrete_site_potential(box, {2});
  EigenDecomposition ed = hermitian_eig(h0);
  REQUIRE_THROWS_AS(bs_block(h0, v, Complex(ed.values(0), 0.0)), NearSpectrum);
  REQUIRE_NOTHROW(bs_block(h0, v, Complex(10.0, 0.0)));
}

TEST_CASE("boundary values converge as epsilon decreases away from the spectrum") {
  LatticeBox box({0}, {5});
  Matrix h0 = laplacian_matrix(box);
  SitePotential v = discrete_site_potential(box, {2});
  BoundaryReport rep = bs_boundary(h0, v, 5.0, {1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12});
  REQUIRE(rep.converged);
  for (size_t i = 1; i < rep.diffs.size(); ++i) REQUIRE(rep.diffs[i] < rep.diffs[i - 1]);
}

TEST_CASE("correspondence on a random instance, exact in finite dimension") {
  TileGeometry geom({2, 2});
  LatticeBox box({0, 0}, {5, 5});
  Vector f{{1.0, 0.7, 1.3, 0.9}};
  const long tiles = static_cast<long>(geom.tiles_intersecting(box).size());
  Vector omega = sample_omega({DisorderLaw::Uniform, 0, 1, 0, 1, 23}, tiles, 0);
  Vector omega0 = omega;
  omega0(0) = 0.0;
  Matrix h0 = build_model_b(box, geom, f, omega0).matrix;
  Matrix hlam = build_model_b(box, geom, f, omega).matrix;
  CorrespondenceReport rep = bs_correspondence(hlam, h0, omega(0) == 0.0 ? throw std::logic_error("degenerate draw")
                                                                          : model_b_site_potential(box, geom, f, {0, 0}),
                                               omega(0));
  REQUIRE(rep.rows.size() + rep.skipped.size() == static_cast<size_t>(box.size()));
  REQUIRE(rep.max_residual < 1e-8);
}

TEST_CASE("neumann remainder shrinks with order and respects its bound") {
  LatticeBox box({0, 0}, {3, 3});
  Hamiltonian h = build_discrete_anderson(box, Vector::Zero(16));
  double prev = 1e300;
  for (int m = 0; m <= 6; ++m) {
    NeumannReport rep = neumann_remainder(h.matrix, Complex(0, 8), m);
    REQUIRE(rep.remainder <= rep.bound * (1 + 1e-12));
    REQUIRE(rep.remainder < prev);
    prev = rep.remainder;
  }
  REQUIRE_THROWS_AS(neumann_remainder(h.matrix, Complex(0, 1), 2), std::domain_error);
}

TEST_CASE("case (i): deviation decays like 1/|z| and simplicity persists") {
  LatticeBox box({0, 0}, {5, 5});
  Vector omega = sample_omega({DisorderLaw::Uniform, 0, 1, 0, 1, 31}, box.size(), 0);
  Matrix h = build_discrete_anderson(box, omega).matrix;
  TileGeometry geom({2, 2});
  SitePotential v = model_b_site_potential(box, geom, Vector{{1.0, 2.0, 3.0, 4.0}}, {0, 0});
  DeviationTable table = case_i_check(h, v, {Complex(0, 50), Complex(0, 100), Complex(0, 200)});
  for (size_t i = 1; i < table.rows.size(); ++i) {
    const double ratio = table.rows[i - 1].deviation / table.rows[i].deviation;
    REQUIRE(ratio > 1.6);
    REQUIRE(ratio < 2.4);
  }
  REQUIRE(table.rows.back().simple);
  // a constant profile is rejected up front
  SitePotential flat = model_b_site_potential(box, geom, Vector::Ones(4), {0, 0});
  REQUIRE_THROWS_AS(case_i_check(h, flat, {Complex(0, 50)}), std::invalid_argument);
}

TEST_CASE("case (ii): rescaled block approaches the exact Jacobi matrix") {
  TileGeometry geom({4, 1});
  LatticeBox box({0, 0}, {7, 7});
  Vector f = Vector::Ones(4);
  const long tiles = static_cast<long>(geom.tiles_intersecting(box).size());
  Vector omega = sample_omega({DisorderLaw::Uniform, 0, 1, 0, 1, 37}, tiles, 0);
  Matrix h = build_model_b(box, geom, f, omega).matrix;
  SitePotential v = model_b_site_potential(box, geom, f, {0, 0});
  // find omega for the tile at the origin: tiles_intersecting order
  std::vector<Site> tile_list = geom.tiles_intersecting(box);
  const long t0 = static_cast<long>(std::find(tile_list.begin(), tile_list.end(), Site{0, 0}) - tile_list.begin());
  CaseIiReport rep = case_ii_check(h, v, geom, omega(t0), {Complex(0, 50), Complex(0, 100), Complex(0, 200)});
  // the limit is the free Jacobi matrix on a path of length 4, exactly
  Matrix jacobi = Matrix::Zero(4, 4);
  for (int i = 0; i + 1 < 4; ++i) jacobi(i, i + 1) = jacobi(i + 1, i) = 1.0;
  REQUIRE((rep.limit - jacobi).norm() == 0.0);
  for (size_t i = 1; i < rep.table.rows.size(); ++i) {
    const double ratio = rep.table.rows[i - 1].deviation / rep.table.rows[i].deviation;
    REQUIRE(ratio > 1.6);
    REQUIRE(ratio < 2.4);
  }
  REQUIRE(rep.table.rows.back().simple);
}

TEST_CASE("case (iii) matrices match the derived references") {
  for (auto [a, b] : std::vector<std::pair<double, double>>{{1, 0}, {2, 3}, {-1, 4}}) {
    std::array<Matrix, 5> got = case_iii_matrices(a, b);
    std::array<Matrix, 5> want = case_iii_reference(a, b);
    for (int i = 0; i < 4; ++i) REQUIRE((got[i] - want[i]).cwiseAbs().maxCoeff() < 1e-10);
    const double c = 12.0 + (a * a + b * b) / 2.0;
    Matrix lower = got[4].bottomRightCorner(2, 2) - c * Matrix::Identity(2, 2);
    REQUIRE((lower - want[4].bottomRightCorner(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("splitting follows the cubic-decay prediction and both routes agree") {
  SplittingTable table = case_iii_splitting(1.0, 0.0, {Complex(0, 20), Complex(0, 40), Complex(0, 80)});
  REQUIRE(table.rows.size() == 3);
  for (size_t i = 0; i < table.rows.size(); ++i) {
    if (i > 0) REQUIRE(table.rows[i].relative_deviation < table.rows[i - 1].relative_deviation);
    REQUIRE(table.rows[i].schur_route_mismatch < 1e-8);
  }
  REQUIRE(table.rows.back().relative_deviation < 0.5);
  REQUIRE_THROWS_AS(case_iii_splitting(1.0, 1.0, {Complex(0, 20)}), std::invalid_argument);
}

TEST_CASE("splitting prediction scales with a - b") {
  SplittingTable t1 = case_iii_splitting(2.0, 0.5, {Complex(0, 60)});
  REQUIRE(std::abs(t1.rows[0].gap * 60.0 * 60.0 * 60.0 / (2.0 * 1.5) - 1.0) < 0.2);
}

TEST_CASE("threshold scan finds a persistent simplicity threshold") {
  LatticeBox box({0, 0}, {4, 4});
  Vector omega = sample_omega({DisorderLaw::Uniform, 0, 1, 0, 1, 41}, box.size(), 0);
  Matrix h = build_discrete_anderson(box, omega).matrix;
  TileGeometry geom({2, 2});
  SitePotential v = model_b_site_potential(box, geom, Vector{{1.0, 2.0, 3.0, 4.0}}, {0, 0});
  ThresholdScan scan = simplicity_threshold_scan(h, v, {5, 10, 20, 40, 80, 160});
  REQUIRE(scan.first_simple.has_value());
  REQUIRE(scan.persists);
}
