#include <map>
#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "anderson/models.hpp"

using namespace anderson;

namespace {

// Breadth-first count of shortest monotone paths from 0 to j, used as an
// independent oracle for shortest_path_count.
long bfs_path_count(const Site& j) {
  long total = 0;
  for (int c : j) total += std::abs(c);
  std::map<Site, long> counts{{Site(j.size(), 0), 1}};
  for (int step = 0; step < total; ++step) {
    std::map<Site, long> next;
    for (const auto& [s, cnt] : counts) {
      for (size_t i = 0; i < s.size(); ++i)
        for (int d : {-1, 1}) {
          Site t = s;
          t[i] += d;
          // keep only moves that shrink the remaining distance
          long before = std::abs(j[i] - s[i]);
          long after = std::abs(j[i] - t[i]);
          if (after < before) next[t] += cnt;
        }
    }
    counts = std::move(next);
  }
  auto it = counts.find(j);
  return it == counts.end() ? 0 : it->second;
}

}  // namespace

TEST_CASE("shortest path counts match a BFS oracle") {
  for (Site j : std::vector<Site>{{1}, {3}, {1, 1}, {2, 1}, {2, 2}, {3, 1}, {1, 1, 1}, {2, 1, 1}}) {
    REQUIRE(shortest_path_count(j) == bfs_path_count(j));
  }
  REQUIRE(shortest_path_count({1, 1}) == 2);
  REQUIRE(shortest_path_count({2, 1}) == 3);
  REQUIRE_THROWS_AS(shortest_path_count({0, 0}), std::domain_error);
}

TEST_CASE("laplacian is the adjacency matrix of the truncated box") {
  LatticeBox box({0, 0}, {2, 2});
  Matrix h = laplacian_matrix(box);
  REQUIRE(h.rows() == 9);
  REQUIRE((h - h.transpose()).norm() == 0.0);
  for (const Site& s : enumerate_sites(box)) {
    double row = h.row(box.index_of(s)).sum();
    REQUIRE(row == static_cast<double>(neighbors(s, box).size()));
  }
  REQUIRE(h.diagonal().norm() == 0.0);
}

TEST_CASE("discrete model puts omega on the diagonal") {
  LatticeBox box({0}, {3});
  Vector omega{{0.1, 0.2, 0.3, 0.4}};
  Hamiltonian h = build_discrete_anderson(box, omega);
  REQUIRE((h.matrix.diagonal() - omega).norm() == 0.0);
  REQUIRE((h.matrix - h.hopping - h.potential).norm() == 0.0);
}

TEST_CASE("sampling is deterministic and independent across trials") {
  DisorderSpec spec{DisorderLaw::Uniform, 0, 1, 0, 1, 42};
  Vector a = sample_omega(spec, 100, 7);
  Vector b = sample_omega(spec, 100, 7);
  Vector c = sample_omega(spec, 100, 8);
  REQUIRE((a - b).norm() == 0.0);
  REQUIRE((a - c).norm() > 0.0);
  REQUIRE(a.minCoeff() >= 0.0);
  REQUIRE(a.maxCoeff() <= 1.0);
}

TEST_CASE("uniform sample mean sits in the CLT band") {
  DisorderSpec spec{DisorderLaw::Uniform, 0, 1, 0, 1, 3};
  const long n = 40000;
  Vector a = sample_omega(spec, n, 0);
  const double mean = a.mean();
  const double sigma = 1.0 / std::sqrt(12.0 * n);
  REQUIRE(std::abs(mean - 0.5) < 5 * sigma);
}

TEST_CASE("truncated gaussian respects its support") {
  DisorderSpec spec{DisorderLaw::TruncatedGaussian, -1, 1, 0, 0.5, 3};
  Vector a = sample_omega(spec, 5000, 1);
  REQUIRE(a.minCoeff() >= -1.0);
  REQUIRE(a.maxCoeff() <= 1.0);
  REQUIRE(std::abs(a.mean()) < 0.05);
}

TEST_CASE("model A with diagonal W is a direct sum of scalar models") {
  LatticeBox box({0, 0}, {2, 2});
  Vector omega = sample_omega({DisorderLaw::Uniform, 0, 1, 0, 1, 5}, box.size(), 0);
  Matrix w = Vector{{1.0, 2.0}}.asDiagonal();
  EigenDecomposition full = hermitian_eig(build_model_a(box, w, omega).matrix);
  std::vector<double> merged;
  for (double lam : {1.0, 2.0}) {
    EigenDecomposition part = hermitian_eig(build_discrete_anderson(box, Vector(lam * omega)).matrix);
    for (long i = 0; i < part.values.size(); ++i) merged.push_back(part.values(i));
  }
  std::sort(merged.begin(), merged.end());
  for (long i = 0; i < full.values.size(); ++i) REQUIRE(std::abs(full.values(i) - merged[i]) < 1e-10);
}

TEST_CASE("model A rejects non positive definite W") {
  LatticeBox box({0}, {1});
  Vector omega = Vector::Zero(2);
  Matrix w(2, 2);
  w << 1, 0, 0, -1;
  REQUIRE_THROWS_AS(build_model_a(box, w, omega), std::invalid_argument);
}

TEST_CASE("model B diagonal covers the box with tile values") {
  TileGeometry geom({2, 2});
  LatticeBox box({-1, -1}, {2, 2});
  Vector f{{1.0, 2.0, 3.0, 4.0}};
  std::vector<Site> tiles = geom.tiles_intersecting(box);
  Vector omega(static_cast<long>(tiles.size()));
  for (long i = 0; i < omega.size(); ++i) omega(i) = static_cast<double>(i + 1);
  Hamiltonian h = build_model_b(box, geom, f, omega);
  for (const Site& s : enumerate_sites(box)) {
    const Site tile = geom.tile_of(s);
    const long ti = static_cast<long>(std::find(tiles.begin(), tiles.end(), tile) - tiles.begin());
    const Site off = geom.offset_in_tile(s);
    const long fi = geom.tile_box(Site{0, 0}).index_of(off);
    REQUIRE(h.matrix(h.index(s), h.index(s)) == omega(ti) * f(fi));
  }
}

TEST_CASE("model B rejects non-positive single-site profile") {
  TileGeometry geom({2});
  LatticeBox box({0}, {3});
  REQUIRE_THROWS_AS(build_model_b(box, geom, Vector{{1.0, 0.0}}, Vector::Ones(2)), std::invalid_argument);
}

TEST_CASE("site potentials square to V on their support") {
  LatticeBox box({0, 0}, {3, 3});
  TileGeometry geom({2, 2});
  Vector f{{1.0, 0.5, 2.0, 0.25}};
  for (const SitePotential& p :
       {discrete_site_potential(box, {1, 2}), model_b_site_potential(box, geom, f, {0, 0}),
        model_a_site_potential(box, Matrix(Vector{{1.0, 2.0}}.asDiagonal()), {1, 1})}) {
    REQUIRE((p.sqrt_v * p.sqrt_v - p.v).norm() < 1e-12);
    REQUIRE(p.support.size() == static_cast<size_t>(p.v.rows()));
  }
}

TEST_CASE("two-site potential occupies the tiles above and left of the core") {
  Hamiltonian h = build_two_site(2.0, 3.0, 5);
  for (const Site& s : enumerate_sites(h.box)) {
    const double v = h.potential(h.index(s), h.index(s));
    const bool above = s[0] >= 0 && s[0] <= 1 && s[1] >= 2 && s[1] <= 3;
    const bool left = s[0] >= -2 && s[0] <= -1 && s[1] >= 0 && s[1] <= 1;
    if (above)
      REQUIRE(v == 2.0);
    else if (left)
      REQUIRE(v == 3.0);
    else
      REQUIRE(v == 0.0);
  }
}

TEST_CASE("two-tile operator lists core sites first") {
  TileGeometry geom({2, 2});
  TwoTile tt = build_two_tile(geom, {0, 0}, {-1, 0}, 1.5, Vector::Ones(4));
  REQUIRE(tt.c_size == 4);
  REQUIRE(static_cast<long>(tt.sites.size()) == tt.matrix.rows());
  for (long i = 0; i < tt.c_size; ++i) REQUIRE(geom.tile_of(tt.sites[i]) == Site{0, 0});
  for (long i = tt.c_size; i < static_cast<long>(tt.sites.size()); ++i)
    REQUIRE(geom.tile_of(tt.sites[i]) == Site{-1, 0});
}

TEST_CASE("embed_potential reproduces the assembled potential") {
  LatticeBox box({0, 0}, {3, 3});
  TileGeometry geom({2, 2});
  Vector f{{1.0, 0.5, 2.0, 0.25}};
  std::vector<Site> tiles = geom.tiles_intersecting(box);
  Vector omega = Vector::Zero(static_cast<long>(tiles.size()));
  const long t0 = static_cast<long>(std::find(tiles.begin(), tiles.end(), Site{0, 0}) - tiles.begin());
  omega(t0) = 1.0;
  Hamiltonian h = build_model_b(box, geom, f, omega);
  SitePotential p = model_b_site_potential(box, geom, f, {0, 0});
  REQUIRE((embed_potential(p, box.size()) - h.potential).norm() < 1e-14);
}

TEST_CASE("build_model dispatch agrees with the per-kind builders") {
  LatticeBox box({0, 0}, {3, 3});
  Vector omega = sample_omega({DisorderLaw::Uniform, 0, 1, 0, 1, 9}, box.size(), 0);
  ModelSpec spec;
  spec.kind = ModelKind::Discrete;
  spec.box = box;
  REQUIRE((build_model(spec, omega).matrix - build_discrete_anderson(box, omega).matrix).norm() == 0.0);
  REQUIRE(omega_count(spec) == box.size());
}
