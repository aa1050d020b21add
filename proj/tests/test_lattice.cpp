#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "anderson/lattice.hpp"

using namespace anderson;

TEST_CASE("box indexing round-trips") {
  LatticeBox box({-2, 3, 0}, {1, 5, 2});
  REQUIRE(box.size() == 4 * 3 * 3);
  for (long i = 0; i < box.size(); ++i) REQUIRE(box.index_of(box.site_of(i)) == i);
  std::vector<Site> sites = enumerate_sites(box);
  REQUIRE(static_cast<long>(sites.size()) == box.size());
  for (size_t i = 0; i < sites.size(); ++i) REQUIRE(box.index_of(sites[i]) == static_cast<long>(i));
}

TEST_CASE("row-major order puts the last coordinate fastest") {
  LatticeBox box({0, 0}, {1, 2});
  REQUIRE(box.index_of({0, 0}) == 0);
  REQUIRE(box.index_of({0, 1}) == 1);
  REQUIRE(box.index_of({0, 2}) == 2);
  REQUIRE(box.index_of({1, 0}) == 3);
}

TEST_CASE("box rejects bad input") {
  REQUIRE_THROWS_AS(LatticeBox({0, 0}, {1}), std::invalid_argument);
  REQUIRE_THROWS_AS(LatticeBox({2}, {1}), std::invalid_argument);
  LatticeBox box({0}, {3});
  REQUIRE_THROWS_AS(neighbors({7}, box), std::domain_error);
}

TEST_CASE("neighbors are truncated at the boundary") {
  LatticeBox box({0, 0}, {2, 2});
  REQUIRE(neighbors({1, 1}, box).size() == 4);
  REQUIRE(neighbors({0, 1}, box).size() == 3);
  REQUIRE(neighbors({0, 0}, box).size() == 2);
  for (const Site& s : neighbors({0, 0}, box)) {
    REQUIRE(box.contains(s));
    int dist = std::abs(s[0]) + std::abs(s[1]);
    REQUIRE(dist == 1);
  }
}

TEST_CASE("tile arithmetic handles negative coordinates") {
  TileGeometry geom({2, 3});
  REQUIRE(geom.tile_of({0, 0}) == Site{0, 0});
  REQUIRE(geom.tile_of({1, 2}) == Site{0, 0});
  REQUIRE(geom.tile_of({-1, -1}) == Site{-1, -1});
  REQUIRE(geom.tile_of({-2, -3}) == Site{-1, -1});
  REQUIRE(geom.tile_of({-3, -4}) == Site{-2, -2});
  // offset + period * tile reconstructs the site
  for (int x = -5; x <= 5; ++x)
    for (int y = -5; y <= 5; ++y) {
      Site s{x, y};
      Site t = geom.tile_of(s);
      Site o = geom.offset_in_tile(s);
      REQUIRE(s[0] == t[0] * 2 + o[0]);
      REQUIRE(s[1] == t[1] * 3 + o[1]);
      REQUIRE(o[0] >= 0);
      REQUIRE(o[0] < 2);
      REQUIRE(o[1] >= 0);
      REQUIRE(o[1] < 3);
    }
}

TEST_CASE("tiles partition a box") {
  TileGeometry geom({2, 2});
  LatticeBox box({-3, -3}, {4, 4});
  std::vector<Site> tiles = geom.tiles_intersecting(box);
  long covered = 0;
  for (const Site& m : tiles) {
    for (const Site& s : geom.tile_sites(m))
      if (box.contains(s)) ++covered;
  }
  REQUIRE(covered == box.size());
  // no duplicate tiles
  std::set<Site> uniq(tiles.begin(), tiles.end());
  REQUIRE(uniq.size() == tiles.size());
}

TEST_CASE("l-infinity tile distance") {
  REQUIRE(linf_tile_distance({0, 0}, {0, 0}) == 0);
  REQUIRE(linf_tile_distance({0, 0}, {1, -1}) == 1);
  REQUIRE(linf_tile_distance({2, 0}, {-1, 1}) == 3);
}

TEST_CASE("boundary layer separates inner tiles from the exterior") {
  TileGeometry geom({2, 2});
  LatticeBox ambient({-4, -4}, {3, 3});  // tile indices
  std::vector<Site> inner{{0, 0}, {-1, 0}};
  BoundaryLayer layer = boundary_layer(inner, geom, ambient);
  // every tile meeting the ambient site box lands in exactly one class
  const size_t total = layer.inner.size() + layer.layer.size() + layer.exterior.size();
  REQUIRE(total == geom.tiles_intersecting(ambient).size());
  // no exterior tile touches an inner tile
  for (const Site& e : layer.exterior)
    for (const Site& i : layer.inner) REQUIRE(linf_tile_distance(e, i) > 1);
  // every layer tile is adjacent to the inner set
  for (const Site& l : layer.layer) {
    int d = 100;
    for (const Site& i : layer.inner) d = std::min(d, linf_tile_distance(l, i));
    REQUIRE(d == 1);
  }
}
