#ifndef ANDERSON_LATTICE_HPP
#define ANDERSON_LATTICE_HPP

#include <algorithm>
#include <set>
#include <stdexcept>
#include <vector>

namespace anderson {

/// A lattice site in Z^d.
using Site = std::vector<int>;

/// Finite rectangular box in Z^d with inclusive bounds and a row-major
/// site <-> index bijection.
struct LatticeBox {
  int dim = 0;
  Site lower;
  Site upper;

  LatticeBox() = default;
  LatticeBox(Site lo, Site up) : dim(static_cast<int>(lo.size())), lower(std::move(lo)), upper(std::move(up)) {
    if (upper.size() != lower.size() || dim == 0)
      throw std::invalid_argument("LatticeBox: dimension mismatch");
    for (int i = 0; i < dim; ++i)
      if (lower[i] > upper[i]) throw std::invalid_argument("LatticeBox: lower > upper");
  }

  int extent(int i) const { return upper[i] - lower[i] + 1; }

  long size() const {
    long n = 1;
    for (int i = 0; i < dim; ++i) n *= extent(i);
    return n;
  }

  bool contains(const Site& s) const {
    if (static_cast<int>(s.size()) != dim) return false;
    for (int i = 0; i < dim; ++i)
      if (s[i] < lower[i] || s[i] > upper[i]) return false;
    return true;
  }

  // Row-major: the last coordinate varies fastest.
  long index_of(const Site& s) const {
    if (!contains(s)) throw std::domain_error("LatticeBox::index_of: site outside box");
    long idx = 0;
    for (int i = 0; i < dim; ++i) idx = idx * extent(i) + (s[i] - lower[i]);
    return idx;
  }

  Site site_of(long idx) const {
    if (idx < 0 || idx >= size()) throw std::domain_error("LatticeBox::site_of: index out of range");
    Site s(dim);
    for (int i = dim - 1; i >= 0; --i) {
      s[i] = lower[i] + static_cast<int>(idx % extent(i));
      idx /= extent(i);
    }
    return s;
  }
};

inline std::vector<Site> enumerate_sites(const LatticeBox& box) {
  std::vector<Site> sites;
  sites.reserve(static_cast<size_t>(box.size()));
  for (long i = 0; i < box.size(); ++i) sites.push_back(box.site_of(i));
  return sites;
}

/// Nearest neighbors (l1-distance 1) of `site` that lie inside `box`.
/// Hoppings leaving the box are dropped (Dirichlet truncation).
inline std::vector<Site> neighbors(const Site& site, const LatticeBox& box) {
  if (!box.contains(site)) throw std::domain_error("neighbors: site outside box");
  std::vector<Site> out;
  for (int i = 0; i < box.dim; ++i) {
    for (int step : {-1, +1}) {
      Site k = site;
      k[i] += step;
      if (box.contains(k)) out.push_back(std::move(k));
    }
  }
  return out;
}

/// Partition of Z^d into translates C_m = C_0 + (m_1 L_1, ..., m_d L_d) of the
/// base tile C_0 = {0..L_1-1} x ... x {0..L_d-1}.
struct TileGeometry {
  std::vector<int> period;

  TileGeometry() = default;
  explicit TileGeometry(std::vector<int> L) : period(std::move(L)) {
    if (period.empty()) throw std::invalid_argument("TileGeometry: empty period");
    for (int p : period)
      if (p <= 0) throw std::invalid_argument("TileGeometry: non-positive period");
  }

  int dim() const { return static_cast<int>(period.size()); }

  long tile_size() const {
    long n = 1;
    for (int p : period) n *= p;
    return n;
  }

  // Floor division so that negative coordinates land in the correct tile.
  Site tile_of(const Site& site) const {
    Site m(dim());
    for (int i = 0; i < dim(); ++i) {
      int q = site[i] / period[i];
      if (site[i] % period[i] != 0 && site[i] < 0) --q;
      m[i] = q;
    }
    return m;
  }

  Site offset_in_tile(const Site& site) const {
    Site m = tile_of(site);
    Site off(dim());
    for (int i = 0; i < dim(); ++i) off[i] = site[i] - m[i] * period[i];
    return off;
  }

  LatticeBox tile_box(const Site& m) const {
    Site lo(dim()), up(dim());
    for (int i = 0; i < dim(); ++i) {
      lo[i] = m[i] * period[i];
      up[i] = lo[i] + period[i] - 1;
    }
    return LatticeBox(lo, up);
  }

  std::vector<Site> tile_sites(const Site& m) const { return enumerate_sites(tile_box(m)); }

  /// All tile indices whose tiles intersect `box`.
  std::vector<Site> tiles_intersecting(const LatticeBox& box) const {
    Site lo(dim()), up(dim());
    for (int i = 0; i < dim(); ++i) {
      lo[i] = tile_of(box.lower)[i];
      up[i] = tile_of(box.upper)[i];
    }
    return enumerate_sites(LatticeBox(lo, up));
  }
};

inline Site tile_of(const Site& site, const TileGeometry& geom) { return geom.tile_of(site); }

inline int linf_tile_distance(const Site& a, const Site& b) {
  int d = 0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// Classification of the tiles meeting an ambient box into an inner set, the
/// l-infinity distance-1 shell around it, and the rest.
struct BoundaryLayer {
  std::vector<Site> inner;
  std::vector<Site> layer;
  std::vector<Site> exterior;
};

inline BoundaryLayer boundary_layer(const std::vector<Site>& inner_tiles, const TileGeometry& geom,
                                    const LatticeBox& ambient) {
  std::set<Site> inner(inner_tiles.begin(), inner_tiles.end());
  BoundaryLayer out;
  for (const Site& m : geom.tiles_intersecting(ambient)) {
    if (inner.count(m)) {
      out.inner.push_back(m);
      continue;
    }
    bool adjacent = false;
    for (const Site& n : inner)
      if (linf_tile_distance(m, n) == 1) {
        adjacent = true;
        break;
      }
    (adjacent ? out.layer : out.exterior).push_back(m);
  }
  return out;
}

}  // namespace anderson

#endif
