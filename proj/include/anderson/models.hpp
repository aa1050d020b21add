#ifndef ANDERSON_MODELS_HPP
#define ANDERSON_MODELS_HPP

#include <cstdint>
#include <map>
#include <random>

#include "anderson/lattice.hpp"
#include "anderson/linalg.hpp"

namespace anderson {

// ---------------------------------------------------------------------------
// Disorder
// ---------------------------------------------------------------------------

enum class DisorderLaw { Uniform, TruncatedGaussian };

struct DisorderSpec {
  DisorderLaw law = DisorderLaw::Uniform;
  double lo = 0.0;
  double hi = 1.0;
  double mean = 0.0;  // truncated gaussian only
  double sd = 1.0;    // truncated gaussian only
  std::uint64_t master_seed = 0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// RNG stream for trial t, derived deterministically from (master_seed, t).
inline std::mt19937_64 trial_stream(std::uint64_t master_seed, std::uint64_t trial) {
  return std::mt19937_64(detail::splitmix64(master_seed ^ detail::splitmix64(trial + 1)));
}

inline Vector sample_omega(const DisorderSpec& spec, long count, std::uint64_t trial) {
  auto rng = trial_stream(spec.master_seed, trial);
  Vector omega(count);
  if (spec.law == DisorderLaw::Uniform) {
    std::uniform_real_distribution<double> dist(spec.lo, spec.hi);
    for (long i = 0; i < count; ++i) omega(i) = dist(rng);
  } else {
    std::normal_distribution<double> dist(spec.mean, spec.sd);
    for (long i = 0; i < count; ++i) {
      double x;
      do {
        x = dist(rng);
      } while (x < spec.lo || x > spec.hi);
      omega(i) = x;
    }
  }
  return omega;
}

// ---------------------------------------------------------------------------
// Hamiltonians
// ---------------------------------------------------------------------------

/// Finite-volume Hamiltonian: matrix = hopping + potential, with the box and
/// channel count fixing the (site, channel) -> row map (site-major order).
struct Hamiltonian {
  Matrix matrix;
  Matrix hopping;
  Matrix potential;  // diagonal or block-diagonal part carrying the disorder
  LatticeBox box;
  int channels = 1;

  long index(const Site& s, int channel = 0) const { return box.index_of(s) * channels + channel; }
};

/// A single-site potential V_j: its global support rows, the form on the
/// support, and the cached square root (sqrt_v * sqrt_v = v).
struct SitePotential {
  std::vector<long> support;
  Matrix v;
  Matrix sqrt_v;
};

/// Hopping part of the truncated discrete Laplacian on `box`, acting
/// componentwise on `channels` channels.
inline Matrix laplacian_matrix(const LatticeBox& box, int channels = 1) {
  const long n = box.size() * channels;
  Matrix h = Matrix::Zero(n, n);
  for (const Site& s : enumerate_sites(box)) {
    const long i = box.index_of(s);
    for (const Site& k : neighbors(s, box)) {
      const long j = box.index_of(k);
      for (int c = 0; c < channels; ++c) h(i * channels + c, j * channels + c) = 1.0;
    }
  }
  return h;
}

inline Hamiltonian build_discrete_anderson(const LatticeBox& box, const Vector& omega) {
  if (omega.size() != box.size()) throw std::invalid_argument("build_discrete_anderson: omega size mismatch");
  Hamiltonian h;
  h.box = box;
  h.hopping = laplacian_matrix(box);
  h.potential = Matrix(omega.asDiagonal());
  h.matrix = h.hopping + h.potential;
  return h;
}

inline Matrix matrix_sqrt_spd(const Matrix& w) {
  EigenDecomposition ed = hermitian_eig(w);
  if (ed.values(0) < 0) throw std::invalid_argument("matrix_sqrt_spd: not positive semidefinite");
  return ed.vectors * ed.values.cwiseSqrt().asDiagonal() * ed.vectors.transpose();
}

/// Model A: h_0 componentwise plus the block omega_n * W at each site n.
/// W must be symmetric positive definite.
inline Hamiltonian build_model_a(const LatticeBox& box, const Matrix& w, const Vector& omega) {
  if (omega.size() != box.size()) throw std::invalid_argument("build_model_a: omega size mismatch");
  const int k = static_cast<int>(w.rows());
  EigenDecomposition wd = hermitian_eig(w);
  if (wd.values(0) <= 0) throw std::invalid_argument("build_model_a: W not positive definite");
  Hamiltonian h;
  h.box = box;
  h.channels = k;
  h.hopping = laplacian_matrix(box, k);
  h.potential = Matrix::Zero(box.size() * k, box.size() * k);
  for (long s = 0; s < box.size(); ++s)
    h.potential.block(s * k, s * k, k, k) = omega(s) * w;
  h.matrix = h.hopping + h.potential;
  return h;
}

inline SitePotential model_a_site_potential(const LatticeBox& box, const Matrix& w, const Site& site) {
  const int k = static_cast<int>(w.rows());
  SitePotential p;
  const long base = box.index_of(site) * k;
  for (int c = 0; c < k; ++c) p.support.push_back(base + c);
  p.v = w;
  p.sqrt_v = matrix_sqrt_spd(w);
  return p;
}

/// Model B: diagonal omega_{tile(s)} * f(offset of s in its tile).
/// `f` is indexed by the row-major order of the base tile C_0 and must be
/// strictly positive; `omega` is indexed by geom.tiles_intersecting(box).
inline Hamiltonian build_model_b(const LatticeBox& box, const TileGeometry& geom, const Vector& f,
                                 const Vector& omega) {
  if (f.size() != geom.tile_size()) throw std::invalid_argument("build_model_b: f size mismatch");
  for (long i = 0; i < f.size(); ++i)
    if (f(i) <= 0) throw std::invalid_argument("build_model_b: f must be strictly positive");
  const std::vector<Site> tiles = geom.tiles_intersecting(box);
  if (omega.size() != static_cast<long>(tiles.size()))
    throw std::invalid_argument("build_model_b: omega size mismatch");
  std::map<Site, double> tile_omega;
  for (size_t t = 0; t < tiles.size(); ++t) tile_omega[tiles[t]] = omega(static_cast<long>(t));
  const LatticeBox base = geom.tile_box(Site(geom.dim(), 0));

  Hamiltonian h;
  h.box = box;
  h.hopping = laplacian_matrix(box);
  Vector diag(box.size());
  for (const Site& s : enumerate_sites(box))
    diag(box.index_of(s)) = tile_omega.at(geom.tile_of(s)) * f(base.index_of(geom.offset_in_tile(s)));
  h.potential = Matrix(diag.asDiagonal());
  h.matrix = h.hopping + h.potential;
  return h;
}

/// V_m for Model B: f supported on the tile C_m (clipped to the box).
inline SitePotential model_b_site_potential(const LatticeBox& box, const TileGeometry& geom, const Vector& f,
                                            const Site& tile) {
  const LatticeBox base = geom.tile_box(Site(geom.dim(), 0));
  SitePotential p;
  std::vector<double> vals;
  for (const Site& s : geom.tile_sites(tile))
    if (box.contains(s)) {
      p.support.push_back(box.index_of(s));
      vals.push_back(f(base.index_of(geom.offset_in_tile(s))));
    }
  const long m = static_cast<long>(vals.size());
  p.v = Matrix::Zero(m, m);
  p.sqrt_v = Matrix::Zero(m, m);
  for (long i = 0; i < m; ++i) {
    p.v(i, i) = vals[i];
    p.sqrt_v(i, i) = std::sqrt(vals[i]);
  }
  return p;
}

inline SitePotential discrete_site_potential(const LatticeBox& box, const Site& site) {
  SitePotential p;
  p.support.push_back(box.index_of(site));
  p.v = Matrix::Ones(1, 1);
  p.sqrt_v = Matrix::Ones(1, 1);
  return p;
}

/// The two-site model h_{a,b} = h_0 + V_{a,b} on the box [-R, R+1]^2 with
/// C_0 = {0,1}^2: coupling a on the tile above C_0 ({0,1} x {2,3}) and b on
/// the tile to its left ({-2,-1} x {0,1}).
inline Hamiltonian build_two_site(double a, double b, int radius) {
  if (radius < 4) throw std::invalid_argument("build_two_site: radius must be >= 4");
  LatticeBox box({-radius, -radius}, {radius + 1, radius + 1});
  Hamiltonian h;
  h.box = box;
  h.hopping = laplacian_matrix(box);
  Vector diag = Vector::Zero(box.size());
  for (const Site& s : enumerate_sites(box)) {
    if (s[0] >= 0 && s[0] <= 1 && s[1] >= 2 && s[1] <= 3) diag(box.index_of(s)) = a;
    if (s[0] >= -2 && s[0] <= -1 && s[1] >= 0 && s[1] <= 1) diag(box.index_of(s)) = b;
  }
  h.potential = Matrix(diag.asDiagonal());
  h.matrix = h.hopping + h.potential;
  return h;
}

inline bool tiles_are_neighbors(const Site& m, const Site& mp) {
  int diff = 0;
  for (size_t i = 0; i < m.size(); ++i) diff += std::abs(m[i] - mp[i]);
  return diff == 1;
}

/// Two-tile operator h_0^{(C,C')} + mu * f_C on l^2(C union C'), with sites
/// of C listed first (row-major within each tile).
struct TwoTile {
  Matrix matrix;
  std::vector<Site> sites;  // C sites then C' sites
  long c_size = 0;
};

inline TwoTile build_two_tile(const TileGeometry& geom, const Site& c, const Site& cp, double mu,
                              const Vector& f) {
  if (!tiles_are_neighbors(c, cp)) throw std::invalid_argument("build_two_tile: tiles not neighbors");
  const LatticeBox base = geom.tile_box(Site(geom.dim(), 0));
  TwoTile t;
  for (const Site& s : geom.tile_sites(c)) t.sites.push_back(s);
  t.c_size = static_cast<long>(t.sites.size());
  for (const Site& s : geom.tile_sites(cp)) t.sites.push_back(s);
  const long n = static_cast<long>(t.sites.size());
  std::map<Site, long> idx;
  for (long i = 0; i < n; ++i) idx[t.sites[i]] = i;
  t.matrix = Matrix::Zero(n, n);
  for (long i = 0; i < n; ++i) {
    for (int d = 0; d < geom.dim(); ++d)
      for (int step : {-1, 1}) {
        Site k = t.sites[i];
        k[d] += step;
        auto it = idx.find(k);
        if (it != idx.end()) t.matrix(i, it->second) = 1.0;
      }
    if (i < t.c_size) t.matrix(i, i) += mu * f(base.index_of(geom.offset_in_tile(t.sites[i])));
  }
  return t;
}

/// The potential as a full-size matrix acting on an n-dimensional space.
inline Matrix embed_potential(const SitePotential& p, long n) {
  Matrix v = Matrix::Zero(n, n);
  for (size_t i = 0; i < p.support.size(); ++i)
    for (size_t j = 0; j < p.support.size(); ++j)
      v(p.support[i], p.support[j]) = p.v(static_cast<long>(i), static_cast<long>(j));
  return v;
}

// ---------------------------------------------------------------------------
// Model specification
// ---------------------------------------------------------------------------

enum class ModelKind { Discrete, ModelA, ModelB, TwoSite };

struct ModelSpec {
  ModelKind kind = ModelKind::Discrete;
  LatticeBox box;
  Matrix w;            // Model A
  TileGeometry geom;   // Model B
  Vector f;            // Model B
  double a = 0, b = 0; // two-site couplings
  int radius = 12;     // two-site truncation radius
};

/// Number of independent disorder parameters the model consumes.
inline long omega_count(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::Discrete:
    case ModelKind::ModelA:
      return spec.box.size();
    case ModelKind::ModelB:
      return static_cast<long>(spec.geom.tiles_intersecting(spec.box).size());
    case ModelKind::TwoSite:
      return 0;
  }
  return 0;
}

inline Hamiltonian build_model(const ModelSpec& spec, const Vector& omega) {
  switch (spec.kind) {
    case ModelKind::Discrete:
      return build_discrete_anderson(spec.box, omega);
    case ModelKind::ModelA:
      return build_model_a(spec.box, spec.w, omega);
    case ModelKind::ModelB:
      return build_model_b(spec.box, spec.geom, spec.f, omega);
    case ModelKind::TwoSite:
      return build_two_site(spec.a, spec.b, spec.radius);
  }
  throw std::logic_error("build_model: unknown kind");
}

// ---------------------------------------------------------------------------
// Shortest-path counts
// ---------------------------------------------------------------------------

/// Number C_{j,d} of monotone lattice paths of length |j|_1 from 0 to j,
/// by dynamic programming over the sub-box spanned by 0 and j.
inline long shortest_path_count(const Site& j) {
  long total = 0;
  for (int c : j) total += std::abs(c);
  if (total == 0) throw std::domain_error("shortest_path_count: j must be non-zero");
  const int d = static_cast<int>(j.size());
  std::vector<int> ext(d);
  long cells = 1;
  for (int i = 0; i < d; ++i) {
    ext[i] = std::abs(j[i]) + 1;
    cells *= ext[i];
  }
  std::vector<long> count(cells, 0);
  count[0] = 1;
  for (long cell = 1; cell < cells; ++cell) {
    long rem = cell;
    std::vector<int> v(d);
    for (int i = d - 1; i >= 0; --i) {
      v[i] = static_cast<int>(rem % ext[i]);
      rem /= ext[i];
    }
    long stride = 1, acc = 0;
    for (int i = d - 1; i >= 0; --i) {
      if (v[i] > 0) acc += count[cell - stride];
      stride *= ext[i];
    }
    count[cell] = acc;
  }
  return count[cells - 1];
}

}  // namespace anderson

#endif
