#ifndef ANDERSON_CYCLICITY_HPP
#define ANDERSON_CYCLICITY_HPP

#include "anderson/birman_schwinger.hpp"
#include "anderson/fit.hpp"
#include "anderson/models.hpp"

namespace anderson {

/// Orthonormal basis of the smallest H-invariant subspace containing the
/// columns of M (the Krylov span of M under H).
struct ReducingSubspace {
  Matrix basis;  // orthonormal columns
  double invariance_residual = 0;
};

inline ReducingSubspace krylov_reducing(const Matrix& h, const Matrix& m, double tol = 1e-10) {
  const long n = h.rows();
  Matrix q(n, 0);
  auto absorb = [&](const Matrix& block) {
    int added = 0;
    for (long j = 0; j < block.cols(); ++j) {
      Vector v = block.col(j);
      const double scale = std::max(v.norm(), 1.0);
      // Repeated Gram-Schmidt for orthogonality at small residuals.
      for (int pass = 0; pass < 2; ++pass)
        if (q.cols() > 0) v -= q * (q.transpose() * v);
      if (v.norm() > tol * scale) {
        q.conservativeResize(n, q.cols() + 1);
        q.col(q.cols() - 1) = v / v.norm();
        ++added;
      }
    }
    return added;
  };
  absorb(m);
  while (q.cols() < n) {
    if (absorb(h * q) == 0) break;
  }
  ReducingSubspace sub;
  sub.basis = q;
  if (q.cols() > 0) {
    Matrix hq = h * q;
    sub.invariance_residual = (hq - q * (q.transpose() * hq)).norm() / std::max(hq.norm(), 1.0);
  }
  return sub;
}

/// Distance of every eigenvector of H from the reducing subspace generated by
/// the range of V. In finite volume all spectrum is pure point, so this tests
/// cyclicity of R(V) outright.
struct CyclicityReport {
  bool pass = false;
  long subspace_dim = 0;
  std::vector<double> distances;  // per eigenvector, in eigenvalue order
  double max_distance = 0;
};

inline CyclicityReport weak_cyclicity_check(const Matrix& h, const Matrix& range_v, double tol = 1e-8) {
  ReducingSubspace sub = krylov_reducing(h, range_v);
  EigenDecomposition ed = hermitian_eig(h);
  CyclicityReport rep;
  rep.subspace_dim = sub.basis.cols();
  for (long i = 0; i < ed.values.size(); ++i) {
    const Vector u = ed.vectors.col(i);
    const double dist = (u - sub.basis * (sub.basis.transpose() * u)).norm();
    rep.distances.push_back(dist);
    rep.max_distance = std::max(rep.max_distance, dist);
  }
  rep.pass = rep.max_distance < tol;
  return rep;
}

struct SpanCheckResult {
  long target_dim = 0;
  long achieved_rank = 0;
  std::vector<double> mu_values;
  double smallest_retained = 0;
  bool full() const { return achieved_rank == target_dim; }
};

/// Rank of the stacked blocks P_X (H + mu V - z0)^{-1} P_Y over mu in mu_list,
/// with X and Y given by orthonormal column bases.
inline SpanCheckResult span_condition(const Matrix& h, const Matrix& x, const Matrix& y, Complex z0,
                                      const std::vector<double>& mu_list, const Matrix& v,
                                      double rank_tol = 1e-8) {
  const long k = x.cols();
  const long w = y.cols();
  SpanCheckResult res;
  res.target_dim = k;
  res.mu_values = mu_list;
  if (mu_list.empty()) return res;
  CMatrix stacked(k, w * static_cast<long>(mu_list.size()));
  for (size_t t = 0; t < mu_list.size(); ++t) {
    CMatrix mz = (h + mu_list[t] * v).cast<Complex>();
    mz.diagonal().array() -= z0;
    CMatrix block = x.cast<Complex>().transpose() * lu_solve<Complex>(mz, CMatrix(y.cast<Complex>()));
    stacked.middleCols(static_cast<long>(t) * w, w) = block;
  }
  RankReport rr = column_rank_report<Complex>(stacked, rank_tol);
  res.achieved_rank = rr.rank;
  res.smallest_retained = rr.smallest_retained;
  return res;
}

/// Rank of the stacked blocks chi_C (h_0^{(C,C')} + mu f_C - z0)^{-1} chi_{C'}.
inline SpanCheckResult two_tile_span(const TileGeometry& geom, const Site& c, const Site& cp, const Vector& f,
                                     Complex z0, const std::vector<double>& mu_list, double rank_tol = 1e-8) {
  const long nc = geom.tile_size();
  SpanCheckResult res;
  res.target_dim = nc;
  res.mu_values = mu_list;
  if (mu_list.empty()) return res;
  CMatrix stacked(nc, nc * static_cast<long>(mu_list.size()));
  for (size_t t = 0; t < mu_list.size(); ++t) {
    TwoTile tt = build_two_tile(geom, c, cp, mu_list[t], f);
    CMatrix mz = tt.matrix.cast<Complex>();
    mz.diagonal().array() -= z0;
    CMatrix inv = lu_solve<Complex>(mz, CMatrix(CMatrix::Identity(mz.rows(), mz.cols())));
    stacked.middleCols(static_cast<long>(t) * nc, nc) = inv.topRightCorner(nc, mz.cols() - nc);
  }
  RankReport rr = column_rank_report<Complex>(stacked, rank_tol);
  res.achieved_rank = rr.rank;
  res.smallest_retained = rr.smallest_retained;
  return res;
}

/// Default mu draw: |C| values uniform in [1, 2]; on rank failure one fresh
/// draw is attempted before the failure is reported.
inline SpanCheckResult two_tile_span_auto(const TileGeometry& geom, const Site& c, const Site& cp,
                                          const Vector& f, Complex z0, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(1.0, 2.0);
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::vector<double> mu(geom.tile_size());
    for (double& m : mu) m = dist(rng);
    SpanCheckResult res = two_tile_span(geom, c, cp, f, z0, mu);
    if (res.full() || attempt == 1) return res;
  }
  throw std::logic_error("unreachable");
}

/// Convergence of chi_C (H_{omega^{(lambda,mu)}} - z0)^{-1} chi_{C'} to the
/// two-tile block as the boundary-layer coupling lambda grows.
struct CouplingLimitTable {
  struct Row {
    double lambda;
    double deviation;
  };
  std::vector<Row> rows;
  LineFit loglog;  // slope of deviation vs lambda on log-log axes
};

inline CouplingLimitTable coupling_limit(const TileGeometry& geom, const Site& c, const Site& cp, double mu,
                                         const Vector& f, const std::vector<double>& lambda_list,
                                         const DisorderSpec& disorder, Complex z0,
                                         const LatticeBox& ambient_tiles) {
  if (!tiles_are_neighbors(c, cp)) throw std::invalid_argument("coupling_limit: tiles not neighbors");
  // Ambient site box spanned by the given tile-index box.
  const Site lo = geom.tile_box(ambient_tiles.lower).lower;
  const Site up = geom.tile_box(ambient_tiles.upper).upper;
  const LatticeBox box(lo, up);
  const std::vector<Site> tiles = geom.tiles_intersecting(box);

  const Vector ext_omega = sample_omega(disorder, static_cast<long>(tiles.size()), 0);
  TwoTile ref = build_two_tile(geom, c, cp, mu, f);
  // reference block chi_C (...)^{-1} chi_{C'}
  CMatrix mzref = ref.matrix.cast<Complex>();
  mzref.diagonal().array() -= z0;
  CMatrix refinv = lu_solve<Complex>(mzref, CMatrix(CMatrix::Identity(mzref.rows(), mzref.cols())));
  CMatrix ref_block = refinv.topRightCorner(ref.c_size, mzref.cols() - ref.c_size);

  std::vector<long> c_rows, cp_rows;
  for (const Site& s : geom.tile_sites(c)) c_rows.push_back(box.index_of(s));
  for (const Site& s : geom.tile_sites(cp)) cp_rows.push_back(box.index_of(s));

  CouplingLimitTable table;
  std::vector<double> ls, devs;
  for (double lambda : lambda_list) {
    Vector omega(static_cast<long>(tiles.size()));
    for (size_t t = 0; t < tiles.size(); ++t) {
      const Site& m = tiles[t];
      if (m == c)
        omega(static_cast<long>(t)) = mu;
      else if (m == cp)
        omega(static_cast<long>(t)) = 0.0;
      else if (std::min(linf_tile_distance(m, c), linf_tile_distance(m, cp)) == 1)
        omega(static_cast<long>(t)) = lambda;
      else
        omega(static_cast<long>(t)) = ext_omega(static_cast<long>(t));
    }
    Hamiltonian h = build_model_b(box, geom, f, omega);
    CMatrix mz = h.matrix.cast<Complex>();
    mz.diagonal().array() -= z0;
    CMatrix rhs = CMatrix::Zero(mz.rows(), static_cast<long>(cp_rows.size()));
    for (size_t j = 0; j < cp_rows.size(); ++j) rhs(cp_rows[j], static_cast<long>(j)) = 1.0;
    CMatrix sol = lu_solve<Complex>(mz, rhs);
    CMatrix block(static_cast<long>(c_rows.size()), static_cast<long>(cp_rows.size()));
    for (size_t i = 0; i < c_rows.size(); ++i) block.row(static_cast<long>(i)) = sol.row(c_rows[i]);
    const double dev = (block - ref_block).norm();
    table.rows.push_back({lambda, dev});
    ls.push_back(lambda);
    devs.push_back(std::max(dev, 1e-300));
  }
  if (ls.size() >= 2) table.loglog = fit_loglog(ls, devs);
  return table;
}

/// Residuals of the eigenprojection transfer identity
/// P_e P_Y = -(lambda - mu) P_e V (H_mu - e)^{-1} P_Y for eigenvalues e of
/// H_lambda away from the spectrum of H_mu.
struct TransferReport {
  struct Row {
    double e;
    double residual;
  };
  std::vector<Row> rows;
  std::vector<double> skipped;
  double max_residual = 0;
};

inline TransferReport eigenprojection_transfer(const Matrix& h_lam, const Matrix& h_mu, const Matrix& v,
                                               double lambda, double mu, const Matrix& y,
                                               double skip_dist = 1e-6) {
  if (lambda == mu) throw std::invalid_argument("eigenprojection_transfer: lambda == mu");
  EigenDecomposition lam = hermitian_eig(h_lam);
  EigenDecomposition base = hermitian_eig(h_mu);
  const Matrix py = y * y.transpose();
  const double diam = lam.values(lam.values.size() - 1) - lam.values(0);
  const double cluster_tol = 1e-10 * (diam + 1.0);

  TransferReport rep;
  long i = 0;
  while (i < lam.values.size()) {
    long j = i + 1;
    while (j < lam.values.size() && lam.values(j) - lam.values(j - 1) <= cluster_tol) ++j;
    const double e = lam.values.segment(i, j - i).mean();
    const Matrix pe = lam.vectors.middleCols(i, j - i) * lam.vectors.middleCols(i, j - i).transpose();
    i = j;
    if (dist_to_spectrum(e, base.values) <= skip_dist) {
      rep.skipped.push_back(e);
      continue;
    }
    Matrix me = h_mu;
    me.diagonal().array() -= e;
    const Matrix resolvent_py = lu_solve<double>(me, py);
    const double res = (pe * py + (lambda - mu) * pe * v * resolvent_py).norm();
    rep.rows.push_back({e, res});
    rep.max_residual = std::max(rep.max_residual, res);
  }
  return rep;
}

}  // namespace anderson

#endif
