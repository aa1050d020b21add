#ifndef ANDERSON_BIRMAN_SCHWINGER_HPP
#define ANDERSON_BIRMAN_SCHWINGER_HPP

#include <array>
#include <optional>

#include "anderson/fit.hpp"
#include "anderson/models.hpp"

namespace anderson {

/// The block sqrt(V) (H0 - z)^{-1} sqrt(V) compressed to the range of V.
struct BSBlock {
  Complex z;
  CMatrix block;
};

inline double spectral_norm_sym(const Matrix& h) {
  EigenDecomposition ed = hermitian_eig(h);
  return std::max(std::abs(ed.values(0)), std::abs(ed.values(ed.values.size() - 1)));
}

inline double dist_to_spectrum(double e, const Vector& values) {
  double d = std::numeric_limits<double>::infinity();
  for (long i = 0; i < values.size(); ++i) d = std::min(d, std::abs(e - values(i)));
  return d;
}

/// Columns of (H0 - z)^{-1} restricted to the rows/columns in `support`.
inline CMatrix resolvent_block(const Matrix& h0, Complex z, const std::vector<long>& rows,
                               const std::vector<long>& cols) {
  CMatrix mz = h0.cast<Complex>();
  mz.diagonal().array() -= z;
  CMatrix rhs = CMatrix::Zero(h0.rows(), static_cast<long>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) rhs(cols[j], static_cast<long>(j)) = 1.0;
  CMatrix x = lu_solve<Complex>(mz, rhs);
  CMatrix out(static_cast<long>(rows.size()), static_cast<long>(cols.size()));
  for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<long>(i)) = x.row(rows[i]);
  return out;
}

inline BSBlock bs_block(const Matrix& h0, const SitePotential& v, Complex z) {
  if (z.imag() == 0.0) {
    EigenDecomposition ed = hermitian_eig(h0);
    const double norm = std::max(std::abs(ed.values(0)), std::abs(ed.values(ed.values.size() - 1)));
    if (dist_to_spectrum(z.real(), ed.values) <= 1e-8 * norm)
      throw NearSpectrum("bs_block: real z too close to spectrum of H0");
  }
  CMatrix r = resolvent_block(h0, z, v.support, v.support);
  CMatrix s = v.sqrt_v.cast<Complex>();
  return {z, s * r * s};
}

/// Approach to the boundary value G(E + i0) along a decreasing epsilon list.
struct BoundaryReport {
  std::vector<BSBlock> blocks;
  std::vector<double> diffs;  // successive-difference norms
  bool converged = false;
};

inline BoundaryReport bs_boundary(const Matrix& h0, const SitePotential& v, double e,
                                  const std::vector<double>& eps_list) {
  EigenDecomposition ed = hermitian_eig(h0);
  if (dist_to_spectrum(e, ed.values) <= 1e-6)
    throw NearSpectrum("bs_boundary: E within 1e-6 of spectrum of H0");
  BoundaryReport rep;
  for (double eps : eps_list) {
    rep.blocks.push_back(bs_block(h0, v, Complex(e, eps)));
    if (rep.blocks.size() > 1)
      rep.diffs.push_back((rep.blocks.back().block - rep.blocks[rep.blocks.size() - 2].block).norm());
  }
  rep.converged = !rep.diffs.empty() && rep.diffs.back() < 1e-8;
  return rep;
}

/// Per-eigenpair residuals of the eigenvector correspondence
/// G(E) sqrt(V) u = -(1/lambda) sqrt(V) u for H_lambda = H0 + lambda V.
struct CorrespondenceReport {
  struct Row {
    double e;
    double residual;
    double sqrt_v_u_norm;
  };
  std::vector<Row> rows;
  std::vector<double> skipped;  // eigenvalues too close to spectrum of H0
  double max_residual = 0;
};

inline CorrespondenceReport bs_correspondence(const Matrix& h_lam, const Matrix& h0, const SitePotential& v,
                                              double lambda, double skip_dist = 1e-6) {
  if (lambda == 0.0) throw std::invalid_argument("bs_correspondence: lambda must be non-zero");
  EigenDecomposition lam = hermitian_eig(h_lam);
  EigenDecomposition base = hermitian_eig(h0);
  CorrespondenceReport rep;
  for (long i = 0; i < lam.values.size(); ++i) {
    const double e = lam.values(i);
    if (dist_to_spectrum(e, base.values) <= skip_dist) {
      rep.skipped.push_back(e);
      continue;
    }
    CVector w(static_cast<long>(v.support.size()));
    for (size_t s = 0; s < v.support.size(); ++s) w(static_cast<long>(s)) = lam.vectors(v.support[s], i);
    w = v.sqrt_v.cast<Complex>() * w;
    const double wn = w.norm();
    BSBlock g = bs_block(h0, v, Complex(e, 0.0));
    const double res = (g.block * w + w / lambda).norm() / wn;
    rep.rows.push_back({e, res, wn});
    rep.max_residual = std::max(rep.max_residual, res);
  }
  return rep;
}

/// Norm of the tail of the truncated Neumann series
/// (H-z)^{-1} = -(1/z) sum_n H^n / z^n, with the geometric bound asserted.
struct NeumannReport {
  double remainder;
  double bound;
};

inline NeumannReport neumann_remainder(const Matrix& h, Complex z, int m) {
  const double hn = spectral_norm_sym(h);
  if (std::abs(z) <= hn) throw std::domain_error("neumann_remainder: |z| must exceed ||H||");
  CMatrix mz = h.cast<Complex>();
  mz.diagonal().array() -= z;
  CMatrix res = lu_solve<Complex>(mz, CMatrix(CMatrix::Identity(h.rows(), h.cols())));
  CMatrix partial = CMatrix::Zero(h.rows(), h.cols());
  CMatrix power = CMatrix::Identity(h.rows(), h.cols());
  for (int n = 0; n <= m; ++n) {
    partial += power / std::pow(z, n);
    power = h.cast<Complex>() * power;
  }
  NeumannReport rep;
  rep.remainder = (res + partial / z).operatorNorm();
  rep.bound = std::pow(hn / std::abs(z), m + 1) / (std::abs(z) - hn);
  if (rep.remainder > rep.bound * (1 + 1e-9) + 1e-300)
    throw NumericalFailure("neumann_remainder: geometric bound violated");
  return rep;
}

/// Deviation table for the leading-order block asymptotics, with a fitted
/// 1/|z| constant and the smallest |z| at which the block tests simple.
struct DeviationTable {
  struct Row {
    Complex z;
    double deviation;
    bool simple;
  };
  std::vector<Row> rows;
  double fitted_c = 0;                     // deviation <= fitted_c / |z|
  std::optional<double> simple_threshold;  // smallest tested |z| that is simple
};

/// Case (i): f simple on C_0, deviation of -z sqrt(f) (H-z)^{-1} sqrt(f) from f.
inline DeviationTable case_i_check(const Matrix& h, const SitePotential& v, const std::vector<Complex>& z_list) {
  for (long i = 0; i < v.v.rows(); ++i)
    for (long j = i + 1; j < v.v.rows(); ++j)
      if (v.v(i, i) == v.v(j, j))
        throw std::invalid_argument("case_i_check: f is not simple");
  DeviationTable table;
  for (Complex z : z_list) {
    BSBlock g = bs_block(h, v, z);
    const double dev = (-z * g.block - v.v.cast<Complex>()).operatorNorm();
    const bool simple = is_simple(g.block).simple;
    table.rows.push_back({z, dev, simple});
    table.fitted_c = std::max(table.fitted_c, dev * std::abs(z));
    if (simple && !table.simple_threshold) table.simple_threshold = std::abs(z);
  }
  return table;
}

/// Case (ii): C_0 a strip of length L1, f the characteristic function.
/// Returns the exactly assembled Jacobi limit matrix and the deviations of
/// z(-z chi (H-z)^{-1} chi - (1 + omega0/z) chi) from it.
struct CaseIiReport {
  Matrix limit;  // chi_{C_0} h_0 chi_{C_0}
  DeviationTable table;
};

inline CaseIiReport case_ii_check(const Matrix& h, const SitePotential& v, const TileGeometry& geom,
                                  double omega0, const std::vector<Complex>& z_list) {
  for (int i = 1; i < geom.dim(); ++i)
    if (geom.period[i] != 1) throw std::invalid_argument("case_ii_check: geometry is not a strip");
  const long l1 = geom.period[0];
  CaseIiReport rep;
  rep.limit = Matrix::Zero(l1, l1);
  for (long i = 0; i + 1 < l1; ++i) rep.limit(i, i + 1) = rep.limit(i + 1, i) = 1.0;
  for (Complex z : z_list) {
    BSBlock g = bs_block(h, v, z);
    const CMatrix rescaled =
        z * (-z * g.block - (1.0 + omega0 / z) * CMatrix::Identity(l1, l1));
    const double dev = (rescaled - rep.limit.cast<Complex>()).operatorNorm();
    const bool simple = is_simple(g.block).simple;
    rep.table.rows.push_back({z, dev, simple});
    rep.table.fitted_c = std::max(rep.table.fitted_c, dev * std::abs(z));
    if (simple && !rep.table.simple_threshold) rep.table.simple_threshold = std::abs(z);
  }
  return rep;
}

/// Orthonormal symmetry-adapted basis of l^2({0,1}^2), columns flattened in
/// site order (0,0), (0,1), (1,0), (1,1), entries +-1/2.
inline Matrix symmetry_basis() {
  Matrix b(4, 4);
  b.col(0) << 1, 1, 1, 1;    // constant
  b.col(1) << 1, -1, -1, 1;  // checkerboard
  b.col(2) << 1, 1, -1, -1;  // odd in the first coordinate
  b.col(3) << 1, -1, 1, -1;  // odd in the second coordinate
  return 0.5 * b;
}

inline std::vector<long> c0_site_rows(const Hamiltonian& h) {
  // C_0 = {0,1}^2 in flatten order (0,0), (0,1), (1,0), (1,1).
  return {h.index({0, 0}), h.index({0, 1}), h.index({1, 0}), h.index({1, 1})};
}

/// The five compressions chi h0 chi, chi h0^2 chi, chi h0^3 chi,
/// chi h0 V_{a,b} h0 chi and chi h0 (h0 + V_{a,b})^2 h0 chi in the
/// symmetry-adapted basis. Exact for any assembly radius >= 4.
inline std::array<Matrix, 5> case_iii_matrices(double a, double b, int radius = 4) {
  Hamiltonian h = build_two_site(a, b, radius);
  const long n = h.matrix.rows();
  const std::vector<long> rows = c0_site_rows(h);
  Matrix x = Matrix::Zero(n, 4);
  for (int j = 0; j < 4; ++j) x(rows[j], j) = 1.0;
  const Matrix& h0 = h.hopping;
  const Matrix y = h0 * x;
  const Matrix z = (h0 + h.potential) * y;
  const Matrix basis = symmetry_basis();
  auto conj = [&](const Matrix& m) { return Matrix(basis.transpose() * m * basis); };
  return {conj(x.transpose() * y), conj(y.transpose() * y), conj(y.transpose() * h0 * y),
          conj(y.transpose() * h.potential * y), conj(z.transpose() * z)};
}

/// Small-eigenvalue splitting of the rescaled resolvent compression of
/// h_{a,b}, measured against the prediction +-(a-b)/z^3.
struct SplittingTable {
  struct Row {
    double abs_z;
    Complex measured_lo;  // smaller-modulus member of the pair
    Complex measured_hi;
    Complex predicted;  // (a-b)/z^3
    double gap;
    double relative_deviation;  // |gap / (2|a-b|/|z|^3) - 1|
    double schur_route_mismatch;
  };
  std::vector<Row> rows;
};

namespace detail {
/// One root of det(D - lambda I - C (A - lambda I)^{-1} B) = 0 by fixed-point
/// iteration from `seed`; valid while A - lambda I stays well-conditioned.
inline Complex schur_small_eigenvalue(const CMatrix& a, const CMatrix& b, const CMatrix& c, const CMatrix& d,
                                      Complex seed) {
  Complex lambda = seed;
  for (int it = 0; it < 60; ++it) {
    CMatrix am = a - lambda * CMatrix::Identity(a.rows(), a.cols());
    CMatrix eff = d - c * lu_solve<Complex>(am, b);
    GeneralEig eig = general_eig(eff);
    Complex next = eig.values(0);
    for (long i = 1; i < eig.values.size(); ++i)
      if (std::abs(eig.values(i) - lambda) < std::abs(next - lambda)) next = eig.values(i);
    if (std::abs(next - lambda) < 1e-16) return next;
    lambda = next;
  }
  return lambda;
}
}  // namespace detail

inline SplittingTable case_iii_splitting(double a, double b, const std::vector<Complex>& z_list,
                                         int radius = 12) {
  if (a == b) throw std::invalid_argument("case_iii_splitting: a == b predicts no splitting");
  Hamiltonian h = build_two_site(a, b, radius);
  const std::vector<long> rows = c0_site_rows(h);
  const CMatrix basis = symmetry_basis().cast<Complex>();
  SplittingTable table;
  for (Complex z : z_list) {
    const CMatrix m = basis.transpose() * resolvent_block(h.matrix, z, rows, rows) * basis;
    // Affine rescaling of the compression, then the known multiples of the
    // identity are removed so the small pair sits near the origin.
    const Complex shift = 2.0 / z + 0.5 * (a + b) / (z * z) + (12.0 + (a * a + b * b) / 2.0) / (z * z * z);
    const CMatrix g = z * (-z * m - CMatrix::Identity(4, 4)) - shift * CMatrix::Identity(4, 4);
    GeneralEig eig = general_eig(g);
    std::vector<Complex> vals(eig.values.data(), eig.values.data() + 4);
    std::sort(vals.begin(), vals.end(), [](Complex x, Complex y) { return std::abs(x) < std::abs(y); });
    SplittingTable::Row row;
    row.abs_z = std::abs(z);
    row.measured_lo = vals[0];
    row.measured_hi = vals[1];
    row.predicted = (a - b) / (z * z * z);
    row.gap = std::abs(vals[0] - vals[1]);
    row.relative_deviation = std::abs(row.gap / (2.0 * std::abs(row.predicted)) - 1.0);
    const Complex s0 = detail::schur_small_eigenvalue(g.topLeftCorner(2, 2), g.topRightCorner(2, 2),
                                                      g.bottomLeftCorner(2, 2), g.bottomRightCorner(2, 2),
                                                      row.predicted);
    const Complex s1 = detail::schur_small_eigenvalue(g.topLeftCorner(2, 2), g.topRightCorner(2, 2),
                                                      g.bottomLeftCorner(2, 2), g.bottomRightCorner(2, 2),
                                                      -row.predicted);
    row.schur_route_mismatch =
        std::min(std::max(std::abs(s0 - vals[0]), std::abs(s1 - vals[1])),
                 std::max(std::abs(s0 - vals[1]), std::abs(s1 - vals[0])));
    table.rows.push_back(row);
  }
  return table;
}

/// Scan |z| magnitudes (z = i |z|) for simplicity of the Birman-Schwinger
/// block; reports the first passing magnitude and whether it persists.
struct ThresholdScan {
  std::vector<std::pair<double, bool>> results;
  std::optional<double> first_simple;
  bool persists = false;
};

inline ThresholdScan simplicity_threshold_scan(const Matrix& h0, const SitePotential& v,
                                               const std::vector<double>& magnitudes) {
  ThresholdScan scan;
  bool all_above = true;
  for (double mag : magnitudes) {
    const bool simple = is_simple(bs_block(h0, v, Complex(0.0, mag)).block).simple;
    scan.results.emplace_back(mag, simple);
    if (!scan.first_simple && simple) scan.first_simple = mag;
    if (scan.first_simple && !simple) all_above = false;
  }
  scan.persists = scan.first_simple.has_value() && all_above;
  return scan;
}

}  // namespace anderson

#endif
