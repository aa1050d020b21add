#ifndef ANDERSON_LINALG_HPP
#define ANDERSON_LINALG_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace anderson {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

struct SingularMatrix : std::runtime_error {
  double pivot;
  explicit SingularMatrix(double p)
      : std::runtime_error("singular matrix, pivot magnitude " + std::to_string(p)), pivot(p) {}
};

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NearSpectrum : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kPivotRelTol = 1e-14;

namespace detail {
template <typename M>
double max_abs(const M& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}
}  // namespace detail

/// Solve A X = B by LU with partial pivoting. Throws SingularMatrix when the
/// smallest pivot falls below kPivotRelTol * max|A|.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> lu_solve(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& b) {
  if (a.rows() != a.cols()) throw std::invalid_argument("lu_solve: A not square");
  if (a.rows() != b.rows()) throw std::invalid_argument("lu_solve: size mismatch");
  Eigen::PartialPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> lu(a);
  const auto& u = lu.matrixLU();
  double min_pivot = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < u.rows(); ++i) min_pivot = std::min(min_pivot, std::abs(u(i, i)));
  if (min_pivot <= kPivotRelTol * detail::max_abs(a)) throw SingularMatrix(min_pivot);
  return lu.solve(b);
}

/// Eigendecomposition of a real symmetric matrix: ascending values,
/// orthonormal columns.
struct EigenDecomposition {
  Vector values;
  Matrix vectors;
};

inline EigenDecomposition hermitian_eig(const Matrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("hermitian_eig: not square");
  const double scale = detail::max_abs(h);
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (scale + 1.0))
    throw std::invalid_argument("hermitian_eig: matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalFailure("hermitian_eig: no convergence");
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Eigenvalues of a general complex matrix plus multiplicity clusters formed
/// by single-linkage at relative gap `tol`.
struct GeneralEig {
  CVector values;                         // sorted by (Re, Im)
  std::vector<std::vector<int>> clusters; // indices into values
};

inline GeneralEig general_eig(const CMatrix& a, double tol = 1e-8) {
  if (a.rows() != a.cols()) throw std::invalid_argument("general_eig: not square");
  Eigen::ComplexEigenSolver<CMatrix> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalFailure("general_eig: no convergence");
  std::vector<Complex> vals(es.eigenvalues().data(), es.eigenvalues().data() + a.rows());
  std::sort(vals.begin(), vals.end(), [](Complex x, Complex y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  GeneralEig out;
  out.values = Eigen::Map<CVector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  double diam = 0;
  for (size_t i = 0; i < vals.size(); ++i)
    for (size_t j = i + 1; j < vals.size(); ++j) diam = std::max(diam, std::abs(vals[i] - vals[j]));
  const double thresh = tol * (diam + 1.0);
  std::vector<int> cluster;
  for (int i = 0; i < static_cast<int>(vals.size()); ++i) {
    if (!cluster.empty() && std::abs(vals[i] - vals[cluster.back()]) > thresh) {
      out.clusters.push_back(cluster);
      cluster.clear();
    }
    cluster.push_back(i);
  }
  if (!cluster.empty()) out.clusters.push_back(cluster);
  return out;
}

/// Characteristic polynomial coefficients a_0..a_k of det(xI - A), a_k = 1.
struct PolyCoeffs {
  CVector a;  // ascending powers, a[k] == 1
  int degree() const { return static_cast<int>(a.size()) - 1; }
};

/// Faddeev-LeVerrier trace recursion. Exact degree, monic by construction.
inline PolyCoeffs char_poly(const CMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("char_poly: not square");
  const int k = static_cast<int>(m.rows());
  if (k > 32) throw std::invalid_argument("char_poly: dimension above 32");
  PolyCoeffs p;
  p.a = CVector::Zero(k + 1);
  p.a(k) = 1.0;
  CMatrix aux = CMatrix::Identity(k, k);
  for (int i = 1; i <= k; ++i) {
    aux = m * aux;
    const Complex c = -aux.trace() / static_cast<double>(i);
    p.a(k - i) = c;
    aux.diagonal().array() += c;
  }
  return p;
}

inline PolyCoeffs char_poly(const Matrix& m) { return char_poly(CMatrix(m.cast<Complex>())); }

inline Complex poly_eval(const PolyCoeffs& p, Complex x) {
  Complex v = 0;
  for (int i = p.degree(); i >= 0; --i) v = v * x + p.a(i);
  return v;
}

/// The (2k-1)x(2k-1) resultant matrix of p and p': k-1 shifted copies of
/// (a_k, ..., a_0) over k shifted copies of (k a_k, ..., a_1).
inline CMatrix sylvester_matrix(const PolyCoeffs& p) {
  const int k = p.degree();
  if (k < 1) throw std::domain_error("sylvester_matrix: degree 0");
  CMatrix s = CMatrix::Zero(2 * k - 1, 2 * k - 1);
  for (int r = 0; r < k - 1; ++r)
    for (int j = 0; j <= k; ++j) s(r, r + j) = p.a(k - j);
  for (int r = 0; r < k; ++r)
    for (int j = 0; j < k; ++j) s(k - 1 + r, r + j) = static_cast<double>(k - j) * p.a(k - j);
  return s;
}

/// Determinant by Gaussian elimination with partial pivoting. Kept separate
/// from the Eigen-backed kernels so the Sylvester route through the
/// discriminant does not share code with the eigenvalue route.
inline Complex det_lu(CMatrix m) {
  const Eigen::Index n = m.rows();
  Complex det = 1.0;
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index piv = col;
    for (Eigen::Index r = col + 1; r < n; ++r)
      if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
    if (std::abs(m(piv, col)) == 0.0) return 0.0;
    if (piv != col) {
      m.row(piv).swap(m.row(col));
      det = -det;
    }
    det *= m(col, col);
    for (Eigen::Index r = col + 1; r < n; ++r) {
      const Complex f = m(r, col) / m(col, col);
      m.row(r).tail(n - col) -= f * m.row(col).tail(n - col);
    }
  }
  return det;
}

/// Discriminant F(A) = prod_{i<j} (lambda_j - lambda_i)^2, computed as the
/// signed Sylvester determinant of the characteristic polynomial. F = 1 for
/// 1x1 matrices (empty product).
inline Complex discriminant(const CMatrix& a) {
  const int k = static_cast<int>(a.rows());
  if (k == 1) return 1.0;
  const Complex d = det_lu(sylvester_matrix(char_poly(a)));
  const int sign = ((k * (k - 1) / 2) % 2 == 0) ? 1 : -1;
  return static_cast<double>(sign) * d;
}

inline Complex discriminant(const Matrix& a) { return discriminant(CMatrix(a.cast<Complex>())); }

/// Simplicity report: simple iff the minimal pairwise eigenvalue distance
/// exceeds gap_tol * (spectral diameter + 1). The normalized discriminant is
/// carried along as a cross-check, never as the decision criterion.
struct SimplicityReport {
  bool simple = false;
  double min_gap = 0;
  double diameter = 0;
  double normalized_discriminant = 0;
};

inline SimplicityReport is_simple(const CMatrix& a, double gap_tol = 1e-8) {
  const int k = static_cast<int>(a.rows());
  SimplicityReport rep;
  if (k == 1) {
    rep.simple = true;
    rep.min_gap = std::numeric_limits<double>::infinity();
    rep.normalized_discriminant = 1.0;
    return rep;
  }
  GeneralEig eig = general_eig(a);
  double min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      min_gap = std::min(min_gap, std::abs(eig.values(i) - eig.values(j)));
      rep.diameter = std::max(rep.diameter, std::abs(eig.values(i) - eig.values(j)));
    }
  rep.min_gap = min_gap;
  rep.simple = min_gap > gap_tol * (rep.diameter + 1.0);
  if (k <= 32) {
    const double f = std::abs(discriminant(a));
    rep.normalized_discriminant = std::pow(f, 1.0 / (k * (k - 1))) / (rep.diameter + 1.0);
  }
  return rep;
}

inline SimplicityReport is_simple(const Matrix& a, double gap_tol = 1e-8) {
  return is_simple(CMatrix(a.cast<Complex>()), gap_tol);
}

struct RankReport {
  int rank = 0;
  double smallest_retained = 0;  // magnitude of the weakest counted direction
};

/// Numerical rank via column-pivoted QR. Columns are normalized first since
/// resolvent columns can be badly scaled.
template <typename Scalar>
RankReport column_rank_report(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& cols,
                              double tol = 1e-8) {
  if (cols.cols() == 0) return {};
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m = cols;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double n = m.col(j).norm();
    if (n > 0) m.col(j) /= n;
  }
  Eigen::ColPivHouseholderQR<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> qr(m);
  const auto& r = qr.matrixR();
  const Eigen::Index kmax = std::min(m.rows(), m.cols());
  const double largest = std::abs(r(0, 0));
  if (largest == 0) return {};
  RankReport rep;
  for (Eigen::Index i = 0; i < kmax; ++i)
    if (std::abs(r(i, i)) > tol * largest) {
      ++rep.rank;
      rep.smallest_retained = std::abs(r(i, i));
    }
  return rep;
}

template <typename Scalar>
int column_rank(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& cols, double tol = 1e-8) {
  return column_rank_report<Scalar>(cols, tol).rank;
}

template <typename Scalar>
int column_rank(const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& cols, double tol = 1e-8) {
  if (cols.empty()) throw std::invalid_argument("column_rank: empty list");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(cols[0].size(), cols.size());
  for (size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].size() != m.rows()) throw std::invalid_argument("column_rank: length mismatch");
    m.col(static_cast<Eigen::Index>(j)) = cols[j];
  }
  return column_rank<Scalar>(m, tol);
}

/// Compression of (M - z)^{-1} to the index set `p`, computed as the inverse
/// of the Schur complement A - B D^{-1} C of the block split induced by p.
/// Cross-checked against the direct route before returning.
inline CMatrix schur_resolvent(const Matrix& m, Complex z, const std::vector<int>& p) {
  const Eigen::Index n = m.rows();
  std::vector<char> in_p(n, 0);
  for (int i : p) in_p[i] = 1;
  std::vector<int> q;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!in_p[i]) q.push_back(static_cast<int>(i));
  const Eigen::Index np = static_cast<Eigen::Index>(p.size());
  const Eigen::Index nq = static_cast<Eigen::Index>(q.size());

  CMatrix mz = m.cast<Complex>();
  mz.diagonal().array() -= z;

  CMatrix a(np, np), b(np, nq), c(nq, np), d(nq, nq);
  for (Eigen::Index i = 0; i < np; ++i)
    for (Eigen::Index j = 0; j < np; ++j) a(i, j) = mz(p[i], p[j]);
  for (Eigen::Index i = 0; i < np; ++i)
    for (Eigen::Index j = 0; j < nq; ++j) b(i, j) = mz(p[i], q[j]);
  for (Eigen::Index i = 0; i < nq; ++i)
    for (Eigen::Index j = 0; j < np; ++j) c(i, j) = mz(q[i], p[j]);
  for (Eigen::Index i = 0; i < nq; ++i)
    for (Eigen::Index j = 0; j < nq; ++j) d(i, j) = mz(q[i], q[j]);

  CMatrix schur = a;
  if (nq > 0) schur -= b * lu_solve<Complex>(d, c);
  CMatrix inv = lu_solve<Complex>(schur, CMatrix(CMatrix::Identity(np, np)));

  CMatrix full = lu_solve<Complex>(mz, CMatrix(CMatrix::Identity(n, n)));
  CMatrix direct(np, np);
  for (Eigen::Index i = 0; i < np; ++i)
    for (Eigen::Index j = 0; j < np; ++j) direct(i, j) = full(p[i], p[j]);
  if ((inv - direct).norm() > 1e-9 * (direct.norm() + 1e-300))
    throw NumericalFailure("schur_resolvent: routes disagree");
  return inv;
}

}  // namespace anderson

#endif
