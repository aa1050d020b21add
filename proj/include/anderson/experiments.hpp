#ifndef ANDERSON_EXPERIMENTS_HPP
#define ANDERSON_EXPERIMENTS_HPP

#include <atomic>
#include <thread>

#include "anderson/birman_schwinger.hpp"
#include "anderson/cyclicity.hpp"

namespace anderson {

namespace detail {
/// Static chunking over [0, count); results must be written by index so the
/// outcome is identical for any worker count.
inline void parallel_for(long count, int workers, const std::function<void(long)>& body) {
  workers = std::max(1, workers);
  if (workers == 1 || count < 2) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (long i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  for (auto& t : pool) t.join();
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Spectral reports and the multiplicity census
// ---------------------------------------------------------------------------

struct SpectralReport {
  Vector eigenvalues;  // ascending
  double min_gap = 0;
  double min_gap_relative = 0;  // relative to the spectral diameter
  double diameter = 0;
  std::vector<std::vector<int>> clusters;  // single-linkage at tau * diameter
  std::optional<double> normalized_discriminant;  // only for dimension <= 32
};

inline SpectralReport spectral_report(const Matrix& h, double tau) {
  EigenDecomposition ed = hermitian_eig(h);
  SpectralReport rep;
  rep.eigenvalues = ed.values;
  const long n = ed.values.size();
  rep.diameter = ed.values(n - 1) - ed.values(0);
  const double scale = rep.diameter > 0 ? rep.diameter : 1.0;
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (long i = 0; i + 1 < n; ++i) rep.min_gap = std::min(rep.min_gap, ed.values(i + 1) - ed.values(i));
  if (n == 1) rep.min_gap = std::numeric_limits<double>::infinity();
  rep.min_gap_relative = rep.min_gap / scale;
  const double thresh = tau * scale;
  std::vector<int> cluster;
  for (int i = 0; i < n; ++i) {
    if (!cluster.empty() && ed.values(i) - ed.values(cluster.back()) > thresh) {
      rep.clusters.push_back(cluster);
      cluster.clear();
    }
    cluster.push_back(i);
  }
  if (!cluster.empty()) rep.clusters.push_back(cluster);
  if (n <= 32) {
    const double f = std::abs(discriminant(h));
    rep.normalized_discriminant =
        n > 1 ? std::pow(f, 1.0 / (n * (n - 1))) / (rep.diameter + 1.0) : 1.0;
  }
  return rep;
}

struct CensusResult {
  long trials = 0;
  std::vector<double> min_rel_gap;  // per trial, indexed by trial number
  std::vector<int> largest_cluster; // per trial
  double degenerate_fraction = 0;   // fraction of trials with a cluster >= 2
  double degenerate_upper95 = 1;    // Clopper-Pearson 95% upper bound on that fraction
  std::array<long, 18> gap_histogram{};  // log10 bins: (-inf,-16], (-16,-15], ..., (-1,0], (0,inf)
};

/// One-sided Clopper-Pearson upper confidence bound for a binomial
/// proportion, via bisection on the binomial CDF.
inline double clopper_pearson_upper(long successes, long n, double confidence = 0.95) {
  if (n <= 0) return 1.0;
  if (successes >= n) return 1.0;
  const double alpha = 1.0 - confidence;
  auto cdf = [&](double p) {
    // P[X <= successes] computed from log terms for stability
    double sum = 0;
    for (long i = 0; i <= successes; ++i) {
      double lg = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
      if (i > 0) lg += i * std::log(p);
      if (n - i > 0) lg += (n - i) * std::log1p(-p);
      sum += std::exp(lg);
    }
    return sum;
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline CensusResult multiplicity_census(const ModelSpec& model, const DisorderSpec& disorder, long trials,
                                        double tau, int workers = 1) {
  CensusResult out;
  out.trials = trials;
  out.min_rel_gap.resize(trials);
  out.largest_cluster.resize(trials);
  detail::parallel_for(trials, workers, [&](long t) {
    const Vector omega = sample_omega(disorder, omega_count(model), static_cast<std::uint64_t>(t));
    SpectralReport rep = spectral_report(build_model(model, omega).matrix, tau);
    out.min_rel_gap[t] = rep.min_gap_relative;
    int largest = 1;
    for (const auto& c : rep.clusters) largest = std::max(largest, static_cast<int>(c.size()));
    out.largest_cluster[t] = largest;
  });
  long degenerate = 0;
  for (long t = 0; t < trials; ++t) {
    if (out.largest_cluster[t] >= 2) ++degenerate;
    const double g = out.min_rel_gap[t];
    int bin;
    if (g <= 1e-16)
      bin = 0;
    else if (g > 1.0)
      bin = 17;
    else
      bin = std::clamp(static_cast<int>(std::floor(std::log10(g))) + 17, 1, 16);
    ++out.gap_histogram[static_cast<size_t>(bin)];
  }
  out.degenerate_fraction = static_cast<double>(degenerate) / static_cast<double>(std::max(trials, 1L));
  out.degenerate_upper95 = clopper_pearson_upper(degenerate, trials);
  return out;
}

// ---------------------------------------------------------------------------
// Spectral averaging
// ---------------------------------------------------------------------------

/// Grid estimate of int <chi_B(H_lambda) sqrt(V) phi, sqrt(V) phi> /
/// (1 + lambda^2) d lambda against the bound |B| ||phi||^2. The truncation of
/// the lambda integral to [-cap, cap] contributes at most the arctan tail
/// times sup of the integrand, which is carried as the error budget.
struct AveragingResult {
  double lhs = 0;
  double rhs = 0;
  double budget = 0;
  bool holds() const { return lhs <= rhs + budget; }
};

inline AveragingResult spectral_averaging_check(const Matrix& h0, const SitePotential& v, double b_lo,
                                                double b_hi, const Vector& phi, double cap = 50.0,
                                                long points = 2001) {
  if (b_hi < b_lo) throw std::invalid_argument("spectral_averaging_check: empty interval");
  const long n = h0.rows();
  Vector psi = Vector::Zero(n);
  {
    Vector restricted(static_cast<long>(v.support.size()));
    for (size_t i = 0; i < v.support.size(); ++i) restricted(static_cast<long>(i)) = phi(v.support[i]);
    restricted = v.sqrt_v * restricted;
    for (size_t i = 0; i < v.support.size(); ++i) psi(v.support[i]) = restricted(static_cast<long>(i));
  }
  const Matrix vfull = embed_potential(v, n);
  const double step = 2.0 * cap / static_cast<double>(points - 1);
  AveragingResult res;
  for (long i = 0; i < points; ++i) {
    const double lambda = -cap + step * static_cast<double>(i);
    const double weight = (i == 0 || i == points - 1) ? 0.5 * step : step;
    EigenDecomposition ed = hermitian_eig(h0 + lambda * vfull);
    double val = 0;
    for (long j = 0; j < n; ++j)
      if (ed.values(j) >= b_lo && ed.values(j) <= b_hi) {
        const double c = ed.vectors.col(j).dot(psi);
        val += c * c;
      }
    res.lhs += weight * val / (1.0 + lambda * lambda);
  }
  res.rhs = (b_hi - b_lo) * phi.squaredNorm();
  res.budget = (M_PI - 2.0 * std::atan(cap)) * psi.squaredNorm();
  return res;
}

// ---------------------------------------------------------------------------
// Combes-Thomas decay fit
// ---------------------------------------------------------------------------

/// Log-linear fit of ||chi_center (H-z)^{-1} chi_{annulus L}|| over the
/// l-infinity annuli around `center`. Norms below 1e-15 are flagged as
/// underflow and dropped from the fit.
struct DecayFit {
  std::vector<int> distances;
  std::vector<double> norms;     // parallel to distances, before dropping
  std::vector<int> underflowed;  // distances dropped from the fit
  double eta = 0;                // fitted decay rate (slope is -eta)
  double log_c = 0;
  double r2 = 0;
  bool monotone = true;  // non-increasing within 1e-12 slack
};

inline DecayFit combes_thomas_fit(const Hamiltonian& h, const Site& center, Complex z,
                                  const std::vector<int>& distances) {
  if (distances.size() < 4) throw std::invalid_argument("combes_thomas_fit: need >= 4 distances");
  CMatrix mz = h.matrix.cast<Complex>();
  mz.diagonal().array() -= z;
  CMatrix rhs = CMatrix::Zero(mz.rows(), 1);
  rhs(h.box.index_of(center), 0) = 1.0;
  CVector col = lu_solve<Complex>(mz, rhs).col(0);

  DecayFit fit;
  std::vector<double> xs, ys;
  double prev = std::numeric_limits<double>::infinity();
  for (int dist : distances) {
    double norm2 = 0;
    for (const Site& s : enumerate_sites(h.box)) {
      int d = 0;
      for (int i = 0; i < h.box.dim; ++i) d = std::max(d, std::abs(s[i] - center[i]));
      if (d == dist) norm2 += std::norm(col(h.box.index_of(s)));
    }
    const double norm = std::sqrt(norm2);
    fit.distances.push_back(dist);
    fit.norms.push_back(norm);
    if (norm > prev + 1e-12) fit.monotone = false;
    prev = norm;
    if (norm < 1e-15) {
      fit.underflowed.push_back(dist);
      continue;
    }
    xs.push_back(static_cast<double>(dist));
    ys.push_back(std::log(norm));
  }
  if (xs.size() >= 2) {
    LineFit lf = fit_line(xs, ys);
    fit.eta = -lf.slope;
    fit.log_c = lf.intercept;
    fit.r2 = lf.r2;
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Identity suite
// ---------------------------------------------------------------------------

/// Reference values for the five case-(iii) compressions in the
/// symmetry-adapted basis.
inline std::array<Matrix, 5> case_iii_reference(double a, double b) {
  std::array<Matrix, 5> m;
  m[0] = Vector{{2, -2, 0, 0}}.asDiagonal();
  m[1] = Vector{{6, 6, 2, 2}}.asDiagonal();
  m[2] = Vector{{18, -18, 0, 0}}.asDiagonal();
  // Conjugation of the site-diagonal matrix diag(b, a+b, 0, a) by the
  // symmetry basis: each corner of the occupied square touches the two
  // adjacent tiles through exactly one bond apiece.
  m[3] = 0.5 * Matrix{{a + b, 0, b, -a}, {0, a + b, -a, b}, {b, -a, a + b, 0}, {-a, b, 0, a + b}};
  // Only the lower-right 2x2 block of the fourth-order compression is pinned;
  // the starred entries are filled with the computed values by the caller.
  m[4] = Matrix::Zero(4, 4);
  m[4].bottomRightCorner(2, 2) = Matrix{{b - a, 0.0}, {0.0, a - b}};
  return m;
}

struct IdentityLedger {
  struct Line {
    std::string name;
    bool pass;
    double deviation;
  };
  std::vector<Line> lines;
  bool all_pass = true;

  void add(const std::string& name, double deviation, double tol) {
    const bool ok = deviation <= tol;
    lines.push_back({name, ok, deviation});
    all_pass = all_pass && ok;
  }
};

/// Runs every reproducible identity check on fixed seeds: one ledger line per
/// identity. `caseiii_override` substitutes the reference matrices (used by
/// the mutation self-test).
inline IdentityLedger verify_identity_suite(std::uint64_t seed = 7, int workers = 1,
                                            const std::array<Matrix, 5>* caseiii_override = nullptr) {
  IdentityLedger ledger;

  // --- case (iii): the five displayed compressions --------------------------
  {
    double dev = 0;
    std::vector<std::pair<double, double>> pairs{{1, 0}, {2, 3}, {-1, 4}};
    if (caseiii_override) pairs = {{1, 0}};  // the override carries a single (a, b)
    for (auto [a, b] : pairs) {
      std::array<Matrix, 5> got = case_iii_matrices(a, b);
      std::array<Matrix, 5> want = caseiii_override ? *caseiii_override : case_iii_reference(a, b);
      // starred entries of the fifth matrix are not pinned
      const double c = 12.0 + (a * a + b * b) / 2.0;
      want[4] += c * Matrix::Identity(4, 4);
      want[4].topLeftCorner(2, 4) = got[4].topLeftCorner(2, 4);
      want[4].bottomLeftCorner(2, 2) = got[4].bottomLeftCorner(2, 2);
      for (int i = 0; i < 5; ++i) dev = std::max(dev, (got[i] - want[i]).cwiseAbs().maxCoeff());
    }
    ledger.add("caseiii-compressions", dev, 1e-10);
  }

  // --- case (iii): radius independence --------------------------------------
  {
    std::array<Matrix, 5> r4 = case_iii_matrices(2, 3, 4);
    std::array<Matrix, 5> r6 = case_iii_matrices(2, 3, 6);
    double dev = 0;
    for (int i = 0; i < 5; ++i) dev = std::max(dev, (r4[i] - r6[i]).cwiseAbs().maxCoeff());
    ledger.add("caseiii-radius-independence", dev, 1e-12);
  }

  // --- case (iii): small-eigenvalue splitting -------------------------------
  {
    SplittingTable table = case_iii_splitting(1, 0, {Complex(0, 20), Complex(0, 40), Complex(0, 80)});
    double dev = table.rows.back().relative_deviation;
    bool decreasing = true;
    for (size_t i = 1; i < table.rows.size(); ++i)
      decreasing = decreasing && table.rows[i].relative_deviation < table.rows[i - 1].relative_deviation;
    ledger.add("caseiii-splitting-deviation", dev, 0.5);
    ledger.add("caseiii-splitting-monotone", decreasing ? 0.0 : 1.0, 0.5);
    double mismatch = 0;
    for (const auto& r : table.rows) mismatch = std::max(mismatch, r.schur_route_mismatch);
    ledger.add("caseiii-schur-route", mismatch, 1e-10);
  }

  // --- discriminant: two routes ---------------------------------------------
  {
    auto rng = trial_stream(seed, 1);
    std::uniform_real_distribution<double> unif(-1, 1);
    std::uniform_int_distribution<int> dim(2, 6);
    double dev = 0;
    for (int t = 0; t < 100; ++t) {
      const int k = dim(rng);
      Matrix a(k, k);
      for (long i = 0; i < k * k; ++i) a(i / k, i % k) = unif(rng);
      Matrix sym = 0.5 * (a + a.transpose());
      EigenDecomposition ed = hermitian_eig(sym);
      const double diameter = ed.values(k - 1) - ed.values(0);
      double min_gap = std::numeric_limits<double>::infinity();
      Complex gaps = 1.0;
      for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
          min_gap = std::min(min_gap, std::abs(ed.values(j) - ed.values(i)));
          gaps *= std::pow(Complex(ed.values(j) - ed.values(i)), 2);
        }
      if (min_gap <= 1e-2 * diameter) continue;
      const Complex f = discriminant(sym);
      dev = std::max(dev, std::abs(f - gaps) / std::abs(gaps));
    }
    ledger.add("discriminant-two-routes", dev, 1e-6);
  }

  // --- leading order of off-diagonal resolvent blocks -----------------------
  {
    const LatticeBox box({-6, -6}, {6, 6});
    const Vector omega = sample_omega({DisorderLaw::Uniform, 0, 1, 0, 1, seed}, box.size(), 2);
    Hamiltonian h = build_discrete_anderson(box, omega);
    double worst_ratio = 0;
    for (Site j : {Site{1, 0}, Site{1, 1}, Site{2, 1}, Site{3, 0}}) {
      const long order = [&] {
        long t = 0;
        for (int c : j) t += std::abs(c);
        return t;
      }();
      const double cjd = static_cast<double>(shortest_path_count(j));
      std::vector<double> scaled;
      for (double mag : {50.0, 100.0, 200.0, 400.0}) {
        const Complex z(0, mag);
        CMatrix block = resolvent_block(h.matrix, z, {box.index_of(j)}, {box.index_of({0, 0})});
        const double rem = std::abs(block(0, 0) + cjd / std::pow(z, order + 1));
        scaled.push_back(rem * std::pow(mag, static_cast<double>(order + 2)));
      }
      const double lo = *std::min_element(scaled.begin(), scaled.end());
      const double hi = *std::max_element(scaled.begin(), scaled.end());
      worst_ratio = std::max(worst_ratio, hi / (2.0 * lo + 1.0));
    }
    ledger.add("neumann-offdiagonal-order", worst_ratio, 1.0);
  }

  // --- two-tile span --------------------------------------------------------
  {
    auto rng = trial_stream(seed, 3);
    double fail = 0;
    for (const auto& period : std::vector<std::vector<int>>{{1}, {2}, {2, 2}, {3, 2}}) {
      TileGeometry geom(period);
      Site c(geom.dim(), 0), cp(geom.dim(), 0);
      cp[0] = -1;
      SpanCheckResult res = two_tile_span_auto(geom, c, cp, Vector::Ones(geom.tile_size()),
                                               Complex(1, 1), rng);
      if (!res.full()) fail += 1;
    }
    ledger.add("two-tile-span", fail, 0.5);
  }

  // --- coupling limit -------------------------------------------------------
  {
    TileGeometry geom({2, 2});
    CouplingLimitTable table =
        coupling_limit(geom, {0, 0}, {-1, 0}, 1.5, Vector::Ones(4), {1e2, 1e3, 1e4, 1e5, 1e6},
                       {DisorderLaw::Uniform, 0, 1, 0, 1, seed}, Complex(1, 1), LatticeBox({-3, -2}, {2, 2}));
    ledger.add("coupling-limit-final", table.rows.back().deviation, 1e-4);
    ledger.add("coupling-limit-slope", std::abs(table.loglog.slope + 1.0), 0.2);
  }

  // --- Birman-Schwinger correspondence --------------------------------------
  {
    TileGeometry geom({2, 2});
    LatticeBox box({0, 0}, {5, 5});
    Vector f{{1.0, 0.7, 1.3, 0.9}};
    const long tiles = static_cast<long>(geom.tiles_intersecting(box).size());
    Vector omega = sample_omega({DisorderLaw::Uniform, 0, 1, 0, 1, seed}, tiles, 4);
    Vector omega0 = omega;
    omega0(0) = 0.0;
    const double lambda = omega(0);
    Matrix h0 = build_model_b(box, geom, f, omega0).matrix;
    Matrix hlam = build_model_b(box, geom, f, omega).matrix;
    SitePotential v = model_b_site_potential(box, geom, f, {0, 0});
    CorrespondenceReport rep = bs_correspondence(hlam, h0, v, lambda);
    ledger.add("bs-correspondence", rep.max_residual, 1e-8);
  }

  // --- eigenprojection transfer ---------------------------------------------
  {
    TileGeometry geom({2, 2});
    LatticeBox box({0, 0}, {5, 5});
    Vector f = Vector::Ones(4);
    const long tiles = static_cast<long>(geom.tiles_intersecting(box).size());
    Vector omega = sample_omega({DisorderLaw::Uniform, 0, 1, 0, 1, seed}, tiles, 5);
    const double mu = 0.25, lambda = 1.75;
    Vector omega_mu = omega;
    omega_mu(0) = mu;
    Vector omega_lam = omega;
    omega_lam(0) = lambda;
    Matrix hmu = build_model_b(box, geom, f, omega_mu).matrix;
    Matrix hlam = build_model_b(box, geom, f, omega_lam).matrix;
    SitePotential vp = model_b_site_potential(box, geom, f, {0, 0});
    Matrix v = embed_potential(vp, box.size());
    Matrix y = Matrix::Zero(box.size(), 4);
    SitePotential yp = model_b_site_potential(box, geom, f, {1, 0});
    for (int j = 0; j < 4; ++j) y(yp.support[j], j) = 1.0;
    TransferReport rep = eigenprojection_transfer(hlam, hmu, v, lambda, mu, y);
    ledger.add("eigenprojection-transfer", rep.max_residual, 1e-8);
  }

  // --- Model A direct sum ---------------------------------------------------
  {
    LatticeBox box({0, 0}, {3, 3});
    Vector omega = sample_omega({DisorderLaw::Uniform, 0, 1, 0, 1, seed}, box.size(), 6);
    Matrix w = Vector{{1.0, 2.0}}.asDiagonal();
    EigenDecomposition full = hermitian_eig(build_model_a(box, w, omega).matrix);
    std::vector<double> merged;
    for (double lam : {1.0, 2.0}) {
      EigenDecomposition part = hermitian_eig(build_discrete_anderson(box, Vector(lam * omega)).matrix);
      for (long i = 0; i < part.values.size(); ++i) merged.push_back(part.values(i));
    }
    std::sort(merged.begin(), merged.end());
    double dev = 0;
    for (long i = 0; i < full.values.size(); ++i) dev = std::max(dev, std::abs(full.values(i) - merged[i]));
    ledger.add("model-a-direct-sum", dev, 1e-10);
  }

  // --- spectral averaging ---------------------------------------------------
  {
    LatticeBox box({0, 0}, {3, 3});
    Vector omega = sample_omega({DisorderLaw::Uniform, 0, 1, 0, 1, seed}, box.size(), 7);
    Matrix h0 = build_discrete_anderson(box, omega).matrix;
    SitePotential v = discrete_site_potential(box, {1, 2});
    auto rng = trial_stream(seed, 8);
    std::uniform_real_distribution<double> unif(-1, 1);
    Vector phi(box.size());
    for (long i = 0; i < phi.size(); ++i) phi(i) = unif(rng);
    AveragingResult res = spectral_averaging_check(h0, v, 0.0, 0.5, phi);
    ledger.add("spectral-averaging", res.holds() ? 0.0 : res.lhs - res.rhs - res.budget, 0.5);
  }

  // --- Neumann remainder ----------------------------------------------------
  {
    LatticeBox box({0}, {4});
    Hamiltonian h = build_discrete_anderson(box, Vector::Zero(5));
    double worst = 0;
    double last = std::numeric_limits<double>::infinity();
    for (int m = 0; m <= 5; ++m) {
      NeumannReport rep = neumann_remainder(h.matrix, Complex(0, 10), m);
      if (rep.remainder > last * (1 + 1e-12)) worst = 1.0;
      last = rep.remainder;
      if (rep.remainder > rep.bound) worst = 1.0;
    }
    ledger.add("neumann-remainder", worst, 0.5);
  }

  (void)workers;
  return ledger;
}

}  // namespace anderson

#endif
