// Command-line front end: runs the experiments defined in the library and
// writes reproducible CSV/JSON artifacts.
//
// Exit codes: 0 success, 1 an identity or simplicity assertion failed,
// 2 invalid configuration, 3 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "anderson/config.hpp"

namespace fs = std::filesystem;
using namespace anderson;

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fmt(Complex z) { return fmt(z.real()) + (z.imag() < 0 ? "-" : "+") + fmt(std::abs(z.imag())) + "i"; }

// FNV-1a over the canonical JSON dump; good enough to fingerprint a config.
std::string config_hash(const nlohmann::json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Emitter {
  fs::path dir;
  explicit Emitter(const std::string& out_dir) : dir(out_dir) { fs::create_directories(dir); }

  std::ofstream open(const std::string& name, const std::string& check_id) {
    std::ofstream f(dir / name, std::ios::binary);
    f << "# check: " << check_id << "\n";
    return f;
  }

  void manifest(const RunConfig& cfg, const std::string& subcommand) {
    nlohmann::json m;
    m["subcommand"] = subcommand;
    m["seed"] = cfg.disorder.master_seed;
    m["config_hash"] = config_hash(cfg.resolved);
    m["config"] = cfg.resolved;
    m["versions"]["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                             "." + std::to_string(EIGEN_MINOR_VERSION);
    m["versions"]["andersonlab"] = "1.0.0";
    std::ofstream f(dir / "manifest.json", std::ios::binary);
    f << m.dump(2) << "\n";
  }
};

SitePotential single_site_potential(const ModelSpec& m) {
  switch (m.kind) {
    case ModelKind::Discrete:
      return discrete_site_potential(m.box, m.box.lower);
    case ModelKind::ModelA:
      return model_a_site_potential(m.box, m.w, m.box.lower);
    case ModelKind::ModelB:
      return model_b_site_potential(m.box, m.geom, m.f, Site(m.box.dim, 0));
    default:
      throw ConfigError({"model.kind: subcommand requires discrete, model_a or model_b"});
  }
}

int run_verify_identities(const RunConfig& cfg, int workers) {
  Emitter em(cfg.out_dir);
  em.manifest(cfg, "verify-identities");
  IdentityLedger ledger = verify_identity_suite(cfg.disorder.master_seed, workers);
  nlohmann::json out = nlohmann::json::array();
  for (const auto& line : ledger.lines) {
    out.push_back({{"check", line.name}, {"pass", line.pass}, {"deviation", fmt(line.deviation)}});
    std::cout << (line.pass ? "pass " : "FAIL ") << line.name << " (deviation " << fmt(line.deviation)
              << ")\n";
  }
  std::ofstream f(em.dir / "identities.json", std::ios::binary);
  f << out.dump(2) << "\n";
  return ledger.all_pass ? 0 : 1;
}

int run_spectrum(const RunConfig& cfg) {
  Emitter em(cfg.out_dir);
  em.manifest(cfg, "spectrum");
  const Vector omega = sample_omega(cfg.disorder, omega_count(cfg.model), 0);
  SpectralReport rep = spectral_report(build_model(cfg.model, omega).matrix, cfg.tau);
  auto f = em.open("spectrum.csv", "eigenvalue-list");
  f << "index,eigenvalue\n";
  for (long i = 0; i < rep.eigenvalues.size(); ++i) f << i << "," << fmt(rep.eigenvalues(i)) << "\n";
  auto g = em.open("spectrum_summary.csv", "gap-summary");
  g << "min_gap,min_gap_relative,diameter,cluster_count\n";
  g << fmt(rep.min_gap) << "," << fmt(rep.min_gap_relative) << "," << fmt(rep.diameter) << ","
    << rep.clusters.size() << "\n";
  return 0;
}

int run_bs(const RunConfig& cfg) {
  Emitter em(cfg.out_dir);
  em.manifest(cfg, "bs");
  const long count = omega_count(cfg.model);
  Vector omega = sample_omega(cfg.disorder, count, 0);
  Vector omega0 = omega;
  omega0(0) = 0.0;
  const double lambda = omega(0);
  const Matrix h0 = build_model(cfg.model, omega0).matrix;
  const Matrix hlam = build_model(cfg.model, omega).matrix;
  const SitePotential v = single_site_potential(cfg.model);
  CorrespondenceReport rep = bs_correspondence(hlam, h0, v, lambda);
  auto f = em.open("bs_correspondence.csv", "eigenvector-correspondence");
  f << "eigenvalue,residual,compressed_norm\n";
  for (const auto& row : rep.rows)
    f << fmt(row.e) << "," << fmt(row.residual) << "," << fmt(row.sqrt_v_u_norm) << "\n";
  std::cout << "max residual " << fmt(rep.max_residual) << " over " << rep.rows.size() << " eigenvalues ("
            << rep.skipped.size() << " skipped near the background spectrum)\n";
  return rep.max_residual <= 1e-8 ? 0 : 1;
}

int run_census(const RunConfig& cfg, int workers, double max_degenerate_fraction) {
  Emitter em(cfg.out_dir);
  em.manifest(cfg, "census");
  CensusResult res = multiplicity_census(cfg.model, cfg.disorder, cfg.trials, cfg.tau, workers);
  auto f = em.open("census.csv", "multiplicity-census");
  f << "trial,min_gap,cluster_count\n";
  for (long t = 0; t < res.trials; ++t)
    f << t << "," << fmt(res.min_rel_gap[t]) << "," << res.largest_cluster[t] << "\n";
  auto g = em.open("census_summary.csv", "multiplicity-census-summary");
  g << "trials,degenerate_fraction,degenerate_upper95\n";
  g << res.trials << "," << fmt(res.degenerate_fraction) << "," << fmt(res.degenerate_upper95) << "\n";
  std::cout << "degenerate fraction " << fmt(res.degenerate_fraction) << " (95% upper bound "
            << fmt(res.degenerate_upper95) << ")\n";
  return res.degenerate_fraction <= max_degenerate_fraction ? 0 : 1;
}

int run_decay(const RunConfig& cfg) {
  Emitter em(cfg.out_dir);
  em.manifest(cfg, "decay");
  const Vector omega = sample_omega(cfg.disorder, omega_count(cfg.model), 0);
  Hamiltonian h = build_model(cfg.model, omega);
  Site center(cfg.model.box.dim);
  for (int i = 0; i < cfg.model.box.dim; ++i)
    center[i] = (cfg.model.box.lower[i] + cfg.model.box.upper[i]) / 2;
  DecayFit fit = combes_thomas_fit(h, center, cfg.z_list.front(), cfg.l_list);
  auto f = em.open("decay.csv", "resolvent-decay");
  f << "L,norm\n";
  for (size_t i = 0; i < fit.distances.size(); ++i)
    f << fit.distances[i] << "," << fmt(fit.norms[i]) << "\n";
  auto g = em.open("decay_fit.csv", "resolvent-decay-fit");
  g << "eta,log_c,r2,monotone\n";
  g << fmt(fit.eta) << "," << fmt(fit.log_c) << "," << fmt(fit.r2) << "," << (fit.monotone ? 1 : 0) << "\n";
  std::cout << "fitted decay rate " << fmt(fit.eta) << " (r^2 " << fmt(fit.r2) << ")\n";
  return fit.monotone ? 0 : 1;
}

int run_splitting(const RunConfig& cfg) {
  Emitter em(cfg.out_dir);
  em.manifest(cfg, "splitting");
  SplittingTable table = case_iii_splitting(cfg.model.a, cfg.model.b, cfg.z_list, cfg.model.radius);
  auto f = em.open("splitting.csv", "two-site-eigenvalue-splitting");
  f << "abs_z,measured_lo,measured_hi,predicted,gap,relative_deviation,schur_route_mismatch\n";
  for (const auto& row : table.rows)
    f << fmt(row.abs_z) << "," << fmt(row.measured_lo) << "," << fmt(row.measured_hi) << ","
      << fmt(row.predicted) << "," << fmt(row.gap) << "," << fmt(row.relative_deviation) << ","
      << fmt(row.schur_route_mismatch) << "\n";
  const auto& last = table.rows.back();
  std::cout << "final relative deviation " << fmt(last.relative_deviation) << "\n";
  return last.relative_deviation <= 0.5 && last.schur_route_mismatch <= 1e-8 ? 0 : 1;
}

int run_span(const RunConfig& cfg) {
  Emitter em(cfg.out_dir);
  em.manifest(cfg, "span");
  if (cfg.model.geom.period.empty() || cfg.model.f.size() == 0)
    throw ConfigError({"model.period: span requires model.period and model.f"});
  Site c(cfg.model.geom.dim(), 0), cp(cfg.model.geom.dim(), 0);
  cp[0] = -1;
  auto rng = trial_stream(cfg.disorder.master_seed, 0);
  SpanCheckResult res = two_tile_span_auto(cfg.model.geom, c, cp, cfg.model.f, cfg.z0, rng);
  auto f = em.open("span.csv", "two-tile-span");
  f << "target_dim,achieved_rank,smallest_retained\n";
  f << res.target_dim << "," << res.achieved_rank << "," << fmt(res.smallest_retained) << "\n";
  auto g = em.open("span_mu.csv", "two-tile-span-couplings");
  g << "index,mu\n";
  for (size_t i = 0; i < res.mu_values.size(); ++i) g << i << "," << fmt(res.mu_values[i]) << "\n";
  std::cout << "rank " << res.achieved_rank << " of " << res.target_dim << "\n";
  return res.full() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume laboratory for random Schrodinger operators"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir_flag;
  std::optional<std::uint64_t> seed_flag;
  int workers = 1;
  double max_degenerate_fraction = 1.0;
  app.add_option("--config", config_path, "path to a JSON config file");
  app.add_option("--seed", seed_flag, "override the config seed");
  app.add_option("--workers", workers, "parallel worker count")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", out_dir_flag, "override the output directory");

  auto* census_cmd = app.add_subcommand("census", "Monte Carlo multiplicity statistics");
  census_cmd->add_option("--max-degenerate-fraction", max_degenerate_fraction,
                         "fail (exit 1) if the degenerate fraction exceeds this");
  for (const char* name : {"verify-identities", "spectrum", "bs", "decay", "splitting", "span"})
    app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::string text = "{}";
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ConfigError({"--config: cannot open " + config_path});
      text.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    }
    RunConfig cfg = parse_config(text);
    if (seed_flag) {
      cfg.disorder.master_seed = *seed_flag;
      cfg.resolved["disorder"]["seed"] = *seed_flag;
    }
    if (!out_dir_flag.empty()) {
      cfg.out_dir = out_dir_flag;
      cfg.resolved["output"]["dir"] = out_dir_flag;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "verify-identities") return run_verify_identities(cfg, workers);
    if (sub == "spectrum") return run_spectrum(cfg);
    if (sub == "bs") return run_bs(cfg);
    if (sub == "census") return run_census(cfg, workers, max_degenerate_fraction);
    if (sub == "decay") return run_decay(cfg);
    if (sub == "splitting") return run_splitting(cfg);
    if (sub == "span") return run_span(cfg);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const SingularMatrix& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const NearSpectrum& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
