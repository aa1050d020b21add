#ifndef ANDERSON_CONFIG_HPP
#define ANDERSON_CONFIG_HPP

#include <json.hpp>

#include "anderson/experiments.hpp"

namespace anderson {

/// Thrown by parse_config; `violations` lists every problem found, each
/// prefixed with the offending key path.
struct ConfigError : std::runtime_error {
  std::vector<std::string> violations;
  explicit ConfigError(std::vector<std::string> v)
      : std::runtime_error(join(v)), violations(std::move(v)) {}
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid config:";
    for (const auto& m : v) s += "\n  - " + m;
    return s;
  }
};

struct RunConfig {
  ModelSpec model;
  DisorderSpec disorder{DisorderLaw::Uniform, 0.0, 1.0, 0.0, 1.0, 1};
  // experiment parameters (used by the subcommands that need them)
  long trials = 200;
  double tau = 1e-10;
  std::vector<Complex> z_list;
  std::vector<double> lambda_grid;
  std::vector<int> l_list;
  double mu = 1.0;
  Complex z0{1.0, 1.0};
  std::string out_dir = "out";

  nlohmann::json resolved;  // the config with defaults filled in, for manifests
};

namespace detail {

inline int levenshtein(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::string suggest(const std::string& key, const std::vector<std::string>& known) {
  std::string best;
  int best_d = 3;  // only suggest close matches
  for (const auto& k : known) {
    const int d = levenshtein(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best.empty() ? "" : " (did you mean \"" + best + "\"?)";
}

inline void check_keys(const nlohmann::json& obj, const std::string& path,
                       const std::vector<std::string>& known, std::vector<std::string>& errors) {
  if (!obj.is_object()) return;
  for (const auto& item : obj.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      errors.push_back(path + item.key() + ": unknown key" + suggest(item.key(), known));
  }
}

template <class T>
inline std::optional<T> take(const nlohmann::json& obj, const std::string& key, const std::string& path,
                             std::vector<std::string>& errors) {
  if (!obj.contains(key)) return std::nullopt;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    errors.push_back(path + key + ": type mismatch");
    return std::nullopt;
  }
}

inline std::optional<Complex> take_complex(const nlohmann::json& obj, const std::string& key,
                                           const std::string& path, std::vector<std::string>& errors) {
  auto v = take<std::vector<double>>(obj, key, path, errors);
  if (!v) return std::nullopt;
  if (v->size() != 2) {
    errors.push_back(path + key + ": expected [re, im]");
    return std::nullopt;
  }
  return Complex((*v)[0], (*v)[1]);
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  std::vector<std::string> errors;
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError({std::string("parse error: ") + e.what()});
  }
  if (!root.is_object()) throw ConfigError({"top level: expected an object"});

  RunConfig cfg;
  detail::check_keys(root, "", {"model", "disorder", "experiment", "output"}, errors);

  // ---- model ----
  const nlohmann::json model = root.value("model", nlohmann::json::object());
  detail::check_keys(model, "model.", {"kind", "box", "W", "period", "f", "a", "b", "radius"}, errors);
  const std::string kind = detail::take<std::string>(model, "kind", "model.", errors).value_or("discrete");
  if (kind == "discrete")
    cfg.model.kind = ModelKind::Discrete;
  else if (kind == "model_a")
    cfg.model.kind = ModelKind::ModelA;
  else if (kind == "model_b")
    cfg.model.kind = ModelKind::ModelB;
  else if (kind == "two_site")
    cfg.model.kind = ModelKind::TwoSite;
  else
    errors.push_back("model.kind: must be one of discrete|model_a|model_b|two_site");

  if (model.contains("box")) {
    const nlohmann::json box = model["box"];
    detail::check_keys(box, "model.box.", {"lower", "upper"}, errors);
    auto lower = detail::take<std::vector<int>>(box, "lower", "model.box.", errors);
    auto upper = detail::take<std::vector<int>>(box, "upper", "model.box.", errors);
    if (lower && upper) {
      if (lower->size() != upper->size() || lower->empty())
        errors.push_back("model.box: lower and upper must be nonempty and the same length");
      else {
        bool ok = true;
        for (size_t i = 0; i < lower->size(); ++i) ok = ok && (*lower)[i] <= (*upper)[i];
        if (!ok)
          errors.push_back("model.box: lower must be <= upper coordinatewise");
        else
          cfg.model.box = LatticeBox(*lower, *upper);
      }
    } else if (lower || upper) {
      errors.push_back("model.box: both lower and upper are required");
    }
  } else {
    cfg.model.box = LatticeBox({-4, -4}, {4, 4});
  }

  const bool w_given = model.contains("W");
  if (auto w = detail::take<std::vector<std::vector<double>>>(model, "W", "model.", errors)) {
    const size_t k = w->size();
    bool shaped = k > 0;
    for (const auto& row : *w) shaped = shaped && row.size() == k;
    if (!shaped) {
      errors.push_back("model.W: must be a nonempty square matrix");
    } else {
      Matrix wm(static_cast<long>(k), static_cast<long>(k));
      for (size_t i = 0; i < k; ++i)
        for (size_t j = 0; j < k; ++j) wm(static_cast<long>(i), static_cast<long>(j)) = (*w)[i][j];
      if ((wm - wm.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (wm.cwiseAbs().maxCoeff() + 1))
        errors.push_back("model.W: must be symmetric");
      else if (hermitian_eig(wm).values.minCoeff() <= 0)
        errors.push_back("model.W: must be positive definite");
      else
        cfg.model.w = std::move(wm);
    }
  }
  if (auto period = detail::take<std::vector<int>>(model, "period", "model.", errors)) {
    bool pos = !period->empty();
    for (int p : *period) pos = pos && p >= 1;
    if (!pos)
      errors.push_back("model.period: entries must be >= 1");
    else
      cfg.model.geom = TileGeometry(*period);
  }
  if (auto f = detail::take<std::vector<double>>(model, "f", "model.", errors)) {
    bool pos = !f->empty();
    for (double x : *f) pos = pos && x > 0;
    if (!pos) {
      errors.push_back("model.f: entries must be > 0");
    } else {
      cfg.model.f = Vector(static_cast<long>(f->size()));
      for (size_t i = 0; i < f->size(); ++i) cfg.model.f(static_cast<long>(i)) = (*f)[i];
    }
  }
  cfg.model.a = detail::take<double>(model, "a", "model.", errors).value_or(1.0);
  cfg.model.b = detail::take<double>(model, "b", "model.", errors).value_or(0.0);
  if (auto r = detail::take<int>(model, "radius", "model.", errors)) {
    if (*r < 4)
      errors.push_back("model.radius: must be >= 4");
    else
      cfg.model.radius = *r;
  }
  if (cfg.model.kind == ModelKind::ModelA && !w_given)
    errors.push_back("model.W: required for kind model_a");
  if (cfg.model.kind == ModelKind::ModelB) {
    if (cfg.model.geom.period.empty()) errors.push_back("model.period: required for kind model_b");
    if (cfg.model.f.size() == 0) errors.push_back("model.f: required for kind model_b");
    if (!cfg.model.geom.period.empty() && cfg.model.f.size() != 0 &&
        cfg.model.f.size() != cfg.model.geom.tile_size())
      errors.push_back("model.f: length must equal the tile size of model.period");
    if (!cfg.model.geom.period.empty() && cfg.model.geom.dim() != cfg.model.box.dim)
      errors.push_back("model.period: dimension must match model.box");
  }

  // ---- disorder ----
  const nlohmann::json dis = root.value("disorder", nlohmann::json::object());
  detail::check_keys(dis, "disorder.", {"law", "lo", "hi", "mean", "sd", "seed"}, errors);
  const std::string law = detail::take<std::string>(dis, "law", "disorder.", errors).value_or("uniform");
  if (law == "uniform")
    cfg.disorder.law = DisorderLaw::Uniform;
  else if (law == "truncated_gaussian")
    cfg.disorder.law = DisorderLaw::TruncatedGaussian;
  else
    errors.push_back("disorder.law: must be uniform or truncated_gaussian");
  cfg.disorder.lo = detail::take<double>(dis, "lo", "disorder.", errors).value_or(0.0);
  cfg.disorder.hi = detail::take<double>(dis, "hi", "disorder.", errors).value_or(1.0);
  cfg.disorder.mean = detail::take<double>(dis, "mean", "disorder.", errors).value_or(0.5);
  cfg.disorder.sd = detail::take<double>(dis, "sd", "disorder.", errors).value_or(0.25);
  cfg.disorder.master_seed = detail::take<std::uint64_t>(dis, "seed", "disorder.", errors).value_or(1);
  if (cfg.disorder.lo >= cfg.disorder.hi) errors.push_back("disorder.lo: must be < disorder.hi");
  if (cfg.disorder.law == DisorderLaw::TruncatedGaussian && cfg.disorder.sd <= 0)
    errors.push_back("disorder.sd: must be > 0");

  // ---- experiment ----
  const nlohmann::json exp = root.value("experiment", nlohmann::json::object());
  detail::check_keys(exp, "experiment.",
                     {"trials", "tau", "z_list", "lambda_grid", "l_list", "mu", "z0"}, errors);
  cfg.trials = detail::take<long>(exp, "trials", "experiment.", errors).value_or(cfg.trials);
  if (cfg.trials < 1) errors.push_back("experiment.trials: must be >= 1");
  cfg.tau = detail::take<double>(exp, "tau", "experiment.", errors).value_or(cfg.tau);
  if (cfg.tau <= 0) errors.push_back("experiment.tau: must be > 0");
  if (auto zl = detail::take<std::vector<std::vector<double>>>(exp, "z_list", "experiment.", errors)) {
    for (const auto& z : *zl) {
      if (z.size() != 2) {
        errors.push_back("experiment.z_list: entries must be [re, im]");
        break;
      }
      cfg.z_list.emplace_back(z[0], z[1]);
    }
  } else {
    for (double m : {10.0, 20.0, 40.0, 80.0}) cfg.z_list.emplace_back(0.0, m);
  }
  cfg.lambda_grid = detail::take<std::vector<double>>(exp, "lambda_grid", "experiment.", errors)
                        .value_or(std::vector<double>{1e2, 1e3, 1e4, 1e5});
  cfg.l_list =
      detail::take<std::vector<int>>(exp, "l_list", "experiment.", errors).value_or(std::vector<int>{1, 2, 3, 4, 5, 6});
  cfg.mu = detail::take<double>(exp, "mu", "experiment.", errors).value_or(cfg.mu);
  cfg.z0 = detail::take_complex(exp, "z0", "experiment.", errors).value_or(cfg.z0);

  // ---- output ----
  const nlohmann::json outp = root.value("output", nlohmann::json::object());
  detail::check_keys(outp, "output.", {"dir"}, errors);
  cfg.out_dir = detail::take<std::string>(outp, "dir", "output.", errors).value_or(cfg.out_dir);

  if (!errors.empty()) throw ConfigError(std::move(errors));

  // Echo the resolved config (defaults included) for the run manifest.
  nlohmann::json r;
  r["model"]["kind"] = kind;
  r["model"]["box"]["lower"] = cfg.model.box.lower;
  r["model"]["box"]["upper"] = cfg.model.box.upper;
  if (cfg.model.w.size() != 0) {
    std::vector<std::vector<double>> w(static_cast<size_t>(cfg.model.w.rows()));
    for (long i = 0; i < cfg.model.w.rows(); ++i)
      for (long j = 0; j < cfg.model.w.cols(); ++j) w[static_cast<size_t>(i)].push_back(cfg.model.w(i, j));
    r["model"]["W"] = w;
  }
  if (!cfg.model.geom.period.empty()) r["model"]["period"] = cfg.model.geom.period;
  if (cfg.model.f.size() != 0) {
    std::vector<double> f(cfg.model.f.data(), cfg.model.f.data() + cfg.model.f.size());
    r["model"]["f"] = f;
  }
  r["model"]["a"] = cfg.model.a;
  r["model"]["b"] = cfg.model.b;
  r["model"]["radius"] = cfg.model.radius;
  r["disorder"]["law"] = law;
  r["disorder"]["lo"] = cfg.disorder.lo;
  r["disorder"]["hi"] = cfg.disorder.hi;
  r["disorder"]["mean"] = cfg.disorder.mean;
  r["disorder"]["sd"] = cfg.disorder.sd;
  r["disorder"]["seed"] = cfg.disorder.master_seed;
  r["experiment"]["trials"] = cfg.trials;
  r["experiment"]["tau"] = cfg.tau;
  for (Complex z : cfg.z_list) r["experiment"]["z_list"].push_back({z.real(), z.imag()});
  r["experiment"]["lambda_grid"] = cfg.lambda_grid;
  r["experiment"]["l_list"] = cfg.l_list;
  r["experiment"]["mu"] = cfg.mu;
  r["experiment"]["z0"] = {cfg.z0.real(), cfg.z0.imag()};
  r["output"]["dir"] = cfg.out_dir;
  cfg.resolved = r;
  return cfg;
}

}  // namespace anderson

#endif
