// Batch front-end: loads a model file, runs the requested analysis, and
// prints a machine-readable JSON report on stdout. Diagnostics go to
// stderr; exit codes are 0 (success), 2 (input error), 3 (numerical
// failure).

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hmmdual/rng.hpp"

#include "hmmdual/entropy.hpp"
#include "hmmdual/errors.hpp"
#include "hmmdual/gramian.hpp"
#include "hmmdual/io.hpp"
#include "hmmdual/linear_gaussian.hpp"
#include "hmmdual/simulate.hpp"
#include "hmmdual/stability.hpp"
#include "hmmdual/subspace.hpp"

namespace {

using hmmdual::ControlFunctional;
using hmmdual::Error;
using hmmdual::ErrorCode;
using nlohmann::ordered_json;

constexpr const char* kToolVersion = "0.1.0";
constexpr int kSchemaVersion = 1;

ordered_json to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

ordered_json to_json(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

ordered_json report_envelope(const std::string& model_hash,
                             const ordered_json& cfg) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["tool"] = "hmmdual";
  j["version"] = kToolVersion;
  j["model_hash"] = model_hash;
  j["cfg"] = cfg;
  return j;
}

ordered_json cfg_json(const hmmdual::SimConfig& cfg) {
  ordered_json j;
  j["T"] = cfg.T;
  j["dt"] = cfg.dt;
  j["dt_effective"] = cfg.grid().dt();
  j["n_paths"] = cfg.n_paths;
  j["seed"] = cfg.seed;
  return j;
}

const hmmdual::ProbabilityVector& named_prior(const hmmdual::ModelFile& mf,
                                              const std::string& name) {
  const auto it = mf.priors.find(name);
  if (it == mf.priors.end()) {
    hmmdual::fail(ErrorCode::ConfigError,
                  "prior \"" + name + "\" is not defined in the model file");
  }
  return it->second;
}

// Control table CSV: header "t,u1,...,um", one sample per row; values are
// linearly interpolated onto the simulation grid.
Eigen::MatrixXd load_control_table(const std::string& path,
                                   const hmmdual::Grid& grid, int m) {
  std::ifstream in(path);
  if (!in) {
    hmmdual::fail(ErrorCode::ParseError, "cannot open control table " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    hmmdual::fail(ErrorCode::ParseError, "empty control table " + path);
  }
  std::vector<double> times;
  std::vector<Eigen::VectorXd> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    if (static_cast<int>(values.size()) != m + 1) {
      hmmdual::fail(ErrorCode::ParseError,
                    "control table rows need 1 + m = " + std::to_string(m + 1) +
                        " columns");
    }
    times.push_back(values[0]);
    samples.push_back(Eigen::Map<const Eigen::VectorXd>(values.data() + 1, m));
  }
  if (times.size() < 2) {
    hmmdual::fail(ErrorCode::ParseError, "control table needs >= 2 samples");
  }
  Eigen::MatrixXd u(grid.n_nodes(), m);
  std::size_t seg = 0;
  for (int k = 0; k < grid.n_nodes(); ++k) {
    const double t = grid.time(k);
    while (seg + 2 < times.size() && times[seg + 1] < t) ++seg;
    const double t0 = times[seg], t1 = times[seg + 1];
    const double w = t1 > t0 ? std::clamp((t - t0) / (t1 - t0), 0.0, 1.0) : 0.0;
    u.row(k) = ((1.0 - w) * samples[seg] + w * samples[seg + 1]).transpose();
  }
  return u;
}

ControlFunctional parse_control(const std::string& spec, int m,
                                const hmmdual::Grid& grid) {
  if (spec == "zero") return ControlFunctional::zero(m);
  if (spec == "sin_of_Z") return ControlFunctional::sin_of_z(m);
  if (spec == "tanh_of_Z") return ControlFunctional::tanh_of_z(m);
  if (spec.rfind("const:", 0) == 0) {
    std::istringstream values(spec.substr(6));
    std::string cell;
    std::vector<double> v;
    while (std::getline(values, cell, ',')) v.push_back(std::stod(cell));
    if (static_cast<int>(v.size()) == 1 && m > 1) v.resize(m, v[0]);
    if (static_cast<int>(v.size()) != m) {
      hmmdual::fail(ErrorCode::ConfigError,
                    "const control needs " + std::to_string(m) + " components");
    }
    return ControlFunctional::constant(
        Eigen::Map<const Eigen::VectorXd>(v.data(), m));
  }
  if (spec.rfind("table:", 0) == 0) {
    return ControlFunctional::table(load_control_table(spec.substr(6), grid, m));
  }
  hmmdual::fail(ErrorCode::ConfigError, "unknown control \"" + spec + "\"");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    hmmdual::fail(ErrorCode::ConfigError, "cannot write to " + path);
  }
  out << content;
}

int cmd_analyze(const std::string& model_path, double tol_rank,
                double tol_model, double tol_level) {
  const hmmdual::ModelFile mf = hmmdual::load_model(model_path, tol_model);
  const hmmdual::ObservabilityReport obs =
      hmmdual::is_observable(mf.model, tol_rank);
  const hmmdual::ObservableFunctions of =
      hmmdual::observable_functions(mf.model, tol_rank, tol_level);
  const hmmdual::StabilityReport stab =
      hmmdual::is_stabilizable(mf.model, tol_rank);

  ordered_json cfg;
  cfg["tol_rank"] = tol_rank;
  cfg["tol_model"] = tol_model;
  cfg["tol_level"] = tol_level;
  ordered_json j = report_envelope(mf.hash, cfg);
  j["d"] = mf.model.d;
  j["m"] = mf.model.m;
  j["observable"] = obs.observable;
  j["dim_C"] = obs.dim;
  j["dim_O"] = of.space.dim();
  j["injective_H"] = hmmdual::is_injective_observation(mf.model.H, tol_level);
  j["degenerate_levels"] = of.degenerate_levels;
  j["n_levels"] = of.levels.r();
  ordered_json classes = ordered_json::array();
  for (const auto& cls : stab.decomposition.classes) classes.push_back(cls);
  j["ergodic_classes"] = classes;
  j["transient_states"] = stab.decomposition.transient;
  j["dim_S0"] = stab.S0.dim();
  j["stabilizable"] = stab.stabilizable;
  j["detectable"] = stab.detectable;
  j["per_class_indicator_in_C"] = stab.per_class_indicator_in_C;
  j["tv_convention"] = "sum_abs";
  hmmdual::dump_json17(j, std::cout);
  return 0;
}

int cmd_gramian(const std::string& model_path, hmmdual::SimConfig cfg,
                double tol_rank, const std::string& sv_csv) {
  const hmmdual::ModelFile mf = hmmdual::load_model(model_path);
  const hmmdual::GramianEstimate est = hmmdual::estimate_gramian(mf.model, cfg);
  const hmmdual::RankResult rank = hmmdual::gramian_rank(est, tol_rank);

  ordered_json j = report_envelope(mf.hash, cfg_json(cfg));
  j["W"] = to_json(est.W);
  j["stderr"] = to_json(est.stderr_W);
  if (rank.conclusive()) {
    j["rank"] = *rank.rank;
  } else {
    j["rank"] = "inconclusive";
  }
  j["n_above_threshold"] = rank.n_above;
  j["singular_values"] = to_json(rank.singular_values);
  j["threshold"] = rank.threshold;
  j["noise_band"] = {rank.band_lo, rank.band_hi};
  hmmdual::dump_json17(j, std::cout);

  if (!sv_csv.empty()) {
    std::ostringstream os;
    os << "index,singular_value\n";
    for (Eigen::Index i = 0; i < rank.singular_values.size(); ++i) {
      os << i << ',' << hmmdual::format_g17(rank.singular_values(i)) << "\n";
    }
    write_file(sv_csv, os.str());
  }
  return 0;
}

int cmd_duality(const std::string& model_path, hmmdual::SimConfig cfg,
                const std::string& prior_name, const std::string& control_spec,
                double c) {
  const hmmdual::ModelFile mf = hmmdual::load_model(model_path);
  const hmmdual::ProbabilityVector& prior = named_prior(mf, prior_name);
  const ControlFunctional control =
      parse_control(control_spec, mf.model.m, cfg.grid());
  const hmmdual::DualityReport rep = hmmdual::check_adjoint(
      mf.model, hmmdual::make_signed_measure(prior.values), control, c, cfg);

  ordered_json cfg_j = cfg_json(cfg);
  cfg_j["prior"] = prior_name;
  cfg_j["control"] = control_spec;
  cfg_j["c"] = c;
  ordered_json j = report_envelope(mf.hash, cfg_j);
  j["lhs"] = rep.lhs;
  j["rhs"] = rep.rhs;
  j["stderr_lhs"] = rep.stderr_lhs;
  j["stderr_rhs"] = rep.stderr_rhs;
  j["stderr_diff"] = rep.stderr_diff;
  j["z_score"] = rep.z_score;
  hmmdual::dump_json17(j, std::cout);
  return 0;
}

int cmd_filter(const std::string& model_path, hmmdual::SimConfig cfg,
               const std::string& mu_name, const std::string& nu_name,
               const std::string& csv_path, int dump_paths,
               const std::string& dump_prefix) {
  const hmmdual::ModelFile mf = hmmdual::load_model(model_path);
  const hmmdual::ProbabilityVector& mu = named_prior(mf, mu_name);
  const hmmdual::ProbabilityVector& nu = named_prior(mf, nu_name);
  const hmmdual::DecayCurve curve =
      hmmdual::filter_stability_experiment(mf.model, mu, nu, cfg);

  ordered_json cfg_j = cfg_json(cfg);
  cfg_j["mu"] = mu_name;
  cfg_j["nu"] = nu_name;
  ordered_json j = report_envelope(mf.hash, cfg_j);
  j["tv_convention"] = "sum_abs";
  j["t"] = to_json(curve.t);
  j["mean_tv"] = to_json(curve.mean_tv);
  j["stderr_tv"] = to_json(curve.stderr_tv);
  j["final_tv"] = curve.mean_tv(curve.mean_tv.size() - 1);
  hmmdual::dump_json17(j, std::cout);

  if (!csv_path.empty()) {
    std::ostringstream os;
    os << "t,mean_tv,stderr\n";
    for (Eigen::Index k = 0; k < curve.t.size(); ++k) {
      os << hmmdual::format_g17(curve.t(k)) << ','
         << hmmdual::format_g17(curve.mean_tv(k)) << ','
         << hmmdual::format_g17(curve.stderr_tv(k)) << "\n";
    }
    write_file(csv_path, os.str());
  }

  if (dump_paths > 0) {
    hmmdual::SimConfig path_cfg = cfg;
    path_cfg.measure = hmmdual::MeasureKind::Pmu;
    path_cfg.prior = mu;
    hmmdual::PropagatorEngine engine(mf.model, path_cfg);
    const hmmdual::SignedMeasureVector mu_measure =
        hmmdual::make_signed_measure(mu.values);
    for (int p = 0; p < dump_paths; ++p) {
      const hmmdual::ZakaiPath path = engine.path(p);
      const hmmdual::SigmaPath sigma = hmmdual::zakai_from_prior(path, mu_measure);
      const hmmdual::FilterPath filter = hmmdual::wonham_normalize(sigma);
      std::ostringstream os;
      hmmdual::export_trajectory_csv(path, sigma, filter, os);
      write_file(dump_prefix + std::to_string(p) + ".csv", os.str());
    }
  }
  return 0;
}

int cmd_entropy(const std::string& model_path, hmmdual::SimConfig cfg,
                const std::string& mu_name, const std::string& nu_name,
                bool with_oracle) {
  const hmmdual::ModelFile mf = hmmdual::load_model(model_path);
  const hmmdual::ProbabilityVector& mu = named_prior(mf, mu_name);
  const hmmdual::ProbabilityVector& nu = named_prior(mf, nu_name);
  const hmmdual::KlEstimate est = hmmdual::estimate_kl(mf.model, mu, nu, cfg);

  ordered_json cfg_j = cfg_json(cfg);
  cfg_j["mu"] = mu_name;
  cfg_j["nu"] = nu_name;
  ordered_json j = report_envelope(mf.hash, cfg_j);
  j["kl"] = est.kl;
  j["stderr"] = est.stderror;
  j["T"] = est.T;
  j["n_paths"] = est.n_paths;
  if (with_oracle) {
    if (mf.model.m != 1 || mf.model.A.cwiseAbs().maxCoeff() > 0.0) {
      hmmdual::fail(ErrorCode::ConfigError,
                    "--oracle requires a static (A = 0) scalar-observation model");
    }
    j["oracle_kl"] = hmmdual::static_kl_oracle(mf.model.H.col(0), mu, nu, cfg.T);
  }
  hmmdual::dump_json17(j, std::cout);
  return 0;
}

int cmd_lg(const std::string& model_path, double T, double dt,
           std::uint64_t seed, double tol_rank) {
  // The file is read as a plain linear pair: no generator constraint on A.
  const hmmdual::LinearPair pair = hmmdual::load_linear_pair(model_path, T);
  hmmdual::FiniteHMM raw;
  raw.d = static_cast<int>(pair.A.rows());
  raw.m = static_cast<int>(pair.H.cols());
  raw.A = pair.A;
  raw.H = pair.H;
  const std::string hash = hmmdual::model_hash(raw, {});
  const Eigen::MatrixXd gram = hmmdual::lg_gramian(pair, dt);
  const hmmdual::ClosedRangeReport closed =
      hmmdual::lg_closed_range_check(pair, dt, tol_rank);

  // Deterministic pairing residual on a seeded (xi, u) draw.
  hmmdual::PathRng rng(seed, 0);
  const hmmdual::Grid grid = hmmdual::make_grid(T, dt);
  Eigen::VectorXd xi(pair.A.rows());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = rng.normal();
  Eigen::MatrixXd u(grid.n_nodes(), pair.H.cols());
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    const double a = rng.normal(), b = rng.normal();
    for (int k = 0; k < grid.n_nodes(); ++k) {
      u(k, j) = a * std::sin(2.0 * grid.time(k)) + b;
    }
  }
  const double lhs = xi.dot(hmmdual::lg_apply_L(pair, u, dt));
  const Eigen::MatrixXd z = hmmdual::lg_apply_L_dagger(pair, xi, dt);
  double rhs = 0.0;
  for (int k = 0; k < grid.n_nodes(); ++k) {
    const double w = (k == 0 || k == grid.n_steps) ? 0.5 * grid.dt() : grid.dt();
    rhs += w * z.row(k).dot(u.row(k));
  }

  ordered_json cfg_j;
  cfg_j["T"] = T;
  cfg_j["dt"] = dt;
  cfg_j["seed"] = seed;
  cfg_j["tol_rank"] = tol_rank;
  ordered_json j = report_envelope(hash, cfg_j);
  j["gramian"] = to_json(gram);
  j["rank"] = closed.rank;
  j["krylov_dim"] =
      hmmdual::linear_controllable_subspace(pair.A, pair.H, tol_rank).dim();
  j["closed_range_max_angle"] = closed.max_angle;
  j["pairing_lhs"] = lhs;
  j["pairing_rhs"] = rhs;
  j["pairing_residual"] = std::abs(lhs - rhs);
  hmmdual::dump_json17(j, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic observability and detectability analysis for "
               "finite-state hidden Markov models"};
  app.require_subcommand(1);

  std::string model_path;
  double tol_rank = hmmdual::defaults::tol_rank;
  double tol_model = hmmdual::defaults::tol_model;
  double tol_level = hmmdual::defaults::tol_level;

  hmmdual::SimConfig cfg;
  std::string prior_name = "uniform";
  std::string mu_name = "mu";
  std::string nu_name = "nu";
  std::string control_spec = "zero";
  std::string csv_path, sv_csv, dump_prefix = "path_";
  double c_value = 0.0;
  int dump_paths = 0;
  bool with_oracle = false;

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("model", model_path, "model JSON file")->required();
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--T", cfg.T, "horizon");
    sub->add_option("--dt", cfg.dt, "time step");
    sub->add_option("--paths", cfg.n_paths, "Monte Carlo path count");
    sub->add_option("--seed", cfg.seed, "master seed");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "subspace and class analysis");
  add_model(analyze);
  analyze->add_option("--tol-rank", tol_rank);
  analyze->add_option("--tol-model", tol_model);
  analyze->add_option("--tol-level", tol_level);

  CLI::App* gramian = app.add_subcommand("gramian", "Monte Carlo gramian and rank");
  add_model(gramian);
  add_sim(gramian);
  gramian->add_option("--tol-rank", tol_rank);
  gramian->add_option("--sv-csv", sv_csv, "write singular values as CSV");

  CLI::App* duality = app.add_subcommand("duality", "adjoint identity check");
  add_model(duality);
  add_sim(duality);
  duality->add_option("--prior", prior_name, "named prior from the file");
  duality->add_option("--control", control_spec,
                      "zero | const:v | sin_of_Z | tanh_of_Z | table:file");
  duality->add_option("--c", c_value, "terminal constant");

  CLI::App* filter = app.add_subcommand("filter", "filter stability experiment");
  add_model(filter);
  add_sim(filter);
  filter->add_option("--mu", mu_name, "true prior name");
  filter->add_option("--nu", nu_name, "filter prior name");
  filter->add_option("--csv", csv_path, "write the decay curve as CSV");
  filter->add_option("--dump-paths", dump_paths,
                     "export per-path trajectory CSVs for the first N paths");
  filter->add_option("--dump-prefix", dump_prefix, "trajectory file prefix");

  CLI::App* entropy = app.add_subcommand("entropy", "relative entropy estimate");
  add_model(entropy);
  add_sim(entropy);
  entropy->add_option("--mu", mu_name, "true prior name");
  entropy->add_option("--nu", nu_name, "filter prior name");
  entropy->add_flag("--oracle", with_oracle,
                    "include the static quadrature oracle (A = 0, m = 1)");

  CLI::App* lg = app.add_subcommand("lg", "classical linear duality report");
  add_model(lg);
  lg->add_option("--T", cfg.T, "horizon");
  lg->add_option("--dt", cfg.dt, "time step");
  lg->add_option("--seed", cfg.seed, "seed for the pairing draw");
  lg->add_option("--tol-rank", tol_rank);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (analyze->parsed()) {
      return cmd_analyze(model_path, tol_rank, tol_model, tol_level);
    }
    if (gramian->parsed()) {
      return cmd_gramian(model_path, cfg, tol_rank, sv_csv);
    }
    if (duality->parsed()) {
      return cmd_duality(model_path, cfg, prior_name, control_spec, c_value);
    }
    if (filter->parsed()) {
      return cmd_filter(model_path, cfg, mu_name, nu_name, csv_path,
                        dump_paths, dump_prefix);
    }
    if (entropy->parsed()) {
      return cmd_entropy(model_path, cfg, mu_name, nu_name, with_oracle);
    }
    if (lg->parsed()) {
      return cmd_lg(model_path, cfg.T, cfg.dt, cfg.seed, tol_rank);
    }
  } catch (const Error& e) {
    std::cerr << "hmmdual: " << hmmdual::to_string(e.code()) << ": " << e.what()
              << "\n";
    return hmmdual::is_input_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "hmmdual: internal error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
