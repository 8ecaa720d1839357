#include "hmmdual/gramian.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "hmmdual/errors.hpp"
#include "hmmdual/parallel.hpp"
#include "hmmdual/stats.hpp"

namespace hmmdual {

namespace {

// Trapezoidal node weight on the grid.
double trapz_weight(const Grid& grid, int k) {
  const double dt = grid.dt();
  return (k == 0 || k == grid.n_steps) ? 0.5 * dt : dt;
}

// Guard against a degenerate zero-variance difference when both sides of an
// identity coincide per path up to rounding.
double z_with_floor(double diff, double stderr_diff, double scale) {
  const double floor = 1e-13 * (1.0 + scale);
  const double denom = std::max(stderr_diff, floor);
  return std::abs(diff) / denom;
}

SimConfig reference_measure_config(const SimConfig& cfg) {
  SimConfig out = cfg;
  out.measure = MeasureKind::TildeP;
  out.prior = ProbabilityVector{};
  return out;
}

}  // namespace

ControlFunctional ControlFunctional::zero(int m) {
  ControlFunctional c(Kind::Deterministic, Rule::Zero, "zero", m);
  return c;
}

ControlFunctional ControlFunctional::constant(const Eigen::VectorXd& value) {
  ControlFunctional c(Kind::Deterministic, Rule::Constant, "const",
                      static_cast<int>(value.size()));
  c.constant_ = value;
  return c;
}

ControlFunctional ControlFunctional::table(const Eigen::MatrixXd& u_nodes) {
  ControlFunctional c(Kind::Deterministic, Rule::Table, "table",
                      static_cast<int>(u_nodes.cols()));
  c.table_ = u_nodes;
  return c;
}

ControlFunctional ControlFunctional::sin_of_z(int m) {
  return ControlFunctional(Kind::PathFeedback, Rule::SinOfZ, "sin_of_Z", m);
}

ControlFunctional ControlFunctional::tanh_of_z(int m) {
  return ControlFunctional(Kind::PathFeedback, Rule::TanhOfZ, "tanh_of_Z", m);
}

Eigen::MatrixXd ControlFunctional::evaluate(const Grid& grid,
                                            const Eigen::MatrixXd& dZ) const {
  const int n = grid.n_nodes();
  if (dZ.rows() != grid.n_steps || dZ.cols() != m_) {
    fail(ErrorCode::ShapeMismatch, "increment matrix does not match control");
  }
  Eigen::MatrixXd u(n, m_);
  switch (rule_) {
    case Rule::Zero:
      u.setZero();
      break;
    case Rule::Constant:
      u.rowwise() = constant_.transpose();
      break;
    case Rule::Table:
      if (table_.rows() != n) {
        fail(ErrorCode::ConfigError,
             "control table has " + std::to_string(table_.rows()) +
                 " rows, grid has " + std::to_string(n) + " nodes");
      }
      u = table_;
      break;
    case Rule::SinOfZ:
    case Rule::TanhOfZ: {
      // Running observation: row k uses increments strictly before t_k.
      Eigen::VectorXd z = Eigen::VectorXd::Zero(m_);
      for (int k = 0; k < n; ++k) {
        if (k > 0) z += dZ.row(k - 1).transpose();
        if (rule_ == Rule::SinOfZ) {
          u.row(k) = z.array().sin().matrix().transpose();
        } else {
          u.row(k) = z.array().tanh().matrix().transpose();
        }
      }
      break;
    }
  }
  if (!u.allFinite()) {
    fail(ErrorCode::NonFinite, "control is not square-integrable on the path");
  }
  return u;
}

GramianEstimate estimate_gramian(const FiniteHMM& model,
                                 const SimConfig& cfg_in) {
  const SimConfig cfg = reference_measure_config(cfg_in);
  cfg.validate();
  PropagatorEngine engine(model, cfg);
  const Grid grid = engine.grid();
  const int d = model.d;

  auto stats = parallel_path_reduce<ArrayStats>(
      cfg.n_paths, [&] { return ArrayStats(d * d); },
      [&](ArrayStats& acc, std::int64_t p) {
        const ZakaiPath path = engine.path(p);
        Eigen::MatrixXd integral = Eigen::MatrixXd::Zero(d, d);
        for (int k = 0; k < grid.n_nodes(); ++k) {
          const Eigen::MatrixXd g = model.H.transpose() * path.propagator(k);
          integral.noalias() += trapz_weight(grid, k) * (g.transpose() * g);
        }
        integral += Eigen::MatrixXd::Ones(d, d);
        acc.add(Eigen::Map<const Eigen::ArrayXd>(integral.data(),
                                                 integral.size()));
      },
      [](ArrayStats& total, const ArrayStats& part) { total.merge(part); });

  GramianEstimate out;
  out.n_paths = cfg.n_paths;
  out.cfg = cfg;
  const Eigen::ArrayXd mean = stats.mean();
  const Eigen::ArrayXd se = stats.stderror();
  out.W = Eigen::Map<const Eigen::MatrixXd>(mean.data(), d, d);
  out.W = 0.5 * (out.W + out.W.transpose()).eval();
  out.stderr_W = Eigen::Map<const Eigen::MatrixXd>(se.data(), d, d);
  out.stderr_W = 0.5 * (out.stderr_W + out.stderr_W.transpose()).eval();
  return out;
}

RankResult gramian_rank(const GramianEstimate& estimate, double tol_rank) {
  RankResult out;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(estimate.W);
  out.singular_values = svd.singularValues();
  const double s_max = out.singular_values.size() > 0
                           ? out.singular_values(0)
                           : 0.0;
  if (s_max <= 0.0) {
    out.rank = 0;
    return out;
  }
  const double max_se = estimate.stderr_W.size() > 0
                            ? estimate.stderr_W.cwiseAbs().maxCoeff()
                            : 0.0;
  const double tol = tol_rank > 0.0
                         ? std::max(tol_rank, 10.0 * max_se / s_max)
                         : std::max(defaults::tol_rank, 10.0 * max_se / s_max);
  out.threshold = tol * s_max;
  out.band_lo = 0.5 * out.threshold;
  out.band_hi = 2.0 * out.threshold;

  bool in_band = false;
  int above = 0;
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
    const double s = out.singular_values(i);
    if (s > out.threshold) ++above;
    if (s >= out.band_lo && s <= out.band_hi) in_band = true;
  }
  out.n_above = above;
  if (!in_band) out.rank = above;
  return out;
}

ApplyLResult apply_L(const FiniteHMM& model, const ControlFunctional& control,
                     double c, const SimConfig& cfg_in) {
  const SimConfig cfg = reference_measure_config(cfg_in);
  cfg.validate();
  if (control.dims() != model.m) {
    fail(ErrorCode::ShapeMismatch, "control dimension does not match model");
  }
  PropagatorEngine engine(model, cfg);
  const Grid grid = engine.grid();
  const int d = model.d;

  auto stats = parallel_path_reduce<ArrayStats>(
      cfg.n_paths, [&] { return ArrayStats(d); },
      [&](ArrayStats& acc, std::int64_t p) {
        const ZakaiPath path = engine.path(p);
        const Eigen::MatrixXd u = control.evaluate(grid, path.dZ);
        Eigen::VectorXd integral = Eigen::VectorXd::Zero(d);
        for (int k = 0; k < grid.n_nodes(); ++k) {
          integral.noalias() +=
              trapz_weight(grid, k) *
              (path.propagator(k).transpose() * (model.H * u.row(k).transpose()));
        }
        acc.add(integral.array());
      },
      [](ArrayStats& total, const ArrayStats& part) { total.merge(part); });

  ApplyLResult out;
  out.n_paths = cfg.n_paths;
  out.y0 = stats.mean().matrix() + c * Eigen::VectorXd::Ones(d);
  out.stderr_y0 = stats.stderror().matrix();
  return out;
}

LdaggerPath apply_L_dagger(const FiniteHMM& model,
                           const SignedMeasureVector& mu,
                           const ZakaiPath& path) {
  if (mu.size() != model.d) {
    fail(ErrorCode::ShapeMismatch, "measure dimension does not match model");
  }
  LdaggerPath out;
  out.mu_mass = mu.values.sum();
  out.sigma_h.resize(path.n_nodes(), model.m);
  for (int k = 0; k < path.n_nodes(); ++k) {
    out.sigma_h.row(k) =
        (model.H.transpose() * (path.propagator(k) * mu.values)).transpose();
  }
  return out;
}

DualityReport check_adjoint(const FiniteHMM& model,
                            const SignedMeasureVector& mu,
                            const ControlFunctional& control, double c,
                            const SimConfig& cfg_in) {
  const SimConfig cfg = reference_measure_config(cfg_in);
  cfg.validate();
  if (mu.size() != model.d) {
    fail(ErrorCode::ShapeMismatch, "measure dimension does not match model");
  }
  PropagatorEngine engine(model, cfg);
  const Grid grid = engine.grid();
  const double c_mass = c * mu.values.sum();

  struct Accum {
    ScalarStats lhs, rhs, diff;
    void merge(const Accum& o) {
      lhs.merge(o.lhs);
      rhs.merge(o.rhs);
      diff.merge(o.diff);
    }
  };

  auto stats = parallel_path_reduce<Accum>(
      cfg.n_paths, [] { return Accum{}; },
      [&](Accum& acc, std::int64_t p) {
        const ZakaiPath path = engine.path(p);
        const Eigen::MatrixXd u = control.evaluate(grid, path.dZ);
        const LdaggerPath dual = apply_L_dagger(model, mu, path);
        double lhs = 0.0;  // mu^T (trapz Psi^T H U dt)
        double rhs = 0.0;  // trapz U^T sigma^mu(h) dt
        for (int k = 0; k < grid.n_nodes(); ++k) {
          const double w = trapz_weight(grid, k);
          const Eigen::VectorXd hu = model.H * u.row(k).transpose();
          lhs += w * mu.values.dot(path.propagator(k).transpose() * hu);
          rhs += w * u.row(k).dot(dual.sigma_h.row(k));
        }
        lhs += c_mass;
        rhs += c_mass;
        acc.lhs.add(lhs);
        acc.rhs.add(rhs);
        acc.diff.add(lhs - rhs);
      },
      [](Accum& total, const Accum& part) { total.merge(part); });

  DualityReport out;
  out.n_paths = cfg.n_paths;
  out.lhs = stats.lhs.mean();
  out.rhs = stats.rhs.mean();
  out.stderr_lhs = stats.lhs.stderror();
  out.stderr_rhs = stats.rhs.stderror();
  out.stderr_diff = stats.diff.stderror();
  out.z_score = z_with_floor(stats.diff.mean(), out.stderr_diff,
                             std::abs(out.lhs) + std::abs(out.rhs));
  return out;
}

Eigen::VectorXd solve_dual_ode(const FiniteHMM& model,
                               const Eigen::MatrixXd& u_nodes, double c,
                               double T, double dt) {
  const Grid grid = make_grid(T, dt);
  if (u_nodes.rows() != grid.n_nodes() || u_nodes.cols() != model.m) {
    fail(ErrorCode::ShapeMismatch, "control table does not match grid");
  }
  const Eigen::MatrixXd e_a_dt = matrix_exponential(model.A * grid.dt());
  Eigen::VectorXd y = c * Eigen::VectorXd::Ones(model.d);
  const double half_dt = 0.5 * grid.dt();
  for (int k = grid.n_steps - 1; k >= 0; --k) {
    const Eigen::VectorXd hu_k = model.H * u_nodes.row(k).transpose();
    const Eigen::VectorXd hu_k1 = model.H * u_nodes.row(k + 1).transpose();
    y = e_a_dt * (y + half_dt * hu_k1) + half_dt * hu_k;
  }
  return y;
}

MinNormResult min_norm_control(const FiniteHMM& model, const FunctionVector& f,
                               const GramianEstimate& gramian,
                               const SimConfig& cfg_in) {
  if (f.size() != model.d) {
    fail(ErrorCode::ShapeMismatch, "target dimension does not match model");
  }
  MinNormResult out;
  out.rank = gramian_rank(gramian);
  if (!out.rank.conclusive()) {
    fail(ErrorCode::InconclusiveRank,
         "gramian rank is inside the noise band; more paths needed");
  }

  // Truncated pseudo-inverse: directions below the noise band are treated
  // as statistical zeros.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gramian.W);
  const double cut = std::max(out.rank.band_hi, 0.0);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(model.d);
  for (int i = 0; i < model.d; ++i) {
    const double lambda = eig.eigenvalues()(i);
    if (std::abs(lambda) > cut) {
      const Eigen::VectorXd v = eig.eigenvectors().col(i);
      mu += v * (v.dot(f.values) / lambda);
    }
  }
  out.mu_star = make_signed_measure(mu);
  out.residual = (gramian.W * mu - f.values).norm();
  const double residual_tol =
      std::max(1e-8 * std::max(1.0, f.values.norm()),
               out.rank.band_hi * mu.norm());
  if (out.residual > residual_tol) {
    fail(ErrorCode::NotInRange,
         "target is outside the numerical range of the gramian (residual " +
             std::to_string(out.residual) + ")");
  }

  // Evaluate the steering control U_t = H^T Psi_t mu* and re-estimate both
  // the reached Y_0 and the control energy on fresh paths.
  const SimConfig cfg = reference_measure_config(cfg_in);
  cfg.validate();
  PropagatorEngine engine(model, cfg);
  const Grid grid = engine.grid();
  const int d = model.d;
  const double mu_mass = mu.sum();

  struct Accum {
    ArrayStats y0;
    ScalarStats energy;
    explicit Accum(int d) : y0(d) {}
    void merge(const Accum& o) {
      y0.merge(o.y0);
      energy.merge(o.energy);
    }
  };

  auto stats = parallel_path_reduce<Accum>(
      cfg.n_paths, [&] { return Accum(d); },
      [&](Accum& acc, std::int64_t p) {
        const ZakaiPath path = engine.path(p);
        Eigen::VectorXd integral = Eigen::VectorXd::Zero(d);
        double energy = 0.0;
        for (int k = 0; k < grid.n_nodes(); ++k) {
          const double w = trapz_weight(grid, k);
          const Eigen::MatrixXd psi = path.propagator(k);
          const Eigen::VectorXd u_k = model.H.transpose() * (psi * mu);
          integral.noalias() += w * (psi.transpose() * (model.H * u_k));
          energy += w * u_k.squaredNorm();
        }
        acc.y0.add(integral.array());
        acc.energy.add(energy);
      },
      [](Accum& total, const Accum& part) { total.merge(part); });

  out.achieved_y0 = make_function(stats.y0.mean().matrix() +
                                  mu_mass * Eigen::VectorXd::Ones(d));
  out.achieved_stderr = stats.y0.stderror().matrix();
  out.cost = stats.energy.mean() + mu_mass * mu_mass;
  out.cost_stderr = stats.energy.stderror();
  const Eigen::MatrixXd centered =
      gramian.W - Eigen::MatrixXd::Ones(d, d);
  out.cost_from_gramian = mu.dot(centered * mu) + mu_mass * mu_mass;
  return out;
}

PairingCheck pairing_consistency_check(const FiniteHMM& model,
                                       const ProbabilityVector& mu,
                                       const ControlFunctional& control,
                                       double c, const SimConfig& cfg_in) {
  SimConfig cfg_mu = cfg_in;
  cfg_mu.measure = MeasureKind::Pmu;
  cfg_mu.prior = mu;
  cfg_mu.validate();
  const SimConfig cfg_ref = reference_measure_config(cfg_in);

  PropagatorEngine engine_mu(model, cfg_mu);
  PropagatorEngine engine_ref(model, cfg_ref);
  const Grid grid = engine_mu.grid();

  struct Accum {
    ScalarStats lhs, rhs, diff;
    void merge(const Accum& o) {
      lhs.merge(o.lhs);
      rhs.merge(o.rhs);
      diff.merge(o.diff);
    }
  };

  // Common seed: both engines reuse the same Gaussian stream per path, so
  // the per-path difference is low variance and mean zero.
  auto stats = parallel_path_reduce<Accum>(
      cfg_mu.n_paths, [] { return Accum{}; },
      [&](Accum& acc, std::int64_t p) {
        const ZakaiPath ref_path = engine_ref.path(p);
        const Eigen::MatrixXd u_ref = control.evaluate(grid, ref_path.dZ);
        double lhs = c;  // mu(Y_0) path functional under the reference measure
        for (int k = 0; k < grid.n_nodes(); ++k) {
          const Eigen::VectorXd hu = model.H * u_ref.row(k).transpose();
          lhs += trapz_weight(grid, k) *
                 mu.values.dot(ref_path.propagator(k).transpose() * hu);
        }

        const ZakaiPath mu_path = engine_mu.path(p);
        const Eigen::MatrixXd u_mu = control.evaluate(grid, mu_path.dZ);
        double ito = 0.0;  // left-endpoint Ito sum of U^T dZ
        for (int k = 0; k < grid.n_steps; ++k) {
          ito += u_mu.row(k).dot(mu_path.dZ.row(k));
        }
        const double rhs = c + ito;
        acc.lhs.add(lhs);
        acc.rhs.add(rhs);
        acc.diff.add(lhs - rhs);
      },
      [](Accum& total, const Accum& part) { total.merge(part); });

  PairingCheck out;
  out.n_paths = cfg_mu.n_paths;
  out.lhs = stats.lhs.mean();
  out.rhs = stats.rhs.mean();
  out.stderr_lhs = stats.lhs.stderror();
  out.stderr_rhs = stats.rhs.stderror();
  out.stderr_diff = stats.diff.stderror();
  out.z_score = z_with_floor(stats.diff.mean(), out.stderr_diff,
                             std::abs(out.lhs) + std::abs(out.rhs));
  return out;
}

}  // namespace hmmdual
