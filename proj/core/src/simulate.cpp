#include "hmmdual/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "hmmdual/errors.hpp"
#include "hmmdual/rng.hpp"

namespace hmmdual {

Eigen::MatrixXd ZakaiPath::propagator(int k) const {
  return std::exp(log_scale(k)) * psi[static_cast<std::size_t>(k)];
}

Eigen::VectorXd ZakaiPath::z_at(int k) const {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(dZ.cols());
  for (int s = 0; s < k; ++s) z += dZ.row(s).transpose();
  return z;
}

PropagatorEngine::PropagatorEngine(const FiniteHMM& model,
                                   const SimConfig& cfg)
    : model_(model), cfg_(cfg), grid_(cfg.grid()) {
  cfg_.validate();
  if (cfg_.measure == MeasureKind::Pmu &&
      cfg_.prior.size() != model_.d) {
    fail(ErrorCode::ShapeMismatch, "prior dimension does not match model");
  }
  generator_is_zero_ = model_.A.cwiseAbs().maxCoeff() == 0.0;
  exp_at_dt_ = generator_is_zero_
                   ? Eigen::MatrixXd::Identity(model_.d, model_.d)
                   : matrix_exponential(model_.A.transpose() * grid_.dt());
  half_h2_dt_ = 0.5 * grid_.dt() * model_.H.rowwise().squaredNorm();
}

ZakaiPath PropagatorEngine::path(std::int64_t path_index) const {
  const int d = model_.d;
  const int m = model_.m;
  const Grid& grid = grid_;
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);

  ZakaiPath out;
  out.grid = grid;
  out.measure = cfg_.measure;
  out.seed = cfg_.seed;
  out.path_index = path_index;
  out.dZ.resize(grid.n_steps, m);
  out.psi.reserve(static_cast<std::size_t>(grid.n_nodes()));
  out.log_scale = Eigen::VectorXd::Zero(grid.n_nodes());

  if (cfg_.measure == MeasureKind::Pmu) {
    out.state_path = sample_ctmc(model_, cfg_.prior, cfg_, path_index);
  }

  // Observation increments. The Gaussian stream is separate from the state
  // stream so TildeP and Pmu paths share noise for a common seed.
  PathRng rng(cfg_.seed, path_index, /*stream=*/0);
  for (int k = 0; k < grid.n_steps; ++k) {
    for (int j = 0; j < m; ++j) out.dZ(k, j) = sqrt_dt * rng.normal();
    if (out.state_path) {
      const int state = out.state_path->states[static_cast<std::size_t>(k)];
      out.dZ.row(k) += dt * model_.H.row(state);
    }
  }

  // Lie splitting: Psi_{k+1} = exp(A^T dt) diag(exp(H_i dZ_k - h2)) Psi_k.
  // Both factors are entrywise nonnegative, so positivity is preserved; at
  // A = 0 the scheme is exact.
  Eigen::MatrixXd psi = Eigen::MatrixXd::Identity(d, d);
  double log_scale = 0.0;
  out.psi.push_back(psi);
  Eigen::VectorXd logd(d);
  for (int k = 0; k < grid.n_steps; ++k) {
    logd.noalias() = model_.H * out.dZ.row(k).transpose();
    logd -= half_h2_dt_;
    psi = logd.array().exp().matrix().asDiagonal() * psi;
    if (!generator_is_zero_) psi = exp_at_dt_ * psi;
    const double s = psi.maxCoeff();
    if (!(s > 0.0) || !std::isfinite(s)) {
      fail(ErrorCode::NonFinite,
           "propagator degenerated at step " + std::to_string(k));
    }
    psi /= s;
    log_scale += std::log(s);
    out.psi.push_back(psi);
    out.log_scale(k + 1) = log_scale;
  }
  return out;
}

ZakaiPath simulate_propagator(const FiniteHMM& model, const SimConfig& cfg,
                              std::int64_t path_index) {
  return PropagatorEngine(model, cfg).path(path_index);
}

SigmaPath zakai_from_prior(const ZakaiPath& path,
                           const SignedMeasureVector& mu) {
  const int d = static_cast<int>(path.psi.front().rows());
  if (mu.size() != d) {
    fail(ErrorCode::ShapeMismatch, "measure dimension does not match path");
  }
  SigmaPath out;
  out.grid = path.grid;
  out.log_scale = path.log_scale;
  out.sigma_hat.resize(path.n_nodes(), d);
  for (int k = 0; k < path.n_nodes(); ++k) {
    out.sigma_hat.row(k) =
        (path.psi[static_cast<std::size_t>(k)] * mu.values).transpose();
  }
  return out;
}

FilterPath wonham_normalize(const SigmaPath& sigma) {
  constexpr double kUnderflow = 1e-300;
  FilterPath out;
  out.grid = sigma.grid;
  const int n = static_cast<int>(sigma.sigma_hat.rows());
  const int d = static_cast<int>(sigma.sigma_hat.cols());
  out.pi.resize(n, d);
  out.sigma_mass.resize(n);
  for (int k = 0; k < n; ++k) {
    const double hat_mass = sigma.sigma_hat.row(k).sum();
    if (!(hat_mass > 0.0)) {
      fail(ErrorCode::MassCollapse,
           "sigma_t(1) nonpositive at node " + std::to_string(k));
    }
    const double mass = std::exp(sigma.log_scale(k)) * hat_mass;
    if (!std::isfinite(mass) || mass <= kUnderflow) {
      fail(ErrorCode::MassCollapse,
           "sigma_t(1) not representable at node " + std::to_string(k) +
               "; reduce T or dt");
    }
    out.sigma_mass(k) = mass;
    out.pi.row(k) = sigma.sigma_hat.row(k) / hat_mass;
  }
  return out;
}

double tv_distance(const ProbabilityVector& p, const ProbabilityVector& q) {
  if (p.size() != q.size()) {
    fail(ErrorCode::ShapeMismatch, "tv_distance needs equal lengths");
  }
  return (p.values - q.values).lpNorm<1>();
}

void export_trajectory_csv(const ZakaiPath& path, const SigmaPath& sigma,
                           const FilterPath& filter, std::ostream& os) {
  const int m = static_cast<int>(path.dZ.cols());
  const int d = static_cast<int>(sigma.sigma_hat.cols());
  os << "t";
  for (int j = 0; j < m; ++j) os << ",Z" << (j + 1);
  for (int i = 0; i < d; ++i) os << ",sigma" << (i + 1);
  for (int i = 0; i < d; ++i) os << ",pi" << (i + 1);
  os << "\n";
  char buf[40];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    os << ',' << buf;
  };
  Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < path.n_nodes(); ++k) {
    if (k > 0) z += path.dZ.row(k - 1).transpose();
    std::snprintf(buf, sizeof(buf), "%.17g", path.grid.time(k));
    os << buf;
    for (int j = 0; j < m; ++j) put(z(j));
    const Eigen::VectorXd sig = sigma.value(k);
    for (int i = 0; i < d; ++i) put(sig(i));
    for (int i = 0; i < d; ++i) put(filter.pi(k, i));
    os << "\n";
  }
}

}  // namespace hmmdual
