#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Core>

#include "hmmdual/grid.hpp"
#include "hmmdual/model.hpp"

namespace hmmdual {

// One simulated observation path together with the Zakai propagator on the
// grid. Propagators are stored normalized by their max entry with the log
// normalizer kept separately, which prevents under/overflow on long
// horizons; propagator(k) reconstructs the plain matrix.
struct ZakaiPath {
  Grid grid;
  Eigen::MatrixXd dZ;                // n_steps x m observation increments
  std::vector<Eigen::MatrixXd> psi;  // n_nodes propagators, max entry 1
  Eigen::VectorXd log_scale;         // n_nodes, Psi_k = exp(log_scale[k]) psi[k]
  MeasureKind measure = MeasureKind::TildeP;
  std::uint64_t seed = 0;
  std::int64_t path_index = 0;
  std::optional<StatePath> state_path;  // present iff measure == Pmu

  int n_nodes() const { return grid.n_nodes(); }
  Eigen::MatrixXd propagator(int k) const;
  // Cumulative observation Z at node k (Z_0 = 0).
  Eigen::VectorXd z_at(int k) const;
};

// Unnormalized filter trajectory sigma_t = Psi_t mu in the same scaled
// representation as ZakaiPath.
struct SigmaPath {
  Grid grid;
  Eigen::MatrixXd sigma_hat;  // n_nodes x d
  Eigen::VectorXd log_scale;  // n_nodes

  Eigen::VectorXd value(int k) const {
    return std::exp(log_scale(k)) * sigma_hat.row(k).transpose();
  }
  double mass(int k) const {
    return std::exp(log_scale(k)) * sigma_hat.row(k).sum();
  }
};

// Normalized (Wonham) filter trajectory.
struct FilterPath {
  Grid grid;
  Eigen::MatrixXd pi;         // n_nodes x d
  Eigen::VectorXd sigma_mass; // n_nodes, sigma_t(1)
};

// Simulates observation paths and their propagators. Precomputes
// exp(A^T dt) once; paths are independent and reproducible per
// (seed, path_index) regardless of how many run concurrently.
class PropagatorEngine {
 public:
  PropagatorEngine(const FiniteHMM& model, const SimConfig& cfg);

  ZakaiPath path(std::int64_t path_index) const;

  const Grid& grid() const { return grid_; }
  const FiniteHMM& model() const { return model_; }
  const SimConfig& config() const { return cfg_; }

 private:
  FiniteHMM model_;
  SimConfig cfg_;
  Grid grid_;
  Eigen::MatrixXd exp_at_dt_;   // exp(A^T dt)
  Eigen::VectorXd half_h2_dt_;  // 0.5 |H_i|^2 dt per state
  bool generator_is_zero_ = false;
};

// Convenience wrapper constructing a one-off engine.
ZakaiPath simulate_propagator(const FiniteHMM& model, const SimConfig& cfg,
                              std::int64_t path_index);

// sigma_t = Psi_t mu by linearity of the Zakai flow.
SigmaPath zakai_from_prior(const ZakaiPath& path,
                           const SignedMeasureVector& mu);

// Kallianpur-Striebel normalization pi_t = sigma_t / sigma_t(1). Throws
// MassCollapse when the mass is not representable or nonpositive.
FilterPath wonham_normalize(const SigmaPath& sigma);

// Total variation distance Sum_i |p_i - q_i| (range [0, 2]).
double tv_distance(const ProbabilityVector& p, const ProbabilityVector& q);

// CSV trajectory export: t, Z components, sigma entries, pi entries.
void export_trajectory_csv(const ZakaiPath& path, const SigmaPath& sigma,
                           const FilterPath& filter, std::ostream& os);

}  // namespace hmmdual
