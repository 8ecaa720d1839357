#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "hmmdual/grid.hpp"
#include "hmmdual/model.hpp"

namespace hmmdual {

struct KlEstimate {
  double kl = 0.0;
  double stderror = 0.0;
  double T = 0.0;
  std::int64_t n_paths = 0;
};

// Monte Carlo estimate of the relative entropy between the observation-path
// laws, 0.5 E^mu[ integral |pi_t^mu(h) - pi_t^nu(h)|^2 dt ]. Requires
// mu << nu in the finite-state sense.
KlEstimate estimate_kl(const FiniteHMM& model, const ProbabilityVector& mu,
                       const ProbabilityVector& nu, const SimConfig& cfg);

// Same estimator reported at several nested horizons on a shared path set;
// horizons are snapped to grid nodes of cfg (0 < T_i <= cfg.T).
std::vector<KlEstimate> estimate_kl_profile(
    const FiniteHMM& model, const ProbabilityVector& mu,
    const ProbabilityVector& nu, const SimConfig& cfg,
    const std::vector<double>& horizons);

// Exact quadrature oracle for the static case A = 0, m = 1: the path-law
// relative entropy reduces to the one-dimensional KL divergence between the
// Gaussian mixtures sum_i mu_i N(h_i T, T) and sum_i nu_i N(h_i T, T).
double static_kl_oracle(const Eigen::VectorXd& h_column,
                        const ProbabilityVector& mu,
                        const ProbabilityVector& nu, double T,
                        double abs_tol = 1e-8);

}  // namespace hmmdual
