#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "hmmdual/model.hpp"
#include "hmmdual/subspace.hpp"

namespace hmmdual {

// Partition of the state space into closed communicating classes plus the
// transient remainder.
struct ErgodicDecomposition {
  std::vector<std::vector<int>> classes;  // closed classes, each sorted
  std::vector<int> transient;             // sorted

  int r() const { return static_cast<int>(classes.size()); }
};

// Strongly connected components of the digraph i -> j iff A[i][j] > tol;
// the closed SCCs are the ergodic classes.
ErgodicDecomposition ergodic_decomposition(
    const FiniteHMM& model, double tol = defaults::tol_model);

// Orthonormal basis of the numerical right null space {f : A f = 0}.
Subspace stable_null_space(const FiniteHMM& model,
                           double tol_rank = defaults::tol_rank);

struct StabilityReport {
  Subspace S0;
  bool stabilizable = false;
  bool detectable = false;  // equal to stabilizable by duality
  // Indicator membership 1_{S_k} in C, reported when no transient states.
  std::vector<bool> per_class_indicator_in_C;
  ErgodicDecomposition decomposition;
  int dim_C = 0;
  bool has_transient = false;
};

// Stabilizability test S_0 subset of C; detectability coincides by duality.
StabilityReport is_stabilizable(const FiniteHMM& model,
                                double tol_rank = defaults::tol_rank);

// Mean total-variation gap between the filters started from mu and nu, both
// run on observations generated under P^mu.
struct DecayCurve {
  Eigen::VectorXd t;
  Eigen::VectorXd mean_tv;
  Eigen::VectorXd stderr_tv;
  std::int64_t n_paths = 0;
};

DecayCurve filter_stability_experiment(const FiniteHMM& model,
                                       const ProbabilityVector& mu,
                                       const ProbabilityVector& nu,
                                       const SimConfig& cfg);

}  // namespace hmmdual
