#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "hmmdual/grid.hpp"
#include "hmmdual/types.hpp"

namespace hmmdual {

// Finite-state hidden Markov model with white-noise observations: A is the
// d x d rate matrix (nonnegative off-diagonals, zero row sums) and row i of
// the d x m matrix H is the noise-free observation of state i.
struct FiniteHMM {
  int d = 0;
  int m = 0;
  Eigen::MatrixXd A;
  Eigen::MatrixXd H;
};

// Checks shapes and the rate-matrix constraints. Off-diagonal entries in
// [-tol_model, 0) are clamped to 0 and each diagonal is rebalanced so rows
// sum exactly to zero. Throws ShapeMismatch, NonFinite or
// GeneratorViolation.
FiniteHMM validate(FiniteHMM model, double tol_model = defaults::tol_model);

// Scaling-and-squaring Pade matrix exponential (dense, d <= a few hundred).
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& M);

// Solution of d(mu_t)/dt = A^T mu_t at time t, i.e. exp(A^T t) mu0. Mass is
// preserved; throws NonFinite if the result overflows.
SignedMeasureVector kolmogorov_forward(const FiniteHMM& model,
                                       const SignedMeasureVector& mu0,
                                       double t);

// One continuous-time Markov chain trajectory discretized onto the grid.
struct StatePath {
  Grid grid;
  std::vector<int> states;        // state index per grid node
  std::vector<double> jump_times; // exact jump instants in (0, T]
  std::uint64_t seed = 0;
  std::int64_t path_index = 0;
};

// Exact-jump CTMC sampling: exponential holding times with rate -A[i][i] and
// jump law proportional to the off-diagonal row. Deterministic given
// (cfg.seed, path_index).
StatePath sample_ctmc(const FiniteHMM& model, const ProbabilityVector& mu,
                      const SimConfig& cfg, std::int64_t path_index = 0);

}  // namespace hmmdual
