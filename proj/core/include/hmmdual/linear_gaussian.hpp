#pragma once

#include <Eigen/Core>

#include "hmmdual/subspace.hpp"
#include "hmmdual/types.hpp"

namespace hmmdual {

// Plain linear pair for the classical duality: no generator constraint on A.
struct LinearPair {
  Eigen::MatrixXd A;
  Eigen::MatrixXd H;
  double T = 1.0;
};

LinearPair validate_linear_pair(LinearPair pair);

// L u = y_0 = integral exp(A t) H u_t dt by composite trapezoidal
// quadrature; u has one row per grid node.
Eigen::VectorXd lg_apply_L(const LinearPair& pair,
                           const Eigen::MatrixXd& u_nodes, double dt);

// (L^dagger xi)(t) = H^T exp(A^T t) xi sampled on the grid.
Eigen::MatrixXd lg_apply_L_dagger(const LinearPair& pair,
                                  const Eigen::VectorXd& xi, double dt);

// Controllability gramian integral exp(A t) H H^T exp(A^T t) dt.
Eigen::MatrixXd lg_gramian(const LinearPair& pair, double dt);

// Closed-range identity Rsp(L)^perp = Nsp(L^dagger): the complement of the
// gramian range against the null space of the observability gramian of
// (A^T, H^T), compared by largest principal angle.
struct ClosedRangeReport {
  double max_angle = 0.0;
  int rank = 0;          // numerical rank of the controllability gramian
  Subspace range_perp;   // Rsp(L)^perp
  Subspace null_ldagger; // Nsp(L^dagger)
};

ClosedRangeReport lg_closed_range_check(const LinearPair& pair, double dt,
                                        double tol_rank = defaults::tol_rank);

}  // namespace hmmdual
