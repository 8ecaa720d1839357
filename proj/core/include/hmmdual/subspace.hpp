#pragma once

#include <vector>

#include <Eigen/Core>

#include "hmmdual/model.hpp"
#include "hmmdual/types.hpp"

namespace hmmdual {

// Linear subspace of R^d held as an orthonormal basis (d x k).
struct Subspace {
  Eigen::MatrixXd basis;
  double tol_rank = defaults::tol_rank;

  int dim() const { return static_cast<int>(basis.cols()); }
  int ambient() const { return static_cast<int>(basis.rows()); }

  // v minus its orthogonal projection onto the subspace.
  Eigen::VectorXd residual(const Eigen::VectorXd& v) const;
  // True when the residual of v is below tol * ||v||.
  bool contains(const Eigen::VectorXd& v, double tol) const;
};

// Orthonormal basis of the column span, keeping singular directions above
// tol_rank * largest singular value.
Subspace subspace_from_columns(const Eigen::MatrixXd& columns,
                               double tol_rank = defaults::tol_rank);

// Largest principal angle between two subspaces of equal ambient dimension.
// Subspaces of different dimension always have angle pi/2 here.
double max_principal_angle(const Subspace& p, const Subspace& q);

// Largest angle that `inner` makes with `outer`; ~0 iff inner is contained
// in outer.
double containment_angle(const Subspace& inner, const Subspace& outer);

// Distinct rows of H grouped to absolute tolerance tol_level, plus the
// state -> level assignment. Levels ordered by lexicographic row order.
struct ObservationLevels {
  Eigen::MatrixXd levels;       // r x m
  std::vector<int> assignment;  // state -> level index

  int r() const { return static_cast<int>(levels.rows()); }
};

ObservationLevels observation_levels(const Eigen::MatrixXd& H,
                                     double tol_level = defaults::tol_level);

// Closure of the span of the seed columns under g -> A g and g -> H^j . g
// (entrywise product with each observation column). Deterministic candidate
// order; scale-invariant admission rule.
Subspace closure_under_model_maps(const FiniteHMM& model,
                                  const Eigen::MatrixXd& seeds,
                                  double tol_rank = defaults::tol_rank);

// Smallest subspace containing the constant function and closed under the
// model maps: closure_under_model_maps seeded with 1.
Subspace controllable_subspace(const FiniteHMM& model,
                               double tol_rank = defaults::tol_rank);

struct ObservabilityReport {
  bool observable = false;
  int dim = 0;
  Subspace basis;
};

// Observability test: the controllable subspace fills R^d.
ObservabilityReport is_observable(const FiniteHMM& model,
                                  double tol_rank = defaults::tol_rank);

// Kalman reachability span {H, AH, ..., A^{d-1} H} for plain matrices (no
// generator constraint).
Subspace linear_controllable_subspace(const Eigen::MatrixXd& A,
                                      const Eigen::MatrixXd& H,
                                      double tol_rank = defaults::tol_rank);

struct ObservableFunctions {
  Subspace space;
  ObservationLevels levels;
  // All observation rows merged into one level while A = 0; the result
  // degenerates to span{1}. Flagged, not fatal.
  bool degenerate_levels = false;
};

// Span of words P_{k0} A P_{k1} ... A P_{kn} 1 over level projections P_k:
// seeded with the level indicators, closed under f -> P_k(A f).
ObservableFunctions observable_functions(
    const FiniteHMM& model, double tol_rank = defaults::tol_rank,
    double tol_level = defaults::tol_level);

// True iff all rows of H are pairwise distinct after tol_level grouping.
bool is_injective_observation(const Eigen::MatrixXd& H,
                              double tol_level = defaults::tol_level);

// Numerical full-rank test of the Vandermonde matrix built from a single
// observation column; agrees with pairwise distinctness of the entries.
bool vandermonde_full_rank_check(const Eigen::VectorXd& h_column,
                                 double tol_rank = defaults::tol_rank);

}  // namespace hmmdual
