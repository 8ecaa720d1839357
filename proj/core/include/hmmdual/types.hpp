#pragma once

#include <Eigen/Core>

#include "hmmdual/errors.hpp"

namespace hmmdual {

namespace defaults {
// Tolerance for generator/probability validation and clamping.
inline constexpr double tol_model = 1e-9;
// Relative singular-value / residual threshold for numerical rank decisions.
inline constexpr double tol_rank = 1e-8;
// Absolute tolerance for grouping observation rows into levels.
inline constexpr double tol_level = 1e-9;
}  // namespace defaults

// Probability vector on {0,...,d-1}: entries >= 0, entries summing to 1
// within the validation tolerance.
struct ProbabilityVector {
  Eigen::VectorXd values;

  int size() const { return static_cast<int>(values.size()); }
};

// Validates and returns a probability vector; tiny negative entries (within
// tol) are clamped to zero. Throws ValidationError otherwise.
ProbabilityVector make_probability(Eigen::VectorXd values,
                                   double tol = defaults::tol_model);

// Signed measure on {0,...,d-1}. in_M0 records whether the entries sum to
// zero within tolerance (membership in the mass-zero subspace).
struct SignedMeasureVector {
  Eigen::VectorXd values;
  bool in_M0 = false;

  int size() const { return static_cast<int>(values.size()); }
  double mass() const { return values.sum(); }
};

SignedMeasureVector make_signed_measure(Eigen::VectorXd values,
                                        double tol = defaults::tol_model);

// Real-valued function on {0,...,d-1}, f(i) stored at index i.
struct FunctionVector {
  Eigen::VectorXd values;

  int size() const { return static_cast<int>(values.size()); }
};

FunctionVector make_function(Eigen::VectorXd values);

}  // namespace hmmdual
