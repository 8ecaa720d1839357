#include <cmath>
#include <string>

#include "hmmdual/errors.hpp"
#include "hmmdual/grid.hpp"
#include "hmmdual/types.hpp"

namespace hmmdual {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::GeneratorViolation: return "GeneratorViolation";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MassCollapse: return "MassCollapse";
    case ErrorCode::InconclusiveRank: return "InconclusiveRank";
    case ErrorCode::NotInRange: return "NotInRange";
    case ErrorCode::AbsoluteContinuityViolation:
      return "AbsoluteContinuityViolation";
    case ErrorCode::SupportViolation: return "SupportViolation";
  }
  return "UnknownError";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch:
    case ErrorCode::GeneratorViolation:
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::ConfigError:
    case ErrorCode::AbsoluteContinuityViolation:
    case ErrorCode::SupportViolation:
    case ErrorCode::NotInRange:
      return true;
    default:
      return false;
  }
}

ProbabilityVector make_probability(Eigen::VectorXd values, double tol) {
  if (values.size() == 0) {
    fail(ErrorCode::ValidationError, "probability vector is empty");
  }
  if (!values.allFinite()) {
    fail(ErrorCode::NonFinite, "probability vector has non-finite entries");
  }
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) {
      if (values[i] < -tol) {
        fail(ErrorCode::ValidationError,
             "probability vector has negative entry at index " +
                 std::to_string(i));
      }
      values[i] = 0.0;
    }
  }
  const double mass = values.sum();
  if (std::abs(mass - 1.0) > tol) {
    fail(ErrorCode::ValidationError,
         "probability vector mass " + std::to_string(mass) + " is not 1");
  }
  return ProbabilityVector{std::move(values)};
}

SignedMeasureVector make_signed_measure(Eigen::VectorXd values, double tol) {
  if (!values.allFinite()) {
    fail(ErrorCode::NonFinite, "signed measure has non-finite entries");
  }
  const bool zero_mass = std::abs(values.sum()) <= tol;
  return SignedMeasureVector{std::move(values), zero_mass};
}

FunctionVector make_function(Eigen::VectorXd values) {
  if (!values.allFinite()) {
    fail(ErrorCode::NonFinite, "function vector has non-finite entries");
  }
  return FunctionVector{std::move(values)};
}

Grid make_grid(double T, double dt_request) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    fail(ErrorCode::ConfigError, "horizon T must be positive and finite");
  }
  if (!(dt_request > 0.0) || dt_request > T) {
    fail(ErrorCode::ConfigError, "step dt must satisfy 0 < dt <= T");
  }
  const int n = static_cast<int>(std::llround(T / dt_request));
  return Grid{T, n < 1 ? 1 : n};
}

void SimConfig::validate() const {
  (void)make_grid(T, dt);
  if (n_paths < 1) fail(ErrorCode::ConfigError, "n_paths must be >= 1");
  if (measure == MeasureKind::Pmu && prior.size() == 0) {
    fail(ErrorCode::ConfigError, "measure Pmu requires a prior");
  }
}

Grid SimConfig::grid() const { return make_grid(T, dt); }

}  // namespace hmmdual
