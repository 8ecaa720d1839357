#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "hmmdual/grid.hpp"
#include "hmmdual/model.hpp"
#include "hmmdual/simulate.hpp"
#include "hmmdual/types.hpp"

namespace hmmdual {

// Observation-adapted control input sampled on the simulation grid. The
// value at node k is computed from increments strictly before t_k only, so
// every rule is adapted by construction.
class ControlFunctional {
 public:
  enum class Kind { Deterministic, PathFeedback };

  static ControlFunctional zero(int m);
  static ControlFunctional constant(const Eigen::VectorXd& value);
  // Deterministic table u(t_k), one row per grid node.
  static ControlFunctional table(const Eigen::MatrixXd& u_nodes);
  // U_t = sin(Z_t) / tanh(Z_t) applied componentwise to the running
  // observation.
  static ControlFunctional sin_of_z(int m);
  static ControlFunctional tanh_of_z(int m);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  int dims() const { return m_; }

  // Samples the control on the grid: row k is U at t_k. Throws ConfigError
  // if a deterministic table does not match the grid, NonFinite if the
  // sampled control is not square-integrable on the path.
  Eigen::MatrixXd evaluate(const Grid& grid, const Eigen::MatrixXd& dZ) const;

 private:
  enum class Rule { Zero, Constant, Table, SinOfZ, TanhOfZ };

  ControlFunctional(Kind kind, Rule rule, std::string name, int m)
      : kind_(kind), rule_(rule), name_(std::move(name)), m_(m) {}

  Kind kind_;
  Rule rule_;
  std::string name_;
  int m_;
  Eigen::VectorXd constant_;
  Eigen::MatrixXd table_;
};

// Monte Carlo estimate of the controllability gramian
// W = 1 1^T + E[ integral Psi^T H H^T Psi dt ] with per-entry standard
// errors from the path-level variance.
struct GramianEstimate {
  Eigen::MatrixXd W;
  Eigen::MatrixXd stderr_W;
  std::int64_t n_paths = 0;
  SimConfig cfg;
};

GramianEstimate estimate_gramian(const FiniteHMM& model, const SimConfig& cfg);

// Numerical rank with a Monte Carlo noise band: singular values above the
// threshold count, values inside the band make the rank inconclusive
// (reported, not guessed).
struct RankResult {
  std::optional<int> rank;  // empty when inconclusive
  int n_above = 0;
  double threshold = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  Eigen::VectorXd singular_values;

  bool conclusive() const { return rank.has_value(); }
};

// tol_rank <= 0 selects the default max(1e-8, 10 * max stderr / s_max).
RankResult gramian_rank(const GramianEstimate& estimate, double tol_rank = -1.0);

// L(U, c) = Y_0 evaluated through the martingale representation
// Y_0 = E[ integral Psi_t^T H U_t dt ] + c 1 under the reference measure.
struct ApplyLResult {
  Eigen::VectorXd y0;
  Eigen::VectorXd stderr_y0;
  std::int64_t n_paths = 0;
};

ApplyLResult apply_L(const FiniteHMM& model, const ControlFunctional& control,
                     double c, const SimConfig& cfg);

// L^dagger mu along one path: sigma_t^mu(h) = H^T Psi_t mu per node, plus
// the total mass mu(1).
struct LdaggerPath {
  Eigen::MatrixXd sigma_h;  // n_nodes x m
  double mu_mass = 0.0;
};

LdaggerPath apply_L_dagger(const FiniteHMM& model,
                           const SignedMeasureVector& mu,
                           const ZakaiPath& path);

// Both sides of the pairing <mu, L(U,c)> = <L^dagger mu, (U,c)> estimated
// on the same path set; the per-path difference has mean zero when the
// adjoint identity holds.
struct DualityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double stderr_lhs = 0.0;
  double stderr_rhs = 0.0;
  double stderr_diff = 0.0;
  double z_score = 0.0;
  std::int64_t n_paths = 0;
};

DualityReport check_adjoint(const FiniteHMM& model,
                            const SignedMeasureVector& mu,
                            const ControlFunctional& control, double c,
                            const SimConfig& cfg);

// Backward ODE -y' = A y + H u, y_T = c 1, stepped with the exact exp(A dt)
// factor and a trapezoidal source term (second order in dt).
Eigen::VectorXd solve_dual_ode(const FiniteHMM& model,
                               const Eigen::MatrixXd& u_nodes, double c,
                               double T, double dt);

// Minimum-norm steering to Y_0 = f: mu* solves W mu = f by truncated
// pseudo-inverse, the control is U_t = sigma_t^{mu*}(h), and the cost is
// E[ integral |U|^2 dt ] + mu*(1)^2.
struct MinNormResult {
  SignedMeasureVector mu_star;
  FunctionVector achieved_y0;
  Eigen::VectorXd achieved_stderr;
  double cost = 0.0;
  double cost_stderr = 0.0;
  // Variance-reduced cross-check mu*^T (W - 1 1^T) mu* + mu*(1)^2.
  double cost_from_gramian = 0.0;
  double residual = 0.0;
  RankResult rank;
};

MinNormResult min_norm_control(const FiniteHMM& model, const FunctionVector& f,
                               const GramianEstimate& gramian,
                               const SimConfig& cfg);

// Consistency check of E[Y_T(X_T)] = mu(Y_0) - E[ integral U^T dZ ] with
// Y_T = c 1: compares mu(Y_0) under the reference measure against
// c + E[ integral U^T dZ ] under P^mu.
struct PairingCheck {
  double lhs = 0.0;  // mu(Y_0)
  double rhs = 0.0;  // c + E^mu integral U^T dZ
  double stderr_lhs = 0.0;
  double stderr_rhs = 0.0;
  double stderr_diff = 0.0;
  double z_score = 0.0;
  std::int64_t n_paths = 0;
};

PairingCheck pairing_consistency_check(const FiniteHMM& model,
                                       const ProbabilityVector& mu,
                                       const ControlFunctional& control,
                                       double c, const SimConfig& cfg);

}  // namespace hmmdual
