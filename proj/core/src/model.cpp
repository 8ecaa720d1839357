#include "hmmdual/model.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "hmmdual/errors.hpp"
#include "hmmdual/rng.hpp"

namespace hmmdual {

FiniteHMM validate(FiniteHMM model, double tol_model) {
  if (model.d < 1 || model.m < 1) {
    fail(ErrorCode::ShapeMismatch, "state and observation dimensions must be >= 1");
  }
  if (model.A.rows() != model.d || model.A.cols() != model.d) {
    fail(ErrorCode::ShapeMismatch, "A must be d x d");
  }
  if (model.H.rows() != model.d || model.H.cols() != model.m) {
    fail(ErrorCode::ShapeMismatch, "H must be d x m");
  }
  if (!model.A.allFinite() || !model.H.allFinite()) {
    fail(ErrorCode::NonFinite, "model matrices must be finite");
  }
  for (int i = 0; i < model.d; ++i) {
    for (int j = 0; j < model.d; ++j) {
      if (i == j) continue;
      const double a = model.A(i, j);
      if (a < 0.0) {
        if (a < -tol_model) {
          fail(ErrorCode::GeneratorViolation,
               "negative off-diagonal rate at (" + std::to_string(i) + "," +
                   std::to_string(j) + ")");
        }
        model.A(i, j) = 0.0;
      }
    }
    const double row_sum = model.A.row(i).sum();
    if (std::abs(row_sum) > tol_model) {
      fail(ErrorCode::GeneratorViolation,
           "row " + std::to_string(i) + " sums to " + std::to_string(row_sum));
    }
    // Rebalance the diagonal so the row sums to zero exactly.
    double off = 0.0;
    for (int j = 0; j < model.d; ++j) {
      if (j != i) off += model.A(i, j);
    }
    model.A(i, i) = -off;
  }
  return model;
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& M) {
  return M.exp();
}

SignedMeasureVector kolmogorov_forward(const FiniteHMM& model,
                                       const SignedMeasureVector& mu0,
                                       double t) {
  if (mu0.size() != model.d) {
    fail(ErrorCode::ShapeMismatch, "measure dimension does not match model");
  }
  if (t < 0.0) fail(ErrorCode::ConfigError, "time must be nonnegative");
  if (t == 0.0) return mu0;
  const Eigen::MatrixXd P = matrix_exponential(model.A.transpose() * t);
  Eigen::VectorXd out = P * mu0.values;
  if (!out.allFinite()) {
    fail(ErrorCode::NonFinite, "forward flow produced non-finite values");
  }
  return make_signed_measure(std::move(out));
}

StatePath sample_ctmc(const FiniteHMM& model, const ProbabilityVector& mu,
                      const SimConfig& cfg, std::int64_t path_index) {
  cfg.validate();
  if (mu.size() != model.d) {
    fail(ErrorCode::ShapeMismatch, "prior dimension does not match model");
  }
  const Grid grid = cfg.grid();
  PathRng rng(cfg.seed, path_index, /*stream=*/1);

  StatePath path;
  path.grid = grid;
  path.seed = cfg.seed;
  path.path_index = path_index;
  path.states.resize(static_cast<std::size_t>(grid.n_nodes()));

  const int initial_state =
      rng.discrete(mu.values.data(), model.d, mu.values.sum());

  // Exact jump chain: (time, state entered at that time).
  std::vector<std::pair<double, int>> jumps;
  std::vector<double> weights(static_cast<std::size_t>(model.d));
  int state = initial_state;
  double t = 0.0;
  while (true) {
    const double rate = -model.A(state, state);
    if (!(rate > 0.0)) break;  // absorbing state, holds forever
    t += rng.exponential(rate);
    if (t > grid.T) break;
    double total = 0.0;
    for (int j = 0; j < model.d; ++j) {
      const double w = (j == state) ? 0.0 : std::max(model.A(state, j), 0.0);
      weights[static_cast<std::size_t>(j)] = w;
      total += w;
    }
    if (!(total > 0.0)) break;
    state = rng.discrete(weights.data(), model.d, total);
    jumps.emplace_back(t, state);
  }

  path.jump_times.reserve(jumps.size());
  for (const auto& j : jumps) path.jump_times.push_back(j.first);

  // Discretize: state at t_k is the state right after the last jump <= t_k.
  std::size_t next = 0;
  int current = initial_state;
  for (int k = 0; k < grid.n_nodes(); ++k) {
    const double tk = grid.time(k);
    while (next < jumps.size() && jumps[next].first <= tk) {
      current = jumps[next].second;
      ++next;
    }
    path.states[static_cast<std::size_t>(k)] = current;
  }
  return path;
}

}  // namespace hmmdual
