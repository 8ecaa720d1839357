#pragma once

#include <cstdint>

#include "hmmdual/types.hpp"

namespace hmmdual {

// Uniform time grid 0 = t_0 < ... < t_N = T with step dt = T / n_steps.
struct Grid {
  double T = 0.0;
  int n_steps = 0;

  double dt() const { return T / n_steps; }
  int n_nodes() const { return n_steps + 1; }
  double time(int k) const { return T * static_cast<double>(k) / n_steps; }

  bool operator==(const Grid&) const = default;
};

// Rounds T/dt_request to the nearest positive step count so the grid ends
// exactly at T.
Grid make_grid(double T, double dt_request);

// Probability measure driving the observation increments: under TildeP the
// increments are Brownian; under Pmu a state path is sampled from the prior
// and the increments carry the h(X_t) dt drift.
enum class MeasureKind { TildeP, Pmu };

struct SimConfig {
  double T = 1.0;
  double dt = 1e-3;  // guidance: dt = 1e-3 * T; never silently altered
  std::int64_t n_paths = 10000;
  std::uint64_t seed = 0;
  MeasureKind measure = MeasureKind::TildeP;
  ProbabilityVector prior;  // required iff measure == Pmu

  void validate() const;
  Grid grid() const;
};

}  // namespace hmmdual
