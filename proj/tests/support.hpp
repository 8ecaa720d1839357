#pragma once

#include <random>
#include <vector>

#include <Eigen/Core>

#include "hmmdual/model.hpp"

namespace hmmdual::testing {

// Dense random generator: positive off-diagonals, rows rebalanced.
inline FiniteHMM random_irreducible_model(std::mt19937_64& rng, int d, int m,
                                          double rate_scale = 1.0,
                                          double h_scale = 1.0) {
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  FiniteHMM model;
  model.d = d;
  model.m = m;
  model.A.resize(d, d);
  for (int i = 0; i < d; ++i) {
    double off = 0.0;
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      model.A(i, j) = rate_scale * unif(rng);
      off += model.A(i, j);
    }
    model.A(i, i) = -off;
  }
  model.H.resize(d, m);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < m; ++j) model.H(i, j) = h_scale * sym(rng);
  }
  return validate(model);
}

// Random valid model with optional repeated observation rows and sparse
// rates (possibly reducible).
inline FiniteHMM random_model(std::mt19937_64& rng, int d, int m,
                              bool allow_repeated_rows = true,
                              double h_scale = 1.0) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  FiniteHMM model;
  model.d = d;
  model.m = m;
  model.A.resize(d, d);
  for (int i = 0; i < d; ++i) {
    double off = 0.0;
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      const double keep = unif(rng);
      model.A(i, j) = keep < 0.6 ? unif(rng) : 0.0;
      off += model.A(i, j);
    }
    model.A(i, i) = -off;
  }
  model.H.resize(d, m);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < m; ++j) model.H(i, j) = h_scale * sym(rng);
  }
  if (allow_repeated_rows && d >= 2 && unif(rng) < 0.5) {
    // Duplicate a few rows exactly so observation levels merge.
    const int copies = 1 + static_cast<int>(unif(rng) * (d - 1));
    for (int c = 0; c < copies; ++c) {
      const int src = static_cast<int>(unif(rng) * d) % d;
      const int dst = static_cast<int>(unif(rng) * d) % d;
      model.H.row(dst) = model.H.row(src);
    }
  }
  return validate(model);
}

// Block-diagonal model with two closed classes of the given sizes.
inline FiniteHMM two_class_model(int d1, int d2, double rate,
                                 const Eigen::VectorXd& h) {
  const int d = d1 + d2;
  FiniteHMM model;
  model.d = d;
  model.m = 1;
  model.A = Eigen::MatrixXd::Zero(d, d);
  auto fill_block = [&](int lo, int size) {
    for (int i = lo; i < lo + size; ++i) {
      double off = 0.0;
      for (int j = lo; j < lo + size; ++j) {
        if (i == j) continue;
        model.A(i, j) = rate;
        off += rate;
      }
      model.A(i, i) = -off;
    }
  };
  fill_block(0, d1);
  fill_block(d1, d2);
  model.H = h;
  return validate(model);
}

inline ProbabilityVector uniform_prior(int d) {
  return make_probability(Eigen::VectorXd::Constant(d, 1.0 / d));
}

inline ProbabilityVector dirac_prior(int d, int i) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v(i) = 1.0;
  return make_probability(v);
}

inline ProbabilityVector random_prior(std::mt19937_64& rng, int d,
                                      double floor = 0.05) {
  std::uniform_real_distribution<double> unif(floor, 1.0);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = unif(rng);
  v /= v.sum();
  return make_probability(v);
}

}  // namespace hmmdual::testing
