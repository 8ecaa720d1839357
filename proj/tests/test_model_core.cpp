#include <cmath>
#include <random>

#include "doctest.h"
#include "hmmdual/errors.hpp"
#include "hmmdual/model.hpp"
#include "support.hpp"

using namespace hmmdual;

namespace {

FiniteHMM make(int d, int m, std::initializer_list<double> a,
               std::initializer_list<double> h) {
  FiniteHMM model;
  model.d = d;
  model.m = m;
  model.A = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                           Eigen::Dynamic, Eigen::RowMajor>>(
      a.begin(), d, d);
  model.H = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                           Eigen::Dynamic, Eigen::RowMajor>>(
      h.begin(), d, m);
  return model;
}

}  // namespace

TEST_CASE("validate accepts a symmetric two-state generator") {
  const FiniteHMM model = validate(make(2, 1, {-1, 1, 1, -1}, {1, -1}));
  CHECK(model.A.row(0).sum() == 0.0);
  CHECK(model.A.row(1).sum() == 0.0);
}

TEST_CASE("validate rejects a row-sum violation") {
  CHECK_THROWS_AS(validate(make(2, 1, {-1, 1, 0.1, 0}, {1, 1})), Error);
  try {
    validate(make(2, 1, {-1, 1, 0.1, 0}, {1, 1}));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GeneratorViolation);
  }
}

TEST_CASE("validate accepts the zero generator") {
  const FiniteHMM model = validate(make(2, 1, {0, 0, 0, 0}, {1, 1}));
  CHECK(model.A.isZero(0.0));
}

TEST_CASE("validate clamps tiny negative off-diagonals") {
  FiniteHMM model = make(2, 1, {-1, 1, 1, -1}, {1, -1});
  model.A(0, 1) = 1.0 + 1e-12;
  model.A(0, 0) = -1.0;
  model.A(1, 0) = -1e-12;
  model.A(1, 1) = 1e-12;
  const FiniteHMM out = validate(model);
  CHECK(out.A(1, 0) == 0.0);
  CHECK(out.A.row(0).sum() == 0.0);
  CHECK(out.A.row(1).sum() == 0.0);
}

TEST_CASE("validate rejects bad shapes and non-finite entries") {
  FiniteHMM model = make(2, 1, {-1, 1, 1, -1}, {1, -1});
  model.H.resize(1, 1);
  CHECK_THROWS_AS(validate(model), Error);

  FiniteHMM nan_model = make(2, 1, {-1, 1, 1, -1}, {1, -1});
  nan_model.A(0, 0) = std::nan("");
  CHECK_THROWS_AS(validate(nan_model), Error);
}

TEST_CASE("kolmogorov_forward is the identity at t = 0") {
  const FiniteHMM model = validate(make(2, 1, {-1, 1, 1, -1}, {1, -1}));
  const SignedMeasureVector mu0 = make_signed_measure((Eigen::VectorXd(2) << 0.3, 0.7).finished());
  const SignedMeasureVector out = kolmogorov_forward(model, mu0, 0.0);
  CHECK((out.values - mu0.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kolmogorov_forward relaxes the two-state chain to uniform") {
  const FiniteHMM model = validate(make(2, 1, {-1, 1, 1, -1}, {1, -1}));
  const SignedMeasureVector mu0 = make_signed_measure((Eigen::VectorXd(2) << 1, 0).finished());
  const SignedMeasureVector out = kolmogorov_forward(model, mu0, 20.0);
  CHECK(std::abs(out.values(0) - 0.5) < 1e-8);
  CHECK(std::abs(out.values(1) - 0.5) < 1e-8);
}

TEST_CASE("kolmogorov_forward sends zero-mass measures to zero for ergodic A") {
  const FiniteHMM model = validate(make(2, 1, {-1, 1, 1, -1}, {1, -1}));
  const SignedMeasureVector mu0 = make_signed_measure((Eigen::VectorXd(2) << 0.5, -0.5).finished());
  REQUIRE(mu0.in_M0);
  const SignedMeasureVector out = kolmogorov_forward(model, mu0, 20.0);
  CHECK(out.values.norm() < 1e-8);
  CHECK(out.in_M0);
}

TEST_CASE("kolmogorov_forward preserves mass and positivity") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const FiniteHMM model = testing::random_model(rng, 2 + trial % 5, 1);
    const ProbabilityVector p = testing::random_prior(rng, model.d);
    const SignedMeasureVector out =
        kolmogorov_forward(model, make_signed_measure(p.values), 3.0);
    CHECK(std::abs(out.values.sum() - 1.0) <= 1e-12);
    CHECK(out.values.minCoeff() >= -1e-12);
  }
}

TEST_CASE("sample_ctmc is constant when all rates vanish") {
  const FiniteHMM model = validate(make(3, 1, {0, 0, 0, 0, 0, 0, 0, 0, 0}, {1, 2, 3}));
  SimConfig cfg;
  cfg.T = 5.0;
  cfg.dt = 0.05;
  cfg.seed = 11;
  const StatePath path = sample_ctmc(model, testing::uniform_prior(3), cfg, 0);
  CHECK(path.jump_times.empty());
  for (int s : path.states) CHECK(s == path.states.front());
}

TEST_CASE("sample_ctmc absorption fraction matches the exponential law") {
  // From state 0, absorption into state 1 by T = 5 has probability
  // 1 - exp(-5).
  const FiniteHMM model = validate(make(2, 1, {-1, 1, 0, 0}, {1, -1}));
  SimConfig cfg;
  cfg.T = 5.0;
  cfg.dt = 0.5;
  cfg.seed = 23;
  const int n = 10000;
  int absorbed = 0;
  for (int p = 0; p < n; ++p) {
    const StatePath path = sample_ctmc(model, testing::dirac_prior(2, 0), cfg, p);
    if (path.states.back() == 1) ++absorbed;
    if (!path.jump_times.empty()) {
      CHECK(path.states.back() == 1);  // state 1 is absorbing
    }
  }
  const double expected = 1.0 - std::exp(-5.0);
  const double se = std::sqrt(expected * (1.0 - expected) / n);
  CHECK(std::abs(static_cast<double>(absorbed) / n - expected) <= 3.0 * se);
}

TEST_CASE("sample_ctmc marginal at T matches the forward equation") {
  std::mt19937_64 rng(3);
  const FiniteHMM model = testing::random_irreducible_model(rng, 3, 1);
  const ProbabilityVector prior = testing::dirac_prior(3, 0);
  SimConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 0.1;
  cfg.seed = 5;
  const int n = 10000;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(3);
  for (int p = 0; p < n; ++p) {
    counts(sample_ctmc(model, prior, cfg, p).states.back()) += 1.0;
  }
  const Eigen::VectorXd expected =
      kolmogorov_forward(model, make_signed_measure(prior.values), cfg.T).values;
  for (int i = 0; i < 3; ++i) {
    const double p_hat = counts(i) / n;
    const double se = std::sqrt(expected(i) * (1.0 - expected(i)) / n);
    CHECK(std::abs(p_hat - expected(i)) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("sample_ctmc is deterministic per (seed, path_index)") {
  std::mt19937_64 rng(19);
  const FiniteHMM model = testing::random_irreducible_model(rng, 4, 1);
  SimConfig cfg;
  cfg.T = 2.0;
  cfg.dt = 0.01;
  cfg.seed = 99;
  const StatePath a = sample_ctmc(model, testing::uniform_prior(4), cfg, 17);
  const StatePath b = sample_ctmc(model, testing::uniform_prior(4), cfg, 17);
  CHECK(a.states == b.states);
  CHECK(a.jump_times == b.jump_times);
  const StatePath c = sample_ctmc(model, testing::uniform_prior(4), cfg, 18);
  CHECK(a.states != c.states);
}

TEST_CASE("grid construction rounds to the nearest step count") {
  const Grid g = make_grid(1.0, 1e-3);
  CHECK(g.n_steps == 1000);
  CHECK(g.time(g.n_steps) == 1.0);
  CHECK_THROWS_AS(make_grid(-1.0, 0.1), Error);
  CHECK_THROWS_AS(make_grid(1.0, 2.0), Error);
}
