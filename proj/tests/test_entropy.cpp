#include <cmath>
#include <random>

#include "doctest.h"
#include "hmmdual/entropy.hpp"
#include "hmmdual/errors.hpp"
#include "support.hpp"

using namespace hmmdual;

namespace {

FiniteHMM static_model(const Eigen::VectorXd& h) {
  FiniteHMM model;
  model.d = static_cast<int>(h.size());
  model.m = 1;
  model.A = Eigen::MatrixXd::Zero(model.d, model.d);
  model.H = h;
  return validate(model);
}

}  // namespace

TEST_CASE("identical priors have zero divergence, exactly") {
  std::mt19937_64 rng(1);
  const FiniteHMM model = testing::random_irreducible_model(rng, 3, 1);
  SimConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 0.02;
  cfg.n_paths = 50;
  const ProbabilityVector mu = testing::random_prior(rng, 3);
  const KlEstimate est = estimate_kl(model, mu, mu, cfg);
  CHECK(est.kl == 0.0);
  CHECK(est.stderror == 0.0);
}

TEST_CASE("blind models cannot distinguish priors") {
  std::mt19937_64 rng(2);
  FiniteHMM model = testing::random_irreducible_model(rng, 3, 1);
  model.H.setZero();
  model = validate(model);
  SimConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 0.02;
  cfg.n_paths = 50;
  const KlEstimate est = estimate_kl(model, testing::dirac_prior(3, 0),
                                     testing::uniform_prior(3), cfg);
  CHECK(est.kl == 0.0);
}

TEST_CASE("static oracle basics") {
  const Eigen::VectorXd h = (Eigen::VectorXd(2) << 1.0, -1.0).finished();
  SUBCASE("mu = nu") {
    const ProbabilityVector p = testing::uniform_prior(2);
    CHECK(static_kl_oracle(h, p, p, 1.0) == doctest::Approx(0.0).epsilon(1e-10));
  }
  SUBCASE("uninformative observation") {
    const Eigen::VectorXd h0 = Eigen::VectorXd::Zero(2);
    const ProbabilityVector mu = testing::dirac_prior(2, 0);
    const ProbabilityVector nu = testing::uniform_prior(2);
    CHECK(std::abs(static_kl_oracle(h0, mu, nu, 1.0)) < 1e-10);
  }
  SUBCASE("support violation") {
    const ProbabilityVector mu = testing::uniform_prior(2);
    const ProbabilityVector nu = testing::dirac_prior(2, 0);
    CHECK_THROWS_AS(static_kl_oracle(h, mu, nu, 1.0), Error);
  }
  SUBCASE("a Dirac prior against the balanced mixture is positive") {
    const ProbabilityVector mu = testing::dirac_prior(2, 0);
    const ProbabilityVector nu = testing::uniform_prior(2);
    const double kl = static_kl_oracle(h, mu, nu, 1.0);
    CHECK(kl > 0.0);
    CHECK(std::isfinite(kl));
    // The divergence is at most log 2 here: the likelihood ratio against
    // the balanced mixture is bounded by 2.
    CHECK(kl <= std::log(2.0) + 1e-9);
  }
}

TEST_CASE("estimator matches the static oracle") {
  const FiniteHMM model =
      static_model((Eigen::VectorXd(2) << 1.0, -1.0).finished());
  const ProbabilityVector mu =
      make_probability((Eigen::VectorXd(2) << 0.7, 0.3).finished());
  const ProbabilityVector nu = testing::uniform_prior(2);
  SimConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 1e-3;
  cfg.n_paths = 4000;
  cfg.seed = 11;
  const KlEstimate est = estimate_kl(model, mu, nu, cfg);
  const double oracle = static_kl_oracle(model.H.col(0), mu, nu, 1.0);
  CHECK(std::abs(est.kl - oracle) <=
        std::max(3.5 * est.stderror, 0.05 * oracle));
}

TEST_CASE("divergence is nonnegative and monotone in the horizon") {
  std::mt19937_64 rng(3);
  const FiniteHMM model = testing::random_irreducible_model(rng, 3, 1, 1.0, 1.5);
  const ProbabilityVector mu = testing::random_prior(rng, 3);
  const ProbabilityVector nu = testing::random_prior(rng, 3);
  SimConfig cfg;
  cfg.T = 2.0;
  cfg.dt = 5e-3;
  cfg.n_paths = 1000;
  cfg.seed = 17;
  const std::vector<KlEstimate> profile =
      estimate_kl_profile(model, mu, nu, cfg, {0.5, 1.0, 2.0});
  REQUIRE(profile.size() == 3);
  for (const KlEstimate& e : profile) CHECK(e.kl >= 0.0);
  // The per-path integrand is nonnegative, so the profile is monotone
  // pathwise as well as in the mean.
  CHECK(profile[0].kl <= profile[1].kl);
  CHECK(profile[1].kl <= profile[2].kl);
  CHECK(profile[0].T == doctest::Approx(0.5));
  CHECK(profile[2].T == doctest::Approx(2.0));
}

TEST_CASE("observable models separate distinct priors") {
  const FiniteHMM model =
      static_model((Eigen::VectorXd(2) << 1.0, -1.0).finished());
  SimConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 1e-2;
  cfg.n_paths = 2000;
  cfg.seed = 23;
  const KlEstimate est = estimate_kl(model, testing::dirac_prior(2, 0),
                                     testing::uniform_prior(2), cfg);
  CHECK(est.kl > 3.0 * est.stderror);
}
