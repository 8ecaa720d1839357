#include <cmath>
#include <random>

#include "doctest.h"
#include "hmmdual/subspace.hpp"
#include "support.hpp"

using namespace hmmdual;

namespace {

FiniteHMM static_model(const Eigen::MatrixXd& H) {
  FiniteHMM model;
  model.d = static_cast<int>(H.rows());
  model.m = static_cast<int>(H.cols());
  model.A = Eigen::MatrixXd::Zero(model.d, model.d);
  model.H = H;
  return validate(model);
}

Eigen::MatrixXd col(std::initializer_list<double> values) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) out(i++, 0) = v;
  return out;
}

}  // namespace

TEST_CASE("controllable subspace at A = 0 is decided by row injectivity") {
  CHECK(controllable_subspace(static_model(col({1, 2}))).dim() == 2);
  CHECK(controllable_subspace(static_model(col({1, 1}))).dim() == 1);
}

TEST_CASE("controllable subspace closure of a repeated-level model") {
  const Subspace c = controllable_subspace(static_model(col({1, 1, 2})));
  CHECK(c.dim() == 2);
  Eigen::MatrixXd expected(3, 2);
  expected << 1, 0, 1, 0, 1, 1;
  const Subspace ref = subspace_from_columns(expected);
  CHECK(max_principal_angle(c, ref) < 1e-8);
}

TEST_CASE("the constant function always lies in the controllable subspace") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const FiniteHMM model = testing::random_model(rng, 2 + trial % 5, 1 + trial % 3);
    const Subspace c = controllable_subspace(model);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(model.d);
    CHECK(c.residual(ones).norm() / ones.norm() < 1e-10);
  }
}

TEST_CASE("closure is a fixed point of both maps") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const FiniteHMM model = testing::random_model(rng, 2 + trial % 5, 1 + trial % 3);
    const Subspace c = controllable_subspace(model);
    for (int j = 0; j < c.dim(); ++j) {
      const Eigen::VectorXd g = c.basis.col(j);
      CHECK(c.residual(model.A * g).norm() <=
            10.0 * defaults::tol_rank * std::max(1.0, (model.A * g).norm()));
      for (int h = 0; h < model.m; ++h) {
        const Eigen::VectorXd hg = model.H.col(h).cwiseProduct(g);
        CHECK(c.residual(hg).norm() <=
              10.0 * defaults::tol_rank * std::max(1.0, hg.norm()));
      }
    }
  }
}

TEST_CASE("closure is minimal over seeds containing the constant") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const FiniteHMM model = testing::random_model(rng, 3 + trial % 4, 2);
    const Subspace c = controllable_subspace(model);
    // Reseed with 1 plus a strict subset of the final basis.
    const int keep = c.dim() > 1 ? c.dim() - 1 : 0;
    Eigen::MatrixXd seeds(model.d, 1 + keep);
    seeds.col(0) = Eigen::VectorXd::Ones(model.d);
    for (int j = 0; j < keep; ++j) seeds.col(1 + j) = c.basis.col(j);
    const Subspace again = closure_under_model_maps(model, seeds);
    CHECK(again.dim() == c.dim());
    CHECK(max_principal_angle(again, c) < 1e-8);
  }
}

TEST_CASE("observability matches full closure dimension") {
  std::mt19937_64 rng(44);
  SUBCASE("injective observation rows imply observability") {
    for (int trial = 0; trial < 10; ++trial) {
      FiniteHMM model = testing::random_model(rng, 4, 2, /*repeated=*/false);
      // Force injective rows by spreading one column.
      for (int i = 0; i < model.d; ++i) model.H(i, 0) = i + 1;
      CHECK(is_observable(model).observable);
    }
  }
  SUBCASE("zero observation matrix is unobservable") {
    std::mt19937_64 local(1);
    FiniteHMM model = testing::random_irreducible_model(local, 3, 1);
    model.H.setZero();
    const ObservabilityReport report = is_observable(model);
    CHECK_FALSE(report.observable);
    CHECK(report.dim == 1);
  }
  SUBCASE("Kalman-controllable pairs are observable") {
    FiniteHMM model;
    model.d = 2;
    model.m = 1;
    model.A.resize(2, 2);
    model.A << -1, 1, 1, -1;
    model.H = col({1, 0});
    model = validate(model);
    REQUIRE(linear_controllable_subspace(model.A, model.H).dim() == 2);
    CHECK(is_observable(model).observable);
  }
}

TEST_CASE("linear controllable subspace") {
  SUBCASE("A = 0 collapses to the column span of H") {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
    Eigen::MatrixXd H(3, 2);
    H << 1, 0, 0, 1, 0, 0;
    CHECK(linear_controllable_subspace(A, H).dim() == 2);
  }
  SUBCASE("nilpotent chain reaches full rank") {
    Eigen::MatrixXd A(2, 2);
    A << 0, 1, 0, 0;
    CHECK(linear_controllable_subspace(A, col({0, 1})).dim() == 2);
  }
  SUBCASE("linear span plus constants sits inside the closure") {
    std::mt19937_64 rng(45);
    for (int trial = 0; trial < 20; ++trial) {
      const FiniteHMM model = testing::random_model(rng, 2 + trial % 5, 1 + trial % 2);
      const Subspace lin = linear_controllable_subspace(model.A, model.H);
      const Subspace c = controllable_subspace(model);
      CHECK(containment_angle(lin, c) < 1e-8);
    }
  }
}

TEST_CASE("observable function space") {
  SUBCASE("level indicators at A = 0") {
    const ObservableFunctions of = observable_functions(static_model(col({1, 1, 2})));
    CHECK(of.space.dim() == 2);
    Eigen::MatrixXd expected(3, 2);
    expected << 1, 0, 1, 0, 0, 1;
    CHECK(max_principal_angle(of.space, subspace_from_columns(expected)) < 1e-8);
    CHECK_FALSE(of.degenerate_levels);
  }
  SUBCASE("equals the controllable subspace on random models") {
    std::mt19937_64 rng(46);
    for (int trial = 0; trial < 15; ++trial) {
      const FiniteHMM model = testing::random_model(rng, 2 + trial % 5, 1 + trial % 3);
      const Subspace c = controllable_subspace(model);
      const ObservableFunctions of = observable_functions(model);
      CHECK(of.space.dim() == c.dim());
      CHECK(max_principal_angle(of.space, c) < 1e-8);
    }
  }
  SUBCASE("d distinct rows give the full space") {
    const ObservableFunctions of = observable_functions(static_model(col({1, 2, 3, 4})));
    CHECK(of.space.dim() == 4);
  }
  SUBCASE("merged levels with A = 0 are flagged degenerate") {
    const ObservableFunctions of = observable_functions(static_model(col({2, 2})));
    CHECK(of.degenerate_levels);
    CHECK(of.space.dim() == 1);
  }
}

TEST_CASE("observation row injectivity") {
  Eigen::MatrixXd H1(2, 2);
  H1 << 1, 0, 1, 1;
  CHECK(is_injective_observation(H1));
  CHECK_FALSE(is_injective_observation(col({1, 1})));
  CHECK_FALSE(is_injective_observation(col({1.0, 1.0 + 1e-12})));
}

TEST_CASE("injectivity and observability agree at A = 0") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 4;
    FiniteHMM model = testing::random_model(rng, d, 2);
    model.A.setZero();
    model = validate(model);
    CHECK(is_injective_observation(model.H) == is_observable(model).observable);
  }
}

TEST_CASE("vandermonde rank test matches entry distinctness") {
  CHECK(vandermonde_full_rank_check(col({1, 2, 3}).col(0)));
  CHECK_FALSE(vandermonde_full_rank_check(col({1, 1, 2}).col(0)));
  CHECK(vandermonde_full_rank_check(col({0, 1}).col(0)));

  // Entries on a coarse lattice in [-2, 2]: collisions are exact repeats,
  // everything else is separated by at least 0.25.
  std::mt19937_64 rng(48);
  std::uniform_int_distribution<int> size(2, 6);
  std::uniform_int_distribution<int> lattice(0, 16);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = size(rng);
    Eigen::VectorXd h(d);
    for (int i = 0; i < d; ++i) h(i) = -2.0 + 0.25 * lattice(rng);
    bool distinct = true;
    for (int i = 0; i < d && distinct; ++i) {
      for (int j = i + 1; j < d; ++j) {
        if (h(i) == h(j)) {
          distinct = false;
          break;
        }
      }
    }
    CHECK(vandermonde_full_rank_check(h) == distinct);
  }
}
