#include "hmmdual/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hmmdual/errors.hpp"
#include "hmmdual/parallel.hpp"
#include "hmmdual/simulate.hpp"
#include "hmmdual/stats.hpp"

namespace hmmdual {

namespace {

void check_absolute_continuity(const ProbabilityVector& mu,
                               const ProbabilityVector& nu) {
  for (int i = 0; i < mu.size(); ++i) {
    if (nu.values(i) <= 0.0 && mu.values(i) > 0.0) {
      fail(ErrorCode::AbsoluteContinuityViolation,
           "mu is not absolutely continuous w.r.t. nu at state " +
               std::to_string(i));
    }
  }
}

// log of a Gaussian mixture density with common variance, via log-sum-exp.
double log_mixture(const Eigen::VectorXd& log_w, const Eigen::VectorXd& means,
                   double variance, double z) {
  double best = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd terms(log_w.size());
  for (Eigen::Index i = 0; i < log_w.size(); ++i) {
    const double dev = z - means(i);
    terms(i) = log_w(i) - 0.5 * dev * dev / variance;
    best = std::max(best, terms(i));
  }
  if (!std::isfinite(best)) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < terms.size(); ++i) {
    acc += std::exp(terms(i) - best);
  }
  return best + std::log(acc) -
         0.5 * std::log(2.0 * 3.14159265358979323846 * variance);
}

}  // namespace

std::vector<KlEstimate> estimate_kl_profile(
    const FiniteHMM& model, const ProbabilityVector& mu,
    const ProbabilityVector& nu, const SimConfig& cfg_in,
    const std::vector<double>& horizons) {
  if (mu.size() != model.d || nu.size() != model.d) {
    fail(ErrorCode::ShapeMismatch, "prior dimension does not match model");
  }
  check_absolute_continuity(mu, nu);

  SimConfig cfg = cfg_in;
  cfg.measure = MeasureKind::Pmu;
  cfg.prior = mu;
  cfg.validate();
  PropagatorEngine engine(model, cfg);
  const Grid grid = engine.grid();

  std::vector<int> nodes;
  nodes.reserve(horizons.size());
  for (double T : horizons) {
    if (!(T > 0.0) || T > grid.T * (1.0 + 1e-12)) {
      fail(ErrorCode::ConfigError, "horizon outside the simulated range");
    }
    const int k =
        std::clamp(static_cast<int>(std::llround(T / grid.dt())), 1,
                   grid.n_steps);
    nodes.push_back(k);
  }

  const SignedMeasureVector mu_measure = make_signed_measure(mu.values);
  const SignedMeasureVector nu_measure = make_signed_measure(nu.values);

  auto stats = parallel_path_reduce<ArrayStats>(
      cfg.n_paths,
      [&] { return ArrayStats(static_cast<Eigen::Index>(nodes.size())); },
      [&](ArrayStats& acc, std::int64_t p) {
        const ZakaiPath path = engine.path(p);
        const FilterPath f_mu =
            wonham_normalize(zakai_from_prior(path, mu_measure));
        const FilterPath f_nu =
            wonham_normalize(zakai_from_prior(path, nu_measure));
        // Trapezoidal prefix integral of |pi^mu(h) - pi^nu(h)|^2.
        Eigen::VectorXd prefix(grid.n_nodes());
        double acc_int = 0.0;
        double prev = 0.0;
        for (int k = 0; k < grid.n_nodes(); ++k) {
          const Eigen::VectorXd gap =
              model.H.transpose() *
              (f_mu.pi.row(k) - f_nu.pi.row(k)).transpose();
          const double val = gap.squaredNorm();
          if (k > 0) acc_int += 0.5 * grid.dt() * (prev + val);
          prefix(k) = acc_int;
          prev = val;
        }
        Eigen::ArrayXd out(static_cast<Eigen::Index>(nodes.size()));
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          out(static_cast<Eigen::Index>(i)) =
              prefix(nodes[i]);
        }
        acc.add(out);
      },
      [](ArrayStats& total, const ArrayStats& part) { total.merge(part); });

  std::vector<KlEstimate> out;
  const Eigen::ArrayXd mean = stats.mean();
  const Eigen::ArrayXd se = stats.stderror();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    KlEstimate e;
    e.kl = 0.5 * mean(static_cast<Eigen::Index>(i));
    e.stderror = 0.5 * se(static_cast<Eigen::Index>(i));
    e.T = grid.time(nodes[i]);
    e.n_paths = cfg.n_paths;
    out.push_back(e);
  }
  return out;
}

KlEstimate estimate_kl(const FiniteHMM& model, const ProbabilityVector& mu,
                       const ProbabilityVector& nu, const SimConfig& cfg) {
  return estimate_kl_profile(model, mu, nu, cfg, {cfg.grid().T}).front();
}

double static_kl_oracle(const Eigen::VectorXd& h_column,
                        const ProbabilityVector& mu,
                        const ProbabilityVector& nu, double T,
                        double abs_tol) {
  const Eigen::Index d = h_column.size();
  if (mu.size() != d || nu.size() != d) {
    fail(ErrorCode::ShapeMismatch, "prior dimension does not match h");
  }
  if (!(T > 0.0)) fail(ErrorCode::ConfigError, "horizon must be positive");
  for (Eigen::Index i = 0; i < d; ++i) {
    if (nu.values(i) <= 0.0 && mu.values(i) > 0.0) {
      fail(ErrorCode::SupportViolation,
           "nu vanishes where mu does not (state " + std::to_string(i) + ")");
    }
  }

  // Mixture components with positive weight only.
  std::vector<double> mu_logw, mu_mean, nu_logw, nu_mean;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (mu.values(i) > 0.0) {
      mu_logw.push_back(std::log(mu.values(i)));
      mu_mean.push_back(h_column(i) * T);
    }
    if (nu.values(i) > 0.0) {
      nu_logw.push_back(std::log(nu.values(i)));
      nu_mean.push_back(h_column(i) * T);
    }
  }
  const auto to_vec = [](const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                             static_cast<Eigen::Index>(v.size()));
  };
  const Eigen::VectorXd mu_lw = to_vec(mu_logw), mu_m = to_vec(mu_mean);
  const Eigen::VectorXd nu_lw = to_vec(nu_logw), nu_m = to_vec(nu_mean);

  const double sd = std::sqrt(T);
  const double lo =
      std::min(mu_m.minCoeff(), nu_m.minCoeff()) - 12.0 * sd;
  const double hi =
      std::max(mu_m.maxCoeff(), nu_m.maxCoeff()) + 12.0 * sd;

  const auto integrand = [&](double z) {
    const double log_p = log_mixture(mu_lw, mu_m, T, z);
    if (!std::isfinite(log_p)) return 0.0;
    const double log_q = log_mixture(nu_lw, nu_m, T, z);
    return std::exp(log_p) * (log_p - log_q);
  };

  double error_estimate = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          integrand, lo, hi, 15, abs_tol, &error_estimate);
  // The integrand can dip slightly negative only through rounding near the
  // tails; the divergence itself is nonnegative.
  return value < 0.0 && value > -abs_tol ? 0.0 : value;
}

}  // namespace hmmdual
