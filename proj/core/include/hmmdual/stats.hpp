#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace hmmdual {

// Running mean/variance with Kahan-compensated sums. Merging partials in a
// fixed order keeps reductions deterministic.
struct ScalarStats {
  double sum = 0.0, sum_c = 0.0;
  double sumsq = 0.0, sumsq_c = 0.0;
  std::int64_t n = 0;

  void add(double x) {
    kahan(sum, sum_c, x);
    kahan(sumsq, sumsq_c, x * x);
    ++n;
  }

  void merge(const ScalarStats& o) {
    kahan(sum, sum_c, o.sum);
    kahan(sumsq, sumsq_c, o.sumsq);
    n += o.n;
  }

  double mean() const { return sum / static_cast<double>(n); }

  // Unbiased sample variance; zero when n < 2.
  double variance() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double v = (sumsq - static_cast<double>(n) * m * m) /
                     static_cast<double>(n - 1);
    return v > 0.0 ? v : 0.0;
  }

  double stderror() const {
    return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }

  static void kahan(double& acc, double& comp, double x) {
    const double y = x - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  }
};

// Elementwise statistics over fixed-size arrays (flattened vectors or
// matrices).
struct ArrayStats {
  Eigen::ArrayXd sum, sum_c, sumsq, sumsq_c;
  std::int64_t n = 0;

  explicit ArrayStats(Eigen::Index size)
      : sum(Eigen::ArrayXd::Zero(size)),
        sum_c(Eigen::ArrayXd::Zero(size)),
        sumsq(Eigen::ArrayXd::Zero(size)),
        sumsq_c(Eigen::ArrayXd::Zero(size)) {}

  void add(const Eigen::Ref<const Eigen::ArrayXd>& x) {
    kahan(sum, sum_c, x);
    kahan(sumsq, sumsq_c, x.square());
    ++n;
  }

  void merge(const ArrayStats& o) {
    kahan(sum, sum_c, o.sum);
    kahan(sumsq, sumsq_c, o.sumsq);
    n += o.n;
  }

  Eigen::ArrayXd mean() const { return sum / static_cast<double>(n); }

  Eigen::ArrayXd variance() const {
    if (n < 2) return Eigen::ArrayXd::Zero(sum.size());
    const Eigen::ArrayXd m = mean();
    return ((sumsq - static_cast<double>(n) * m.square()) /
            static_cast<double>(n - 1))
        .max(0.0);
  }

  Eigen::ArrayXd stderror() const {
    if (n <= 0) return Eigen::ArrayXd::Zero(sum.size());
    return (variance() / static_cast<double>(n)).sqrt();
  }

  template <class Expr>
  static void kahan(Eigen::ArrayXd& acc, Eigen::ArrayXd& comp,
                    const Expr& x) {
    const Eigen::ArrayXd y = x - comp;
    const Eigen::ArrayXd t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  }
};

}  // namespace hmmdual
