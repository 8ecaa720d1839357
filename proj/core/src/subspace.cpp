#include "hmmdual/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "hmmdual/errors.hpp"

namespace hmmdual {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Incremental orthonormal basis with the scale-invariant admission rule:
// a candidate joins when its residual against the current basis exceeds
// tol_rank times the largest raw norm admitted so far. Twice-repeated
// classical Gram-Schmidt keeps the basis orthonormal at d <= 64.
class ClosureBasis {
 public:
  ClosureBasis(int ambient, double tol_rank)
      : basis_(ambient, ambient), k_(0), tol_(tol_rank), scale_ref_(0.0) {}

  bool try_admit(const Eigen::VectorXd& candidate) {
    if (k_ == basis_.rows()) return false;
    const double raw = candidate.norm();
    Eigen::VectorXd r = candidate;
    for (int pass = 0; pass < 2; ++pass) {
      if (k_ > 0) {
        r.noalias() -= basis_.leftCols(k_) * (basis_.leftCols(k_).transpose() * r);
      }
    }
    const double res = r.norm();
    const double threshold = tol_ * scale_ref_;
    if (res <= threshold || res == 0.0) return false;
    basis_.col(k_++) = r / res;
    scale_ref_ = std::max(scale_ref_, raw);
    return true;
  }

  int dim() const { return k_; }
  bool full() const { return k_ == basis_.rows(); }
  Eigen::MatrixXd matrix() const { return basis_.leftCols(k_); }

 private:
  Eigen::MatrixXd basis_;
  int k_;
  double tol_;
  double scale_ref_;
};

}  // namespace

Eigen::VectorXd Subspace::residual(const Eigen::VectorXd& v) const {
  if (dim() == 0) return v;
  return v - basis * (basis.transpose() * v);
}

bool Subspace::contains(const Eigen::VectorXd& v, double tol) const {
  const double nv = v.norm();
  if (nv == 0.0) return true;
  return residual(v).norm() <= tol * nv;
}

Subspace subspace_from_columns(const Eigen::MatrixXd& columns,
                               double tol_rank) {
  if (columns.cols() == 0) {
    return Subspace{Eigen::MatrixXd(columns.rows(), 0), tol_rank};
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns, Eigen::ComputeThinU);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol_rank * smax && s(i) > 0.0) ++rank;
  }
  return Subspace{svd.matrixU().leftCols(rank), tol_rank};
}

double max_principal_angle(const Subspace& p, const Subspace& q) {
  if (p.dim() != q.dim()) return kPi / 2.0;
  if (p.dim() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(p.basis.transpose() * q.basis);
  const double smin = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
  if (smin < 0.7) return std::acos(smin);
  // Near-aligned subspaces: acos loses half the digits, so measure the
  // angle through its sine instead (Bjorck-Golub).
  const Eigen::MatrixXd r =
      q.basis - p.basis * (p.basis.transpose() * q.basis);
  Eigen::JacobiSVD<Eigen::MatrixXd> rsvd(r);
  return std::asin(std::clamp(rsvd.singularValues().maxCoeff(), 0.0, 1.0));
}

double containment_angle(const Subspace& inner, const Subspace& outer) {
  if (inner.dim() == 0) return 0.0;
  if (outer.dim() == 0) return kPi / 2.0;
  const Eigen::MatrixXd r =
      inner.basis - outer.basis * (outer.basis.transpose() * inner.basis);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  const double smax = svd.singularValues().maxCoeff();
  return std::asin(std::clamp(smax, 0.0, 1.0));
}

ObservationLevels observation_levels(const Eigen::MatrixXd& H,
                                     double tol_level) {
  const int d = static_cast<int>(H.rows());
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index j = 0; j < H.cols(); ++j) {
      if (H(a, j) != H(b, j)) return H(a, j) < H(b, j);
    }
    return a < b;
  });

  ObservationLevels out;
  out.assignment.assign(static_cast<std::size_t>(d), -1);
  std::vector<int> reps;  // representative state per level
  for (int idx : order) {
    bool matched = false;
    if (!reps.empty()) {
      const int rep = reps.back();
      // Rows are sorted, so only the previous level can match.
      if ((H.row(idx) - H.row(rep)).cwiseAbs().maxCoeff() <= tol_level) {
        out.assignment[static_cast<std::size_t>(idx)] =
            static_cast<int>(reps.size()) - 1;
        matched = true;
      }
    }
    if (!matched) {
      reps.push_back(idx);
      out.assignment[static_cast<std::size_t>(idx)] =
          static_cast<int>(reps.size()) - 1;
    }
  }
  out.levels.resize(static_cast<Eigen::Index>(reps.size()), H.cols());
  for (std::size_t k = 0; k < reps.size(); ++k) {
    out.levels.row(static_cast<Eigen::Index>(k)) = H.row(reps[k]);
  }
  return out;
}

Subspace closure_under_model_maps(const FiniteHMM& model,
                                  const Eigen::MatrixXd& seeds,
                                  double tol_rank) {
  const int d = model.d;
  if (seeds.rows() != d) {
    fail(ErrorCode::ShapeMismatch, "seed dimension does not match model");
  }
  ClosureBasis basis(d, tol_rank);
  for (Eigen::Index s = 0; s < seeds.cols(); ++s) basis.try_admit(seeds.col(s));

  // Closure sweep: applying the maps to a vector never yields anything new
  // once it has been processed, so each basis vector is expanded exactly
  // once, in admission order (A-map first, then the H-column maps).
  int next = 0;
  while (next < basis.dim() && !basis.full()) {
    const Eigen::VectorXd g = basis.matrix().col(next++);
    basis.try_admit(model.A * g);
    for (int j = 0; j < model.m && !basis.full(); ++j) {
      basis.try_admit(model.H.col(j).cwiseProduct(g));
    }
  }
  return Subspace{basis.matrix(), tol_rank};
}

Subspace controllable_subspace(const FiniteHMM& model, double tol_rank) {
  return closure_under_model_maps(model, Eigen::VectorXd::Ones(model.d),
                                  tol_rank);
}

ObservabilityReport is_observable(const FiniteHMM& model, double tol_rank) {
  ObservabilityReport report;
  report.basis = controllable_subspace(model, tol_rank);
  report.dim = report.basis.dim();
  report.observable = report.dim == model.d;
  return report;
}

Subspace linear_controllable_subspace(const Eigen::MatrixXd& A,
                                      const Eigen::MatrixXd& H,
                                      double tol_rank) {
  if (A.rows() != A.cols() || A.rows() != H.rows()) {
    fail(ErrorCode::ShapeMismatch, "Krylov span needs A square and H conformal");
  }
  const Eigen::Index d = A.rows();
  const Eigen::Index m = H.cols();
  Eigen::MatrixXd krylov(d, d * m);
  krylov.leftCols(m) = H;
  for (Eigen::Index p = 1; p < d; ++p) {
    krylov.middleCols(p * m, m) = A * krylov.middleCols((p - 1) * m, m);
  }
  return subspace_from_columns(krylov, tol_rank);
}

ObservableFunctions observable_functions(const FiniteHMM& model,
                                         double tol_rank, double tol_level) {
  ObservableFunctions out;
  out.levels = observation_levels(model.H, tol_level);
  const int d = model.d;
  const int r = out.levels.r();
  out.degenerate_levels =
      (r == 1 && model.A.cwiseAbs().maxCoeff() <= defaults::tol_model);

  // Indicator of each level.
  std::vector<Eigen::VectorXd> indicators(static_cast<std::size_t>(r),
                                          Eigen::VectorXd::Zero(d));
  for (int i = 0; i < d; ++i) {
    indicators[static_cast<std::size_t>(out.levels.assignment
                                            [static_cast<std::size_t>(i)])](i) =
        1.0;
  }

  ClosureBasis basis(d, tol_rank);
  for (int k = 0; k < r; ++k) basis.try_admit(indicators[static_cast<std::size_t>(k)]);

  int next = 0;
  while (next < basis.dim() && !basis.full()) {
    const Eigen::VectorXd f = basis.matrix().col(next++);
    const Eigen::VectorXd af = model.A * f;
    for (int k = 0; k < r && !basis.full(); ++k) {
      basis.try_admit(indicators[static_cast<std::size_t>(k)].cwiseProduct(af));
    }
  }
  out.space = Subspace{basis.matrix(), tol_rank};
  return out;
}

bool is_injective_observation(const Eigen::MatrixXd& H, double tol_level) {
  return observation_levels(H, tol_level).r() == H.rows();
}

bool vandermonde_full_rank_check(const Eigen::VectorXd& h_column,
                                 double tol_rank) {
  const Eigen::Index d = h_column.size();
  Eigen::MatrixXd vandermonde(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double power = 1.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      vandermonde(i, j) = power;
      power *= h_column(i);
    }
  }
  return subspace_from_columns(vandermonde, tol_rank).dim() == d;
}

}  // namespace hmmdual
