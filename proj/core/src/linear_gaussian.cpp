#include "hmmdual/linear_gaussian.hpp"

#include <Eigen/Dense>

#include "hmmdual/errors.hpp"
#include "hmmdual/grid.hpp"
#include "hmmdual/model.hpp"

namespace hmmdual {

namespace {

double trapz_weight(const Grid& grid, int k) {
  const double dt = grid.dt();
  return (k == 0 || k == grid.n_steps) ? 0.5 * dt : dt;
}

}  // namespace

LinearPair validate_linear_pair(LinearPair pair) {
  if (pair.A.rows() != pair.A.cols() || pair.A.rows() != pair.H.rows() ||
      pair.H.cols() < 1) {
    fail(ErrorCode::ShapeMismatch, "linear pair needs square A and conformal H");
  }
  if (!pair.A.allFinite() || !pair.H.allFinite()) {
    fail(ErrorCode::NonFinite, "linear pair matrices must be finite");
  }
  if (!(pair.T > 0.0)) {
    fail(ErrorCode::ConfigError, "horizon must be positive");
  }
  return pair;
}

Eigen::VectorXd lg_apply_L(const LinearPair& pair,
                           const Eigen::MatrixXd& u_nodes, double dt) {
  const Grid grid = make_grid(pair.T, dt);
  if (u_nodes.rows() != grid.n_nodes() || u_nodes.cols() != pair.H.cols()) {
    fail(ErrorCode::ShapeMismatch, "control table does not match grid");
  }
  const Eigen::MatrixXd step = matrix_exponential(pair.A * grid.dt());
  Eigen::MatrixXd exp_at = Eigen::MatrixXd::Identity(pair.A.rows(), pair.A.cols());
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(pair.A.rows());
  for (int k = 0; k < grid.n_nodes(); ++k) {
    y0.noalias() +=
        trapz_weight(grid, k) * (exp_at * (pair.H * u_nodes.row(k).transpose()));
    if (k + 1 < grid.n_nodes()) exp_at = step * exp_at;
  }
  return y0;
}

Eigen::MatrixXd lg_apply_L_dagger(const LinearPair& pair,
                                  const Eigen::VectorXd& xi, double dt) {
  if (xi.size() != pair.A.rows()) {
    fail(ErrorCode::ShapeMismatch, "xi dimension does not match pair");
  }
  const Grid grid = make_grid(pair.T, dt);
  const Eigen::MatrixXd step = matrix_exponential(pair.A.transpose() * grid.dt());
  Eigen::MatrixXd z(grid.n_nodes(), pair.H.cols());
  Eigen::VectorXd state = xi;
  for (int k = 0; k < grid.n_nodes(); ++k) {
    z.row(k) = (pair.H.transpose() * state).transpose();
    if (k + 1 < grid.n_nodes()) state = step * state;
  }
  return z;
}

Eigen::MatrixXd lg_gramian(const LinearPair& pair, double dt) {
  const Grid grid = make_grid(pair.T, dt);
  const Eigen::MatrixXd step = matrix_exponential(pair.A * grid.dt());
  Eigen::MatrixXd exp_at = Eigen::MatrixXd::Identity(pair.A.rows(), pair.A.cols());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(pair.A.rows(), pair.A.rows());
  for (int k = 0; k < grid.n_nodes(); ++k) {
    const Eigen::MatrixXd eh = exp_at * pair.H;
    gram.noalias() += trapz_weight(grid, k) * (eh * eh.transpose());
    if (k + 1 < grid.n_nodes()) exp_at = step * exp_at;
  }
  return 0.5 * (gram + gram.transpose());
}

ClosedRangeReport lg_closed_range_check(const LinearPair& pair, double dt,
                                        double tol_rank) {
  ClosedRangeReport report;
  const Eigen::Index d = pair.A.rows();

  // Route 1: range of the controllability gramian; complement from the
  // same decomposition.
  const Eigen::MatrixXd w_ctrl = lg_gramian(pair, dt);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w_ctrl,
                                        Eigen::ComputeFullU);
  const double s_max = svd.singularValues().size() > 0
                           ? svd.singularValues()(0)
                           : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (s_max > 0.0 && svd.singularValues()(i) > tol_rank * s_max) ++rank;
  }
  report.rank = rank;
  report.range_perp = Subspace{svd.matrixU().rightCols(d - rank), tol_rank};

  // Route 2: null space of the observability gramian of (A^T, H^T),
  // assembled by sampling L^dagger on the canonical basis.
  const Grid grid = make_grid(pair.T, dt);
  const Eigen::MatrixXd step = matrix_exponential(pair.A.transpose() * grid.dt());
  Eigen::MatrixXd exp_att = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd w_obs = Eigen::MatrixXd::Zero(d, d);
  for (int k = 0; k < grid.n_nodes(); ++k) {
    const Eigen::MatrixXd g = pair.H.transpose() * exp_att;  // m x d
    w_obs.noalias() += trapz_weight(grid, k) * (g.transpose() * g);
    if (k + 1 < grid.n_nodes()) exp_att = step * exp_att;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd_obs(w_obs, Eigen::ComputeFullV);
  const double so_max = svd_obs.singularValues().size() > 0
                            ? svd_obs.singularValues()(0)
                            : 0.0;
  int rank_obs = 0;
  for (Eigen::Index i = 0; i < svd_obs.singularValues().size(); ++i) {
    if (so_max > 0.0 && svd_obs.singularValues()(i) > tol_rank * so_max) {
      ++rank_obs;
    }
  }
  report.null_ldagger =
      Subspace{svd_obs.matrixV().rightCols(d - rank_obs), tol_rank};

  report.max_angle = max_principal_angle(report.range_perp, report.null_ldagger);
  return report;
}

}  // namespace hmmdual
