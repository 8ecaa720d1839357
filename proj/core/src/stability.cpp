#include "hmmdual/stability.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "hmmdual/errors.hpp"
#include "hmmdual/parallel.hpp"
#include "hmmdual/simulate.hpp"
#include "hmmdual/stats.hpp"

namespace hmmdual {

namespace {

// Iterative Tarjan strongly connected components; components are emitted in
// reverse topological order.
struct Tarjan {
  const std::vector<std::vector<int>>& adj;
  std::vector<int> index, low, comp;
  std::vector<bool> on_stack;
  std::vector<int> stack;
  int counter = 0;
  int n_comp = 0;

  explicit Tarjan(const std::vector<std::vector<int>>& adjacency)
      : adj(adjacency),
        index(adjacency.size(), -1),
        low(adjacency.size(), 0),
        comp(adjacency.size(), -1),
        on_stack(adjacency.size(), false) {}

  void run() {
    for (std::size_t v = 0; v < adj.size(); ++v) {
      if (index[v] == -1) visit(static_cast<int>(v));
    }
  }

  void visit(int root) {
    struct Frame {
      int v;
      std::size_t edge;
    };
    std::vector<Frame> frames{{root, 0}};
    start(root);
    while (!frames.empty()) {
      Frame& f = frames.back();
      const auto& edges = adj[static_cast<std::size_t>(f.v)];
      if (f.edge < edges.size()) {
        const int w = edges[f.edge++];
        if (index[static_cast<std::size_t>(w)] == -1) {
          start(w);
          frames.push_back({w, 0});
        } else if (on_stack[static_cast<std::size_t>(w)]) {
          low[static_cast<std::size_t>(f.v)] =
              std::min(low[static_cast<std::size_t>(f.v)],
                       index[static_cast<std::size_t>(w)]);
        }
      } else {
        const int v = f.v;
        frames.pop_back();
        if (!frames.empty()) {
          const int parent = frames.back().v;
          low[static_cast<std::size_t>(parent)] =
              std::min(low[static_cast<std::size_t>(parent)],
                       low[static_cast<std::size_t>(v)]);
        }
        if (low[static_cast<std::size_t>(v)] ==
            index[static_cast<std::size_t>(v)]) {
          while (true) {
            const int w = stack.back();
            stack.pop_back();
            on_stack[static_cast<std::size_t>(w)] = false;
            comp[static_cast<std::size_t>(w)] = n_comp;
            if (w == v) break;
          }
          ++n_comp;
        }
      }
    }
  }

  void start(int v) {
    index[static_cast<std::size_t>(v)] = counter;
    low[static_cast<std::size_t>(v)] = counter;
    ++counter;
    stack.push_back(v);
    on_stack[static_cast<std::size_t>(v)] = true;
  }
};

}  // namespace

ErgodicDecomposition ergodic_decomposition(const FiniteHMM& model,
                                           double tol) {
  const int d = model.d;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i != j && model.A(i, j) > tol) {
        adj[static_cast<std::size_t>(i)].push_back(j);
      }
    }
  }
  Tarjan tarjan(adj);
  tarjan.run();

  // A component is closed when no edge leaves it.
  std::vector<bool> closed(static_cast<std::size_t>(tarjan.n_comp), true);
  for (int i = 0; i < d; ++i) {
    for (int j : adj[static_cast<std::size_t>(i)]) {
      if (tarjan.comp[static_cast<std::size_t>(i)] !=
          tarjan.comp[static_cast<std::size_t>(j)]) {
        closed[static_cast<std::size_t>(
            tarjan.comp[static_cast<std::size_t>(i)])] = false;
      }
    }
  }

  std::vector<std::vector<int>> members(
      static_cast<std::size_t>(tarjan.n_comp));
  for (int i = 0; i < d; ++i) {
    members[static_cast<std::size_t>(tarjan.comp[static_cast<std::size_t>(i)])]
        .push_back(i);
  }

  ErgodicDecomposition out;
  for (std::size_t c = 0; c < members.size(); ++c) {
    std::sort(members[c].begin(), members[c].end());
    if (closed[c]) {
      out.classes.push_back(members[c]);
    } else {
      out.transient.insert(out.transient.end(), members[c].begin(),
                           members[c].end());
    }
  }
  std::sort(out.classes.begin(), out.classes.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  std::sort(out.transient.begin(), out.transient.end());
  return out;
}

Subspace stable_null_space(const FiniteHMM& model, double tol_rank) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(model.A, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double s_max = s.size() > 0 ? s(0) : 0.0;
  if (s_max <= 0.0) {
    // A = 0: every function is invariant.
    return Subspace{Eigen::MatrixXd::Identity(model.d, model.d), tol_rank};
  }
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol_rank * s_max) ++rank;
  }
  return Subspace{svd.matrixV().rightCols(model.d - rank), tol_rank};
}

StabilityReport is_stabilizable(const FiniteHMM& model, double tol_rank) {
  StabilityReport report;
  report.S0 = stable_null_space(model, tol_rank);
  report.decomposition = ergodic_decomposition(model);
  report.has_transient = !report.decomposition.transient.empty();

  const Subspace c_space = controllable_subspace(model, tol_rank);
  report.dim_C = c_space.dim();

  const double inclusion_tol = 10.0 * tol_rank;
  bool inside = true;
  for (int j = 0; j < report.S0.dim(); ++j) {
    if (c_space.residual(report.S0.basis.col(j)).norm() > inclusion_tol) {
      inside = false;
      break;
    }
  }
  report.stabilizable = inside;
  report.detectable = inside;

  if (!report.has_transient) {
    for (const auto& cls : report.decomposition.classes) {
      Eigen::VectorXd indicator = Eigen::VectorXd::Zero(model.d);
      for (int i : cls) indicator(i) = 1.0;
      indicator.normalize();
      report.per_class_indicator_in_C.push_back(
          c_space.residual(indicator).norm() <= inclusion_tol);
    }
  }
  return report;
}

DecayCurve filter_stability_experiment(const FiniteHMM& model,
                                       const ProbabilityVector& mu,
                                       const ProbabilityVector& nu,
                                       const SimConfig& cfg_in) {
  if (mu.size() != model.d || nu.size() != model.d) {
    fail(ErrorCode::ShapeMismatch, "prior dimension does not match model");
  }
  for (int i = 0; i < model.d; ++i) {
    if (nu.values(i) <= 0.0 && mu.values(i) > 0.0) {
      fail(ErrorCode::AbsoluteContinuityViolation,
           "mu is not absolutely continuous w.r.t. nu at state " +
               std::to_string(i));
    }
  }
  SimConfig cfg = cfg_in;
  cfg.measure = MeasureKind::Pmu;
  cfg.prior = mu;
  cfg.validate();
  PropagatorEngine engine(model, cfg);
  const Grid grid = engine.grid();

  const SignedMeasureVector mu_measure = make_signed_measure(mu.values);
  const SignedMeasureVector nu_measure = make_signed_measure(nu.values);

  auto stats = parallel_path_reduce<ArrayStats>(
      cfg.n_paths, [&] { return ArrayStats(grid.n_nodes()); },
      [&](ArrayStats& acc, std::int64_t p) {
        const ZakaiPath path = engine.path(p);
        const FilterPath f_mu = wonham_normalize(zakai_from_prior(path, mu_measure));
        const FilterPath f_nu = wonham_normalize(zakai_from_prior(path, nu_measure));
        Eigen::ArrayXd tv(grid.n_nodes());
        for (int k = 0; k < grid.n_nodes(); ++k) {
          tv(k) = (f_mu.pi.row(k) - f_nu.pi.row(k)).lpNorm<1>();
        }
        acc.add(tv);
      },
      [](ArrayStats& total, const ArrayStats& part) { total.merge(part); });

  DecayCurve curve;
  curve.n_paths = cfg.n_paths;
  curve.t.resize(grid.n_nodes());
  for (int k = 0; k < grid.n_nodes(); ++k) curve.t(k) = grid.time(k);
  curve.mean_tv = stats.mean().matrix();
  curve.stderr_tv = stats.stderror().matrix();
  return curve;
}

}  // namespace hmmdual
