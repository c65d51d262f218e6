#pragma once

// Instance builders and independent oracles shared by the test binaries. The
// oracles deliberately avoid the library's evaluation code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "riskrule/rng.hpp"
#include "riskrule/rules.hpp"
#include "riskrule/searchmodel.hpp"
#include "riskrule/simplex.hpp"

namespace testing {

using riskrule::Matrix;
using riskrule::Vector;

inline riskrule::SearchInstance random_instance(riskrule::Rng& rng, int rows, int cols,
                                                int horizon, int scenarios,
                                                riskrule::ParamMode mode, double tau,
                                                int targets = 2) {
  riskrule::Grid grid(rows, cols);
  riskrule::ScenarioTensor tensor(targets, scenarios, horizon);
  for (int k = 0; k < targets; ++k) {
    const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(grid.cell_count())));
    const std::vector<int> starts{start};
    tensor.set_target(k, riskrule::gen_scenarios(rng, grid, starts, horizon, scenarios, 0.6));
  }
  const double alpha = mode == riskrule::ParamMode::kA ? riskrule::kNominalRateModeA
                                                       : riskrule::kNominalRateModeB;
  return riskrule::SearchInstance(grid, std::move(tensor), alpha, mode, tau);
}

// Valid mode B point: probability vector minus the uniform one, scaled by s.
inline Vector random_simplex_point(riskrule::Rng& rng, int dim, double s = 1.0) {
  Vector u(dim);
  for (int k = 0; k < dim; ++k) u[k] = rng.uniform01() + 1e-3;
  u /= u.sum();
  return s * (u - Vector::Constant(dim, 1.0 / dim));
}

inline Vector random_param(riskrule::Rng& rng, const riskrule::SearchInstance& inst,
                           double scale = 0.05) {
  if (inst.mode() == riskrule::ParamMode::kB) {
    return random_simplex_point(rng, inst.scenario_count(), rng.uniform01());
  }
  Vector xi(inst.param_dim());
  xi[0] = rng.uniform(-scale, scale);
  for (int k = 1; k < xi.size(); ++k) xi[k] = rng.uniform(-scale, scale) / inst.scenario_count();
  return xi;
}

// Scenario weights and rate written out from the model definition.
inline std::vector<double> oracle_q(const riskrule::SearchInstance& inst, const Vector& xi) {
  const int n = inst.scenario_count();
  std::vector<double> q(static_cast<std::size_t>(n));
  if (inst.mode() == riskrule::ParamMode::kB) {
    for (int i = 0; i < n; ++i) q[i] = 1.0 / n + xi[i];
    return q;
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    q[i] = std::max(0.0, 1.0 / n + xi[i + 1]);
    total += q[i];
  }
  for (auto& v : q) v /= total;
  return q;
}

inline double oracle_alpha(const riskrule::SearchInstance& inst, const Vector& xi) {
  return inst.mode() == riskrule::ParamMode::kA ? inst.alpha_bar() + xi[0] : inst.alpha_bar();
}

// Product form: every co-located period multiplies survival by e^{-alpha}.
inline double oracle_nondetect(const riskrule::SearchInstance& inst, const Vector& xi,
                               const std::vector<int>& path, int target) {
  const auto q = oracle_q(inst, xi);
  const double miss = std::exp(-oracle_alpha(inst, xi));
  double total = 0.0;
  for (int i = 0; i < inst.scenario_count(); ++i) {
    double survive = 1.0;
    for (int t = 0; t < inst.horizon(); ++t) {
      if (inst.scenarios().cell(target, i, t) == path[t]) survive *= miss;
    }
    total += q[i] * survive;
  }
  return total;
}

// All paths, adjacency from row/column arithmetic.
inline std::vector<std::vector<int>> oracle_paths(int rows, int cols, int horizon) {
  std::vector<std::vector<int>> out;
  std::vector<int> path;
  std::function<void()> rec = [&] {
    if (static_cast<int>(path.size()) == horizon) {
      out.push_back(path);
      return;
    }
    for (int c = 0; c < rows * cols; ++c) {
      if (!path.empty()) {
        const int p = path.back();
        const int dr = std::abs(p / cols - c / cols);
        const int dc = std::abs(p % cols - c % cols);
        if (dr + dc > 1) continue;
      }
      path.push_back(c);
      rec();
      path.pop_back();
    }
  };
  rec();
  return out;
}

// Minimum of c'x over {A x (sense) rhs, x >= 0} by enumerating every basic
// solution. Returns +inf when no vertex is feasible.
inline double vertex_lp_min(const riskrule::LinearProgram& lp, double tol = 1e-9) {
  const int n = static_cast<int>(lp.cost.size());
  const int m = static_cast<int>(lp.A.rows());
  // Hyperplanes: rows, then x_j = 0.
  const int h = m + n;
  Matrix H = Matrix::Zero(h, n);
  Vector g = Vector::Zero(h);
  H.topRows(m) = lp.A;
  g.head(m) = lp.rhs;
  for (int j = 0; j < n; ++j) H(m + j, j) = 1.0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(n));
  std::function<void(int, int)> rec = [&](int from, int depth) {
    if (depth == n) {
      Matrix S(n, n);
      Vector s(n);
      for (int k = 0; k < n; ++k) {
        S.row(k) = H.row(pick[k]);
        s[k] = g[pick[k]];
      }
      Eigen::FullPivLU<Matrix> lu(S);
      if (lu.rank() < n) return;
      const Vector x = lu.solve(s);
      if ((x.array() < -tol).any()) return;
      const Vector act = lp.A * x;
      for (int i = 0; i < m; ++i) {
        const double d = act[i] - lp.rhs[i];
        if (lp.sense[i] == riskrule::RowSense::kLessEqual && d > tol) return;
        if (lp.sense[i] == riskrule::RowSense::kGreaterEqual && d < -tol) return;
        if (lp.sense[i] == riskrule::RowSense::kEqual && std::abs(d) > tol) return;
      }
      best = std::min(best, lp.cost.dot(x));
      return;
    }
    for (int k = from; k <= h - (n - depth); ++k) {
      pick[depth] = k;
      rec(k + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// min ||B||_1 over the margin system by enumerating points where r + 1
// linearly independent hyperplanes among {B_k = 0} and the row boundaries
// meet. Returns +inf if the system is infeasible.
inline double l1_separation_oracle(const std::vector<Vector>& points,
                                   const std::vector<std::uint8_t>& labels,
                                   const riskrule::MarginSpec& spec, double tol = 1e-9) {
  const int r = static_cast<int>(points[0].size());
  const int n = r + 1;
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (int k = 0; k < r; ++k) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(n);
    e[k] = 1.0;
    rows.push_back(e);
    rhs.push_back(0.0);
  }
  for (std::size_t w = 0; w < points.size(); ++w) {
    Eigen::RowVectorXd a(n);
    a.head(r) = points[w].transpose();
    a[r] = 1.0;
    const double sgn = labels[w] ? 1.0 : -1.0;
    rows.push_back(a);
    rhs.push_back(sgn * spec.epsilon);
    rows.push_back(a);
    rhs.push_back(sgn * spec.delta);
  }
  auto feasible = [&](const Vector& x) {
    for (std::size_t w = 0; w < points.size(); ++w) {
      const double v = points[w].dot(x.head(r)) + x[r];
      const double a = labels[w] ? v : -v;
      if (a < spec.epsilon - tol || a > spec.delta + tol) return false;
    }
    return true;
  };
  const int h = static_cast<int>(rows.size());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(n));
  std::function<void(int, int)> rec = [&](int from, int depth) {
    if (depth == n) {
      Matrix S(n, n);
      Vector s(n);
      for (int k = 0; k < n; ++k) {
        S.row(k) = rows[pick[k]];
        s[k] = rhs[pick[k]];
      }
      Eigen::FullPivLU<Matrix> lu(S);
      if (lu.rank() < n) return;
      const Vector x = lu.solve(s);
      if (feasible(x)) best = std::min(best, x.head(r).cwiseAbs().sum());
      return;
    }
    for (int k = from; k <= h - (n - depth); ++k) {
      pick[depth] = k;
      rec(k + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace testing
