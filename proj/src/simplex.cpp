#include "riskrule/simplex.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "riskrule/errors.hpp"

namespace riskrule {
namespace {

constexpr double kTol = 1e-9;
constexpr double kPivotTol = 1e-11;
constexpr double kResidualTol = 1e-7;
constexpr double kInf = std::numeric_limits<double>::infinity();

// How an original variable maps onto nonnegative tableau columns.
struct VarMap {
  enum Kind { kShift, kMirror, kSplit } kind = kShift;
  int col = 0;       // x = lower + z  |  x = upper - z  |  x = z - z'
  int col2 = -1;     // z' for kSplit
  double base = 0.0;
};

// Tableau in canonical form: rows 0..m-1 are constraints with the rhs in the
// last column, row m is the reduced-cost row.
class Tableau {
 public:
  Tableau(Matrix t, std::vector<int> basis) : t_(std::move(t)), basis_(std::move(basis)) {}

  int rows() const { return static_cast<int>(basis_.size()); }
  int cols() const { return static_cast<int>(t_.cols()) - 1; }
  Matrix& data() { return t_; }
  std::vector<int>& basis() { return basis_; }
  int iterations() const { return iterations_; }

  void set_objective(const Vector& c) {
    const int m = rows();
    t_.row(m).setZero();
    t_.row(m).head(c.size()) = c.transpose();
    for (int i = 0; i < m; ++i) {
      const double cb = t_(m, basis_[i]);
      if (cb != 0.0) t_.row(m) -= cb * t_.row(i);
    }
  }

  void pivot(int r, int c) {
    const double p = t_(r, c);
    if (std::abs(p) < kPivotTol) {
      throw DegeneracyError(fmt::format(
          "simplex pivot {:.3e} below threshold at row {} column {}", p, r, c));
    }
    t_.row(r) /= p;
    for (int i = 0; i < t_.rows(); ++i) {
      if (i != r && t_(i, c) != 0.0) t_.row(i) -= t_(i, c) * t_.row(r);
    }
    basis_[r] = c;
    ++iterations_;
  }

  // Bland's rule over columns [0, usable). Returns false when unbounded.
  bool optimize(int usable, int max_iterations) {
    const int m = rows();
    const int rhs = cols();
    while (true) {
      int enter = -1;
      for (int j = 0; j < usable; ++j) {
        if (t_(m, j) < -kTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = kInf;
      for (int i = 0; i < m; ++i) {
        const double a = t_(i, enter);
        if (a > kTol) {
          const double ratio = t_(i, rhs) / a;
          if (leave < 0 || ratio < best - kTol ||
              (std::abs(ratio - best) <= kTol && basis_[i] < basis_[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      if (iterations_ >= max_iterations) {
        throw DegeneracyError(fmt::format("simplex iteration cap {} reached", max_iterations));
      }
      pivot(leave, enter);
    }
  }

 private:
  Matrix t_;
  std::vector<int> basis_;
  int iterations_ = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  const int n = static_cast<int>(lp.cost.size());
  const int m0 = static_cast<int>(lp.A.rows());
  if (lp.A.cols() != n || static_cast<int>(lp.sense.size()) != m0 || lp.rhs.size() != m0) {
    throw StructuralError("linear program dimensions are inconsistent");
  }
  const Vector lower = lp.lower.size() == 0 ? Vector::Zero(n) : lp.lower;
  const Vector upper = lp.upper.size() == 0 ? Vector::Constant(n, kInf) : lp.upper;
  if (lower.size() != n || upper.size() != n) {
    throw StructuralError("variable bounds have the wrong length");
  }
  if (!lp.cost.allFinite() || !lp.A.allFinite() || !lp.rhs.allFinite()) {
    throw DomainError("linear program data must be finite");
  }

  // Substitute every variable by nonnegative columns.
  std::vector<VarMap> map(static_cast<std::size_t>(n));
  int z = 0;
  std::vector<std::pair<int, double>> caps;  // column, width of a finite box
  for (int j = 0; j < n; ++j) {
    if (lower[j] > upper[j]) {
      return {LpStatus::kInfeasible, Vector(), 0.0, 0};
    }
    if (std::isfinite(lower[j])) {
      map[j] = {VarMap::kShift, z, -1, lower[j]};
      if (std::isfinite(upper[j])) caps.push_back({z, upper[j] - lower[j]});
      ++z;
    } else if (std::isfinite(upper[j])) {
      map[j] = {VarMap::kMirror, z++, -1, upper[j]};
    } else {
      map[j] = {VarMap::kSplit, z, z + 1, 0.0};
      z += 2;
    }
  }

  // Rows over z: original rows, then box caps z <= width.
  const int m = m0 + static_cast<int>(caps.size());
  Matrix Az = Matrix::Zero(m, z);
  Vector bz(m);
  std::vector<RowSense> sense(static_cast<std::size_t>(m), RowSense::kLessEqual);
  Vector cz = Vector::Zero(z);
  for (int j = 0; j < n; ++j) {
    const auto& v = map[j];
    const double s = v.kind == VarMap::kMirror ? -1.0 : 1.0;
    cz[v.col] += s * lp.cost[j];
    if (v.kind == VarMap::kSplit) cz[v.col2] -= lp.cost[j];
  }
  for (int i = 0; i < m0; ++i) {
    double shift = 0.0;
    for (int j = 0; j < n; ++j) {
      const double a = lp.A(i, j);
      if (a == 0.0) continue;
      const auto& v = map[j];
      Az(i, v.col) += v.kind == VarMap::kMirror ? -a : a;
      if (v.kind == VarMap::kSplit) Az(i, v.col2) -= a;
      shift += a * v.base;
    }
    bz[i] = lp.rhs[i] - shift;
    sense[i] = lp.sense[i];
  }
  for (std::size_t k = 0; k < caps.size(); ++k) {
    Az(m0 + static_cast<int>(k), caps[k].first) = 1.0;
    bz[m0 + static_cast<int>(k)] = caps[k].second;
  }

  // Nonnegative right-hand sides.
  for (int i = 0; i < m; ++i) {
    if (bz[i] < 0.0) {
      Az.row(i) *= -1.0;
      bz[i] = -bz[i];
      if (sense[i] == RowSense::kLessEqual) {
        sense[i] = RowSense::kGreaterEqual;
      } else if (sense[i] == RowSense::kGreaterEqual) {
        sense[i] = RowSense::kLessEqual;
      }
    }
  }

  // Columns: z, one slack or surplus per inequality, then artificials.
  int slack_count = 0;
  int art_count = 0;
  for (auto s : sense) {
    if (s != RowSense::kEqual) ++slack_count;
    if (s != RowSense::kLessEqual) ++art_count;
  }
  const int art_begin = z + slack_count;
  const int total = art_begin + art_count;
  Matrix t = Matrix::Zero(m + 1, total + 1);
  t.block(0, 0, m, z) = Az;
  t.block(0, total, m, 1) = bz;
  std::vector<int> basis(static_cast<std::size_t>(m));
  int slack = z;
  int art = art_begin;
  for (int i = 0; i < m; ++i) {
    if (sense[i] == RowSense::kLessEqual) {
      t(i, slack) = 1.0;
      basis[i] = slack++;
    } else {
      if (sense[i] == RowSense::kGreaterEqual) t(i, slack++) = -1.0;
      t(i, art) = 1.0;
      basis[i] = art++;
    }
  }
  const int max_iterations = 50 * (total + m) + 1000;
  Tableau tab(std::move(t), std::move(basis));

  if (art_count > 0) {
    Vector phase1 = Vector::Zero(total);
    phase1.tail(art_count).setOnes();
    tab.set_objective(phase1);
    tab.optimize(total, max_iterations);
    const double infeas = -tab.data()(m, total);
    if (infeas > kTol * std::max(1.0, bz.cwiseAbs().maxCoeff())) {
      return {LpStatus::kInfeasible, Vector(), 0.0, tab.iterations()};
    }
    // Drive remaining artificials out of the basis; rows without a usable
    // pivot are redundant and are zeroed.
    for (int i = 0; i < m; ++i) {
      if (tab.basis()[i] < art_begin) continue;
      int col = -1;
      for (int j = 0; j < art_begin; ++j) {
        if (std::abs(tab.data()(i, j)) > kTol) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        tab.pivot(i, col);
      } else {
        tab.data().row(i).setZero();
        tab.data()(i, tab.basis()[i]) = 1.0;
      }
    }
  }

  Vector phase2 = Vector::Zero(total);
  phase2.head(z) = cz;
  tab.set_objective(phase2);
  // Artificials stay out of phase 2.
  for (int i = 0; i < m; ++i) {
    if (tab.basis()[i] >= art_begin) tab.data()(m, tab.basis()[i]) = 0.0;
  }
  if (!tab.optimize(art_begin, max_iterations)) {
    return {LpStatus::kUnbounded, Vector(), -kInf, tab.iterations()};
  }

  Vector zval = Vector::Zero(total);
  for (int i = 0; i < m; ++i) zval[tab.basis()[i]] = tab.data()(i, total);
  LpSolution sol;
  sol.status = LpStatus::kOptimal;
  sol.iterations = tab.iterations();
  sol.x.resize(n);
  for (int j = 0; j < n; ++j) {
    const auto& v = map[j];
    switch (v.kind) {
      case VarMap::kShift:
        sol.x[j] = v.base + zval[v.col];
        break;
      case VarMap::kMirror:
        sol.x[j] = v.base - zval[v.col];
        break;
      case VarMap::kSplit:
        sol.x[j] = zval[v.col] - zval[v.col2];
        break;
    }
  }
  sol.objective = lp.cost.dot(sol.x);

  const Vector act = lp.A * sol.x;
  double worst = 0.0;
  for (int i = 0; i < m0; ++i) {
    const double d = act[i] - lp.rhs[i];
    switch (lp.sense[i]) {
      case RowSense::kLessEqual:
        worst = std::max(worst, d);
        break;
      case RowSense::kGreaterEqual:
        worst = std::max(worst, -d);
        break;
      case RowSense::kEqual:
        worst = std::max(worst, std::abs(d));
        break;
    }
  }
  for (int j = 0; j < n; ++j) {
    worst = std::max({worst, lower[j] - sol.x[j], sol.x[j] - upper[j]});
  }
  const double scale = 1.0 + lp.rhs.cwiseAbs().maxCoeff() + sol.x.cwiseAbs().maxCoeff();
  if (worst > kResidualTol * scale) {
    throw DegeneracyError(fmt::format(
        "simplex solution violates constraints by {:.3e} after {} pivots", worst,
        sol.iterations));
  }
  return sol;
}

SeparationResult l1_separation(std::span<const Vector> points,
                               std::span<const std::uint8_t> labels,
                               const MarginSpec& spec) {
  spec.validate();
  if (points.empty()) throw DomainError("separation needs at least one point");
  if (points.size() != labels.size()) {
    throw StructuralError("one label per point expected");
  }
  const int r = static_cast<int>(points[0].size());
  for (const auto& p : points) {
    if (p.size() != r) throw StructuralError("points differ in dimension");
  }
  bool any0 = false;
  bool any1 = false;
  for (auto y : labels) (y ? any1 : any0) = true;
  SeparationResult res;
  if (!any0 || !any1) {
    res.B_row = Vector::Zero(r);
    res.offset = any1 ? spec.epsilon : -spec.epsilon;
    res.status = LpStatus::kOptimal;
    return res;
  }

  // Columns: Bp (r), Bm (r), b (free).
  const int n = 2 * r + 1;
  const bool outer = spec.finite_delta();
  const int per_point = outer ? 2 : 1;
  const int m = per_point * static_cast<int>(points.size());
  LinearProgram lp;
  lp.cost = Vector::Zero(n);
  lp.cost.head(2 * r).setOnes();
  lp.A = Matrix::Zero(m, n);
  lp.rhs = Vector::Zero(m);
  lp.sense.resize(static_cast<std::size_t>(m));
  lp.lower = Vector::Zero(n);
  lp.upper = Vector::Constant(n, kInf);
  lp.lower[2 * r] = -kInf;
  int row = 0;
  for (std::size_t w = 0; w < points.size(); ++w) {
    const Vector& xi = points[w];
    const bool one = labels[w] != 0;
    auto fill = [&](RowSense s, double rhs) {
      lp.A.row(row).segment(0, r) = xi.transpose();
      lp.A.row(row).segment(r, r) = -xi.transpose();
      lp.A(row, 2 * r) = 1.0;
      lp.sense[row] = s;
      lp.rhs[row] = rhs;
      ++row;
    };
    if (one) {
      fill(RowSense::kGreaterEqual, spec.epsilon);
      if (outer) fill(RowSense::kLessEqual, spec.delta);
    } else {
      fill(RowSense::kLessEqual, -spec.epsilon);
      if (outer) fill(RowSense::kGreaterEqual, -spec.delta);
    }
  }
  const LpSolution sol = solve_lp(lp);
  res.status = sol.status;
  if (sol.status != LpStatus::kOptimal) return res;
  res.B_row = sol.x.segment(0, r) - sol.x.segment(r, r);
  res.offset = sol.x[2 * r];
  res.l1_norm = res.B_row.cwiseAbs().sum();
  return res;
}

}  // namespace riskrule
