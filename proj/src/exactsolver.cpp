#include "riskrule/exactsolver.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "riskrule/errors.hpp"

namespace riskrule {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shared state for branch-and-bound and enumeration.
class PathSearch {
 public:
  PathSearch(const SearchInstance& inst, const Vector& xi, Problem problem)
      : inst_(inst),
        problem_(problem),
        q_(qvec(inst, xi)),
        alpha_(detection_rate(inst, xi)),
        horizon_(inst.horizon()),
        scenarios_(inst.scenario_count()),
        path_(static_cast<std::size_t>(horizon_), -1),
        counts1_(static_cast<std::size_t>(horizon_ + 1),
                 std::vector<int>(static_cast<std::size_t>(scenarios_), 0)),
        scratch_(static_cast<std::size_t>(scenarios_), 0) {
    if (problem_ == Problem::kSP2) {
      if (inst.target_count() < 2) throw StructuralError("SP2 needs a second target");
      counts2_ = counts1_;
    }
  }

  // Offer a complete path (already in path_) with counts at depth horizon_.
  void offer_leaf(bool from_search) {
    const double value = nondetect_from_counts(q_, alpha_, counts1_[horizon_]);
    if (problem_ == Problem::kSP2 &&
        nondetect_from_counts(q_, alpha_, counts2_[horizon_]) > inst_.tau()) {
      return;
    }
    if (value < best_ || (value == best_ && !best_from_search_)) {
      best_ = value;
      best_path_ = path_;
      best_from_search_ = from_search;
    }
  }

  // Place cell c at period t, extending counts from depth t to t + 1.
  void place(int t, int c) {
    path_[t] = c;
    const auto& z = inst_.scenarios();
    for (int i = 0; i < scenarios_; ++i) {
      counts1_[t + 1][i] = counts1_[t][i] + (z.cell(0, i, t) == c);
    }
    if (problem_ == Problem::kSP2) {
      for (int i = 0; i < scenarios_; ++i) {
        counts2_[t + 1][i] = counts2_[t][i] + (z.cell(1, i, t) == c);
      }
    }
  }

  // Optimistic nondetection of `target` over completions of the first
  // `depth` periods: each remaining period detects whenever the target's cell
  // is still reachable from the last placed cell.
  double completion_bound(int depth, int target) {
    const auto& counts = target == 0 ? counts1_[depth] : counts2_[depth];
    const auto& z = inst_.scenarios();
    for (int i = 0; i < scenarios_; ++i) {
      int extra = 0;
      if (depth == 0) {
        extra = horizon_;
      } else {
        const int here = path_[depth - 1];
        for (int tp = depth; tp < horizon_; ++tp) {
          extra += inst_.grid().manhattan(here, z.cell(target, i, tp)) <= tp - depth + 1;
        }
      }
      scratch_[i] = counts[i] + extra;
    }
    return nondetect_from_counts(q_, alpha_, scratch_);
  }

  void set_incumbent_from(const SearchPath& path) {
    if (!path_feasible(inst_, path)) return;
    for (int t = 0; t < horizon_; ++t) place(t, path[t]);
    offer_leaf(false);
  }

  // Dive that always moves to the cell with the largest probability of
  // detecting target 1 for the first time in that period.
  void greedy_dive() {
    const auto& z = inst_.scenarios();
    const int cells = inst_.cell_count();
    std::vector<double> gain(static_cast<std::size_t>(cells));
    for (int t = 0; t < horizon_; ++t) {
      std::fill(gain.begin(), gain.end(), 0.0);
      for (int i = 0; i < scenarios_; ++i) {
        gain[z.cell(0, i, t)] +=
            q_[i] * std::exp(-alpha_ * static_cast<double>(counts1_[t][i]));
      }
      int pick = -1;
      auto consider = [&](int c) {
        if (pick < 0 || gain[c] > gain[pick]) pick = c;
      };
      if (t == 0) {
        for (int c = 0; c < cells; ++c) consider(c);
      } else {
        for (int c : inst_.grid().neighbors(path_[t - 1])) consider(c);
      }
      place(t, pick);
    }
    offer_leaf(false);
  }

  const SearchInstance& inst_;
  Problem problem_;
  std::vector<double> q_;
  double alpha_;
  int horizon_;
  int scenarios_;
  SearchPath path_;
  std::vector<std::vector<int>> counts1_;
  std::vector<std::vector<int>> counts2_;
  std::vector<int> scratch_;

  double best_ = kInf;
  bool best_from_search_ = false;
  SearchPath best_path_;
  std::uint64_t nodes_ = 0;
};

class BranchAndBound : public PathSearch {
 public:
  BranchAndBound(const SearchInstance& inst, const Vector& xi, Problem problem,
                 const SolveOptions& options)
      : PathSearch(inst, xi, problem), options_(options) {}

  SolveResult run() {
    if (options_.warm_start) set_incumbent_from(*options_.warm_start);
    greedy_dive();
    visit(0);
    SolveResult r;
    r.nodes_explored = nodes_;
    if (best_ == kInf) {
      r.status = SolveStatus::kInfeasible;
      r.value = kInf;
      r.lower_bound = kInf;
      return r;
    }
    r.path = best_path_;
    r.value = best_;
    r.lower_bound = std::min(best_, min_pruned_);
    r.status = r.lower_bound == r.value ? SolveStatus::kOptimal : SolveStatus::kFeasible;
    return r;
  }

 private:
  // `depth` periods are placed.
  void visit(int depth) {
    ++nodes_;
    if (depth == horizon_) {
      if (options_.observer) {
        options_.observer({std::span<const int>(path_.data(), depth),
                           nondetect_from_counts(q_, alpha_, counts1_[depth])});
      }
      offer_leaf(true);
      return;
    }
    const double bound = completion_bound(depth, 0);
    if (options_.observer) {
      options_.observer({std::span<const int>(path_.data(), depth), bound});
    }
    if (bound > best_ - options_.abs_tol) {
      min_pruned_ = std::min(min_pruned_, bound);
      return;
    }
    if (problem_ == Problem::kSP2 && completion_bound(depth, 1) > inst_.tau()) return;
    if (depth == 0) {
      for (int c = 0; c < inst_.cell_count(); ++c) {
        place(0, c);
        visit(1);
      }
    } else {
      const auto& next = inst_.grid().neighbors(path_[depth - 1]);
      for (int c : next) {
        place(depth, c);
        visit(depth + 1);
      }
    }
  }

  const SolveOptions& options_;
  double min_pruned_ = kInf;
};

class Enumerator : public PathSearch {
 public:
  using PathSearch::PathSearch;

  SolveResult run() {
    visit(0);
    SolveResult r;
    r.nodes_explored = nodes_;
    if (best_ == kInf) {
      r.status = SolveStatus::kInfeasible;
      r.value = kInf;
      r.lower_bound = kInf;
      return r;
    }
    r.path = best_path_;
    r.value = best_;
    r.lower_bound = best_;
    r.status = SolveStatus::kOptimal;
    return r;
  }

 private:
  void visit(int depth) {
    if (depth == horizon_) {
      ++nodes_;
      offer_leaf(true);
      return;
    }
    if (depth == 0) {
      for (int c = 0; c < inst_.cell_count(); ++c) {
        place(0, c);
        visit(1);
      }
      return;
    }
    for (int c : inst_.grid().neighbors(path_[depth - 1])) {
      place(depth, c);
      visit(depth + 1);
    }
  }
};

std::string var_y(int c, int t) { return fmt::format("y_{}_{}", c + 1, t + 1); }

std::string var_w(int i, int j, int k) {
  return fmt::format("w_{}_{}_{}", i + 1, j, k + 1);
}

std::string suffix(const std::string& base, int omega) {
  return fmt::format("{}_o{}", base, omega + 1);
}

// Path, linearization and (for SP2) threshold rows for one parameter value.
// Appends to `model`; `tag` renames variables and rows for per-point copies.
void add_point_block(LpModel& model, const SearchInstance& inst, const Vector& xi,
                     Problem problem, int omega) {
  auto name = [&](const std::string& base) {
    return omega < 0 ? base : suffix(base, omega);
  };
  const int cells = inst.cell_count();
  const int horizon = inst.horizon();
  const int count = inst.scenario_count();
  const int targets = problem == Problem::kSP2 ? 2 : 1;
  if (inst.target_count() < targets) throw StructuralError("SP2 needs a second target");
  const auto q = qvec(inst, xi);
  const double alpha = detection_rate(inst, xi);

  if (problem == Problem::kSP2) {
    LpRow row{name("tau"), {}, RowSense::kLessEqual, inst.tau()};
    for (int i = 0; i < count; ++i) {
      for (int j = 0; j <= horizon; ++j) {
        row.terms.push_back(
            {name(var_w(i, j, 1)), q[i] * std::exp(-static_cast<double>(j) * alpha)});
      }
    }
    model.rows.push_back(std::move(row));
  }
  for (int t = 0; t < horizon; ++t) {
    LpRow row{name(fmt::format("one_{}", t + 1)), {}, RowSense::kEqual, 1.0};
    for (int c = 0; c < cells; ++c) row.terms.push_back({name(var_y(c, t)), 1.0});
    model.rows.push_back(std::move(row));
  }
  for (int t = 1; t < horizon; ++t) {
    for (int c = 0; c < cells; ++c) {
      LpRow row{name(fmt::format("move_{}_{}", c + 1, t + 1)), {},
                RowSense::kGreaterEqual, 0.0};
      for (int n : inst.grid().neighbors(c)) {
        row.terms.push_back({name(var_y(n, t - 1)), 1.0});
      }
      row.terms.push_back({name(var_y(c, t)), -1.0});
      model.rows.push_back(std::move(row));
    }
  }
  const auto& z = inst.scenarios();
  for (int k = 0; k < targets; ++k) {
    for (int i = 0; i < count; ++i) {
      LpRow link{name(fmt::format("link_{}_{}", i + 1, k + 1)), {}, RowSense::kEqual, 0.0};
      for (int j = 1; j <= horizon; ++j) {
        link.terms.push_back({name(var_w(i, j, k)), static_cast<double>(j)});
      }
      for (int t = 0; t < horizon; ++t) {
        link.terms.push_back({name(var_y(z.cell(k, i, t), t)), -1.0});
      }
      model.rows.push_back(std::move(link));
      LpRow pick{name(fmt::format("pick_{}_{}", i + 1, k + 1)), {}, RowSense::kEqual, 1.0};
      for (int j = 0; j <= horizon; ++j) pick.terms.push_back({name(var_w(i, j, k)), 1.0});
      model.rows.push_back(std::move(pick));
    }
  }
  for (int t = 0; t < horizon; ++t) {
    for (int c = 0; c < cells; ++c) model.binaries.push_back(name(var_y(c, t)));
  }
  for (int k = 0; k < targets; ++k) {
    for (int i = 0; i < count; ++i) {
      for (int j = 0; j <= horizon; ++j) model.binaries.push_back(name(var_w(i, j, k)));
    }
  }
}

// sum_i q_i sum_j e^{-j alpha} w_{i,j,1} scaled by `scale`.
std::vector<LpTerm> target1_terms(const SearchInstance& inst, const Vector& xi,
                                  int omega, double scale) {
  const auto q = qvec(inst, xi);
  const double alpha = detection_rate(inst, xi);
  std::vector<LpTerm> terms;
  for (int i = 0; i < inst.scenario_count(); ++i) {
    for (int j = 0; j <= inst.horizon(); ++j) {
      std::string v = var_w(i, j, 0);
      if (omega >= 0) v = suffix(v, omega);
      terms.push_back({std::move(v), scale * q[i] * std::exp(-static_cast<double>(j) * alpha)});
    }
  }
  return terms;
}

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kFeasible:
      return "feasible";
    case SolveStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

SolveResult solve_exact(const SearchInstance& inst, const Vector& xi,
                        Problem problem, const SolveOptions& options) {
  if (options.abs_tol < 0.0) throw DomainError("tolerance must be nonnegative");
  return BranchAndBound(inst, xi, problem, options).run();
}

std::uint64_t count_paths(const SearchInstance& inst) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  const int cells = inst.cell_count();
  std::vector<std::uint64_t> ways(static_cast<std::size_t>(cells), 1);
  for (int t = 1; t < inst.horizon(); ++t) {
    std::vector<std::uint64_t> next(static_cast<std::size_t>(cells), 0);
    for (int c = 0; c < cells; ++c) {
      for (int n : inst.grid().neighbors(c)) {
        next[n] = ways[c] > kMax - next[n] ? kMax : next[n] + ways[c];
      }
    }
    ways = std::move(next);
  }
  std::uint64_t total = 0;
  for (auto w : ways) total = w > kMax - total ? kMax : total + w;
  return total;
}

SolveResult brute_force(const SearchInstance& inst, const Vector& xi,
                        Problem problem, std::uint64_t cap) {
  const std::uint64_t n = count_paths(inst);
  if (n > cap) {
    throw SizeError(fmt::format("{} paths exceed the enumeration cap {}", n, cap));
  }
  return Enumerator(inst, xi, problem).run();
}

LpModel build_milp(const SearchInstance& inst, const Vector& xi, Problem problem) {
  LpModel model;
  model.objective = target1_terms(inst, xi, -1, 1.0);
  add_point_block(model, inst, xi, problem, -1);
  return model;
}

std::string emit_milp(const SearchInstance& inst, const Vector& xi, Problem problem) {
  return write_lp(build_milp(inst, xi, problem));
}

LpAssignment milp_assignment(const SearchInstance& inst, const SearchPath& path,
                             Problem problem) {
  LpAssignment x;
  for (int t = 0; t < inst.horizon(); ++t) {
    for (int c = 0; c < inst.cell_count(); ++c) x[var_y(c, t)] = path[t] == c ? 1.0 : 0.0;
  }
  const int targets = problem == Problem::kSP2 ? 2 : 1;
  for (int k = 0; k < targets; ++k) {
    const auto counts = detection_counts(inst, path, k);
    for (int i = 0; i < inst.scenario_count(); ++i) {
      for (int j = 0; j <= inst.horizon(); ++j) {
        x[var_w(i, j, k)] = counts[i] == j ? 1.0 : 0.0;
      }
    }
  }
  return x;
}

LpModel build_training_milp(const SearchInstance& inst,
                            std::span<const Vector> training,
                            const TrainingMilpConfig& config) {
  if (training.empty()) throw DomainError("no training points");
  config.margin.validate();
  if (!config.margin.finite_delta()) {
    throw DomainError("training MILP needs a finite delta");
  }
  if (config.theta < 0.0) throw DomainError("theta must be nonnegative");
  config.risk0.validate();
  if (config.risk0.kind == RiskKind::kQuantile) {
    throw DomainError("quantile objectives have no linear training formulation");
  }
  const int points = static_cast<int>(training.size());
  std::vector<double> weights = config.weights;
  if (weights.empty()) weights.assign(training.size(), 1.0 / points);
  if (static_cast<int>(weights.size()) != points) {
    throw StructuralError("one weight per training point expected");
  }

  const int cells = inst.cell_count();
  const int horizon = inst.horizon();
  const int r = inst.param_dim();
  const double eps = config.margin.epsilon;
  const double delta = config.margin.delta;
  const bool split = config.theta > 0.0;

  LpModel model;
  const RiskKind kind = config.risk0.kind;
  if (kind == RiskKind::kWorstCase || kind == RiskKind::kSuperquantile) {
    model.objective.push_back({"gamma", 1.0});
    model.bounds.push_back({"gamma", -std::numeric_limits<double>::infinity(),
                            std::numeric_limits<double>::infinity()});
  }
  for (int w = 0; w < points; ++w) {
    const Vector& xi = training[w];
    validate_parameter(inst, xi);
    if (kind == RiskKind::kExpectation) {
      auto terms = target1_terms(inst, xi, w, weights[w]);
      model.objective.insert(model.objective.end(), terms.begin(), terms.end());
    } else {
      LpRow row{suffix("epi", w), target1_terms(inst, xi, w, 1.0), RowSense::kLessEqual, 0.0};
      row.terms.push_back({"gamma", -1.0});
      if (kind == RiskKind::kSuperquantile) {
        const std::string u = suffix("u", w);
        row.terms.push_back({u, -1.0});
        model.objective.push_back({u, weights[w] / (1.0 - config.risk0.alpha)});
      }
      model.rows.push_back(std::move(row));
    }
  }
  // Regularizer columns.
  auto coef_names = [&](int c, int t, int l) {
    const std::string tail = fmt::format("{}_{}_{}", c + 1, t + 1, l + 1);
    return std::pair{"Bp_" + tail, "Bm_" + tail};
  };
  if (split) {
    for (int t = 0; t < horizon; ++t) {
      for (int c = 0; c < cells; ++c) {
        for (int l = 0; l < r; ++l) {
          auto [p, m] = coef_names(c, t, l);
          model.objective.push_back({p, config.theta});
          model.objective.push_back({m, config.theta});
        }
      }
    }
  }
  for (int w = 0; w < points; ++w) {
    add_point_block(model, inst, training[w], config.problem, w);
    const Vector& xi = training[w];
    for (int t = 0; t < horizon; ++t) {
      for (int c = 0; c < cells; ++c) {
        std::vector<LpTerm> g;
        for (int l = 0; l < r; ++l) {
          if (split) {
            auto [p, m] = coef_names(c, t, l);
            g.push_back({p, xi[l]});
            g.push_back({m, -xi[l]});
          } else {
            g.push_back({fmt::format("B_{}_{}_{}", c + 1, t + 1, l + 1), xi[l]});
          }
        }
        g.push_back({fmt::format("b_{}_{}", c + 1, t + 1), 1.0});
        const std::string y = suffix(var_y(c, t), w);
        LpRow lo{suffix(fmt::format("lo_{}_{}", c + 1, t + 1), w), g,
                 RowSense::kGreaterEqual, -delta};
        lo.terms.push_back({y, -(delta + eps)});
        LpRow hi{suffix(fmt::format("hi_{}_{}", c + 1, t + 1), w), std::move(g),
                 RowSense::kLessEqual, -eps};
        hi.terms.push_back({y, -(delta + eps)});
        model.rows.push_back(std::move(lo));
        model.rows.push_back(std::move(hi));
      }
    }
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (int t = 0; t < horizon; ++t) {
    for (int c = 0; c < cells; ++c) {
      if (!split) {
        for (int l = 0; l < r; ++l) {
          model.bounds.push_back({fmt::format("B_{}_{}_{}", c + 1, t + 1, l + 1), -kInf, kInf});
        }
      }
      model.bounds.push_back({fmt::format("b_{}_{}", c + 1, t + 1), -kInf, kInf});
    }
  }
  return model;
}

std::string emit_training_milp(const SearchInstance& inst,
                               std::span<const Vector> training,
                               const TrainingMilpConfig& config) {
  return write_lp(build_training_milp(inst, training, config));
}

std::string parameter_hash(const Vector& xi) {
  std::uint64_t h = 14695981039346656037ull;
  for (Eigen::Index k = 0; k < xi.size(); ++k) {
    unsigned char bytes[sizeof(double)];
    const double v = xi[k];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ull;
    }
  }
  return fmt::format("{:016x}", h);
}

std::string milp_file_name(const std::string& instance_name, Problem problem,
                           const Vector& xi) {
  return fmt::format("{}_{}_{}.lp", instance_name, to_string(problem), parameter_hash(xi));
}

}  // namespace riskrule
