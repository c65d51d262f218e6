#include "riskrule/train.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>
#include <memory>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "riskrule/errors.hpp"
#include "riskrule/parallel.hpp"
#include "riskrule/simplex.hpp"

namespace riskrule {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::shared_ptr<const FiniteProbSpace> make_space(std::span<const double> weights,
                                                  std::size_t n) {
  if (weights.empty()) {
    return std::make_shared<const FiniteProbSpace>(FiniteProbSpace::uniform(n));
  }
  if (weights.size() != n) throw StructuralError("one weight per training point expected");
  return std::make_shared<const FiniteProbSpace>(
      std::vector<double>(weights.begin(), weights.end()));
}

double risk_of(const RiskSpec& spec, const std::shared_ptr<const FiniteProbSpace>& space,
               std::vector<double> values) {
  return evaluate_risk(spec, DiscreteRV(space, std::move(values)));
}

// Decision-level checks shared by every rule class.
void check_decision(const SearchInstance& inst, const Vector& xi, const Decision& y,
                    Problem problem, int omega, ObjectiveReport& report) {
  if (!path_feasible(inst, y)) {
    report.violations.push_back({omega, "path"});
  } else if (problem == Problem::kSP2 && nondetect_prob(inst, xi, y, 1) > inst.tau()) {
    report.violations.push_back({omega, "tau"});
  }
}

// Labels of coordinate i across training points.
std::vector<std::uint8_t> labels_of(const std::vector<Decision>& decisions, int i) {
  std::vector<std::uint8_t> labels(decisions.size());
  for (std::size_t w = 0; w < decisions.size(); ++w) labels[w] = decisions[w][i];
  return labels;
}

struct Fit {
  std::vector<SeparationResult> rows;
  double regularizer = 0.0;
  bool partial = false;
};

Fit fit_rows(std::span<const Vector> training, const std::vector<Decision>& decisions,
             const MarginSpec& margin, int m, unsigned jobs) {
  Fit fit;
  fit.rows.resize(static_cast<std::size_t>(m));
  parallel_for(static_cast<std::size_t>(m), jobs, [&](std::size_t i) {
    const auto labels = labels_of(decisions, static_cast<int>(i));
    fit.rows[i] = l1_separation(training, labels, margin);
  });
  for (const auto& row : fit.rows) {
    if (row.status == LpStatus::kOptimal) {
      fit.regularizer += row.l1_norm;
    } else {
      fit.partial = true;
    }
  }
  return fit;
}

// The separation LP is exact only up to rounding, so a training point can
// land a few ulps inside the margin band. Rescale such rows until every
// training point evaluates into the margin set through AffineRule::evaluate.
void snap_into_margin(AffineRule& rule, std::span<const Vector> training,
                      const std::vector<Decision>& decisions, const MarginSpec& margin,
                      const std::vector<bool>& fitted) {
  constexpr int kMaxRounds = 32;
  constexpr double kNudge = 4.0 * std::numeric_limits<double>::epsilon();
  for (int round = 0; round < kMaxRounds; ++round) {
    std::vector<Vector> g;
    g.reserve(training.size());
    for (const auto& xi : training) g.push_back(rule.evaluate(xi));
    bool clean = true;
    for (int i = 0; i < rule.rows(); ++i) {
      if (!fitted[static_cast<std::size_t>(i)]) continue;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t w = 0; w < training.size(); ++w) {
        const double a = decisions[w][i] ? g[w][i] : -g[w][i];
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
      if (lo >= margin.epsilon && hi <= margin.delta) continue;
      // Sign errors or a band too narrow to rescale into are left for the
      // caller's margin check to report.
      if (lo <= 0.0) continue;
      const double f = lo < margin.epsilon ? margin.epsilon / lo * (1.0 + kNudge)
                                           : margin.delta / hi * (1.0 - kNudge);
      if (lo * f < margin.epsilon * (1.0 - 1e-9) || hi * f > margin.delta * (1.0 + 1e-9)) {
        continue;
      }
      clean = false;
      rule.B().row(i) *= f;
      rule.b()[i] *= f;
    }
    if (clean) return;
  }
}

}  // namespace

ObjectiveReport training_objective(const AffineRule& rule,
                                   std::span<const Vector> training,
                                   const SearchInstance& inst,
                                   const TrainingConfig& config, Problem problem) {
  if (rule.rows() != inst.decision_dim() || rule.cols() != inst.param_dim()) {
    throw StructuralError(fmt::format("rule shape {}x{} does not fit the instance ({}x{})",
                                      rule.rows(), rule.cols(), inst.decision_dim(),
                                      inst.param_dim()));
  }
  ObjectiveReport report;
  for (std::size_t w = 0; w < training.size(); ++w) {
    const auto out = apply(rule, training[w]);
    const int omega = static_cast<int>(w);
    if (!in_margin_set(out.g, config.margin)) report.violations.push_back({omega, "margin"});
    check_decision(inst, training[w], out.y, problem, omega, report);
    report.per_omega.push_back(nondetect_prob(inst, training[w], out.y, 0));
  }
  const auto space = make_space(config.weights, training.size());
  report.value = risk_of(config.risk0, space, report.per_omega) +
                 config.theta * rule.l1_regularizer();
  report.feasible = report.violations.empty();
  return report;
}

ObjectiveReport training_objective(const ConstantRule& rule,
                                   std::span<const Vector> training,
                                   const SearchInstance& inst,
                                   const TrainingConfig& config, Problem problem) {
  return training_objective(rule.as_affine(inst.param_dim()), training, inst, config,
                            problem);
}

ObjectiveReport training_objective(const TabularRule& rule,
                                   std::span<const Vector> training,
                                   const SearchInstance& inst,
                                   const TrainingConfig& config, Problem problem) {
  if (rule.size() != training.size()) {
    throw StructuralError("tabular rule needs one entry per training point");
  }
  ObjectiveReport report;
  for (std::size_t w = 0; w < training.size(); ++w) {
    const Decision& y = rule.at(w);
    check_decision(inst, training[w], y, problem, static_cast<int>(w), report);
    report.per_omega.push_back(nondetect_prob(inst, training[w], y, 0));
  }
  const auto space = make_space(config.weights, training.size());
  report.value = risk_of(config.risk0, space, report.per_omega);
  report.feasible = report.violations.empty();
  return report;
}

int affine_rank(std::span<const Vector> training) {
  if (training.empty()) return 0;
  const auto n = static_cast<Eigen::Index>(training.size());
  const auto r = training[0].size();
  Matrix M(n, r + 1);
  for (Eigen::Index w = 0; w < n; ++w) {
    M.row(w).head(r) = training[w].transpose();
    M(w, r) = 1.0;
  }
  Eigen::JacobiSVD<Matrix> svd(M);
  const Vector& s = svd.singularValues();
  return static_cast<int>((s.array() > 1e-10).count());
}

DecompResult decompose(const SearchInstance& inst, std::span<const Vector> training,
                       const TrainingConfig& config, Problem problem) {
  if (training.empty()) throw DomainError("no training points");
  config.margin.validate();
  if (!config.margin.finite_delta()) throw DomainError("decomposition needs a finite delta");
  if (config.theta < 0.0) throw DomainError("theta must be nonnegative");
  if (config.step1_tol < 0.0) throw DomainError("step-1 tolerance must be nonnegative");
  config.risk0.validate();
  for (const auto& xi : training) validate_parameter(inst, xi);
  const std::size_t n = training.size();
  if (config.require_independence) {
    const int rank = affine_rank(training);
    if (rank < static_cast<int>(n)) {
      throw PreconditionError(fmt::format(
          "training points are affinely dependent (rank {} of {})", rank, n));
    }
  }
  const auto space = make_space(config.weights, n);

  DecompResult res;
  res.training.assign(training.begin(), training.end());
  res.risk0 = config.risk0;
  res.margin = config.margin;
  res.theta = config.theta;

  // Step 1. Points are split into contiguous chunks, one per job; inside a
  // chunk each solve starts from the previous optimum.
  auto start = Clock::now();
  res.per_omega.resize(n);
  const std::size_t chunks = std::clamp<std::size_t>(config.jobs == 0 ? 1 : config.jobs, 1, n);
  parallel_for(chunks, config.jobs, [&](std::size_t k) {
    const std::size_t lo = k * n / chunks;
    const std::size_t hi = (k + 1) * n / chunks;
    SolveOptions options;
    options.abs_tol = config.step1_tol;
    for (std::size_t w = lo; w < hi; ++w) {
      res.per_omega[w] = solve_exact(inst, training[w], problem, options);
      if (res.per_omega[w].status != SolveStatus::kInfeasible) {
        options.warm_start = res.per_omega[w].path;
      }
    }
  });
  for (std::size_t w = 0; w < n; ++w) {
    if (res.per_omega[w].status == SolveStatus::kInfeasible) {
      throw InfeasibleError(fmt::format("training point {} admits no feasible path", w + 1));
    }
    res.lower_bounds.push_back(res.per_omega[w].lower_bound);
    res.decisions.push_back(path_to_decision(inst, res.per_omega[w].path));
  }
  res.L = risk_of(config.risk0, space, res.lower_bounds);
  res.timings.step1 = seconds_since(start);

  // Step 2.
  start = Clock::now();
  const int m = inst.decision_dim();
  const int r = inst.param_dim();
  Fit fit = fit_rows(training, res.decisions, config.margin, m, config.jobs);
  res.timings.step2 = seconds_since(start);

  // Step 3.
  start = Clock::now();
  for (std::size_t w = 0; w < n; ++w) {
    res.values.push_back(nondetect_prob(inst, training[w], res.decisions[w], 0));
  }
  auto upper = [&](const std::vector<double>& values, double reg) {
    return risk_of(config.risk0, space, values) + config.theta * reg;
  };
  double U = upper(res.values, fit.regularizer);

  if (config.heuristic && n > 1) {
    // Distinct decisions seen in Step 1.
    std::vector<Decision> pool;
    for (const auto& y : res.decisions) {
      if (std::find(pool.begin(), pool.end(), y) == pool.end()) pool.push_back(y);
    }
    bool improved = true;
    while (improved && seconds_since(start) < config.heuristic_time_limit) {
      improved = false;
      for (std::size_t w = 0; w < n && !improved; ++w) {
        for (const auto& cand : pool) {
          if (seconds_since(start) >= config.heuristic_time_limit) break;
          if (cand == res.decisions[w]) continue;
          if (!feasible(inst, training[w], cand, problem)) continue;
          auto decisions = res.decisions;
          decisions[w] = cand;
          auto values = res.values;
          values[w] = nondetect_prob(inst, training[w], cand, 0);
          Fit trial = fit;
          trial.regularizer = 0.0;
          trial.partial = false;
          for (int i = 0; i < m; ++i) {
            if (cand[i] != res.decisions[w][i]) {
              trial.rows[i] = l1_separation(training, labels_of(decisions, i), config.margin);
            }
          }
          for (const auto& row : trial.rows) {
            if (row.status == LpStatus::kOptimal) {
              trial.regularizer += row.l1_norm;
            } else {
              trial.partial = true;
            }
          }
          if (trial.partial && !fit.partial) continue;
          const double u = upper(values, trial.regularizer);
          if (u < U) {
            U = u;
            res.decisions = std::move(decisions);
            res.values = std::move(values);
            fit = std::move(trial);
            ++res.swaps;
            improved = true;
            break;
          }
        }
      }
    }
  }

  Matrix B = Matrix::Zero(m, r);
  Vector b = Vector::Constant(m, -config.margin.epsilon);
  res.fitted.assign(static_cast<std::size_t>(m), false);
  for (int i = 0; i < m; ++i) {
    const auto& row = fit.rows[i];
    if (row.status != LpStatus::kOptimal) continue;
    B.row(i) = row.B_row.transpose();
    b[i] = row.offset;
    res.fitted[i] = true;
  }
  res.rule = AffineRule(std::move(B), std::move(b));
  snap_into_margin(res.rule, training, res.decisions, config.margin, res.fitted);
  res.partial = fit.partial;
  res.regularizer = res.rule.l1_regularizer();
  res.U = upper(res.values, res.regularizer);
  res.gap = (res.U - res.L) / res.L;
  res.timings.step3 = seconds_since(start);
  return res;
}

RecoveryReport check_tabular(const SearchInstance& inst,
                             std::span<const Vector> training,
                             const TabularRule& rule,
                             std::span<const double> optimal_values,
                             const RiskSpec& risk0, Problem problem,
                             std::span<const double> weights) {
  if (optimal_values.size() != training.size()) {
    throw StructuralError("one optimal value per training point expected");
  }
  TrainingConfig config;
  config.risk0 = risk0;
  config.theta = 0.0;
  config.weights.assign(weights.begin(), weights.end());
  const auto report = training_objective(rule, training, inst, config, problem);
  const auto space = make_space(weights, training.size());
  RecoveryReport out;
  out.L = risk_of(risk0, space, {optimal_values.begin(), optimal_values.end()});
  out.objective = report.value;
  out.attains = report.feasible && out.objective == out.L;
  for (std::size_t w = 0; w < training.size(); ++w) {
    if (report.per_omega[w] != optimal_values[w]) out.entries_optimal = false;
  }
  out.entries_optimal = out.entries_optimal && report.feasible;
  return out;
}

bool recovery_check(const SearchInstance& inst, std::span<const Vector> training,
                    const RiskSpec& risk0, Problem problem, unsigned jobs) {
  std::vector<SolveResult> solved(training.size());
  parallel_for(training.size(), jobs, [&](std::size_t w) {
    solved[w] = solve_exact(inst, training[w], problem);
  });
  std::vector<Decision> entries;
  std::vector<double> values;
  for (const auto& s : solved) {
    if (s.status == SolveStatus::kInfeasible) return false;
    entries.push_back(path_to_decision(inst, s.path));
    values.push_back(s.value);
  }
  const auto report =
      check_tabular(inst, training, TabularRule(std::move(entries)), values, risk0, problem);
  if (!report.attains) return false;
  return risk0.kind != RiskKind::kExpectation || report.entries_optimal;
}

nlohmann::json decomp_to_json(const DecompResult& result) {
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t w = 0; w < result.per_omega.size(); ++w) {
    const auto& s = result.per_omega[w];
    std::vector<int> path;
    for (int c : s.path) path.push_back(c + 1);
    points.push_back({{"omega", w + 1},
                      {"value", result.values[w]},
                      {"optimum", s.value},
                      {"lower_bound", s.lower_bound},
                      {"status", to_string(s.status)},
                      {"nodes", s.nodes_explored},
                      {"path", path}});
  }
  std::vector<int> unfitted;
  for (std::size_t i = 0; i < result.fitted.size(); ++i) {
    if (!result.fitted[i]) unfitted.push_back(static_cast<int>(i) + 1);
  }
  nlohmann::json j;
  j["risk"] = result.risk0.name();
  j["beta"] = result.risk0.alpha;
  j["theta"] = result.theta;
  j["L"] = result.L;
  j["U"] = result.U;
  j["gap"] = result.gap;
  j["regularizer"] = result.regularizer;
  j["partial"] = result.partial;
  j["unfitted_coordinates"] = unfitted;
  j["swaps"] = result.swaps;
  j["rule"] = rule_to_json(result.rule, result.margin);
  j["points"] = std::move(points);
  j["timings"] = {{"step1", result.timings.step1},
                  {"step2", result.timings.step2},
                  {"step3", result.timings.step3}};
  return j;
}

std::string decomp_csv(const DecompResult& result) {
  std::string out = "omega,value,lower_bound,status,nodes,path\n";
  for (std::size_t w = 0; w < result.per_omega.size(); ++w) {
    const auto& s = result.per_omega[w];
    std::string path;
    for (std::size_t t = 0; t < s.path.size(); ++t) {
      path += fmt::format("{}{}", t ? " " : "", s.path[t] + 1);
    }
    out += fmt::format("{},{:.17g},{:.17g},{},{},{}\n", w + 1, result.values[w],
                       s.lower_bound, to_string(s.status), s.nodes_explored, path);
  }
  return out;
}

void save_decomp(const DecompResult& result, const std::filesystem::path& json_path) {
  std::ofstream out(json_path);
  if (!out) throw Error(fmt::format("cannot write {}", json_path.string()));
  out << decomp_to_json(result).dump(2) << '\n';
}

}  // namespace riskrule
