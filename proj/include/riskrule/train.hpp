#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "riskrule/exactsolver.hpp"
#include "riskrule/probspace.hpp"
#include "riskrule/rules.hpp"
#include "riskrule/searchmodel.hpp"

namespace riskrule {

struct TrainingConfig {
  RiskSpec risk0 = RiskSpec::expectation();
  MarginSpec margin;
  double theta = 0.001;
  double step1_tol = 0.0;
  // Local search that swaps a training point's decision for another
  // candidate when this lowers U.
  bool heuristic = false;
  double heuristic_time_limit = 300.0;  // seconds
  // Reject training sets that are not affinely independent.
  bool require_independence = true;
  // P(omega); empty means uniform.
  std::vector<double> weights;
  unsigned jobs = 1;
};

struct Violation {
  int omega = -1;
  std::string kind;  // "margin", "path" or "tau"
};

struct ObjectiveReport {
  double value = 0.0;
  bool feasible = true;
  std::vector<Violation> violations;
  std::vector<double> per_omega;  // target-1 nondetection at each point
};

// risk0 of the target-1 nondetection of the prescribed decisions plus
// theta * sum_i ||B_i||_1. Feasibility covers margin membership, path
// structure and, for SP2, the threshold at every training point.
ObjectiveReport training_objective(const AffineRule& rule,
                                   std::span<const Vector> training,
                                   const SearchInstance& inst,
                                   const TrainingConfig& config, Problem problem);
ObjectiveReport training_objective(const ConstantRule& rule,
                                   std::span<const Vector> training,
                                   const SearchInstance& inst,
                                   const TrainingConfig& config, Problem problem);
// Tabular rules have no margin or regularizer.
ObjectiveReport training_objective(const TabularRule& rule,
                                   std::span<const Vector> training,
                                   const SearchInstance& inst,
                                   const TrainingConfig& config, Problem problem);

struct DecompTimings {
  double step1 = 0.0;
  double step2 = 0.0;
  double step3 = 0.0;
};

struct DecompResult {
  std::vector<Vector> training;
  std::vector<SolveResult> per_omega;
  // Decisions the rule reproduces; the per-point optima unless the heuristic
  // swapped some of them.
  std::vector<Decision> decisions;
  std::vector<double> lower_bounds;
  std::vector<double> values;  // target-1 nondetection of decisions[w]
  double L = 0.0;
  AffineRule rule;
  std::vector<bool> fitted;  // per coordinate; false when separation failed
  bool partial = false;
  double regularizer = 0.0;
  double U = 0.0;
  double gap = 0.0;
  int swaps = 0;
  RiskSpec risk0;
  MarginSpec margin;
  double theta = 0.0;
  DecompTimings timings;
};

// Rank of [xi(w)' 1] over all points, singular values above 1e-10.
int affine_rank(std::span<const Vector> training);

// Step 1: exact solves and L. Step 2: L1-minimal separation per coordinate.
// Step 3: U and gap. Throws PreconditionError for dependent training points
// (when required) and InfeasibleError if some training point has no feasible
// path.
DecompResult decompose(const SearchInstance& inst, std::span<const Vector> training,
                       const TrainingConfig& config, Problem problem);

struct RecoveryReport {
  double L = 0.0;
  double objective = 0.0;
  bool attains = false;         // objective == L
  bool entries_optimal = true;  // every entry optimal at its point
};

// Objective of a tabular rule against per-point optimal values.
RecoveryReport check_tabular(const SearchInstance& inst,
                             std::span<const Vector> training,
                             const TabularRule& rule,
                             std::span<const double> optimal_values,
                             const RiskSpec& risk0, Problem problem,
                             std::span<const double> weights = {});

// Solves every point, wraps the optima in a tabular rule and checks that it
// attains L; under expectation also that each entry is optimal.
bool recovery_check(const SearchInstance& inst, std::span<const Vector> training,
                    const RiskSpec& risk0, Problem problem = Problem::kSP2,
                    unsigned jobs = 1);

nlohmann::json decomp_to_json(const DecompResult& result);
// One row per training point: omega,value,lower_bound,status,nodes,path.
std::string decomp_csv(const DecompResult& result);
// Rule, margin and training decisions as written by decomp_to_json.
void save_decomp(const DecompResult& result, const std::filesystem::path& json_path);

}  // namespace riskrule
