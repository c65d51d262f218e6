#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskrule/lpformat.hpp"
#include "riskrule/probspace.hpp"
#include "riskrule/rules.hpp"
#include "riskrule/searchmodel.hpp"

namespace riskrule {

enum class SolveStatus {
  kOptimal,     // value equals the proven lower bound
  kFeasible,    // value within the requested tolerance of the lower bound
  kInfeasible,  // no path satisfies the constraints
};

std::string to_string(SolveStatus status);

struct SolveResult {
  SearchPath path;
  double value = 0.0;
  double lower_bound = 0.0;
  SolveStatus status = SolveStatus::kInfeasible;
  std::uint64_t nodes_explored = 0;
};

// Reported for every node of the search tree, before the pruning test.
struct NodeEvent {
  std::span<const int> prefix;  // cells of the first prefix.size() periods
  double bound = 0.0;
};

struct SolveOptions {
  double abs_tol = 0.0;
  // Seeds the incumbent if feasible at the query point.
  std::optional<SearchPath> warm_start;
  std::function<void(const NodeEvent&)> observer;
};

// Depth-first branch-and-bound over the time-expanded path graph. Children
// are expanded in ascending cell order. Among optimal paths the first one in
// that order is returned, independent of any warm start.
SolveResult solve_exact(const SearchInstance& inst, const Vector& xi,
                        Problem problem, const SolveOptions& options = {});

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

// Number of paths satisfying the movement constraints (saturates at 2^64-1).
std::uint64_t count_paths(const SearchInstance& inst);

// Exhaustive enumeration in the same order as solve_exact. Throws SizeError
// when count_paths exceeds `cap`.
SolveResult brute_force(const SearchInstance& inst, const Vector& xi,
                        Problem problem,
                        std::uint64_t cap = kDefaultEnumerationCap);

// Linearized binary program for one parameter value: y_{c,t} plus, per
// scenario and target, indicators w_{i,j,k} selecting the detection count j.
LpModel build_milp(const SearchInstance& inst, const Vector& xi, Problem problem);
std::string emit_milp(const SearchInstance& inst, const Vector& xi, Problem problem);

// Assignment of build_milp variables that encodes a path.
LpAssignment milp_assignment(const SearchInstance& inst, const SearchPath& path,
                             Problem problem);

struct TrainingMilpConfig {
  RiskSpec risk0 = RiskSpec::expectation();
  MarginSpec margin;
  double theta = 0.001;
  Problem problem = Problem::kSP2;
  // P(omega); empty means uniform.
  std::vector<double> weights;
};

// Full training problem over the given points: per-point path variables and
// linearization, margin rows linking y to B xi + b, the L1 regularizer via
// split columns B = Bp - Bm (plain free B when theta = 0), and the risk
// objective (expectation; worst case through gamma; superquantile through
// gamma and u). Quantile objectives are rejected.
LpModel build_training_milp(const SearchInstance& inst,
                            std::span<const Vector> training,
                            const TrainingMilpConfig& config);
std::string emit_training_milp(const SearchInstance& inst,
                               std::span<const Vector> training,
                               const TrainingMilpConfig& config);

// FNV-1a over the bytes of xi, as 16 hex digits; used in LP file names.
std::string parameter_hash(const Vector& xi);

// Name of the form <instance>_<problem>_<hash(xi)>.lp
std::string milp_file_name(const std::string& instance_name, Problem problem,
                           const Vector& xi);

}  // namespace riskrule
