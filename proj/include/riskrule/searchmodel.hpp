#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "riskrule/rng.hpp"
#include "riskrule/types.hpp"

namespace riskrule {

// How the parameter vector perturbs the instance.
//   kA: r = I + 1. xi[0] shifts the detection rate, xi[1..I] shift the
//       scenario weights, which are clipped at zero and renormalized.
//   kB: r = I. q_i = 1/I + xi[i], detection rate fixed.
enum class ParamMode { kA, kB };

// kSP1: single target, path constraints only. kSP2 adds the nondetection
// threshold on target 2.
enum class Problem { kSP1, kSP2 };

std::string to_string(ParamMode mode);
std::string to_string(Problem problem);
ParamMode parse_param_mode(const std::string& text);
Problem parse_problem(const std::string& text);

inline constexpr double kNominalRateModeA = 2.74887;   // glimpse probability 0.936
inline constexpr double kNominalRateModeB = 0.510826;  // glimpse probability 0.4

// Rectangular grid, cells numbered row-major from the upper-left corner
// starting at 0. External files and the CLI use 1-based numbers.
class Grid {
 public:
  Grid(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int cell_count() const { return rows_ * cols_; }

  // Ascending cell indices: c itself and the existing up/down/left/right cells.
  const std::vector<int>& neighbors(int cell) const { return neighbors_[cell]; }
  bool adjacent(int from, int to) const;
  int manhattan(int a, int b) const;

 private:
  int rows_;
  int cols_;
  std::vector<std::vector<int>> neighbors_;
};

// Target locations: cell(k, i, t) is where target k is at period t under
// scenario i. Storing the index encodes the single-1 occupancy vector.
class ScenarioTensor {
 public:
  ScenarioTensor() = default;
  ScenarioTensor(int targets, int scenarios, int horizon);

  int targets() const { return targets_; }
  int scenarios() const { return scenarios_; }
  int horizon() const { return horizon_; }

  int cell(int k, int i, int t) const { return cells_[index(k, i, t)]; }
  void set_cell(int k, int i, int t, int c) { cells_[index(k, i, t)] = c; }

  // Copy a [scenario][period] block into target k.
  void set_target(int k, const std::vector<std::vector<int>>& paths);

 private:
  std::size_t index(int k, int i, int t) const {
    return (static_cast<std::size_t>(k) * scenarios_ + i) * horizon_ + t;
  }

  int targets_ = 0;
  int scenarios_ = 0;
  int horizon_ = 0;
  std::vector<int> cells_;
};

class SearchInstance {
 public:
  SearchInstance(Grid grid, ScenarioTensor scenarios, double alpha_bar,
                 ParamMode mode, double tau);

  const Grid& grid() const { return grid_; }
  const ScenarioTensor& scenarios() const { return scenarios_; }
  int horizon() const { return scenarios_.horizon(); }
  int scenario_count() const { return scenarios_.scenarios(); }
  int target_count() const { return scenarios_.targets(); }
  int cell_count() const { return grid_.cell_count(); }
  double alpha_bar() const { return alpha_bar_; }
  ParamMode mode() const { return mode_; }
  double tau() const { return tau_; }

  // r: I + 1 in mode A, I in mode B.
  int param_dim() const;
  // m = C * T binary decisions y_{c,t}, stored at t * C + c.
  int decision_dim() const { return cell_count() * horizon(); }
  int decision_index(int cell, int period) const {
    return period * cell_count() + cell;
  }

 private:
  Grid grid_;
  ScenarioTensor scenarios_;
  double alpha_bar_;
  ParamMode mode_;
  double tau_;
};

// One cell per period.
using SearchPath = std::vector<int>;

// Independent Markov-chain sample paths of length `horizon`. Period 0 is a
// uniform draw from `starts`; afterwards the target stays with probability
// `stay_prob` and otherwise moves to a uniformly chosen existing
// up/down/left/right neighbor. Result is [scenario][period].
std::vector<std::vector<int>> gen_scenarios(Rng& rng, const Grid& grid,
                                            std::span<const int> starts,
                                            int horizon, int scenarios,
                                            double stay_prob);

// Throws DomainError when xi has the wrong length or violates the mode B
// simplex condition (1/I + xi_i >= 0, sum equal to 1 within 1e-9).
void validate_parameter(const SearchInstance& inst, const Vector& xi);

std::vector<double> qvec(const SearchInstance& inst, const Vector& xi);
double detection_rate(const SearchInstance& inst, const Vector& xi);

// Detections of target k under each scenario for decision y.
std::vector<int> detection_counts(const SearchInstance& inst, const Decision& y,
                                  int target);
std::vector<int> detection_counts(const SearchInstance& inst,
                                  const SearchPath& path, int target);

// sum_i q_i exp(-alpha * counts_i). Every objective and bound in the library
// goes through this function so equal counts give bitwise-equal values.
double nondetect_from_counts(std::span<const double> q, double alpha,
                             std::span<const int> counts);

double nondetect_prob(const SearchInstance& inst, const Vector& xi,
                      const Decision& y, int target);
double nondetect_prob(const SearchInstance& inst, const Vector& xi,
                      const SearchPath& path, int target);

Decision path_to_decision(const SearchInstance& inst, const SearchPath& path);
// Path encoded by y, or nullopt if some period has zero or several cells.
std::optional<SearchPath> decision_to_path(const SearchInstance& inst,
                                           const Decision& y);

// One cell per period and consecutive cells adjacent.
bool path_feasible(const SearchInstance& inst, const Decision& y);
bool path_feasible(const SearchInstance& inst, const SearchPath& path);

// Path constraints, plus the target-2 threshold for kSP2.
bool feasible(const SearchInstance& inst, const Vector& xi, const Decision& y,
              Problem problem);
bool feasible(const SearchInstance& inst, const Vector& xi,
              const SearchPath& path, Problem problem);

// Instance file: {rows, cols, T, I, mode, tau, alpha_bar,
// targets: [target][scenario][period] 1-based cells}.
nlohmann::json instance_to_json(const SearchInstance& inst);
SearchInstance instance_from_json(const nlohmann::json& j);
SearchInstance load_instance(const std::filesystem::path& path);
void save_instance(const SearchInstance& inst, const std::filesystem::path& path);

}  // namespace riskrule
