#include "riskrule/searchmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include <fmt/format.h>

#include "riskrule/errors.hpp"

namespace riskrule {
namespace {

constexpr double kSimplexSumTol = 1e-9;
constexpr double kSimplexNegTol = 1e-12;

}  // namespace

std::string to_string(ParamMode mode) { return mode == ParamMode::kA ? "A" : "B"; }

std::string to_string(Problem problem) {
  return problem == Problem::kSP1 ? "SP1" : "SP2";
}

ParamMode parse_param_mode(const std::string& text) {
  if (text == "A" || text == "a") return ParamMode::kA;
  if (text == "B" || text == "b") return ParamMode::kB;
  throw DomainError(fmt::format("unknown parameterization mode '{}'", text));
}

Problem parse_problem(const std::string& text) {
  if (text == "SP1" || text == "sp1") return Problem::kSP1;
  if (text == "SP2" || text == "sp2") return Problem::kSP2;
  throw DomainError(fmt::format("unknown problem '{}'", text));
}

Grid::Grid(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0) {
    throw DomainError(fmt::format("grid must be at least 1x1, got {}x{}", rows, cols));
  }
  neighbors_.resize(static_cast<std::size_t>(cell_count()));
  for (int c = 0; c < cell_count(); ++c) {
    const int r = c / cols_;
    const int k = c % cols_;
    auto& n = neighbors_[c];
    if (r > 0) n.push_back(c - cols_);
    if (k > 0) n.push_back(c - 1);
    n.push_back(c);
    if (k + 1 < cols_) n.push_back(c + 1);
    if (r + 1 < rows_) n.push_back(c + cols_);
  }
}

bool Grid::adjacent(int from, int to) const {
  if (from < 0 || to < 0 || from >= cell_count() || to >= cell_count()) return false;
  return manhattan(from, to) <= 1;
}

int Grid::manhattan(int a, int b) const {
  return std::abs(a / cols_ - b / cols_) + std::abs(a % cols_ - b % cols_);
}

ScenarioTensor::ScenarioTensor(int targets, int scenarios, int horizon)
    : targets_(targets), scenarios_(scenarios), horizon_(horizon) {
  if (targets <= 0 || scenarios <= 0 || horizon <= 0) {
    throw DomainError("scenario tensor dimensions must be positive");
  }
  cells_.assign(static_cast<std::size_t>(targets) * scenarios * horizon, 0);
}

void ScenarioTensor::set_target(int k, const std::vector<std::vector<int>>& paths) {
  if (static_cast<int>(paths.size()) != scenarios_) {
    throw StructuralError(fmt::format("target {} has {} scenarios, expected {}", k,
                                      paths.size(), scenarios_));
  }
  for (int i = 0; i < scenarios_; ++i) {
    if (static_cast<int>(paths[i].size()) != horizon_) {
      throw StructuralError(fmt::format(
          "target {} scenario {} has {} periods, expected {}", k, i,
          paths[i].size(), horizon_));
    }
    for (int t = 0; t < horizon_; ++t) set_cell(k, i, t, paths[i][t]);
  }
}

SearchInstance::SearchInstance(Grid grid, ScenarioTensor scenarios,
                               double alpha_bar, ParamMode mode, double tau)
    : grid_(std::move(grid)),
      scenarios_(std::move(scenarios)),
      alpha_bar_(alpha_bar),
      mode_(mode),
      tau_(tau) {
  if (!(alpha_bar_ > 0.0)) {
    throw DomainError(fmt::format("nominal detection rate must be positive, got {}",
                                  alpha_bar_));
  }
  if (!(tau_ >= 0.0 && tau_ <= 1.0)) {
    throw DomainError(fmt::format("threshold tau must lie in [0,1], got {}", tau_));
  }
  if (scenarios_.targets() < 1) throw StructuralError("instance has no targets");
  for (int k = 0; k < scenarios_.targets(); ++k) {
    for (int i = 0; i < scenarios_.scenarios(); ++i) {
      for (int t = 0; t < scenarios_.horizon(); ++t) {
        const int c = scenarios_.cell(k, i, t);
        if (c < 0 || c >= grid_.cell_count()) {
          throw StructuralError(fmt::format(
              "target {} scenario {} period {} is in cell {} outside the grid", k,
              i, t, c));
        }
      }
    }
  }
}

int SearchInstance::param_dim() const {
  return mode_ == ParamMode::kA ? scenario_count() + 1 : scenario_count();
}

std::vector<std::vector<int>> gen_scenarios(Rng& rng, const Grid& grid,
                                            std::span<const int> starts,
                                            int horizon, int scenarios,
                                            double stay_prob) {
  if (starts.empty()) throw DomainError("empty start set");
  if (!(stay_prob >= 0.0 && stay_prob <= 1.0)) {
    throw DomainError(fmt::format("stay probability must lie in [0,1], got {}", stay_prob));
  }
  for (int s : starts) {
    if (s < 0 || s >= grid.cell_count()) {
      throw DomainError(fmt::format("start cell {} outside the grid", s));
    }
  }
  std::vector<std::vector<int>> out(static_cast<std::size_t>(scenarios));
  for (auto& path : out) {
    path.resize(static_cast<std::size_t>(horizon));
    path[0] = starts.size() == 1 ? starts[0] : starts[rng.below(starts.size())];
    for (int t = 1; t < horizon; ++t) {
      const int here = path[t - 1];
      if (rng.bernoulli(stay_prob)) {
        path[t] = here;
        continue;
      }
      std::vector<int> moves;
      for (int n : grid.neighbors(here)) {
        if (n != here) moves.push_back(n);
      }
      path[t] = moves.empty() ? here : moves[rng.below(moves.size())];
    }
  }
  return out;
}

void validate_parameter(const SearchInstance& inst, const Vector& xi) {
  if (xi.size() != inst.param_dim()) {
    throw DomainError(fmt::format("parameter vector has length {}, expected {}",
                                  xi.size(), inst.param_dim()));
  }
  if (inst.mode() != ParamMode::kB) return;
  const double base = 1.0 / inst.scenario_count();
  double total = 0.0;
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    const double q = base + xi[i];
    if (q < -kSimplexNegTol) {
      throw DomainError(fmt::format(
          "mode B parameter gives negative probability {} at scenario {}", q, i));
    }
    total += q;
  }
  if (std::abs(total - 1.0) > kSimplexSumTol) {
    throw DomainError(fmt::format("mode B probabilities sum to {}, expected 1", total));
  }
}

std::vector<double> qvec(const SearchInstance& inst, const Vector& xi) {
  validate_parameter(inst, xi);
  const int n = inst.scenario_count();
  const double base = 1.0 / n;
  std::vector<double> q(static_cast<std::size_t>(n));
  if (inst.mode() == ParamMode::kB) {
    for (int i = 0; i < n; ++i) q[i] = std::max(0.0, base + xi[i]);
    return q;
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    q[i] = std::max(0.0, base + xi[i + 1]);
    total += q[i];
  }
  if (!(total > 0.0)) {
    throw DegenerateInputError("every scenario weight is clipped to zero");
  }
  for (double& v : q) v /= total;
  return q;
}

double detection_rate(const SearchInstance& inst, const Vector& xi) {
  if (xi.size() != inst.param_dim()) {
    throw DomainError(fmt::format("parameter vector has length {}, expected {}",
                                  xi.size(), inst.param_dim()));
  }
  if (inst.mode() == ParamMode::kB) return inst.alpha_bar();
  const double rate = inst.alpha_bar() + xi[0];
  if (!(rate > 0.0)) {
    throw DomainError(fmt::format("detection rate {} is not positive", rate));
  }
  return rate;
}

std::vector<int> detection_counts(const SearchInstance& inst, const Decision& y,
                                  int target) {
  if (static_cast<int>(y.size()) != inst.decision_dim()) {
    throw StructuralError(fmt::format("decision has length {}, expected {}",
                                      y.size(), inst.decision_dim()));
  }
  const auto& z = inst.scenarios();
  std::vector<int> counts(static_cast<std::size_t>(inst.scenario_count()), 0);
  for (int i = 0; i < inst.scenario_count(); ++i) {
    for (int t = 0; t < inst.horizon(); ++t) {
      counts[i] += y[inst.decision_index(z.cell(target, i, t), t)] != 0;
    }
  }
  return counts;
}

std::vector<int> detection_counts(const SearchInstance& inst,
                                  const SearchPath& path, int target) {
  if (static_cast<int>(path.size()) != inst.horizon()) {
    throw StructuralError(fmt::format("path has {} periods, expected {}",
                                      path.size(), inst.horizon()));
  }
  const auto& z = inst.scenarios();
  std::vector<int> counts(static_cast<std::size_t>(inst.scenario_count()), 0);
  for (int i = 0; i < inst.scenario_count(); ++i) {
    for (int t = 0; t < inst.horizon(); ++t) {
      counts[i] += z.cell(target, i, t) == path[t];
    }
  }
  return counts;
}

double nondetect_from_counts(std::span<const double> q, double alpha,
                             std::span<const int> counts) {
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    sum += q[i] * std::exp(-alpha * static_cast<double>(counts[i]));
  }
  return sum;
}

double nondetect_prob(const SearchInstance& inst, const Vector& xi,
                      const Decision& y, int target) {
  const auto q = qvec(inst, xi);
  return nondetect_from_counts(q, detection_rate(inst, xi),
                               detection_counts(inst, y, target));
}

double nondetect_prob(const SearchInstance& inst, const Vector& xi,
                      const SearchPath& path, int target) {
  const auto q = qvec(inst, xi);
  return nondetect_from_counts(q, detection_rate(inst, xi),
                               detection_counts(inst, path, target));
}

Decision path_to_decision(const SearchInstance& inst, const SearchPath& path) {
  if (static_cast<int>(path.size()) != inst.horizon()) {
    throw StructuralError(fmt::format("path has {} periods, expected {}",
                                      path.size(), inst.horizon()));
  }
  Decision y(static_cast<std::size_t>(inst.decision_dim()), 0);
  for (int t = 0; t < inst.horizon(); ++t) {
    if (path[t] < 0 || path[t] >= inst.cell_count()) {
      throw StructuralError(fmt::format("path cell {} outside the grid", path[t]));
    }
    y[inst.decision_index(path[t], t)] = 1;
  }
  return y;
}

std::optional<SearchPath> decision_to_path(const SearchInstance& inst,
                                           const Decision& y) {
  if (static_cast<int>(y.size()) != inst.decision_dim()) return std::nullopt;
  SearchPath path(static_cast<std::size_t>(inst.horizon()), -1);
  for (int t = 0; t < inst.horizon(); ++t) {
    for (int c = 0; c < inst.cell_count(); ++c) {
      if (y[inst.decision_index(c, t)] == 0) continue;
      if (path[t] != -1) return std::nullopt;
      path[t] = c;
    }
    if (path[t] == -1) return std::nullopt;
  }
  return path;
}

bool path_feasible(const SearchInstance& inst, const SearchPath& path) {
  if (static_cast<int>(path.size()) != inst.horizon()) return false;
  for (int t = 0; t < inst.horizon(); ++t) {
    if (path[t] < 0 || path[t] >= inst.cell_count()) return false;
    if (t > 0 && !inst.grid().adjacent(path[t - 1], path[t])) return false;
  }
  return true;
}

bool path_feasible(const SearchInstance& inst, const Decision& y) {
  const auto path = decision_to_path(inst, y);
  return path && path_feasible(inst, *path);
}

bool feasible(const SearchInstance& inst, const Vector& xi, const Decision& y,
              Problem problem) {
  if (!path_feasible(inst, y)) return false;
  if (problem == Problem::kSP1) return true;
  if (inst.target_count() < 2) {
    throw StructuralError("SP2 needs a second target");
  }
  return nondetect_prob(inst, xi, y, 1) <= inst.tau();
}

bool feasible(const SearchInstance& inst, const Vector& xi,
              const SearchPath& path, Problem problem) {
  if (!path_feasible(inst, path)) return false;
  if (problem == Problem::kSP1) return true;
  if (inst.target_count() < 2) {
    throw StructuralError("SP2 needs a second target");
  }
  return nondetect_prob(inst, xi, path, 1) <= inst.tau();
}

nlohmann::json instance_to_json(const SearchInstance& inst) {
  nlohmann::json targets = nlohmann::json::array();
  const auto& z = inst.scenarios();
  for (int k = 0; k < z.targets(); ++k) {
    nlohmann::json scen = nlohmann::json::array();
    for (int i = 0; i < z.scenarios(); ++i) {
      std::vector<int> cells(static_cast<std::size_t>(z.horizon()));
      for (int t = 0; t < z.horizon(); ++t) cells[t] = z.cell(k, i, t) + 1;
      scen.push_back(cells);
    }
    targets.push_back(std::move(scen));
  }
  return {{"rows", inst.grid().rows()},
          {"cols", inst.grid().cols()},
          {"T", inst.horizon()},
          {"I", inst.scenario_count()},
          {"mode", to_string(inst.mode())},
          {"tau", inst.tau()},
          {"alpha_bar", inst.alpha_bar()},
          {"targets", std::move(targets)}};
}

SearchInstance instance_from_json(const nlohmann::json& j) {
  try {
    Grid grid(j.at("rows").get<int>(), j.at("cols").get<int>());
    const int horizon = j.at("T").get<int>();
    const int count = j.at("I").get<int>();
    const auto& targets = j.at("targets");
    if (!targets.is_array() || targets.empty()) {
      throw StructuralError("instance file has no targets");
    }
    ScenarioTensor tensor(static_cast<int>(targets.size()), count, horizon);
    for (int k = 0; k < static_cast<int>(targets.size()); ++k) {
      auto paths = targets[k].get<std::vector<std::vector<int>>>();
      for (auto& p : paths) {
        for (int& c : p) c -= 1;
      }
      tensor.set_target(k, paths);
    }
    return SearchInstance(std::move(grid), std::move(tensor),
                          j.at("alpha_bar").get<double>(),
                          parse_param_mode(j.at("mode").get<std::string>()),
                          j.at("tau").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(fmt::format("malformed instance file: {}", e.what()));
  }
}

SearchInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError(fmt::format("cannot open instance file {}", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(fmt::format("cannot parse {}: {}", path.string(), e.what()));
  }
  return instance_from_json(j);
}

void save_instance(const SearchInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw StructuralError(fmt::format("cannot write {}", path.string()));
  out << instance_to_json(inst).dump() << '\n';
}

}  // namespace riskrule
