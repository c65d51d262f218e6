#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "riskrule/types.hpp"

namespace riskrule {

// In-memory linear (mixed-binary) program in the shape of a CPLEX-LP file.
struct LpTerm {
  std::string var;
  double coef = 0.0;
};

struct LpRow {
  std::string name;
  std::vector<LpTerm> terms;
  RowSense sense = RowSense::kLessEqual;
  double rhs = 0.0;
};

struct LpBound {
  std::string var;
  double lower = 0.0;
  double upper = 0.0;  // +inf when absent
};

struct LpModel {
  bool minimize = true;
  std::string objective_name = "obj";
  std::vector<LpTerm> objective;
  std::vector<LpRow> rows;
  std::vector<LpBound> bounds;
  std::vector<std::string> binaries;

  // Distinct variable names in order of first appearance.
  std::vector<std::string> variables() const;
  std::size_t variable_count() const { return variables().size(); }
  std::size_t binary_count() const { return binaries.size(); }
};

using LpAssignment = std::map<std::string, double, std::less<>>;

// Coefficients are printed with 17 significant digits.
std::string write_lp(const LpModel& model);
LpModel read_lp(std::string_view text);

// Unassigned variables count as 0.
double evaluate_objective(const LpModel& model, const LpAssignment& x);
double row_activity(const LpRow& row, const LpAssignment& x);
// Largest violation over rows, explicit bounds, default [0, inf) bounds and
// binary integrality.
double max_violation(const LpModel& model, const LpAssignment& x);

}  // namespace riskrule
