#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "riskrule/rules.hpp"
#include "riskrule/types.hpp"

namespace riskrule {

// min cost'x  s.t.  A x (sense) rhs,  lower <= x <= upper.
// Bounds may be infinite; empty bound vectors mean x >= 0.
struct LinearProgram {
  Vector cost;
  Matrix A;
  std::vector<RowSense> sense;
  Vector rhs;
  Vector lower;
  Vector upper;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Vector x;
  double objective = 0.0;
  int iterations = 0;
};

// Dense two-phase primal simplex with Bland's rule. Throws DegeneracyError on
// pivots below 1e-11, on hitting the iteration cap, or if the returned point
// violates the constraints by more than 1e-7.
LpSolution solve_lp(const LinearProgram& lp);

struct SeparationResult {
  Vector B_row;
  double offset = 0.0;
  LpStatus status = LpStatus::kInfeasible;
  double l1_norm = 0.0;
};

// Minimize ||B||_1 subject to eps <= <B, xi> + b <= delta for label 1 and
// -delta <= <B, xi> + b <= -eps for label 0. With a single label present the
// answer is B = 0 and b = +-eps. Infinite delta drops the outer rows.
SeparationResult l1_separation(std::span<const Vector> points,
                               std::span<const std::uint8_t> labels,
                               const MarginSpec& spec);

}  // namespace riskrule
