#pragma once

#include <limits>
#include <span>
#include <vector>

#include "json.hpp"

#include "riskrule/searchmodel.hpp"
#include "riskrule/types.hpp"

namespace riskrule {

// Margin set D_eps(delta): every component in [-delta, -eps] U [eps, delta].
struct MarginSpec {
  double epsilon = 0.001;
  double delta = 1.0;

  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  bool finite_delta() const { return delta < kInfinity; }
  // Throws DomainError unless 0 < epsilon < delta.
  void validate() const;
};

// G(xi) = B xi + b with B of size m x r.
class AffineRule {
 public:
  AffineRule() = default;
  AffineRule(Matrix B, Vector b);
  // Zero rule of the given shape.
  AffineRule(int m, int r);

  int rows() const { return static_cast<int>(B_.rows()); }
  int cols() const { return static_cast<int>(B_.cols()); }
  const Matrix& B() const { return B_; }
  const Vector& b() const { return b_; }
  Matrix& B() { return B_; }
  Vector& b() { return b_; }

  Vector evaluate(const Vector& xi) const;
  // sum_i ||B_i||_1
  double l1_regularizer() const;

 private:
  Matrix B_;
  Vector b_;
};

// G constant in xi.
class ConstantRule {
 public:
  explicit ConstantRule(Vector g) : g_(std::move(g)) {}

  // g_i = eps where y_i = 1 and -eps elsewhere.
  static ConstantRule encoding(const Decision& y, double epsilon);

  const Vector& g() const { return g_; }
  AffineRule as_affine(int param_dim) const;

 private:
  Vector g_;
};

// One stored decision per training outcome.
class TabularRule {
 public:
  explicit TabularRule(std::vector<Decision> entries) : entries_(std::move(entries)) {}

  std::size_t size() const { return entries_.size(); }
  const Decision& at(std::size_t omega) const { return entries_.at(omega); }
  const std::vector<Decision>& entries() const { return entries_; }
  void set(std::size_t omega, Decision y) { entries_.at(omega) = std::move(y); }

 private:
  std::vector<Decision> entries_;
};

struct RuleOutput {
  Vector g;
  Decision y;
};

// v_i <= 0 maps to 0, v_i > 0 to 1.
Decision heaviside(const Vector& v);

RuleOutput apply(const AffineRule& rule, const Vector& xi);

bool in_margin_set(const Vector& g, const MarginSpec& spec);

// Flag i is set when |g_i(xi)| < eps, i.e. the prescription is close to the
// decision boundary.
std::vector<bool> margin_flags(const AffineRule& rule, const Vector& xi,
                               const MarginSpec& spec);

// -delta + (delta + eps) y_i <= g_i <= -eps + (delta + eps) y_i for all i.
// Requires finite delta.
bool bigm_equivalence_check(const Vector& g, const Decision& y,
                            const MarginSpec& spec);

// H(B xi(omega) + b) for every training point.
std::vector<Decision> candidate_decisions(const AffineRule& rule,
                                          std::span<const Vector> training);

struct RuleChoice {
  int omega = -1;
  Decision y;
  double value = 0.0;
};

// Minimum decision rule: the training-point decision with the lowest
// objective at its own training point. Constant in xi. Candidates that are
// infeasible at their own training point are skipped; lowest omega wins ties.
RuleChoice mdr(const AffineRule& rule, std::span<const Vector> training,
               const SearchInstance& inst, Problem problem);
RuleChoice mdr(std::span<const Decision> candidates,
               std::span<const Vector> training, const SearchInstance& inst,
               Problem problem);

// Adaptive minimum decision rule: among the training-point decisions, the one
// minimizing the true objective at xi. Lowest omega wins ties.
RuleChoice amdr(const AffineRule& rule, std::span<const Vector> training,
                const SearchInstance& inst, const Vector& xi, Problem problem);
RuleChoice amdr(std::span<const Decision> candidates, const SearchInstance& inst,
                const Vector& xi, Problem problem);

// {m, r, B (row-major), b, epsilon, delta}; delta may be the string "inf".
nlohmann::json rule_to_json(const AffineRule& rule, const MarginSpec& margin);
AffineRule rule_from_json(const nlohmann::json& j, MarginSpec* margin = nullptr);

}  // namespace riskrule
