#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace riskrule {

// Finite probability space: outcome ω has weight P(ω) > 0, weights sum to 1.
class FiniteProbSpace {
 public:
  explicit FiniteProbSpace(std::vector<double> weights);

  static FiniteProbSpace uniform(std::size_t outcomes);

  std::size_t size() const { return weights_.size(); }
  double weight(std::size_t omega) const { return weights_[omega]; }
  std::span<const double> weights() const { return weights_; }

 private:
  std::vector<double> weights_;
};

// Real-valued random variable on a FiniteProbSpace.
class DiscreteRV {
 public:
  DiscreteRV(std::shared_ptr<const FiniteProbSpace> space,
             std::vector<double> values);

  // Convenience: equally likely outcomes.
  static DiscreteRV uniform(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double value(std::size_t omega) const { return values_[omega]; }
  std::span<const double> values() const { return values_; }
  const FiniteProbSpace& space() const { return *space_; }
  const std::shared_ptr<const FiniteProbSpace>& space_ptr() const {
    return space_;
  }

  // Same space, new values.
  DiscreteRV with_values(std::vector<double> values) const;

 private:
  std::shared_ptr<const FiniteProbSpace> space_;
  std::vector<double> values_;
};

enum class RiskKind { kExpectation, kWorstCase, kQuantile, kSuperquantile };

struct RiskSpec {
  RiskKind kind = RiskKind::kExpectation;
  // Level in (0, 1); only meaningful for quantile and superquantile.
  double alpha = 0.0;

  static RiskSpec expectation() { return {RiskKind::kExpectation, 0.0}; }
  static RiskSpec worst_case() { return {RiskKind::kWorstCase, 0.0}; }
  static RiskSpec quantile(double alpha);
  static RiskSpec superquantile(double alpha);

  // Throws DomainError if alpha is outside (0, 1) for a leveled kind.
  void validate() const;

  // "expectation", "worst_case", "quantile", "superquantile".
  std::string name() const;
  static RiskKind parse_kind(const std::string& name);
};

double expectation(const DiscreteRV& rv);
double worst_case(const DiscreteRV& rv);

// Left-continuous generalized inverse: min{z : P(rv <= z) >= alpha}.
double quantile(const DiscreteRV& rv, double alpha);

// Q + (1 / (1 - alpha)) * E[max(0, rv - Q)] with Q the alpha-quantile; the
// average of the worst (1 - alpha) fraction of outcomes.
double superquantile(const DiscreteRV& rv, double alpha);

double evaluate_risk(const RiskSpec& spec, const DiscreteRV& rv);

}  // namespace riskrule
