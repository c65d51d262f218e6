#include "riskrule/probspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "riskrule/errors.hpp"

namespace riskrule {
namespace {

constexpr double kWeightSumTol = 1e-12;
// Slack for cumulative-weight comparisons in the quantile scan.
constexpr double kCdfTol = 1e-12;

void check_level(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError(fmt::format("risk level must lie in (0,1), got {}", alpha));
  }
}

void check_nonempty(const DiscreteRV& rv) {
  if (rv.size() == 0) throw StructuralError("random variable has no outcomes");
}

}  // namespace

FiniteProbSpace::FiniteProbSpace(std::vector<double> weights)
    : weights_(std::move(weights)) {
  if (weights_.empty()) throw StructuralError("probability space is empty");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw DomainError(fmt::format("outcome weight must be positive, got {}", w));
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw DomainError(fmt::format("weights sum to {}, expected 1", total));
  }
}

FiniteProbSpace FiniteProbSpace::uniform(std::size_t outcomes) {
  if (outcomes == 0) throw StructuralError("probability space is empty");
  return FiniteProbSpace(
      std::vector<double>(outcomes, 1.0 / static_cast<double>(outcomes)));
}

DiscreteRV::DiscreteRV(std::shared_ptr<const FiniteProbSpace> space,
                       std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (!space_) throw StructuralError("random variable without a space");
  if (values_.size() != space_->size()) {
    throw StructuralError(fmt::format(
        "random variable has {} values but the space has {} outcomes",
        values_.size(), space_->size()));
  }
}

DiscreteRV DiscreteRV::uniform(std::vector<double> values) {
  auto space = std::make_shared<const FiniteProbSpace>(
      FiniteProbSpace::uniform(values.size()));
  return DiscreteRV(std::move(space), std::move(values));
}

DiscreteRV DiscreteRV::with_values(std::vector<double> values) const {
  return DiscreteRV(space_, std::move(values));
}

RiskSpec RiskSpec::quantile(double alpha) {
  RiskSpec spec{RiskKind::kQuantile, alpha};
  spec.validate();
  return spec;
}

RiskSpec RiskSpec::superquantile(double alpha) {
  RiskSpec spec{RiskKind::kSuperquantile, alpha};
  spec.validate();
  return spec;
}

void RiskSpec::validate() const {
  if (kind == RiskKind::kQuantile || kind == RiskKind::kSuperquantile) {
    check_level(alpha);
  }
}

std::string RiskSpec::name() const {
  switch (kind) {
    case RiskKind::kExpectation:
      return "expectation";
    case RiskKind::kWorstCase:
      return "worst_case";
    case RiskKind::kQuantile:
      return "quantile";
    case RiskKind::kSuperquantile:
      return "superquantile";
  }
  return "unknown";
}

RiskKind RiskSpec::parse_kind(const std::string& name) {
  if (name == "expectation") return RiskKind::kExpectation;
  if (name == "worst_case" || name == "worst-case" || name == "worst") {
    return RiskKind::kWorstCase;
  }
  if (name == "quantile") return RiskKind::kQuantile;
  if (name == "superquantile" || name == "cvar") return RiskKind::kSuperquantile;
  throw DomainError(fmt::format("unknown risk measure '{}'", name));
}

double expectation(const DiscreteRV& rv) {
  check_nonempty(rv);
  double sum = 0.0;
  for (std::size_t w = 0; w < rv.size(); ++w) {
    sum += rv.space().weight(w) * rv.value(w);
  }
  return sum;
}

double worst_case(const DiscreteRV& rv) {
  check_nonempty(rv);
  return *std::max_element(rv.values().begin(), rv.values().end());
}

double quantile(const DiscreteRV& rv, double alpha) {
  check_level(alpha);
  check_nonempty(rv);
  std::vector<std::size_t> order(rv.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rv.value(a) < rv.value(b);
  });
  double cdf = 0.0;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    cdf += rv.space().weight(order[pos]);
    // Equal values form a single atom; only test after the last of them.
    const bool atom_end = pos + 1 == order.size() ||
                          rv.value(order[pos + 1]) != rv.value(order[pos]);
    if (atom_end && cdf >= alpha - kCdfTol) return rv.value(order[pos]);
  }
  return rv.value(order.back());
}

double superquantile(const DiscreteRV& rv, double alpha) {
  const double q = quantile(rv, alpha);
  double excess = 0.0;
  for (std::size_t w = 0; w < rv.size(); ++w) {
    excess += rv.space().weight(w) * std::max(0.0, rv.value(w) - q);
  }
  return q + excess / (1.0 - alpha);
}

double evaluate_risk(const RiskSpec& spec, const DiscreteRV& rv) {
  spec.validate();
  switch (spec.kind) {
    case RiskKind::kExpectation:
      return expectation(rv);
    case RiskKind::kWorstCase:
      return worst_case(rv);
    case RiskKind::kQuantile:
      return quantile(rv, spec.alpha);
    case RiskKind::kSuperquantile:
      return superquantile(rv, spec.alpha);
  }
  throw DomainError("unknown risk kind");
}

}  // namespace riskrule
