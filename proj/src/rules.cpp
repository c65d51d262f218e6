#include "riskrule/rules.hpp"

#include <cmath>

#include <fmt/format.h>

#include "riskrule/errors.hpp"

namespace riskrule {

void MarginSpec::validate() const {
  if (!(epsilon > 0.0 && epsilon < delta)) {
    throw DomainError(fmt::format(
        "margin needs 0 < epsilon < delta, got epsilon={} delta={}", epsilon, delta));
  }
}

AffineRule::AffineRule(Matrix B, Vector b) : B_(std::move(B)), b_(std::move(b)) {
  if (B_.rows() != b_.size()) {
    throw StructuralError(fmt::format("rule has {} rows but offset length {}",
                                      B_.rows(), b_.size()));
  }
}

AffineRule::AffineRule(int m, int r) : B_(Matrix::Zero(m, r)), b_(Vector::Zero(m)) {}

Vector AffineRule::evaluate(const Vector& xi) const {
  if (xi.size() != B_.cols()) {
    throw StructuralError(fmt::format("rule expects parameter length {}, got {}",
                                      B_.cols(), xi.size()));
  }
  return B_ * xi + b_;
}

double AffineRule::l1_regularizer() const { return B_.cwiseAbs().sum(); }

ConstantRule ConstantRule::encoding(const Decision& y, double epsilon) {
  Vector g(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) g[i] = y[i] ? epsilon : -epsilon;
  return ConstantRule(std::move(g));
}

AffineRule ConstantRule::as_affine(int param_dim) const {
  return AffineRule(Matrix::Zero(g_.size(), param_dim), g_);
}

Decision heaviside(const Vector& v) {
  Decision y(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) y[i] = v[i] > 0.0 ? 1 : 0;
  return y;
}

RuleOutput apply(const AffineRule& rule, const Vector& xi) {
  Vector g = rule.evaluate(xi);
  Decision y = heaviside(g);
  return {std::move(g), std::move(y)};
}

bool in_margin_set(const Vector& g, const MarginSpec& spec) {
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double a = std::abs(g[i]);
    if (!(a >= spec.epsilon && a <= spec.delta)) return false;
  }
  return true;
}

std::vector<bool> margin_flags(const AffineRule& rule, const Vector& xi,
                               const MarginSpec& spec) {
  const Vector g = rule.evaluate(xi);
  std::vector<bool> flags(static_cast<std::size_t>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) flags[i] = std::abs(g[i]) < spec.epsilon;
  return flags;
}

bool bigm_equivalence_check(const Vector& g, const Decision& y,
                            const MarginSpec& spec) {
  if (!spec.finite_delta()) {
    throw DomainError("big-M form needs a finite delta");
  }
  if (static_cast<std::size_t>(g.size()) != y.size()) {
    throw StructuralError("g and y differ in length");
  }
  // With y_i binary the two rows reduce to [eps, delta] or [-delta, -eps];
  // comparing against those endpoints avoids rounding in -eps + (delta + eps).
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double lo = y[i] ? spec.epsilon : -spec.delta;
    const double hi = y[i] ? spec.delta : -spec.epsilon;
    if (g[i] < lo || g[i] > hi) return false;
  }
  return true;
}

std::vector<Decision> candidate_decisions(const AffineRule& rule,
                                          std::span<const Vector> training) {
  std::vector<Decision> out;
  out.reserve(training.size());
  for (const auto& xi : training) out.push_back(heaviside(rule.evaluate(xi)));
  return out;
}

RuleChoice mdr(std::span<const Decision> candidates,
               std::span<const Vector> training, const SearchInstance& inst,
               Problem problem) {
  if (candidates.size() != training.size()) {
    throw StructuralError("one candidate per training point expected");
  }
  RuleChoice best;
  for (std::size_t w = 0; w < candidates.size(); ++w) {
    if (!feasible(inst, training[w], candidates[w], problem)) continue;
    const double v = nondetect_prob(inst, training[w], candidates[w], 0);
    if (best.omega < 0 || v < best.value) {
      best = {static_cast<int>(w), candidates[w], v};
    }
  }
  if (best.omega < 0) {
    throw InfeasibleError("no training point carries a feasible decision");
  }
  return best;
}

RuleChoice mdr(const AffineRule& rule, std::span<const Vector> training,
               const SearchInstance& inst, Problem problem) {
  const auto candidates = candidate_decisions(rule, training);
  return mdr(candidates, training, inst, problem);
}

RuleChoice amdr(std::span<const Decision> candidates, const SearchInstance& inst,
                const Vector& xi, Problem problem) {
  RuleChoice best;
  for (std::size_t w = 0; w < candidates.size(); ++w) {
    if (!feasible(inst, xi, candidates[w], problem)) continue;
    const double v = nondetect_prob(inst, xi, candidates[w], 0);
    if (best.omega < 0 || v < best.value) {
      best = {static_cast<int>(w), candidates[w], v};
    }
  }
  if (best.omega < 0) {
    throw InfeasibleError("no candidate decision is feasible at the query point");
  }
  return best;
}

RuleChoice amdr(const AffineRule& rule, std::span<const Vector> training,
                const SearchInstance& inst, const Vector& xi, Problem problem) {
  const auto candidates = candidate_decisions(rule, training);
  return amdr(candidates, inst, xi, problem);
}

nlohmann::json rule_to_json(const AffineRule& rule, const MarginSpec& margin) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(rule.rows()) * rule.cols());
  for (int i = 0; i < rule.rows(); ++i) {
    for (int j = 0; j < rule.cols(); ++j) flat.push_back(rule.B()(i, j));
  }
  std::vector<double> offset(rule.b().data(), rule.b().data() + rule.b().size());
  nlohmann::json delta = margin.finite_delta() ? nlohmann::json(margin.delta)
                                               : nlohmann::json("inf");
  return {{"m", rule.rows()}, {"r", rule.cols()}, {"B", std::move(flat)},
          {"b", std::move(offset)}, {"epsilon", margin.epsilon},
          {"delta", std::move(delta)}};
}

AffineRule rule_from_json(const nlohmann::json& j, MarginSpec* margin) {
  try {
    const int m = j.at("m").get<int>();
    const int r = j.at("r").get<int>();
    const auto flat = j.at("B").get<std::vector<double>>();
    const auto offset = j.at("b").get<std::vector<double>>();
    if (static_cast<long>(flat.size()) != static_cast<long>(m) * r ||
        static_cast<int>(offset.size()) != m) {
      throw StructuralError("rule file dimensions do not match m and r");
    }
    Matrix B(m, r);
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < r; ++k) B(i, k) = flat[static_cast<std::size_t>(i) * r + k];
    }
    Vector b = Eigen::Map<const Vector>(offset.data(), m);
    if (margin) {
      margin->epsilon = j.at("epsilon").get<double>();
      const auto& d = j.at("delta");
      margin->delta = d.is_string() ? MarginSpec::kInfinity : d.get<double>();
    }
    return AffineRule(std::move(B), std::move(b));
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(fmt::format("malformed rule file: {}", e.what()));
  }
}

}  // namespace riskrule
