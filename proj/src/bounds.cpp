#include "riskrule/bounds.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "riskrule/errors.hpp"
#include "riskrule/exactsolver.hpp"
#include "riskrule/parallel.hpp"

namespace riskrule {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

std::vector<double> solve_all(const SearchInstance& inst, std::span<const Vector> test,
                              Problem problem, unsigned jobs) {
  std::vector<double> optima(test.size());
  parallel_for(test.size(), jobs, [&](std::size_t k) {
    const auto s = solve_exact(inst, test[k], problem);
    optima[k] = s.status == SolveStatus::kInfeasible
                    ? std::numeric_limits<double>::infinity()
                    : s.value;
  });
  return optima;
}

}  // namespace

void BoundInputs::validate() const {
  for (double v : {sigma, tau, kappa0, kappa0_prime, lambda, diam}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("bound inputs must be finite and nonnegative");
    }
  }
}

double kappa0(const SearchInstance& inst) {
  if (inst.mode() != ParamMode::kB) {
    throw DomainError("the Lipschitz modulus is only available for mode B");
  }
  return std::sqrt(static_cast<double>(inst.scenario_count()));
}

double diameter(std::span<const Vector> points) {
  if (points.empty()) throw DomainError("diameter of an empty set");
  double best = 0.0;
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      best = std::max(best, (points[a] - points[b]).norm());
    }
  }
  return best;
}

double mdr_amdr_bound(const BoundInputs& in) {
  in.validate();
  return 2.0 * in.sigma + in.tau + 2.0 * in.kappa0 * in.diam;
}

double direct_rule_bound(const BoundInputs& in) {
  in.validate();
  return 2.0 * in.sigma + in.tau +
         (in.kappa0 + in.kappa0_prime * std::sqrt(1.0 + in.lambda * in.lambda)) * in.diam;
}

double rule_lipschitz(const AffineRule& rule) {
  if (rule.rows() == 0) return 0.0;
  return rule.B().rowwise().norm().maxCoeff();
}

bool constant_pattern_condition(const AffineRule& rule, double diam, double epsilon) {
  return rule_lipschitz(rule) * diam < 2.0 * epsilon;
}

CertificateReport lower_bound_certificate(double L, const BoundInputs& in,
                                          const SearchInstance& inst,
                                          std::span<const Vector> test, unsigned jobs) {
  in.validate();
  const double certified = L - in.sigma - in.kappa0 * in.diam;
  const auto optima = solve_all(inst, test, Problem::kSP1, jobs);
  CertificateReport report;
  for (std::size_t k = 0; k < test.size(); ++k) {
    CertificateRow row;
    row.point_id = static_cast<int>(k) + 1;
    row.optimum = optima[k];
    row.rule_value = certified;
    row.suboptimality = certified - optima[k];
    row.bound = 0.0;
    row.slack = optima[k] - certified;
    if (!(row.slack >= 0.0)) report.holds = false;
    report.rows.push_back(row);
  }
  return report;
}

Evaluation evaluate_rules(const AffineRule& rule, std::span<const Vector> training,
                          const SearchInstance& inst, std::span<const Vector> test,
                          Problem problem, unsigned jobs) {
  Evaluation eval;
  eval.optima = solve_all(inst, test, problem, jobs);
  const auto candidates = candidate_decisions(rule, training);
  const RuleChoice fixed = mdr(candidates, training, inst, problem);

  auto row_for = [&](const char* name, std::size_t k, const Decision& y) {
    EvalRow row;
    row.rule = name;
    row.point_id = static_cast<int>(k) + 1;
    row.feasible = feasible(inst, test[k], y, problem);
    row.value = nondetect_prob(inst, test[k], y, 0);
    row.optimum = eval.optima[k];
    row.suboptimality = row.feasible ? row.value - row.optimum : kNaN;
    return row;
  };
  for (std::size_t k = 0; k < test.size(); ++k) {
    eval.rows.push_back(row_for("direct", k, apply(rule, test[k]).y));
  }
  for (std::size_t k = 0; k < test.size(); ++k) {
    eval.rows.push_back(row_for("mdr", k, fixed.y));
  }
  for (std::size_t k = 0; k < test.size(); ++k) {
    Decision y;
    try {
      y = amdr(candidates, inst, test[k], problem).y;
    } catch (const InfeasibleError&) {
      y = fixed.y;
    }
    eval.rows.push_back(row_for("amdr", k, y));
  }
  eval.summaries = summarize(eval.rows);
  return eval;
}

CertificateReport suboptimality_certificate(const Evaluation& eval,
                                            const std::string& rule_name, double bound,
                                            const AffineRule& rule,
                                            std::span<const Vector> training,
                                            std::span<const Vector> test) {
  const bool gated = rule_name == "direct";
  std::optional<Decision> common;
  if (gated) {
    const auto patterns = candidate_decisions(rule, training);
    if (!patterns.empty() &&
        std::all_of(patterns.begin(), patterns.end(),
                    [&](const Decision& y) { return y == patterns[0]; })) {
      common = patterns[0];
    }
  }
  CertificateReport report;
  for (const auto& r : eval.rows) {
    if (r.rule != rule_name) continue;
    CertificateRow row;
    row.point_id = r.point_id;
    row.optimum = r.optimum;
    row.rule_value = r.value;
    row.suboptimality = r.suboptimality;
    row.bound = bound;
    if (gated) {
      const auto k = static_cast<std::size_t>(r.point_id - 1);
      if (!common || k >= test.size() || apply(rule, test[k]).y != *common) {
        row.bound = kNaN;
      }
    }
    row.slack = row.bound - row.suboptimality;
    if (!std::isnan(row.bound) && !(row.slack >= 0.0)) report.holds = false;
    report.rows.push_back(row);
  }
  return report;
}

std::vector<EvalSummary> summarize(std::span<const EvalRow> rows) {
  std::vector<EvalSummary> out;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const EvalSummary& s) { return s.rule == row.rule; });
    if (it == out.end()) {
      out.push_back({row.rule, 0, 0, kNaN, 0.0, kNaN});
      it = out.end() - 1;
    }
    ++it->points;
    if (!row.feasible) continue;
    ++it->feasible;
    it->min = it->feasible == 1 ? row.suboptimality : std::min(it->min, row.suboptimality);
    it->max = it->feasible == 1 ? row.suboptimality : std::max(it->max, row.suboptimality);
    it->avg += row.suboptimality;
  }
  for (auto& s : out) s.avg = s.feasible ? s.avg / s.feasible : kNaN;
  return out;
}

std::string evaluation_csv(const Evaluation& eval) {
  std::string out = "rule,point_id,feasible,value,optimum,subopt\n";
  for (const auto& r : eval.rows) {
    out += fmt::format("{},{},{},{},{},{}\n", r.rule, r.point_id,
                       r.feasible ? "true" : "false", num(r.value), num(r.optimum),
                       num(r.suboptimality));
  }
  return out;
}

std::string summary_csv(std::span<const EvalSummary> summaries) {
  std::string out = "rule,points,feasible,min,avg,max\n";
  for (const auto& s : summaries) {
    out += fmt::format("{},{},{},{},{},{}\n", s.rule, s.points, s.feasible, num(s.min),
                       num(s.avg), num(s.max));
  }
  return out;
}

std::string summary_markdown(std::span<const EvalSummary> summaries) {
  std::string out =
      "| rule | number feasible | subopt min | subopt avg | subopt max |\n"
      "|------|-----------------|------------|------------|------------|\n";
  for (const auto& s : summaries) {
    out += fmt::format("| {} | {}/{} | {:.4f} | {:.4f} | {:.4f} |\n", s.rule, s.feasible,
                       s.points, s.min, s.avg, s.max);
  }
  return out;
}

std::string certificate_csv(const CertificateReport& report) {
  std::string out = "xi_id,optimum,rule_value,suboptimality,bound,slack\n";
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{},{},{},{}\n", r.point_id, num(r.optimum), num(r.rule_value),
                       num(r.suboptimality), num(r.bound), num(r.slack));
  }
  return out;
}

}  // namespace riskrule
