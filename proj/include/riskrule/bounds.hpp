#pragma once

#include <span>
#include <string>
#include <vector>

#include "riskrule/rules.hpp"
#include "riskrule/searchmodel.hpp"
#include "riskrule/types.hpp"

namespace riskrule {

struct BoundInputs {
  double sigma = 0.0;         // function approximation error
  double tau = 0.0;           // training suboptimality, e.g. U - L
  double kappa0 = 0.0;        // Lipschitz modulus of the objective in xi
  double kappa0_prime = 0.0;  // joint modulus
  double lambda = 0.0;        // modulus of the rule
  double diam = 0.0;

  // Throws DomainError on negative or non-finite entries.
  void validate() const;
};

// sqrt(I); mode B only.
double kappa0(const SearchInstance& inst);

// Largest pairwise Euclidean distance; 0 for a single point.
double diameter(std::span<const Vector> points);

// How diam enters a certificate: max-pairwise scan of the points, or the
// radius of the ball they were sampled from.
enum class DiamConvention { kScan, kRadius };

// 2 sigma + tau + 2 kappa0 diam
double mdr_amdr_bound(const BoundInputs& in);
// 2 sigma + tau + (kappa0 + kappa0' sqrt(1 + lambda^2)) diam
double direct_rule_bound(const BoundInputs& in);

// max_i ||B_i||_2
double rule_lipschitz(const AffineRule& rule);

// kappa_G * diam < 2 eps with kappa_G = max_i ||B_i||_2.
bool constant_pattern_condition(const AffineRule& rule, double diam, double epsilon);

struct CertificateRow {
  int point_id = 0;  // 1-based
  double optimum = 0.0;
  double rule_value = 0.0;
  double suboptimality = 0.0;
  double bound = 0.0;
  double slack = 0.0;  // bound - suboptimality
};

struct CertificateReport {
  std::vector<CertificateRow> rows;
  bool holds = true;  // every slack >= 0
};

// For each test point: solves the single-target problem and compares the
// optimum with L - sigma - kappa0 diam. rule_value is the certified lower
// bound and suboptimality is rule_value - optimum, against bound 0.
CertificateReport lower_bound_certificate(double L, const BoundInputs& in,
                                          const SearchInstance& inst,
                                          std::span<const Vector> test,
                                          unsigned jobs = 1);

struct EvalRow {
  std::string rule;  // "direct", "mdr" or "amdr"
  int point_id = 0;
  bool feasible = false;
  double value = 0.0;
  double optimum = 0.0;
  double suboptimality = 0.0;  // NaN when infeasible
};

struct EvalSummary {
  std::string rule;
  int points = 0;
  int feasible = 0;
  double min = 0.0;
  double avg = 0.0;
  double max = 0.0;
};

struct Evaluation {
  std::vector<EvalRow> rows;  // grouped by rule, then by point
  std::vector<EvalSummary> summaries;
  std::vector<double> optima;
};

// Direct rule H(B xi + b), MDR and AMDR over the candidates H(B xi(w) + b),
// each against the exact optimum at every test point.
Evaluation evaluate_rules(const AffineRule& rule, std::span<const Vector> training,
                          const SearchInstance& inst, std::span<const Vector> test,
                          Problem problem, unsigned jobs = 1);

// Suboptimality of one rule's rows against a fixed bound. For "direct" the
// bound only applies where the prescribed pattern equals the pattern shared
// by all training points; elsewhere bound and slack are NaN and ignored.
CertificateReport suboptimality_certificate(const Evaluation& eval,
                                            const std::string& rule_name,
                                            double bound,
                                            const AffineRule& rule = {},
                                            std::span<const Vector> training = {},
                                            std::span<const Vector> test = {});

std::vector<EvalSummary> summarize(std::span<const EvalRow> rows);

// rule,point_id,feasible,value,optimum,subopt
std::string evaluation_csv(const Evaluation& eval);
// rule,points,feasible,min,avg,max
std::string summary_csv(std::span<const EvalSummary> summaries);
std::string summary_markdown(std::span<const EvalSummary> summaries);
// xi_id,optimum,rule_value,suboptimality,bound,slack
std::string certificate_csv(const CertificateReport& report);

}  // namespace riskrule
