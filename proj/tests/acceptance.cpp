// Acceptance checks: one PASS/FAIL line per criterion; exit status 1 if any
// fails. Tolerances and time budgets are fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "riskrule/bounds.hpp"
#include "riskrule/datagen.hpp"
#include "riskrule/errors.hpp"
#include "riskrule/exactsolver.hpp"
#include "riskrule/lpformat.hpp"
#include "riskrule/probspace.hpp"
#include "riskrule/rng.hpp"
#include "riskrule/rules.hpp"
#include "riskrule/searchmodel.hpp"
#include "riskrule/simplex.hpp"
#include "riskrule/train.hpp"
#include "support.hpp"

using namespace riskrule;

namespace {

constexpr double kRiskTol = 1e-9;
constexpr double kGapIdentityTol = 1e-12;
constexpr double kMarginTol = 1e-9;
constexpr double kSeparationTol = 1e-8;
constexpr double kObjectiveTol = 1e-9;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

using Clock = std::chrono::steady_clock;

bool report(const char* id, const char* title, double budget_s,
            const std::function<Outcome()>& check) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = check();
  } catch (const std::exception& e) {
    out.fail(fmt::format("exception: {}", e.what()));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (secs > budget_s) out.fail(fmt::format("took {:.1f}s, budget {:.0f}s", secs, budget_s));
  fmt::print("{} {} {} ({:.2f}s){}{}\n", id, out.pass ? "PASS" : "FAIL", title, secs,
             out.detail.empty() ? "" : ": ", out.detail);
  std::fflush(stdout);
  return out.pass;
}

DiscreteRV random_rv(Rng& rng) {
  const int n = 1 + static_cast<int>(rng.below(12));
  std::vector<double> w(n), v(n);
  for (int k = 0; k < n; ++k) {
    w[k] = rng.uniform(0.05, 1.0);
    // Repeated atoms exercise the tie handling.
    v[k] = rng.below(4) == 0 ? 1.0 : rng.uniform(-5.0, 5.0);
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return DiscreteRV(std::make_shared<FiniteProbSpace>(std::move(w)), std::move(v));
}

Outcome ac1() {
  Outcome out;
  Rng rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const DiscreteRV x = random_rv(rng);
    const double a = rng.uniform(0.01, 0.99);
    const std::vector<RiskSpec> specs{RiskSpec::expectation(), RiskSpec::worst_case(),
                                      RiskSpec::quantile(a), RiskSpec::superquantile(a)};
    const double c = rng.uniform(-3.0, 3.0);
    std::vector<double> shifted, larger, constant;
    for (double v : x.values()) {
      shifted.push_back(v + c);
      larger.push_back(v + rng.uniform(0.0, 1.0));
      constant.push_back(c);
    }
    const auto xs = x.with_values(shifted);
    const auto xl = x.with_values(larger);
    const auto xc = x.with_values(constant);
    for (const auto& s : specs) {
      const double r = evaluate_risk(s, x);
      if (std::abs(evaluate_risk(s, xc) - c) > kRiskTol) out.fail(s.name() + " constancy");
      if (evaluate_risk(s, xl) < r - kRiskTol) out.fail(s.name() + " monotonicity");
      if (std::abs(evaluate_risk(s, xs) - (r + c)) > kRiskTol) out.fail(s.name() + " translation");
    }
    const double e = expectation(x);
    const double sq = superquantile(x, a);
    const double wc = worst_case(x);
    if (e > sq + kRiskTol || sq > wc + kRiskTol) out.fail("ordering");
    // Minimization formula over the atoms, where the minimum is attained.
    double ru = std::numeric_limits<double>::infinity();
    for (double z : x.values()) {
      double tail = 0.0;
      for (std::size_t w = 0; w < x.size(); ++w) {
        tail += x.space().weight(w) * std::max(0.0, x.value(w) - z);
      }
      ru = std::min(ru, z + tail / (1.0 - a));
    }
    if (std::abs(ru - sq) > kRiskTol) out.fail(fmt::format("minimization formula {} vs {}", ru, sq));
  }
  const auto four = DiscreteRV::uniform({1.0, 2.0, 3.0, 4.0});
  if (superquantile(four, 0.5) != 3.5) out.fail("superquantile at 0.5");
  if (superquantile(four, 0.75) != 4.0) out.fail("superquantile at 0.75");
  return out;
}

Outcome ac2() {
  Outcome out;
  Rng rng(202);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int rows = 1 + static_cast<int>(rng.below(3));
    const int cols = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(6 / rows)));
    const int T = 2 + static_cast<int>(rng.below(4));
    const int I = 1 + static_cast<int>(rng.below(10));
    const auto mode = trial % 2 ? ParamMode::kA : ParamMode::kB;
    const auto inst = testing::random_instance(rng, rows, cols, T, I, mode, rng.uniform(0.3, 1.0));
    const Vector xi = testing::random_param(rng, inst);
    for (auto problem : {Problem::kSP1, Problem::kSP2}) {
      const auto bb = solve_exact(inst, xi, problem);
      const auto bf = brute_force(inst, xi, problem);
      if ((bb.status == SolveStatus::kInfeasible) != (bf.status == SolveStatus::kInfeasible)) {
        out.fail(fmt::format("instance {} feasibility differs", trial));
        continue;
      }
      if (bf.status == SolveStatus::kInfeasible) continue;
      if (bb.value != bf.value) {
        out.fail(fmt::format("instance {} {}: {:.17g} vs {:.17g}", trial, to_string(problem),
                             bb.value, bf.value));
      }
      if (bb.status != SolveStatus::kOptimal) out.fail("status not optimal");
      ++checked;
    }
  }
  if (out.pass) out.detail = fmt::format("{} solves compared", checked);
  return out;
}

// Draws an instance with n affinely independent training points for which
// every point has a feasible path.
struct Trained {
  SearchInstance inst;
  std::vector<Vector> points;
};

Trained trainable(Rng& rng, Problem problem) {
  for (;;) {
    auto inst = testing::random_instance(rng, 3, 3, 4, 6, ParamMode::kB, 0.97);
    std::vector<Vector> pts;
    for (int k = 0; k < 5; ++k) pts.push_back(testing::random_param(rng, inst));
    bool ok = true;
    for (const auto& p : pts) {
      if (solve_exact(inst, p, problem).status == SolveStatus::kInfeasible) ok = false;
    }
    if (ok && affine_rank(pts) == 5) return {std::move(inst), std::move(pts)};
  }
}

Outcome ac3() {
  Outcome out;
  Rng rng(303);
  const std::vector<RiskSpec> risks{RiskSpec::expectation(), RiskSpec::worst_case(),
                                    RiskSpec::superquantile(0.8)};
  for (int trial = 0; trial < 20; ++trial) {
    const Problem problem = trial % 2 ? Problem::kSP2 : Problem::kSP1;
    const auto [inst, pts] = trainable(rng, problem);
    TrainingConfig cfg;
    cfg.risk0 = risks[trial % risks.size()];
    cfg.margin = MarginSpec{0.01, 1.0};
    cfg.theta = 0.0;
    const auto exact = decompose(inst, pts, cfg, problem);
    if (exact.partial) out.fail(fmt::format("instance {}: separation failed", trial));
    if (exact.gap != 0.0) out.fail(fmt::format("instance {}: gap {:.3g} with theta 0", trial, exact.gap));

    cfg.theta = 0.01;
    const auto reg = decompose(inst, pts, cfg, problem);
    double l1 = 0.0;
    for (int i = 0; i < reg.rule.rows(); ++i) l1 += reg.rule.B().row(i).cwiseAbs().sum();
    if (std::abs(reg.U - reg.L - cfg.theta * l1) > kGapIdentityTol) {
      out.fail(fmt::format("instance {}: U - L - theta |B| = {:.3g}", trial,
                           reg.U - reg.L - cfg.theta * l1));
    }
    for (const auto* res : {&exact, &reg}) {
      for (std::size_t w = 0; w < pts.size(); ++w) {
        const Vector g = res->rule.B() * pts[w] + res->rule.b();
        if (heaviside(g) != res->decisions[w]) out.fail(fmt::format("instance {}: decision {}", trial, w));
        if (!in_margin_set(g, cfg.margin)) out.fail(fmt::format("instance {}: margin at {}", trial, w));
      }
    }
  }
  return out;
}

Outcome ac4() {
  Outcome out;
  Rng rng(404);
  int optimal = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int r = 1 + static_cast<int>(rng.below(5));
    const int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(r + 2)));
    std::vector<Vector> pts;
    std::vector<std::uint8_t> labels;
    for (int k = 0; k < n; ++k) {
      Vector p(r);
      for (int j = 0; j < r; ++j) p[j] = rng.uniform(-1.0, 1.0);
      pts.push_back(p);
      labels.push_back(static_cast<std::uint8_t>(rng.below(2)));
    }
    const MarginSpec spec{rng.uniform(0.01, 0.2), trial % 3 ? 2.0 : MarginSpec::kInfinity};
    const auto res = l1_separation(pts, labels, spec);
    const double oracle = testing::l1_separation_oracle(pts, labels, spec);
    if (res.status != LpStatus::kOptimal) {
      if (std::isfinite(oracle)) out.fail(fmt::format("problem {}: solver reports infeasible", trial));
      continue;
    }
    ++optimal;
    if (std::abs(res.l1_norm - oracle) > kSeparationTol) {
      out.fail(fmt::format("problem {}: {:.12g} vs oracle {:.12g}", trial, res.l1_norm, oracle));
    }
    for (int k = 0; k < n; ++k) {
      const double v = pts[k].dot(res.B_row) + res.offset;
      const double a = labels[k] ? v : -v;
      if (a < spec.epsilon - kMarginTol || a > spec.delta + kMarginTol) {
        out.fail(fmt::format("problem {}: margin violated at {}", trial, k));
      }
    }
  }
  const std::vector<Vector> line{Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)};
  const std::vector<std::uint8_t> split{0, 1};
  const auto hand = l1_separation(line, split, MarginSpec{0.5, 1.0});
  if (hand.status != LpStatus::kOptimal || std::abs(hand.l1_norm - 0.5) > kSeparationTol) {
    out.fail(fmt::format("one-dimensional example gives {}", hand.l1_norm));
  }
  if (out.pass) out.detail = fmt::format("{} feasible of 100", optimal);
  return out;
}

// Shared setup for the certificate criteria.
struct CertificateSetup {
  SearchInstance inst;
  std::vector<Vector> train;
  std::vector<Vector> test;
  DecompResult trained;
  BoundInputs in;
};

const CertificateSetup& certificate_setup() {
  static const CertificateSetup setup = [] {
    Rng rng(505);
    auto inst = testing::random_instance(rng, 4, 4, 5, 20, ParamMode::kB, 0.45);
    auto train = simplex_uniform(0.05, 20, 11, 20);
    auto test = simplex_uniform(0.05, 20, 12, 20);
    TrainingConfig cfg;
    cfg.jobs = 0;
    auto trained = decompose(inst, train, cfg, Problem::kSP1);
    BoundInputs in;
    in.tau = std::max(0.0, trained.U - trained.L);
    in.kappa0 = kappa0(inst);
    in.kappa0_prime = in.kappa0;
    in.lambda = rule_lipschitz(trained.rule);
    std::vector<Vector> all(train);
    all.insert(all.end(), test.begin(), test.end());
    in.diam = diameter(all);
    return CertificateSetup{std::move(inst), std::move(train), std::move(test),
                            std::move(trained), in};
  }();
  return setup;
}

Outcome ac5() {
  Outcome out;
  const auto& s = certificate_setup();
  const auto cert = lower_bound_certificate(s.trained.L, s.in, s.inst, s.test, 0);
  double min_slack = std::numeric_limits<double>::infinity();
  for (const auto& row : cert.rows) {
    min_slack = std::min(min_slack, row.slack);
    if (!(s.trained.L - s.in.kappa0 * s.in.diam <= row.optimum)) {
      out.fail(fmt::format("test point {}", row.point_id));
    }
  }
  if (!cert.holds) out.fail("certificate reports a negative slack");
  out.detail += fmt::format("L={:.6f} diam={:.6f} min slack={:.6f}", s.trained.L, s.in.diam, min_slack);
  return out;
}

Outcome ac6() {
  Outcome out;
  const auto& s = certificate_setup();
  const auto eval = evaluate_rules(s.trained.rule, s.train, s.inst, s.test, Problem::kSP1, 0);
  const double bound = mdr_amdr_bound(s.in);
  for (const char* name : {"mdr", "amdr"}) {
    if (!suboptimality_certificate(eval, name, bound).holds) out.fail(fmt::format("{} exceeds {}", name, bound));
  }
  const auto candidates = candidate_decisions(s.trained.rule, s.train);
  for (const auto& row : eval.rows) {
    if (row.rule != "amdr") continue;
    if (!row.feasible) out.fail(fmt::format("amdr infeasible at {}", row.point_id));
    const Vector& xi = s.test[static_cast<std::size_t>(row.point_id - 1)];
    for (const auto& y : candidates) {
      if (!feasible(s.inst, xi, y, Problem::kSP1)) continue;
      if (row.value > nondetect_prob(s.inst, xi, y, 0)) {
        out.fail(fmt::format("amdr not minimal at {}", row.point_id));
      }
    }
  }
  BoundInputs replay;
  replay.tau = 0.02;
  replay.kappa0 = 10.0;
  replay.diam = 0.05;
  const std::string printed = fmt::format("{}", mdr_amdr_bound(replay));
  if (printed != "1.02") out.fail("constant replay printed " + printed);
  if (out.pass) out.detail = fmt::format("bound {:.6f}, replay {}", bound, printed);
  return out;
}

Outcome ac7() {
  Outcome out;
  Rng rng(707);
  auto inst = testing::random_instance(rng, 5, 5, 5, 30, ParamMode::kA, 0.45);
  const Vector zero = Vector::Zero(inst.param_dim());
  const auto exact = solve_exact(inst, zero, Problem::kSP2);
  if (exact.status == SolveStatus::kInfeasible) {
    out.fail("instance infeasible at the nominal parameter");
    return out;
  }
  const Decision best = path_to_decision(inst, exact.path);
  TrainingConfig cfg;
  cfg.jobs = 0;
  std::string trail;
  for (int nu = 1; nu <= 8; ++nu) {
    const auto pts = shrinking_uniform(nu, 10, 70 + static_cast<std::uint64_t>(nu), inst.param_dim());
    const auto res = decompose(inst, pts, cfg, Problem::kSP2);
    const Decision y = heaviside(res.rule.b());
    const bool path_ok = path_feasible(inst, y);
    const bool optimal = y == best;
    trail += optimal ? '+' : (path_ok ? 'o' : '.');
    if (nu == 8) {
      if (!path_ok) out.fail("prescription at nu = 8 is not a path");
      if (!optimal) out.fail("prescription at nu = 8 differs from the optimum");
    }
  }
  out.detail += "nu 1..8: " + trail;
  return out;
}

Outcome ac8() {
  Outcome out;
  Rng rng(808);
  const std::vector<RiskSpec> risks{RiskSpec::expectation(), RiskSpec::worst_case(),
                                    RiskSpec::superquantile(0.7), RiskSpec::quantile(0.5)};
  for (int trial = 0; trial < 20; ++trial) {
    const Problem problem = trial % 2 ? Problem::kSP2 : Problem::kSP1;
    auto [inst, pts] = trainable(rng, problem);
    if (!recovery_check(inst, pts, risks[trial % risks.size()], problem)) {
      out.fail(fmt::format("instance {}", trial));
    }
  }
  return out;
}

Outcome ac9() {
  Outcome out;
  Rng rng(909);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = testing::random_instance(rng, 3, 3, 4, 6,
                                               trial % 2 ? ParamMode::kA : ParamMode::kB, 0.9);
    const Vector xi = testing::random_param(rng, inst);
    for (auto problem : {Problem::kSP1, Problem::kSP2}) {
      const auto sol = solve_exact(inst, xi, problem);
      if (sol.status == SolveStatus::kInfeasible) continue;
      const auto model = read_lp(emit_milp(inst, xi, problem));
      const std::size_t K = problem == Problem::kSP2 ? 2 : 1;
      const std::size_t C = inst.cell_count(), T = inst.horizon(), I = inst.scenario_count();
      if (model.variable_count() != C * T + K * I * (T + 1) ||
          model.binary_count() != model.variable_count()) {
        out.fail(fmt::format("instance {}: variable count {}", trial, model.variable_count()));
      }
      if (model.rows.size() != (K - 1) + T + C * (T - 1) + 2 * K * I) {
        out.fail(fmt::format("instance {}: row count {}", trial, model.rows.size()));
      }
      const auto x = milp_assignment(inst, sol.path, problem);
      if (max_violation(model, x) > kObjectiveTol) out.fail(fmt::format("instance {}: optimum violates rows", trial));
      const double obj = evaluate_objective(model, x);
      if (std::abs(obj - nondetect_prob(inst, xi, sol.path, 0)) > kObjectiveTol) {
        out.fail(fmt::format("instance {}: objective {:.17g}", trial, obj));
      }
    }
  }
  Rng trng(910);
  const auto [inst, pts] = trainable(trng, Problem::kSP2);
  TrainingMilpConfig mc;
  const auto model = read_lp(emit_training_milp(inst, pts, mc));
  const std::size_t n = pts.size(), C = inst.cell_count(), T = inst.horizon(),
                    I = inst.scenario_count(), r = inst.param_dim();
  if (model.binary_count() != n * (C * T + 2 * I * (T + 1))) out.fail("training binaries");
  if (model.variable_count() - model.binary_count() != C * T * (2 * r + 1)) out.fail("training continuous");
  return out;
}

Outcome ac10() {
  Outcome out;
  Rng rng(1010);
  int violations = 0;
  std::vector<SearchInstance> pool;
  for (int k = 0; k < 10; ++k) {
    pool.push_back(testing::random_instance(rng, 3, 4, 5, 3 + 3 * k, ParamMode::kB, 0.5));
  }
  for (int trial = 0; trial < 10000; ++trial) {
    const auto& inst = pool[static_cast<std::size_t>(trial) % pool.size()];
    const Vector a = testing::random_param(rng, inst);
    const Vector b = testing::random_param(rng, inst);
    SearchPath path;
    int cell = static_cast<int>(rng.below(static_cast<std::uint64_t>(inst.cell_count())));
    for (int t = 0; t < inst.horizon(); ++t) {
      path.push_back(cell);
      const auto& nb = inst.grid().neighbors(cell);
      cell = nb[rng.below(nb.size())];
    }
    const double lhs = std::abs(nondetect_prob(inst, a, path, 0) - nondetect_prob(inst, b, path, 0));
    if (lhs > std::sqrt(static_cast<double>(inst.scenario_count())) * (a - b).norm()) ++violations;
  }
  if (violations > 0) out.fail(fmt::format("{} violations", violations));
  return out;
}

}  // namespace

int main() {
  bool ok = true;
  ok &= report("AC1", "risk measure properties", 5, ac1);
  ok &= report("AC2", "branch-and-bound equals enumeration", 60, ac2);
  ok &= report("AC3", "decomposition identities", 120, ac3);
  ok &= report("AC4", "L1 separation against vertex oracle", 60, ac4);
  ok &= report("AC5", "lower bound certificate", 300, ac5);
  ok &= report("AC6", "MDR and AMDR suboptimality certificate", 300, ac6);
  ok &= report("AC7", "prescriptions converge to the nominal optimum", 600, ac7);
  ok &= report("AC8", "tabular recovery", 120, ac8);
  ok &= report("AC9", "MILP round trip", 60, ac9);
  ok &= report("AC10", "Lipschitz property in mode B", 60, ac10);
  return ok ? 0 : 1;
}
