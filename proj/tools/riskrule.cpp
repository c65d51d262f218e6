// Command-line driver: instance and data generation, training, evaluation,
// certificates and LP export.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "riskrule/bounds.hpp"
#include "riskrule/datagen.hpp"
#include "riskrule/errors.hpp"
#include "riskrule/exactsolver.hpp"
#include "riskrule/searchmodel.hpp"
#include "riskrule/train.hpp"

namespace fs = std::filesystem;
using namespace riskrule;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

// JSON config file: top-level keys are global options, nested objects hold
// the options of the subcommand with that name.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool,
                        std::string) const override {
    nlohmann::json j = nlohmann::json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const auto& name = opt->get_lnames().front();
      if (opt->count() > 0) {
        j[name] = opt->as<std::string>();
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
    }
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }

  static void flatten(const nlohmann::json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    if (!j.is_object()) throw CLI::ConfigError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto next = parents;
        next.push_back(key);
        flatten(value, next, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

struct Globals {
  unsigned jobs = 1;
  std::string out = "out";
  bool markdown = false;
};

fs::path prepare_out(const Globals& g) {
  fs::create_directories(g.out);
  return fs::path(g.out);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << text;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot read {}", path.string()));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string cells_of(const SearchInstance& inst, const Decision& y) {
  std::string out;
  for (int t = 0; t < inst.horizon(); ++t) {
    std::string period;
    for (int c = 0; c < inst.cell_count(); ++c) {
      if (y[inst.decision_index(c, t)]) {
        period += fmt::format("{}{}", period.empty() ? "" : "+", c + 1);
      }
    }
    out += fmt::format("{}{}", t ? " " : "", period.empty() ? "-" : period);
  }
  return out;
}

// Training-related flags shared by train and convergence.
struct TrainFlags {
  std::string problem = "SP2";
  std::string risk = "expectation";
  double beta = 0.9;
  double theta = 0.001;
  double epsilon = 0.001;
  double delta = 1.0;
  double step1_tol = 0.0;
  bool heuristic = false;
  double time_limit = 300.0;
  bool allow_dependent = false;

  void attach(CLI::App* app) {
    app->add_option("--problem", problem, "SP1 or SP2")->capture_default_str();
    app->add_option("--risk", risk, "expectation, worst_case, quantile or superquantile")
        ->capture_default_str();
    app->add_option("--beta", beta, "level of quantile/superquantile")->capture_default_str();
    app->add_option("--theta", theta, "regularization weight")->capture_default_str();
    app->add_option("--epsilon", epsilon, "margin epsilon")->capture_default_str();
    app->add_option("--delta", delta, "margin delta")->capture_default_str();
    app->add_option("--step1-tol", step1_tol, "absolute tolerance of the exact solves")
        ->capture_default_str();
    app->add_flag("--heuristic", heuristic, "run the decision-swap local search");
    app->add_option("--time-limit", time_limit, "local search time limit in seconds")
        ->capture_default_str();
    app->add_flag("--allow-dependent", allow_dependent,
                  "skip the affine independence check");
  }

  TrainingConfig config(unsigned jobs) const {
    TrainingConfig c;
    const RiskKind kind = RiskSpec::parse_kind(risk);
    c.risk0 = kind == RiskKind::kQuantile        ? RiskSpec::quantile(beta)
              : kind == RiskKind::kSuperquantile ? RiskSpec::superquantile(beta)
                                                 : RiskSpec{kind, 0.0};
    c.margin = {epsilon, delta};
    c.theta = theta;
    c.step1_tol = step1_tol;
    c.heuristic = heuristic;
    c.heuristic_time_limit = time_limit;
    c.require_independence = !allow_dependent;
    c.jobs = jobs;
    return c;
  }
};

// Rule and training points saved by `train`.
struct TrainedRule {
  AffineRule rule;
  MarginSpec margin;
  double L = 0.0;
  double U = 0.0;
};

TrainedRule load_trained(const fs::path& path) {
  const auto j = read_json(path);
  TrainedRule t;
  t.rule = rule_from_json(j.contains("rule") ? j.at("rule") : j, &t.margin);
  t.L = j.value("L", 0.0);
  t.U = j.value("U", 0.0);
  return t;
}

// gen-instance -------------------------------------------------------------

struct GenInstanceFlags {
  int rows = 9;
  int cols = 9;
  int horizon = 8;
  int scenarios = 100;
  int t1_start = 41;
  int t2_start = 67;
  bool dispersed = false;
  double stay = 0.6;
  std::string mode = "A";
  std::optional<double> alpha_bar;
  double tau = 0.45;
  std::uint64_t seed = 1;
  std::string output = "instance.json";
};

int run_gen_instance(const GenInstanceFlags& f, const Globals& g) {
  Grid grid(f.rows, f.cols);
  const ParamMode mode = parse_param_mode(f.mode);
  const double alpha = f.alpha_bar.value_or(mode == ParamMode::kA ? kNominalRateModeA
                                                                  : kNominalRateModeB);
  auto check_cell = [&](int c, const char* what) {
    if (c < 1 || c > grid.cell_count()) {
      throw DomainError(fmt::format("{} {} is outside 1..{}", what, c, grid.cell_count()));
    }
  };
  check_cell(f.t2_start, "--t2-start");
  std::vector<int> starts1;
  if (f.dispersed) {
    const int mid = f.rows / 2;
    for (int c = 0; c < f.cols; ++c) starts1.push_back(mid * f.cols + c);
  } else {
    check_cell(f.t1_start, "--t1-start");
    starts1.push_back(f.t1_start - 1);
  }
  const std::vector<int> starts2{f.t2_start - 1};
  Rng rng(f.seed);
  ScenarioTensor tensor(2, f.scenarios, f.horizon);
  tensor.set_target(0, gen_scenarios(rng, grid, starts1, f.horizon, f.scenarios, f.stay));
  tensor.set_target(1, gen_scenarios(rng, grid, starts2, f.horizon, f.scenarios, f.stay));
  SearchInstance inst(grid, std::move(tensor), alpha, mode, f.tau);
  const fs::path path = prepare_out(g) / f.output;
  save_instance(inst, path);
  fmt::print("wrote {} ({}x{} grid, T={}, I={}, mode {})\n", path.string(), f.rows, f.cols,
             f.horizon, f.scenarios, to_string(mode));
  return 0;
}

// gen-data -----------------------------------------------------------------

struct GenDataFlags {
  std::string kind = "simplex_uniform";
  int nu = 8;
  double radius = 0.05;
  double a = 0.1;
  double b = 0.1;
  int count = 20;
  std::uint64_t seed = 1;
  int dim = 0;
  std::string output = "points.csv";
};

int run_gen_data(const GenDataFlags& f, const Globals& g) {
  DataSpec spec;
  spec.kind = parse_data_kind(f.kind);
  spec.nu = f.nu;
  spec.radius = f.radius;
  spec.a = f.a;
  spec.b = f.b;
  spec.count = f.count;
  spec.seed = f.seed;
  spec.dim = f.dim;
  const auto points = generate(spec);
  const fs::path path = prepare_out(g) / f.output;
  write_points(path, points, spec.describe());
  fmt::print("wrote {} points of dimension {} to {}\n", points.size(), spec.resolved_dim(),
             path.string());
  return 0;
}

// train --------------------------------------------------------------------

struct TrainCmdFlags {
  std::string instance;
  std::string training;
  std::string prefix = "decomp";
  TrainFlags train;
};

int run_train(const TrainCmdFlags& f, const Globals& g) {
  const auto inst = load_instance(f.instance);
  const auto points = read_points(f.training);
  const auto problem = parse_problem(f.train.problem);
  const auto result = decompose(inst, points, f.train.config(g.jobs), problem);
  const fs::path dir = prepare_out(g);
  save_decomp(result, dir / (f.prefix + ".json"));
  write_file(dir / (f.prefix + ".csv"), decomp_csv(result));
  if (g.markdown) {
    fmt::print("| risk | L | U | gap | regularizer | partial |\n|---|---|---|---|---|---|\n");
    fmt::print("| {} | {:.6f} | {:.6f} | {:.4f} | {:.6f} | {} |\n", result.risk0.name(),
               result.L, result.U, result.gap, result.regularizer, result.partial);
  } else {
    fmt::print("L={:.17g} U={:.17g} gap={:.17g} regularizer={:.17g} partial={}\n", result.L,
               result.U, result.gap, result.regularizer, result.partial);
  }
  return 0;
}

// evaluate -----------------------------------------------------------------

struct EvalFlags {
  std::string instance;
  std::string rule;
  std::string training;
  std::string test;
  std::string problem = "SP1";
};

int run_evaluate(const EvalFlags& f, const Globals& g) {
  const auto inst = load_instance(f.instance);
  const auto trained = load_trained(f.rule);
  const auto training = read_points(f.training);
  const auto test = read_points(f.test);
  const auto eval =
      evaluate_rules(trained.rule, training, inst, test, parse_problem(f.problem), g.jobs);
  const fs::path dir = prepare_out(g);
  write_file(dir / "evaluate.csv", evaluation_csv(eval));
  write_file(dir / "evaluate_summary.csv", summary_csv(eval.summaries));
  if (g.markdown) {
    fmt::print("{}", summary_markdown(eval.summaries));
  } else {
    fmt::print("{}", summary_csv(eval.summaries));
  }
  return 0;
}

// bound-report -------------------------------------------------------------

struct BoundReportFlags {
  std::string instance;
  std::string rule;
  std::string training;
  std::string test;
  std::string convention = "scan";
  std::optional<double> radius;
  double sigma = 0.0;
};

int run_bound_report(const BoundReportFlags& f, const Globals& g) {
  const auto inst = load_instance(f.instance);
  const auto trained = load_trained(f.rule);
  const auto training = read_points(f.training);
  const auto test = read_points(f.test);

  BoundInputs in;
  in.sigma = f.sigma;
  in.tau = std::max(0.0, trained.U - trained.L);
  in.kappa0 = kappa0(inst);
  in.kappa0_prime = in.kappa0;
  in.lambda = rule_lipschitz(trained.rule);
  std::vector<Vector> all(training.begin(), training.end());
  all.insert(all.end(), test.begin(), test.end());
  const double scan = diameter(all);
  if (f.convention == "scan") {
    in.diam = scan;
  } else if (f.convention == "radius") {
    if (!f.radius) throw DomainError("--convention radius needs --radius");
    in.diam = *f.radius;
  } else {
    throw DomainError(fmt::format("unknown diameter convention '{}'", f.convention));
  }

  const auto lower = lower_bound_certificate(trained.L, in, inst, test, g.jobs);
  const auto eval = evaluate_rules(trained.rule, training, inst, test, Problem::kSP1, g.jobs);
  const double mdr_bound = mdr_amdr_bound(in);
  const auto cert_mdr = suboptimality_certificate(eval, "mdr", mdr_bound);
  const auto cert_amdr = suboptimality_certificate(eval, "amdr", mdr_bound);
  const double direct_bound = direct_rule_bound(in);
  const auto cert_direct =
      suboptimality_certificate(eval, "direct", direct_bound, trained.rule, training, test);

  BoundInputs replay;
  replay.tau = 0.02;
  replay.kappa0 = 10.0;
  replay.diam = 0.05;

  const fs::path dir = prepare_out(g);
  write_file(dir / "certificate_lower.csv", certificate_csv(lower));
  write_file(dir / "certificate_mdr.csv", certificate_csv(cert_mdr));
  write_file(dir / "certificate_amdr.csv", certificate_csv(cert_amdr));
  write_file(dir / "certificate_direct.csv", certificate_csv(cert_direct));

  auto min_slack = [](const CertificateReport& r) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& row : r.rows) {
      if (!std::isnan(row.slack)) m = std::min(m, row.slack);
    }
    return m;
  };
  std::string report = "certificate,sigma,tau,kappa0,diam,bound,min_slack,holds\n";
  auto line = [&](const char* name, const BoundInputs& b, double bound, double slack,
                  bool holds) {
    report += fmt::format("{},{},{},{},{},{},{},{}\n", name, b.sigma, b.tau, b.kappa0,
                          b.diam, bound, slack, holds ? "true" : "false");
  };
  line("lower", in, trained.L - in.sigma - in.kappa0 * in.diam, min_slack(lower),
       lower.holds);
  line("mdr", in, mdr_bound, min_slack(cert_mdr), cert_mdr.holds);
  line("amdr", in, mdr_bound, min_slack(cert_amdr), cert_amdr.holds);
  line("direct", in, direct_bound, min_slack(cert_direct), cert_direct.holds);
  line("reference", replay, mdr_amdr_bound(replay), 0.0, true);
  write_file(dir / "bound_report.csv", report);
  fmt::print("{}", report);
  fmt::print("diam scan={} convention={} used={}\n", scan, f.convention, in.diam);
  const bool ok = lower.holds && cert_mdr.holds && cert_amdr.holds && cert_direct.holds;
  return ok ? 0 : 1;
}

// bound --------------------------------------------------------------------

struct BoundFlags {
  BoundInputs in{0.0, 0.02, 10.0, 10.0, 0.0, 0.05};
  std::string kind = "mdr";
};

int run_bound(const BoundFlags& f) {
  if (f.kind == "mdr" || f.kind == "amdr") {
    fmt::print("{}\n", mdr_amdr_bound(f.in));
  } else if (f.kind == "direct") {
    fmt::print("{}\n", direct_rule_bound(f.in));
  } else {
    throw DomainError(fmt::format("unknown bound kind '{}'", f.kind));
  }
  return 0;
}

// convergence --------------------------------------------------------------

struct ConvergenceFlags {
  std::string instance;
  int count = 10;
  std::uint64_t seed = 1;
  TrainFlags train;
};

int run_convergence(ConvergenceFlags f, const Globals& g) {
  const auto inst = load_instance(f.instance);
  if (inst.mode() != ParamMode::kA) {
    throw DomainError("convergence runs need a mode A instance");
  }
  const auto problem = parse_problem(f.train.problem);
  const TrainingConfig config = f.train.config(g.jobs);
  const Vector zero = Vector::Zero(inst.param_dim());
  const auto exact = solve_exact(inst, zero, problem);
  if (exact.status == SolveStatus::kInfeasible) {
    throw InfeasibleError("no feasible path at the nominal parameter");
  }
  const Decision best = path_to_decision(inst, exact.path);

  std::string csv = "nu,cells,p_target1,p_target2,L,U,gap,path_feasible,matches_optimum\n";
  std::string md =
      "| nu | prescribed cells | P(target 1) | P(target 2) | gap | feasible | optimal |\n"
      "|----|------------------|-------------|-------------|-----|----------|---------|\n";
  for (int nu = 1; nu <= 8; ++nu) {
    const auto points = shrinking_uniform(nu, f.count, f.seed + static_cast<std::uint64_t>(nu),
                                          inst.param_dim());
    const auto res = decompose(inst, points, config, problem);
    const Decision y = heaviside(res.rule.b());
    const bool ok = feasible(inst, zero, y, problem);
    const double p1 = nondetect_prob(inst, zero, y, 0);
    const double p2 = inst.target_count() > 1 ? nondetect_prob(inst, zero, y, 1) : 0.0;
    csv += fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n", nu,
                       cells_of(inst, y), p1, p2, res.L, res.U, res.gap, ok, y == best);
    md += fmt::format("| {} | {} | {:.4f} | {:.4f} | {:.4f} | {} | {} |\n", nu,
                      cells_of(inst, y), p1, p2, res.gap, ok ? "yes" : "no",
                      y == best ? "yes" : "no");
  }
  const double p1 = exact.value;
  const double p2 = inst.target_count() > 1 ? nondetect_prob(inst, zero, exact.path, 1) : 0.0;
  csv += fmt::format("inf,{},{:.17g},{:.17g},{:.17g},{:.17g},0,true,true\n",
                     cells_of(inst, best), p1, p2, p1, p1);
  md += fmt::format("| inf | {} | {:.4f} | {:.4f} | 0 | yes | yes |\n", cells_of(inst, best),
                    p1, p2);
  write_file(prepare_out(g) / "convergence.csv", csv);
  fmt::print("{}", g.markdown ? md : csv);
  return 0;
}

// emit-lp ------------------------------------------------------------------

struct EmitFlags {
  std::string instance;
  std::string points;
  int index = 0;
  bool training = false;
  TrainFlags train;
};

int run_emit(const EmitFlags& f, const Globals& g) {
  const auto inst = load_instance(f.instance);
  const auto problem = parse_problem(f.train.problem);
  const std::string stem = fs::path(f.instance).stem().string();
  const fs::path dir = prepare_out(g);
  if (f.training) {
    if (f.points.empty()) throw DomainError("--training needs --points");
    const auto points = read_points(f.points);
    const TrainingConfig tc = f.train.config(g.jobs);
    TrainingMilpConfig mc;
    mc.risk0 = tc.risk0;
    mc.margin = tc.margin;
    mc.theta = tc.theta;
    mc.problem = problem;
    const fs::path path = dir / fmt::format("{}_{}_training.lp", stem, to_string(problem));
    write_file(path, emit_training_milp(inst, points, mc));
    fmt::print("wrote {}\n", path.string());
    return 0;
  }
  Vector xi = Vector::Zero(inst.param_dim());
  if (!f.points.empty()) {
    const auto points = read_points(f.points);
    if (f.index < 1 || f.index > static_cast<int>(points.size())) {
      throw DomainError(fmt::format("--index must be in 1..{}", points.size()));
    }
    xi = points[f.index - 1];
  }
  const fs::path path = dir / milp_file_name(stem, problem, xi);
  write_file(path, emit_milp(inst, xi, problem));
  fmt::print("wrote {}\n", path.string());
  return 0;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InfeasibleError*>(&e)) return kExitInfeasible;
  if (dynamic_cast<const DegeneracyError*>(&e) || dynamic_cast<const PreconditionError*>(&e) ||
      dynamic_cast<const GenerationStallError*>(&e)) {
    return kExitNumerical;
  }
  if (dynamic_cast<const DomainError*>(&e) || dynamic_cast<const StructuralError*>(&e)) {
    return kExitUsage;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-adaptive decision rules for a moving-target search problem"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with option values");

  Globals g;
  app.add_option("--jobs", g.jobs, "concurrent solves (0: all cores)")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_flag("--markdown", g.markdown, "print tables as markdown");

  GenInstanceFlags gi;
  auto* cmd_gi = app.add_subcommand("gen-instance", "generate a search instance");
  cmd_gi->add_option("--rows", gi.rows)->capture_default_str();
  cmd_gi->add_option("--cols", gi.cols)->capture_default_str();
  cmd_gi->add_option("-T,--periods", gi.horizon, "time periods")->capture_default_str();
  cmd_gi->add_option("-I,--scenarios", gi.scenarios, "scenarios per target")
      ->capture_default_str();
  cmd_gi->add_option("--t1-start", gi.t1_start, "start cell of target 1 (1-based)")
      ->capture_default_str();
  cmd_gi->add_option("--t2-start", gi.t2_start, "start cell of target 2 (1-based)")
      ->capture_default_str();
  cmd_gi->add_flag("--dispersed", gi.dispersed, "target 1 starts anywhere in the middle row");
  cmd_gi->add_option("--stay", gi.stay, "probability a target stays put")->capture_default_str();
  cmd_gi->add_option("--mode", gi.mode, "parameterization A or B")->capture_default_str();
  cmd_gi->add_option("--alpha-bar", gi.alpha_bar, "nominal detection rate");
  cmd_gi->add_option("--tau", gi.tau, "target-2 nondetection threshold")->capture_default_str();
  cmd_gi->add_option("--seed", gi.seed)->envname("RISKRULE_SEED")->capture_default_str();
  cmd_gi->add_option("-o,--output", gi.output, "file name under --out")->capture_default_str();

  GenDataFlags gd;
  auto* cmd_gd = app.add_subcommand("gen-data", "generate parameter points");
  cmd_gd->add_option("--kind", gd.kind, "shrinking_uniform, simplex_uniform or simplex_beta")
      ->capture_default_str();
  cmd_gd->add_option("--nu", gd.nu)->capture_default_str();
  cmd_gd->add_option("--radius", gd.radius)->capture_default_str();
  cmd_gd->add_option("--a", gd.a, "beta shape a")->capture_default_str();
  cmd_gd->add_option("--b", gd.b, "beta shape b")->capture_default_str();
  cmd_gd->add_option("--count", gd.count)->capture_default_str();
  cmd_gd->add_option("--seed", gd.seed)->envname("RISKRULE_SEED")->capture_default_str();
  cmd_gd->add_option("--dim", gd.dim, "point dimension (0: 101 or 100)")->capture_default_str();
  cmd_gd->add_option("-o,--output", gd.output, "file name under --out")->capture_default_str();

  TrainCmdFlags tr;
  auto* cmd_tr = app.add_subcommand("train", "run the decomposition algorithm");
  cmd_tr->add_option("--instance", tr.instance)->required()->check(CLI::ExistingFile);
  cmd_tr->add_option("--training", tr.training)->required()->check(CLI::ExistingFile);
  cmd_tr->add_option("--prefix", tr.prefix, "output file prefix")->capture_default_str();
  tr.train.attach(cmd_tr);

  EvalFlags ev;
  auto* cmd_ev = app.add_subcommand("evaluate", "evaluate direct, MDR and AMDR rules");
  cmd_ev->add_option("--instance", ev.instance)->required()->check(CLI::ExistingFile);
  cmd_ev->add_option("--rule", ev.rule, "JSON written by train")->required()
      ->check(CLI::ExistingFile);
  cmd_ev->add_option("--training", ev.training)->required()->check(CLI::ExistingFile);
  cmd_ev->add_option("--test", ev.test)->required()->check(CLI::ExistingFile);
  cmd_ev->add_option("--problem", ev.problem)->capture_default_str();

  BoundReportFlags br;
  auto* cmd_br = app.add_subcommand("bound-report", "check the suboptimality certificates");
  cmd_br->add_option("--instance", br.instance)->required()->check(CLI::ExistingFile);
  cmd_br->add_option("--rule", br.rule, "JSON written by train")->required()
      ->check(CLI::ExistingFile);
  cmd_br->add_option("--training", br.training)->required()->check(CLI::ExistingFile);
  cmd_br->add_option("--test", br.test)->required()->check(CLI::ExistingFile);
  cmd_br->add_option("--convention", br.convention, "diameter: scan or radius")
      ->capture_default_str();
  cmd_br->add_option("--radius", br.radius, "sampling radius for --convention radius");
  cmd_br->add_option("--sigma", br.sigma)->capture_default_str();

  BoundFlags bd;
  auto* cmd_bd = app.add_subcommand("bound", "evaluate a bound formula");
  cmd_bd->add_option("--kind", bd.kind, "mdr, amdr or direct")->capture_default_str();
  cmd_bd->add_option("--sigma", bd.in.sigma)->capture_default_str();
  cmd_bd->add_option("--tau", bd.in.tau)->capture_default_str();
  cmd_bd->add_option("--kappa0", bd.in.kappa0)->capture_default_str();
  cmd_bd->add_option("--kappa0-prime", bd.in.kappa0_prime)->capture_default_str();
  cmd_bd->add_option("--lambda", bd.in.lambda)->capture_default_str();
  cmd_bd->add_option("--diam", bd.in.diam)->capture_default_str();

  ConvergenceFlags cv;
  auto* cmd_cv = app.add_subcommand("convergence", "train on shrinking sets nu = 1..8");
  cmd_cv->add_option("--instance", cv.instance)->required()->check(CLI::ExistingFile);
  cmd_cv->add_option("--count", cv.count, "training points per nu")->capture_default_str();
  cmd_cv->add_option("--seed", cv.seed, "data for nu uses seed + nu")
      ->envname("RISKRULE_SEED")->capture_default_str();
  cv.train.attach(cmd_cv);

  EmitFlags em;
  auto* cmd_em = app.add_subcommand("emit-lp", "write the linearized program in LP format");
  cmd_em->add_option("--instance", em.instance)->required()->check(CLI::ExistingFile);
  cmd_em->add_option("--points", em.points, "point file (default: xi = 0)");
  cmd_em->add_option("--index", em.index, "1-based point for single-point programs");
  cmd_em->add_flag("--training", em.training, "emit the training program over all points");
  em.train.attach(cmd_em);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*cmd_gi) return run_gen_instance(gi, g);
    if (*cmd_gd) return run_gen_data(gd, g);
    if (*cmd_tr) return run_train(tr, g);
    if (*cmd_ev) return run_evaluate(ev, g);
    if (*cmd_br) return run_bound_report(br, g);
    if (*cmd_bd) return run_bound(bd);
    if (*cmd_cv) return run_convergence(cv, g);
    if (*cmd_em) return run_emit(em, g);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return kExitUsage;
}
