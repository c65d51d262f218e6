#include <cmath>
#include <limits>

#include "doctest.h"

#include "riskrule/errors.hpp"
#include "riskrule/exactsolver.hpp"
#include "support.hpp"

using namespace riskrule;

TEST_CASE("forced path on a single cell") {
  Grid grid(1, 1);
  ScenarioTensor tensor(2, 1, 2);
  const double alpha = std::log(2.0);
  SearchInstance inst(grid, tensor, alpha, ParamMode::kB, 0.5);
  const auto r = solve_exact(inst, Vector::Zero(1), Problem::kSP1);
  CHECK(r.status == SolveStatus::kOptimal);
  CHECK(r.path == SearchPath{0, 0});
  CHECK(r.value == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(count_paths(inst) == 1);
  CHECK(brute_force(inst, Vector::Zero(1), Problem::kSP1).path == SearchPath{0, 0});
}

TEST_CASE("path counts") {
  Rng rng(1);
  auto inst = testing::random_instance(rng, 2, 1, 2, 1, ParamMode::kB, 0.5);
  CHECK(count_paths(inst) == 4);
  for (int rows = 1; rows <= 3; ++rows) {
    for (int cols = 1; cols <= 3; ++cols) {
      for (int T = 1; T <= 4; ++T) {
        auto i2 = testing::random_instance(rng, rows, cols, T, 1, ParamMode::kB, 0.5);
        CHECK(count_paths(i2) == testing::oracle_paths(rows, cols, T).size());
      }
    }
  }
  auto big = testing::random_instance(rng, 9, 9, 8, 1, ParamMode::kB, 0.5);
  CHECK_THROWS_AS(brute_force(big, Vector::Zero(1), Problem::kSP1), SizeError);
}

TEST_CASE("threshold zero is infeasible") {
  Rng rng(2);
  auto inst = testing::random_instance(rng, 2, 2, 3, 4, ParamMode::kB, 0.0);
  const auto r = solve_exact(inst, Vector::Zero(4), Problem::kSP2);
  CHECK(r.status == SolveStatus::kInfeasible);
  CHECK(brute_force(inst, Vector::Zero(4), Problem::kSP2).status == SolveStatus::kInfeasible);
}

TEST_CASE("branch-and-bound equals enumeration and the independent oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const int rows = 1 + static_cast<int>(rng.below(3));
    const int cols = 1 + static_cast<int>(rng.below(3));
    const int T = 1 + static_cast<int>(rng.below(4));
    const int I = 1 + static_cast<int>(rng.below(6));
    const auto mode = trial % 2 ? ParamMode::kA : ParamMode::kB;
    const double tau = rng.uniform(0.2, 1.0);
    const auto inst = testing::random_instance(rng, rows, cols, T, I, mode, tau);
    const Vector xi = testing::random_param(rng, inst);
    for (auto problem : {Problem::kSP1, Problem::kSP2}) {
      const auto bb = solve_exact(inst, xi, problem);
      const auto bf = brute_force(inst, xi, problem);
      REQUIRE(bb.status != SolveStatus::kFeasible);
      CHECK((bb.status == SolveStatus::kInfeasible) == (bf.status == SolveStatus::kInfeasible));
      if (bb.status == SolveStatus::kInfeasible) continue;
      CHECK(bb.value == bf.value);
      CHECK(bb.path == bf.path);
      CHECK(bb.lower_bound == bb.value);
      CHECK(feasible(inst, xi, bb.path, problem));

      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : testing::oracle_paths(rows, cols, T)) {
        if (problem == Problem::kSP2 && testing::oracle_nondetect(inst, xi, p, 1) > tau + 1e-12) {
          continue;
        }
        best = std::min(best, testing::oracle_nondetect(inst, xi, p, 0));
      }
      CHECK(std::abs(bb.value - best) < 1e-12);
    }
  }
}

TEST_CASE("threshold only removes options") {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = testing::random_instance(rng, 3, 3, 4, 6, ParamMode::kB, rng.uniform(0.3, 1.0));
    const Vector xi = testing::random_param(rng, inst);
    const auto sp1 = solve_exact(inst, xi, Problem::kSP1);
    const auto sp2 = solve_exact(inst, xi, Problem::kSP2);
    if (sp2.status != SolveStatus::kInfeasible) CHECK(sp2.value >= sp1.value);
  }
}

TEST_CASE("node bounds are admissible") {
  Rng rng(19);
  for (int trial = 0; trial < 15; ++trial) {
    const auto inst = testing::random_instance(rng, 2, 3, 4, 5, ParamMode::kA, 1.0);
    const Vector xi = testing::random_param(rng, inst);
    std::vector<std::pair<std::vector<int>, double>> events;
    SolveOptions options;
    options.observer = [&](const NodeEvent& e) {
      events.push_back({{e.prefix.begin(), e.prefix.end()}, e.bound});
    };
    solve_exact(inst, xi, Problem::kSP1, options);
    const auto all = testing::oracle_paths(2, 3, 4);
    for (const auto& [prefix, bound] : events) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : all) {
        if (std::equal(prefix.begin(), prefix.end(), p.begin())) {
          best = std::min(best, nondetect_prob(inst, xi, p, 0));
        }
      }
      CHECK(bound <= best);
    }
  }
}

TEST_CASE("warm start and tolerance") {
  Rng rng(23);
  const auto inst = testing::random_instance(rng, 3, 3, 5, 8, ParamMode::kB, 1.0);
  const Vector xi = testing::random_param(rng, inst);
  const auto cold = solve_exact(inst, xi, Problem::kSP1);
  SolveOptions warm;
  warm.warm_start = cold.path;
  const auto hot = solve_exact(inst, xi, Problem::kSP1, warm);
  CHECK(hot.path == cold.path);
  CHECK(hot.value == cold.value);
  CHECK(hot.nodes_explored <= cold.nodes_explored);

  SolveOptions loose;
  loose.abs_tol = 0.05;
  const auto approx = solve_exact(inst, xi, Problem::kSP1, loose);
  CHECK(approx.lower_bound <= approx.value);
  CHECK(approx.value - cold.value <= 0.05);
  CHECK(approx.lower_bound <= cold.value);
  CHECK_THROWS_AS(solve_exact(inst, xi, Problem::kSP1, SolveOptions{-1.0, {}, {}}), DomainError);
}
