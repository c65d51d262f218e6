#include <algorithm>
#include <cmath>
#include <memory>

#include "doctest.h"

#include "riskrule/errors.hpp"
#include "riskrule/probspace.hpp"
#include "riskrule/rng.hpp"

using namespace riskrule;

namespace {

DiscreteRV random_rv(Rng& rng) {
  const int n = 1 + static_cast<int>(rng.below(8));
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) total += (x = 0.05 + rng.uniform01());
  for (auto& x : w) x /= total;
  std::vector<double> v(n);
  for (auto& x : v) x = std::round(rng.uniform(-5.0, 5.0) * 4.0) / 4.0;
  return DiscreteRV(std::make_shared<const FiniteProbSpace>(w), v);
}

}  // namespace

TEST_CASE("expectation and worst case") {
  const auto rv = DiscreteRV::uniform({1, 2, 3, 4});
  CHECK(expectation(rv) == 2.5);
  CHECK(worst_case(rv) == 4.0);
  auto space = std::make_shared<const FiniteProbSpace>(std::vector<double>{0.25, 0.75});
  CHECK(expectation(DiscreteRV(space, {0.3, 0.7})) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(worst_case(DiscreteRV(space, {-5, -2})) == -2.0);
}

TEST_CASE("quantile and superquantile of a four-point variable") {
  const auto rv = DiscreteRV::uniform({1, 2, 3, 4});
  CHECK(quantile(rv, 0.5) == 2.0);
  CHECK(quantile(rv, 0.75) == 3.0);
  CHECK(superquantile(rv, 0.5) == 3.5);
  CHECK(superquantile(rv, 0.75) == 4.0);
  CHECK(evaluate_risk(RiskSpec::superquantile(0.5), rv) == 3.5);
  CHECK(evaluate_risk(RiskSpec::expectation(), rv) == 2.5);
  CHECK(evaluate_risk(RiskSpec::worst_case(), DiscreteRV::uniform({1, 2})) == 2.0);
}

TEST_CASE("constant variables") {
  const auto rv = DiscreteRV::uniform({0.7, 0.7, 0.7});
  for (double a : {0.1, 0.5, 0.9}) {
    CHECK(quantile(rv, a) == 0.7);
    CHECK(superquantile(rv, a) == doctest::Approx(0.7).epsilon(1e-15));
  }
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(FiniteProbSpace({0.5, 0.6}), DomainError);
  CHECK_THROWS_AS(FiniteProbSpace({1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(RiskSpec::superquantile(1.0), DomainError);
  CHECK_THROWS_AS(RiskSpec::quantile(0.0), DomainError);
  CHECK_THROWS_AS(RiskSpec::parse_kind("median"), DomainError);
  auto space = std::make_shared<const FiniteProbSpace>(FiniteProbSpace::uniform(2));
  CHECK_THROWS_AS(DiscreteRV(space, {1.0}), StructuralError);
}

TEST_CASE("superquantile is the minimum of the Rockafellar-Uryasev function") {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto rv = random_rv(rng);
    const double a = 0.05 + 0.9 * rng.uniform01();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rv.size(); ++k) {
      const double z = rv.value(k);
      double tail = 0.0;
      for (std::size_t w = 0; w < rv.size(); ++w) {
        tail += rv.space().weight(w) * std::max(0.0, rv.value(w) - z);
      }
      best = std::min(best, z + tail / (1.0 - a));
    }
    CHECK(superquantile(rv, a) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("risk axioms on random variables") {
  Rng rng(5);
  const RiskSpec specs[] = {RiskSpec::expectation(), RiskSpec::worst_case(),
                            RiskSpec::quantile(0.3), RiskSpec::superquantile(0.8)};
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = random_rv(rng);
    std::vector<double> up(x.values().begin(), x.values().end());
    for (auto& v : up) v += rng.uniform01();
    const auto y = x.with_values(up);
    const double c = rng.uniform(-3.0, 3.0);
    std::vector<double> shifted(x.values().begin(), x.values().end());
    for (auto& v : shifted) v += c;
    const auto xs = x.with_values(shifted);
    for (const auto& s : specs) {
      CHECK(evaluate_risk(s, x) <= evaluate_risk(s, y) + 1e-12);
      CHECK(evaluate_risk(s, xs) == doctest::Approx(evaluate_risk(s, x) + c).epsilon(1e-12));
    }
    CHECK(expectation(x) <= superquantile(x, 0.8) + 1e-12);
    CHECK(superquantile(x, 0.8) <= worst_case(x) + 1e-12);
    CHECK(quantile(x, 0.3) <= superquantile(x, 0.3) + 1e-12);
  }
}
