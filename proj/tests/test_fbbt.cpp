#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "ldsda/errors.hpp"
#include "ldsda/fbbt.hpp"

using namespace ldsda;

namespace {

Nlp make_nlp(std::vector<std::pair<double, double>> bounds,
             std::vector<Expr> equalities, std::vector<Expr> inequalities) {
  Nlp nlp;
  for (size_t i = 0; i < bounds.size(); ++i) {
    Nlp::Variable v;
    v.name = "x" + std::to_string(i);
    v.lower = bounds[i].first;
    v.upper = bounds[i].second;
    v.initial = 0.5 * (v.lower + v.upper);
    nlp.variables.push_back(v);
  }
  for (size_t i = 0; i < equalities.size(); ++i) {
    nlp.equalities.push_back(equalities[i]);
    nlp.equality_labels.push_back("eq" + std::to_string(i));
    nlp.equality_origins.push_back({});
  }
  for (size_t i = 0; i < inequalities.size(); ++i) {
    nlp.inequalities.push_back(inequalities[i]);
    nlp.inequality_labels.push_back("ineq" + std::to_string(i));
    nlp.inequality_origins.push_back({});
  }
  nlp.objective = Expr::constant(0.0);
  return nlp;
}

}  // namespace

TEST_CASE("inequality with positive enclosure is infeasible") {
  // x - 3 <= 0 with x in [5, 9]: enclosure [2, 6]
  const Nlp nlp = make_nlp({{5, 9}}, {}, {Expr::var(0) - 3.0});
  const auto result = fbbt_tighten(nlp);
  REQUIRE(std::holds_alternative<ProvenInfeasible>(result));
  CHECK(std::get<ProvenInfeasible>(result).witness == "ineq0");
}

TEST_CASE("equality whose enclosure excludes zero is infeasible") {
  // x + y - 10 = 0 with x, y in [0, 4]: enclosure [-10, -2]
  const Nlp nlp =
      make_nlp({{0, 4}, {0, 4}}, {Expr::var(0) + Expr::var(1) - 10.0}, {});
  const auto result = fbbt_tighten(nlp);
  REQUIRE(std::holds_alternative<ProvenInfeasible>(result));
}

TEST_CASE("backward subtraction tightens the upper bound") {
  // x - y <= 0 with y in [0, 3], x in [0, 10]: x shrinks to [0, 3]
  const Nlp nlp = make_nlp({{0, 10}, {0, 3}}, {}, {Expr::var(0) - Expr::var(1)});
  const auto result = fbbt_tighten(nlp);
  REQUIRE(std::holds_alternative<Tightened>(result));
  const BoundsBox& box = std::get<Tightened>(result).box;
  CHECK(box[0].lo == doctest::Approx(0.0));
  CHECK(box[0].hi == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(box[1].lo == doctest::Approx(0.0));
  CHECK(box[1].hi == doctest::Approx(3.0));
}

TEST_CASE("equality chain propagates fixed values") {
  // gamma = ln 2 fixed, n - gamma = 0: n collapses to ln 2.
  const Nlp nlp = make_nlp({{0, 2}, {0, 2}},
                           {Expr::var(0) - std::log(2.0),
                            Expr::var(1) - Expr::var(0)},
                           {});
  const auto result = fbbt_tighten(nlp);
  REQUIRE(std::holds_alternative<Tightened>(result));
  const BoundsBox& box = std::get<Tightened>(result).box;
  CHECK(box[1].lo == doctest::Approx(std::log(2.0)).epsilon(1e-5));
  CHECK(box[1].hi == doctest::Approx(std::log(2.0)).epsilon(1e-5));
}

TEST_CASE("tightening is monotone: output box inside input box") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> lo(-3.0, 0.0), width(0.5, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<double, double>> bounds(3);
    for (auto& b : bounds) {
      b.first = lo(rng);
      b.second = b.first + width(rng);
    }
    const Expr x = Expr::var(0), y = Expr::var(1), z = Expr::var(2);
    const Nlp nlp = make_nlp(bounds,
                             {x + y - z},
                             {x * y - 1.0, y - z});
    const auto result = fbbt_tighten(nlp);
    if (!std::holds_alternative<Tightened>(result)) continue;
    const BoundsBox& box = std::get<Tightened>(result).box;
    for (int i = 0; i < 3; ++i) {
      CHECK(box[i].lo >= bounds[i].first - 1e-12);
      CHECK(box[i].hi <= bounds[i].second + 1e-12);
    }
  }
}

TEST_CASE("soundness: no sampled point survives a proven infeasibility") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> lo(-2.0, 0.5), width(0.2, 2.5);
  std::uniform_real_distribution<double> shift(-4.0, 4.0);
  int proven = 0;
  for (int trial = 0; trial < 300 && proven < 40; ++trial) {
    std::vector<std::pair<double, double>> bounds(2);
    for (auto& b : bounds) {
      b.first = lo(rng);
      b.second = b.first + width(rng);
    }
    const Expr x = Expr::var(0), y = Expr::var(1);
    const double c = shift(rng);
    std::vector<Expr> eqs, ineqs;
    if (rng() % 2) eqs.push_back(x * y + x - y - c);
    else ineqs.push_back(pow_int(x + y, 2) - c);
    const Nlp nlp = make_nlp(bounds, eqs, ineqs);
    const auto result = fbbt_tighten(nlp);
    if (!std::holds_alternative<ProvenInfeasible>(result)) continue;
    ++proven;
    const double slack = FbbtOptions{}.slack;
    for (int s = 0; s < 10000; ++s) {
      std::vector<double> p(2);
      for (int i = 0; i < 2; ++i) {
        std::uniform_real_distribution<double> in(bounds[i].first,
                                                  bounds[i].second);
        p[i] = in(rng);
      }
      bool feasible = true;
      for (const Expr& e : nlp.equalities)
        if (std::abs(e.eval(p)) > slack) feasible = false;
      for (const Expr& e : nlp.inequalities)
        if (e.eval(p) > slack) feasible = false;
      CHECK_FALSE(feasible);
      if (feasible) break;
    }
  }
  CHECK(proven >= 20);
}

TEST_CASE("pass count respects the iteration cap") {
  // x <= 0.9 y and y <= 0.9 x only converge to zero asymptotically.
  const Expr x = Expr::var(0), y = Expr::var(1);
  const Nlp nlp = make_nlp({{0, 1}, {0, 1}}, {},
                           {x - 0.9 * y, y - 0.9 * x});
  FbbtOptions options;
  options.max_iters = 7;
  const auto result = fbbt_tighten(nlp, options);
  REQUIRE(std::holds_alternative<Tightened>(result));
  CHECK(std::get<Tightened>(result).passes <= 7);
  const BoundsBox& box = std::get<Tightened>(result).box;
  CHECK(box[0].hi < 1.0);
  CHECK(box[0].hi > 0.0);
}

TEST_CASE("slack keeps marginally feasible constraints alive") {
  // x - 1 <= 0 with x fixed to [1, 1]: enclosure touches zero exactly.
  const Nlp nlp = make_nlp({{1, 1}}, {}, {Expr::var(0) - 1.0});
  CHECK(std::holds_alternative<Tightened>(fbbt_tighten(nlp)));
  CHECK_THROWS_AS(fbbt_tighten(nlp, {-1.0, 10}), InvalidParams);
}
