#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "ldsda/errors.hpp"
#include "ldsda/nlp.hpp"

using namespace ldsda;

namespace {

Nlp make_nlp(std::vector<std::pair<double, double>> bounds, Expr objective,
             std::vector<Expr> equalities = {},
             std::vector<Expr> inequalities = {}) {
  Nlp nlp;
  for (size_t i = 0; i < bounds.size(); ++i) {
    Nlp::Variable v;
    v.name = "x" + std::to_string(i);
    v.lower = bounds[i].first;
    v.upper = bounds[i].second;
    v.initial = 0.5 * (v.lower + v.upper);
    nlp.variables.push_back(v);
  }
  nlp.objective = objective;
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
  return nlp;
}

const InteriorPointSolver solver;
const SolverConfig config;

}  // namespace

TEST_CASE("active bound: min x^2 on [1, 5]") {
  const Nlp nlp = make_nlp({{1, 5}}, pow_int(Expr::var(0), 2));
  const auto result = solver.solve(nlp, nullptr, config);
  REQUIRE(result.status == SolveStatus::kOptimal);
  CHECK(result.point[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(result.objective == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("equality constraint: min x^2 + y^2 with x + y = 2") {
  const Expr x = Expr::var(0), y = Expr::var(1);
  const Nlp nlp = make_nlp({{-5, 5}, {-5, 5}},
                           pow_int(x, 2) + pow_int(y, 2), {x + y - 2.0});
  const auto result = solver.solve(nlp, nullptr, config);
  REQUIRE(result.status == SolveStatus::kOptimal);
  CHECK(result.point[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(result.point[1] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(result.objective == doctest::Approx(2.0).epsilon(1e-6));

  // Hand Lagrangian: grad f + lambda * grad c = 0 at (1,1) with lambda = -2.
  const std::vector<double> analytic{1.0, 1.0};
  const std::vector<double> lambda{-2.0};
  CHECK(kkt_residual(nlp, analytic, lambda, {}) < 1e-8);
}

TEST_CASE("exponential objective with an active linear bound") {
  // min exp(n + 0.6 v) s.t. v >= ln 2 + b with b = 0.3 fixed:
  // both n and v press their lower limits, v's limit being the constraint.
  const double b = 0.3;
  const Expr n = Expr::var(0), v = Expr::var(1);
  const Nlp nlp = make_nlp({{0.1, 2.0}, {0.0, 5.0}},
                           exp(n + Expr::constant(0.6) * v), {},
                           {Expr::constant(std::log(2.0) + b) - v});
  const auto result = solver.solve(nlp, nullptr, config);
  REQUIRE(result.status == SolveStatus::kOptimal);
  const double v_star = std::log(2.0) + b;
  const double f_star = std::exp(0.1 + 0.6 * v_star);
  CHECK(result.point[0] == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(result.point[1] == doctest::Approx(v_star).epsilon(1e-6));
  CHECK(result.objective == doctest::Approx(f_star).epsilon(1e-6));
}

TEST_CASE("kkt_residual basics") {
  const Nlp nlp = make_nlp({{-10, 10}}, pow_int(Expr::var(0), 2));
  // Interior non-stationary point: residual equals |2x|.
  CHECK(kkt_residual(nlp, std::vector<double>{3.0}, {}, {}) ==
        doctest::Approx(6.0));
  // Unconstrained stationary point with zero multipliers.
  CHECK(kkt_residual(nlp, std::vector<double>{0.0}, {}, {}) ==
        doctest::Approx(0.0));
  CHECK_THROWS_AS(
      kkt_residual(nlp, std::vector<double>{0.0, 1.0}, {}, {}),
      DimensionMismatch);
}

TEST_CASE("local infeasibility is detected") {
  const Expr x = Expr::var(0), y = Expr::var(1);
  const Nlp nlp =
      make_nlp({{0, 1}, {0, 1}}, x + y, {x + y - 5.0});
  const auto result = solver.solve(nlp, nullptr, config);
  CHECK(result.status == SolveStatus::kInfeasible);
  CHECK(result.objective == std::numeric_limits<double>::infinity());
}

TEST_CASE("optimal results re-verify against the independent KKT measure") {
  std::mt19937 rng(2025);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  int solved = 0;
  for (int trial = 0; trial < 40; ++trial) {
    // min (x-a)^2 + (y-b)^2 + 0.5 (x*y - d)^2 s.t. x + 2y <= u
    const double a = c(rng), b = c(rng), d = c(rng), u = c(rng) + 1.0;
    const Expr x = Expr::var(0), y = Expr::var(1);
    const Expr obj = pow_int(x - a, 2) + pow_int(y - b, 2) +
                     0.5 * pow_int(x * y - d, 2);
    const Nlp nlp = make_nlp({{-3, 3}, {-3, 3}}, obj, {},
                             {x + 2.0 * y - u});
    const auto result = solver.solve(nlp, nullptr, config);
    if (result.status != SolveStatus::kOptimal) continue;
    ++solved;
    CHECK(max_constraint_violation(nlp, result.point) <=
          config.feasibility_tol);
    CHECK(kkt_residual(nlp, result.point, result.equality_multipliers,
                       result.inequality_multipliers) <=
          10.0 * config.optimality_tol);
  }
  CHECK(solved >= 35);
}

TEST_CASE("identical inputs give bitwise identical outputs") {
  const Expr x = Expr::var(0), y = Expr::var(1);
  const Nlp nlp = make_nlp({{-2, 4}, {-2, 4}},
                           pow_int(x - 1.3, 2) + pow_int(x * y - 0.7, 2),
                           {x + y - 1.1});
  const auto first = solver.solve(nlp, nullptr, config);
  const auto second = solver.solve(nlp, nullptr, config);
  REQUIRE(first.status == second.status);
  CHECK(first.objective == second.objective);
  CHECK(first.point == second.point);
  CHECK(first.equality_multipliers == second.equality_multipliers);
}

TEST_CASE("warm start does not change the outcome on a convex problem") {
  const Expr x = Expr::var(0), y = Expr::var(1);
  const Nlp nlp = make_nlp({{0, 4}, {0, 4}},
                           exp(x - 1.0) + exp(y - 0.5) + pow_int(x - y, 2),
                           {}, {x + y - 3.0});
  const auto cold = solver.solve(nlp, nullptr, config);
  REQUIRE(cold.status == SolveStatus::kOptimal);
  for (const std::vector<double>& start :
       {std::vector<double>{0.0, 0.0}, {4.0, 4.0}, {3.7, 0.1}}) {
    const WarmStart warm{start};
    const auto hot = solver.solve(nlp, &warm, config);
    REQUIRE(hot.status == SolveStatus::kOptimal);
    CHECK(hot.objective ==
          doctest::Approx(cold.objective).epsilon(1e-7));
  }
}

TEST_CASE("zero-variable subproblem is solved trivially") {
  Nlp nlp;
  nlp.objective = Expr::constant(4.25);
  const auto result = solver.solve(nlp, nullptr, config);
  REQUIRE(result.status == SolveStatus::kOptimal);
  CHECK(result.objective == doctest::Approx(4.25));
}

TEST_CASE("mismatched warm start dimension throws") {
  const Nlp nlp = make_nlp({{0, 1}}, Expr::var(0));
  const WarmStart bad{{0.5, 0.5}};
  CHECK_THROWS_AS(solver.solve(nlp, &bad, config), DimensionMismatch);
}
