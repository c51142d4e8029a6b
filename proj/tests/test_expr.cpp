#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "ldsda/errors.hpp"
#include "ldsda/expr.hpp"

using namespace ldsda;

namespace {

// Random closed expression over `nvars` variables. Compositions keep ln and
// division arguments bounded away from their singularities so that points
// sampled in [-1.5, 1.5]^n stay in the domain.
Expr random_expr(std::mt19937& rng, int nvars, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_int_distribution<int> var(0, nvars - 1);
  switch (pick(rng)) {
    case 0: return Expr::constant(coef(rng));
    case 1: return Expr::var(var(rng));
    case 2: return random_expr(rng, nvars, depth - 1) + random_expr(rng, nvars, depth - 1);
    case 3: return random_expr(rng, nvars, depth - 1) - random_expr(rng, nvars, depth - 1);
    case 4: return random_expr(rng, nvars, depth - 1) * random_expr(rng, nvars, depth - 1);
    case 5: return -random_expr(rng, nvars, depth - 1);
    case 6: return exp(Expr::constant(0.25) * random_expr(rng, nvars, depth - 1));
    case 7: {
      Expr a = random_expr(rng, nvars, depth - 1);
      return ln(Expr::constant(0.5) + a * a);
    }
    case 8: {
      Expr a = random_expr(rng, nvars, depth - 1);
      Expr b = random_expr(rng, nvars, depth - 1);
      return a / (Expr::constant(0.5) + b * b);
    }
    default:
      return pow_int(random_expr(rng, nvars, depth - 1), 2);
  }
}

std::vector<double> central_difference(const Expr& e,
                                       const std::vector<double>& x,
                                       double h) {
  std::vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    std::vector<double> hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (e.eval(hi) - e.eval(lo)) / (2.0 * h);
  }
  return g;
}

// Richardson-extrapolated central difference: O(h^4) truncation with the
// larger step's roundoff, so it resolves derivatives near the 1e-9 guard.
std::vector<double> refined_difference(const Expr& e,
                                       const std::vector<double>& x) {
  const auto coarse = central_difference(e, x, 2e-4);
  const auto fine = central_difference(e, x, 1e-4);
  std::vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i)
    g[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  return g;
}

// Relative error below 1e-6, with an absolute 1e-9 guard for derivatives
// near zero where the quotient is all roundoff.
bool close_to_oracle(double grad, double oracle) {
  return std::abs(grad - oracle) <= 1e-9 ||
         std::abs(grad - oracle) / std::abs(oracle) < 1e-6;
}

}  // namespace

TEST_CASE("point evaluation") {
  const Expr x = Expr::var(0), y = Expr::var(1);
  CHECK((x * y).eval(std::vector<double>{2.0, 3.0}) == doctest::Approx(6.0));
  CHECK(exp(Expr::constant(0.0)).eval(std::vector<double>{}) ==
        doctest::Approx(1.0));
  // product-spec residual 0.95*Q_P - P_B at Q_P=10, P_B=9.5
  const Expr residual = Expr::constant(0.95) * x - y;
  CHECK(residual.eval(std::vector<double>{10.0, 9.5}) == doctest::Approx(0.0));
}

TEST_CASE("evaluation errors") {
  const Expr x = Expr::var(0);
  CHECK_THROWS_AS(ln(x).eval(std::vector<double>{-1.0}), DomainError);
  CHECK_THROWS_AS(ln(x).eval(std::vector<double>{0.0}), DomainError);
  CHECK_THROWS_AS((Expr::constant(1.0) / x).eval(std::vector<double>{0.0}),
                  DomainError);
  CHECK_THROWS_AS(Expr::var(3).eval(std::vector<double>{1.0}),
                  UnboundVariable);
}

TEST_CASE("eval is deterministic and side-effect free") {
  std::mt19937 rng(7);
  const Expr e = random_expr(rng, 3, 4);
  const std::vector<double> x{0.3, -0.7, 1.1};
  const double first = e.eval(x);
  for (int i = 0; i < 5; ++i) CHECK(e.eval(x) == first);
}

TEST_CASE("gradient basics") {
  const Expr x = Expr::var(0);
  const auto g = pow_int(x, 2).gradient(std::vector<double>{3.0});
  REQUIRE(g.size() == 1);
  CHECK(g[0] == doctest::Approx(6.0));

  const auto gconst = Expr::constant(7.0).gradient(std::vector<double>{1.0, 2.0});
  CHECK(gconst == std::vector<double>{0.0, 0.0});
}

TEST_CASE("gradient of the batch cost term matches finite differences") {
  // alpha * exp(n + beta * v)
  const double alpha = 0.25, beta = 0.6;
  const Expr n = Expr::var(0), v = Expr::var(1);
  const Expr cost = Expr::constant(alpha) * exp(n + Expr::constant(beta) * v);
  const std::vector<double> x{0.7, 1.3};
  const auto g = cost.gradient(x);
  const auto fd = central_difference(cost, x, 1e-6);
  for (int i = 0; i < 2; ++i)
    CHECK(std::abs(g[i] - fd[i]) / (std::abs(fd[i]) + 1e-9) < 1e-6);
}

TEST_CASE("gradient matches central differences on 1000 random graphs") {
  std::mt19937 rng(20240811);
  std::uniform_real_distribution<double> sample(-1.5, 1.5);
  int checked = 0;
  while (checked < 1000) {
    const int nvars = 1 + static_cast<int>(rng() % 4);
    const Expr e = random_expr(rng, nvars, 4);
    std::vector<double> x(nvars);
    for (double& xi : x) xi = sample(rng);
    double value = 0.0;
    try {
      value = e.eval(x);
    } catch (const DomainError&) {
      continue;  // sampled point fell outside the graph's domain
    }
    if (!std::isfinite(value) || std::abs(value) > 1e3) continue;
    const auto g = e.gradient(x);
    const auto fd = refined_difference(e, x);
    bool wild = false;
    for (size_t i = 0; i < x.size(); ++i)
      if (std::abs(fd[i]) > 1e6) wild = true;
    if (wild) continue;
    for (size_t i = 0; i < x.size(); ++i) {
      CHECK(close_to_oracle(g[i], fd[i]));
    }
    ++checked;
  }
}

TEST_CASE("interval arithmetic basics") {
  const Expr x = Expr::var(0), y = Expr::var(1);
  const std::vector<Interval> box{{1, 2}, {3, 4}};
  const Interval sum = (x + y).interval_eval(box);
  CHECK(sum.lo == doctest::Approx(4.0));
  CHECK(sum.hi == doctest::Approx(6.0));

  const std::vector<Interval> unit{{0, 1}};
  const Interval diff = (x - x).interval_eval(unit);
  CHECK(diff.lo == doctest::Approx(-1.0));  // natural extension, not tight
  CHECK(diff.hi == doctest::Approx(1.0));

  const std::vector<Interval> box2{{-1, 2}, {3, 4}};
  const Interval prod = (x * y).interval_eval(box2);
  CHECK(prod.lo == doctest::Approx(-4.0));
  CHECK(prod.hi == doctest::Approx(8.0));
}

TEST_CASE("interval edge rules") {
  const Expr x = Expr::var(0);
  // division by an interval containing zero widens to the whole line
  const Interval wide =
      (Expr::constant(1.0) / x).interval_eval(std::vector<Interval>{{-1, 1}});
  CHECK(wide.lo == -Interval::kInf);
  CHECK(wide.hi == Interval::kInf);
  // ln of a nonpositive interval is empty and propagates
  const Interval empty =
      (ln(x) + Expr::constant(1.0))
          .interval_eval(std::vector<Interval>{{-2, -1}});
  CHECK(empty.is_empty());
  // even powers fold the sign
  const Interval sq = pow_int(x, 2).interval_eval(std::vector<Interval>{{-3, 2}});
  CHECK(sq.lo == doctest::Approx(0.0));
  CHECK(sq.hi == doctest::Approx(9.0));
}

TEST_CASE("enclosure: sampled points evaluate inside interval_eval") {
  std::mt19937 rng(99);
  int graphs = 0;
  while (graphs < 60) {
    const int nvars = 1 + static_cast<int>(rng() % 3);
    const Expr e = random_expr(rng, nvars, 4);
    std::vector<Interval> box(nvars);
    std::uniform_real_distribution<double> lo(-1.5, 0.0), width(0.1, 1.5);
    for (Interval& b : box) {
      b.lo = lo(rng);
      b.hi = b.lo + width(rng);
    }
    const Interval enclosure = e.interval_eval(box);
    bool usable = true;
    for (int s = 0; s < 100 && usable; ++s) {
      std::vector<double> x(nvars);
      for (int i = 0; i < nvars; ++i) {
        std::uniform_real_distribution<double> in(box[i].lo, box[i].hi);
        x[i] = in(rng);
      }
      try {
        const double v = e.eval(x);
        CHECK(enclosure.contains(v));
      } catch (const DomainError&) {
        usable = false;  // sampling hit a singularity; skip this graph
      }
    }
    if (usable) ++graphs;
  }
}

TEST_CASE("tape agrees with direct evaluation") {
  std::mt19937 rng(512);
  for (int trial = 0; trial < 50; ++trial) {
    const int nvars = 2 + static_cast<int>(rng() % 3);
    std::vector<Expr> outputs;
    for (int k = 0; k < 3; ++k) outputs.push_back(random_expr(rng, nvars, 3));
    Tape tape(outputs, nvars);
    std::uniform_real_distribution<double> sample(-1.2, 1.2);
    std::vector<double> x(nvars);
    for (double& xi : x) xi = sample(rng);
    bool in_domain = true;
    std::vector<double> direct(3);
    try {
      for (int k = 0; k < 3; ++k) direct[k] = outputs[k].eval(x);
    } catch (const DomainError&) {
      in_domain = false;
    }
    if (!in_domain) continue;
    REQUIRE(tape.forward(x));
    for (int k = 0; k < 3; ++k)
      CHECK(tape.output(k) == doctest::Approx(direct[k]).epsilon(1e-12));

    // Reverse with seeds equals the weighted sum of per-output gradients.
    const std::vector<double> seeds{0.5, -1.25, 2.0};
    std::vector<double> grad(nvars);
    tape.reverse(seeds, grad);
    std::vector<double> expect(nvars, 0.0);
    for (int k = 0; k < 3; ++k) {
      const auto gk = outputs[k].gradient(x);
      for (int i = 0; i < nvars; ++i) expect[i] += seeds[k] * gk[i];
    }
    for (int i = 0; i < nvars; ++i)
      CHECK(grad[i] == doctest::Approx(expect[i]).epsilon(1e-10));
  }
}
