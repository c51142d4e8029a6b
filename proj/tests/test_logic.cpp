#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <random>

#include "doctest.h"
#include "ldsda/errors.hpp"
#include "ldsda/logic.hpp"

using namespace ldsda;

namespace {

// Feed/recycle/unit logic of the reactor cascade: ids 0..R-1 feed (YF),
// R..2R-1 recycle (YR), 2R..3R-1 unit type (YP).
std::vector<Prop> cascade_logic(int R) {
  auto yf = [](int n) { return n; };
  auto yr = [R](int n) { return R + n; };
  auto yp = [R](int n) { return 2 * R + n; };
  std::vector<Prop> props;
  std::vector<int> feeds, recycles;
  for (int n = 0; n < R; ++n) feeds.push_back(yf(n));
  for (int n = 0; n < R; ++n) recycles.push_back(yr(n));
  props.push_back(Prop::exactly(1, feeds));
  props.push_back(Prop::exactly(1, recycles));
  for (int n = 0; n < R; ++n) {
    std::vector<Prop> none_before;
    for (int j = 0; j <= n; ++j)
      none_before.push_back(Prop::negate(Prop::lit(yf(j))));
    props.push_back(Prop::iff(
        Prop::lit(yp(n)),
        Prop::disjunction(
            {Prop::conjunction(std::move(none_before)), Prop::lit(yf(n))})));
  }
  for (int n = 0; n < R; ++n)
    props.push_back(Prop::implies(Prop::lit(yr(n)), Prop::lit(yp(n))));
  return props;
}

Assignment cascade_start(int R, int feed_pos, int recycle_pos) {
  Assignment a(3 * R, Truth::kUnknown);
  for (int n = 0; n < R; ++n) {
    a[n] = (n + 1 == feed_pos) ? Truth::kTrue : Truth::kFalse;
    a[R + n] = (n + 1 == recycle_pos) ? Truth::kTrue : Truth::kFalse;
  }
  return a;
}

// Exhaustive completion search over the Unknowns; the soundness oracle.
bool satisfiable_by_enumeration(const std::vector<Prop>& props, Assignment a) {
  std::vector<int> unknowns;
  int max_id = static_cast<int>(a.size()) - 1;
  for (const Prop& p : props) max_id = std::max(max_id, p.max_boolean_id());
  a.resize(max_id + 1, Truth::kUnknown);
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] == Truth::kUnknown) unknowns.push_back(static_cast<int>(i));
  REQUIRE(unknowns.size() <= 14);
  const long combos = 1L << unknowns.size();
  for (long mask = 0; mask < combos; ++mask) {
    for (size_t i = 0; i < unknowns.size(); ++i)
      a[unknowns[i]] =
          (mask >> i) & 1 ? Truth::kTrue : Truth::kFalse;
    if (check(props, a)) return true;
  }
  return false;
}

Prop random_formula(std::mt19937& rng, int nvars, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 5);
  std::uniform_int_distribution<int> var(0, nvars - 1);
  switch (pick(rng)) {
    case 0: return rng() % 2 ? Prop::lit(var(rng))
                             : Prop::negate(Prop::lit(var(rng)));
    case 1: return Prop::conjunction({random_formula(rng, nvars, depth - 1),
                                      random_formula(rng, nvars, depth - 1)});
    case 2: return Prop::disjunction({random_formula(rng, nvars, depth - 1),
                                      random_formula(rng, nvars, depth - 1)});
    case 3: return Prop::implies(random_formula(rng, nvars, depth - 1),
                                 random_formula(rng, nvars, depth - 1));
    case 4: return Prop::iff(random_formula(rng, nvars, depth - 1),
                             random_formula(rng, nvars, depth - 1));
    default: return Prop::exclusive_or({random_formula(rng, nvars, depth - 1),
                                        random_formula(rng, nvars, depth - 1)});
  }
}

// Partitioning constraints sit at the top level in practice, so the
// generator keeps Exactly there too.
Prop random_prop(std::mt19937& rng, int nvars, int depth) {
  if (rng() % 4 == 0) {
    std::vector<int> ids;
    for (int v = 0; v < nvars; ++v)
      if (rng() % 2) ids.push_back(v);
    if (ids.size() >= 2)
      return Prop::exactly(1 + static_cast<int>(rng() % 2), ids);
  }
  return random_formula(rng, nvars, depth);
}

}  // namespace

TEST_CASE("cascade propagation completes: feed 4, recycle 2, R=6") {
  const auto props = cascade_logic(6);
  const auto result = propagate(props, cascade_start(6, 4, 2));
  REQUIRE(result.completed());
  for (int n = 0; n < 6; ++n) {
    const Truth expected = n + 1 <= 4 ? Truth::kTrue : Truth::kFalse;
    CHECK(result.assignment[12 + n] == expected);  // YP pattern
  }
  CHECK(check(props, result.assignment));
}

TEST_CASE("cascade conflict: recycle below the installed reactors") {
  const auto props = cascade_logic(6);
  const auto result = propagate(props, cascade_start(6, 2, 4));
  REQUIRE(result.conflict());
  CHECK(result.conflict_prop >= 0);
  CHECK_FALSE(satisfiable_by_enumeration(props, cascade_start(6, 2, 4)));
}

TEST_CASE("empty proposition list leaves everything undecided") {
  const auto result = propagate({}, Assignment(4, Truth::kUnknown));
  REQUIRE(result.outcome == PropagateResult::Outcome::kResidual);
  CHECK(result.undecided == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("check evaluates complete assignments") {
  const Prop ex = Prop::exactly(1, {0, 1, 2});
  CHECK(check({ex}, {Truth::kTrue, Truth::kFalse, Truth::kFalse}));
  CHECK_FALSE(check({ex}, {Truth::kTrue, Truth::kTrue, Truth::kFalse}));
  const Prop iff = Prop::iff(Prop::lit(0), Prop::lit(1));
  CHECK_FALSE(check({iff}, {Truth::kTrue, Truth::kFalse}));
  CHECK(check({iff}, {Truth::kTrue, Truth::kTrue}));
  CHECK_THROWS_AS(check({iff}, {Truth::kTrue, Truth::kUnknown}),
                  IncompleteAssignment);
}

TEST_CASE("xor is n-ary parity") {
  const Prop x3 =
      Prop::exclusive_or({Prop::lit(0), Prop::lit(1), Prop::lit(2)});
  CHECK(check({x3}, {Truth::kTrue, Truth::kFalse, Truth::kFalse}));
  CHECK_FALSE(check({x3}, {Truth::kTrue, Truth::kTrue, Truth::kFalse}));
  CHECK(check({x3}, {Truth::kTrue, Truth::kTrue, Truth::kTrue}));
}

TEST_CASE("soundness: a conflict means no satisfying completion exists") {
  std::mt19937 rng(4242);
  int conflicts_seen = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int nvars = 4 + static_cast<int>(rng() % 5);
    std::vector<Prop> props;
    const int nprops = 2 + static_cast<int>(rng() % 4);
    for (int p = 0; p < nprops; ++p)
      props.push_back(random_prop(rng, nvars, 2));
    Assignment start(nvars, Truth::kUnknown);
    for (int v = 0; v < nvars; ++v) {
      const int roll = static_cast<int>(rng() % 3);
      if (roll == 0) start[v] = Truth::kTrue;
      if (roll == 1) start[v] = Truth::kFalse;
    }
    const auto result = propagate(props, start);
    if (result.conflict()) {
      ++conflicts_seen;
      CHECK_FALSE(satisfiable_by_enumeration(props, start));
    } else {
      // Propagation is sound in the other direction too: forced literals
      // never cut off every completion unless none existed to begin with.
      if (satisfiable_by_enumeration(props, start)) {
        CHECK(satisfiable_by_enumeration(props, result.assignment));
      }
    }
  }
  CHECK(conflicts_seen > 20);  // the generator must actually exercise conflicts
}

TEST_CASE("propagation is confluent under proposition reordering") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int nvars = 5 + static_cast<int>(rng() % 4);
    std::vector<Prop> props;
    for (int p = 0; p < 4; ++p) props.push_back(random_prop(rng, nvars, 2));
    Assignment start(nvars, Truth::kUnknown);
    start[0] = Truth::kTrue;
    const auto base = propagate(props, start);
    std::vector<Prop> shuffled = props;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto again = propagate(shuffled, start);
    CHECK(base.outcome == again.outcome);
    if (!base.conflict()) CHECK(base.assignment == again.assignment);
  }
}

TEST_CASE("exactly counting rules") {
  // two Trues needed, three candidates left: nothing decided yet
  const Prop ex2 = Prop::exactly(2, {0, 1, 2});
  auto r = propagate({ex2}, Assignment(3, Truth::kUnknown));
  CHECK(r.outcome == PropagateResult::Outcome::kResidual);
  // one True present in exactly-one: the rest go False
  const Prop ex1 = Prop::exactly(1, {0, 1, 2});
  r = propagate({ex1}, {Truth::kTrue, Truth::kUnknown, Truth::kUnknown});
  REQUIRE(r.completed());
  CHECK(r.assignment[1] == Truth::kFalse);
  CHECK(r.assignment[2] == Truth::kFalse);
  // only m candidates remain: they go True
  r = propagate({ex2}, {Truth::kFalse, Truth::kUnknown, Truth::kUnknown});
  REQUIRE(r.completed());
  CHECK(r.assignment[1] == Truth::kTrue);
  CHECK(r.assignment[2] == Truth::kTrue);
}
