#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "ldsda/errors.hpp"
#include "ldsda/reformulate.hpp"

using namespace ldsda;

namespace {

// Five ordered start-day Booleans under a partitioning constraint, as in a
// one-week scheduling decision.
Model start_day_model(const std::vector<std::string>& names) {
  Model m;
  std::vector<int> ys;
  for (const std::string& name : names) ys.push_back(m.add_boolean(name));
  m.add_logic_prop(Prop::exactly(1, ys));
  m.set_objective(Expr::constant(0.0));
  return m;
}

}  // namespace

TEST_CASE("declare_external: start-day vector") {
  Model m = start_day_model({"YS_1", "YS_2", "YS_3", "YS_4", "YS_5"});
  const auto spec = declare_external(m, {0, 1, 2, 3, 4});
  CHECK(spec.lower() == 1);
  CHECK(spec.upper() == 5);

  const Assignment a = fix_booleans({spec}, {2}, m.num_booleans());
  CHECK(a[1] == Truth::kTrue);  // start on the second day
  for (int i : {0, 2, 3, 4}) CHECK(a[i] == Truth::kFalse);
}

TEST_CASE("declare_external: degenerate single-element vector") {
  Model m;
  const int y = m.add_boolean("Y");
  m.add_logic_prop(Prop::exactly(1, {y}));
  m.set_objective(Expr::constant(0.0));
  const auto spec = declare_external(m, {y});
  CHECK(spec.upper() == 1);
  const Assignment a = fix_booleans({spec}, {1}, 1);
  CHECK(a[0] == Truth::kTrue);
}

TEST_CASE("declare_external requires the partitioning constraint") {
  Model m;
  m.add_boolean("a");
  m.add_boolean("b");
  m.set_objective(Expr::constant(0.0));
  CHECK_THROWS_AS(declare_external(m, {0, 1}), MissingExactlyOne);
}

TEST_CASE("the partitioning constraint must cover exactly the list") {
  Model m;
  for (int i = 0; i < 4; ++i) m.add_boolean("y" + std::to_string(i));
  m.add_logic_prop(Prop::exactly(1, {0, 1, 2, 3}));
  m.set_objective(Expr::constant(0.0));
  // A superset constraint would change the semantics; reject it.
  CHECK_THROWS_AS(declare_external(m, {0, 1, 2}), MissingExactlyOne);
  CHECK_NOTHROW(declare_external(m, {0, 1, 2, 3}));
  // Order of the declared list does not affect the set comparison.
  CHECK_NOTHROW(declare_external(m, {3, 1, 0, 2}));
}

TEST_CASE("declare_external rejects repeats") {
  Model m = start_day_model({"a", "b", "c"});
  CHECK_THROWS_AS(declare_external(m, {0, 1, 1}), DuplicateBoolean);
}

TEST_CASE("auto_detect produces one spec per disjunction") {
  Model m;
  m.add_continuous("x", 0.0, 1.0);
  std::vector<int> stage1, stage2;
  for (int i = 0; i < 3; ++i) stage1.push_back(m.add_boolean("s1_" + std::to_string(i)));
  for (int i = 0; i < 2; ++i) stage2.push_back(m.add_boolean("s2_" + std::to_string(i)));
  auto disjuncts = [](const std::vector<int>& ids) {
    std::vector<Disjunct> ds;
    for (int id : ids) ds.push_back(Disjunct{id, {}});
    return ds;
  };
  m.add_disjunction(disjuncts(stage1));
  m.add_disjunction(disjuncts(stage2));
  m.set_objective(Expr::constant(0.0));

  const auto specs = auto_detect(m);
  REQUIRE(specs.size() == 2);
  CHECK(specs[0].booleans == stage1);
  CHECK(specs[1].booleans == stage2);
  CHECK(lattice_size(specs) == 6);

  Model empty;
  empty.set_objective(Expr::constant(0.0));
  CHECK(auto_detect(empty).empty());
}

TEST_CASE("fix_booleans: cascade point (4,2) with R=6") {
  Model m;
  std::vector<int> yf, yr;
  for (int n = 1; n <= 6; ++n) yf.push_back(m.add_boolean("YF_" + std::to_string(n)));
  for (int n = 1; n <= 6; ++n) yr.push_back(m.add_boolean("YR_" + std::to_string(n)));
  m.add_logic_prop(Prop::exactly(1, yf));
  m.add_logic_prop(Prop::exactly(1, yr));
  m.set_objective(Expr::constant(0.0));
  auto feed = declare_external(m, yf);
  auto recycle = declare_external(m, yr);
  recycle.index = 1;

  const Assignment a = fix_booleans({feed, recycle}, {4, 2}, m.num_booleans());
  for (int n = 0; n < 6; ++n) {
    CHECK(a[yf[n]] == (n == 3 ? Truth::kTrue : Truth::kFalse));
    CHECK(a[yr[n]] == (n == 1 ? Truth::kTrue : Truth::kFalse));
  }

  SUBCASE("all-lower-bound point selects the first Boolean of each spec") {
    const Assignment lo = fix_booleans({feed, recycle}, {1, 1}, m.num_booleans());
    CHECK(lo[yf[0]] == Truth::kTrue);
    CHECK(lo[yr[0]] == Truth::kTrue);
  }
  SUBCASE("zero component is out of bounds") {
    CHECK_THROWS_AS(fix_booleans({feed, recycle}, {0, 1}, m.num_booleans()),
                    OutOfBounds);
  }
  SUBCASE("round trip recovers the point") {
    for (int z1 = 1; z1 <= 6; ++z1) {
      for (int z2 = 1; z2 <= 6; ++z2) {
        const ExternalPoint z{z1, z2};
        CHECK(read_point({feed, recycle},
                         fix_booleans({feed, recycle}, z, m.num_booleans())) ==
              z);
      }
    }
  }
}

TEST_CASE("positions, not labels: uneven label sets behave identically") {
  // The same five-way decision declared once with contiguous labels and
  // once with the labels 0,1,2,7,10; only positions matter.
  Model contiguous = start_day_model({"Y_1", "Y_2", "Y_3", "Y_4", "Y_5"});
  Model uneven = start_day_model({"Y_0", "Y_1", "Y_2", "Y_7", "Y_10"});
  const auto spec_c = declare_external(contiguous, {0, 1, 2, 3, 4});
  const auto spec_u = declare_external(uneven, {0, 1, 2, 3, 4});
  CHECK(spec_c.upper() == spec_u.upper());
  for (int pos = 1; pos <= 5; ++pos) {
    const Assignment ac = fix_booleans({spec_c}, {pos}, 5);
    const Assignment au = fix_booleans({spec_u}, {pos}, 5);
    CHECK(ac == au);
  }
  // Neighbors of position 4 are positions 3 and 5, i.e. labels 2 and 10.
  const Assignment left = fix_booleans({spec_u}, {3}, 5);
  const Assignment right = fix_booleans({spec_u}, {5}, 5);
  CHECK(left[2] == Truth::kTrue);   // label "Y_2"
  CHECK(right[4] == Truth::kTrue);  // label "Y_10"
}

TEST_CASE("in_box and lattice size") {
  Model m = start_day_model({"a", "b", "c"});
  const auto spec = declare_external(m, {0, 1, 2});
  CHECK(in_box({spec}, {1}));
  CHECK(in_box({spec}, {3}));
  CHECK_FALSE(in_box({spec}, {0}));
  CHECK_FALSE(in_box({spec}, {4}));
  CHECK_FALSE(in_box({spec}, {1, 1}));
  CHECK(lattice_size({spec}) == 3);
  CHECK(lattice_size({}) == 1);
}
