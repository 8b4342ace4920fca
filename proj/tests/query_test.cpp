#include <gtest/gtest.h>

#include "cardlab/query.hpp"
#include "cardlab/random.hpp"
#include "test_util.hpp"

namespace cardlab {
namespace {

TEST(QueryTest, ExactCountExamples) {
  const Table t = testing::one_column({1, 2, 3, 4});
  EXPECT_EQ(exact_count(t, Query{}), 4u);
  EXPECT_EQ(exact_count(t, Query{{Predicate::closed(0, 2, 3)}}), 2u);
  EXPECT_EQ(exact_count(t, Query{{Predicate::invalid(0, 100, 10)}}), 0u);
  EXPECT_EQ(exact_count(t, Query{{Predicate::at_most(0, 2)}}), 2u);
  EXPECT_EQ(exact_count(t, Query{{Predicate::at_least(0, 4)}}), 1u);
  EXPECT_EQ(exact_count(t, Query{{Predicate::equality(0, 3)}}), 1u);
}

TEST(QueryTest, ConjunctionAcrossColumns) {
  const Table t = testing::two_columns({1, 1, 2, 2, 3}, {1, 2, 1, 2, 1});
  EXPECT_EQ(exact_count(t, Query{{Predicate::equality(0, 1), Predicate::equality(1, 2)}}), 1u);
  EXPECT_EQ(exact_count(t, Query{{Predicate::closed(0, 1, 2), Predicate::at_most(1, 1)}}), 2u);
  // An invalid predicate empties the result even alongside satisfiable ones.
  EXPECT_EQ(exact_count(t, Query{{Predicate::at_least(0, 0), Predicate::invalid(1, 5, 1)}}), 0u);
}

TEST(QueryTest, ClosedRejectsInvertedBounds) {
  EXPECT_THROW(Predicate::closed(0, 5, 1), std::invalid_argument);
  EXPECT_NO_THROW(Predicate::invalid(0, 5, 1));
}

TEST(QueryTest, Validate) {
  const Table t = testing::two_columns({1, 2}, {3, 4});
  EXPECT_NO_THROW(validate(Query{{Predicate::closed(0, 1, 2), Predicate::equality(1, 3)}}, t));
  EXPECT_THROW(validate(Query{{Predicate::equality(2, 1)}}, t), std::invalid_argument);
  EXPECT_THROW(validate(Query{{Predicate::equality(0, 1), Predicate::equality(0, 2)}}, t), std::invalid_argument);
  Predicate bad{0, PredicateKind::kClosedRange, 5, 1};
  EXPECT_THROW(validate(Query{{bad}}, t), std::invalid_argument);
  EXPECT_NO_THROW(validate(Query{{Predicate::invalid(0, 5, 1)}}, t));
}

TEST(QueryTest, JsonRoundTrip) {
  const Query q{{Predicate::closed(0, 1.5, 2), Predicate::at_most(1, 7), Predicate::at_least(2, -1),
                 Predicate::equality(3, 4), Predicate::invalid(4, 10, 1)}};
  const auto j = to_json(q);
  EXPECT_EQ(query_from_json(nlohmann::json::parse(j.dump())), q);
  EXPECT_TRUE(j["predicates"][1]["lo"].is_null());
  EXPECT_EQ(j["predicates"][0].dump(), R"({"col":0,"kind":"closed_range","lo":1.5,"hi":2.0})");
}

TEST(QueryTest, IntegerOverlapAndCoverage) {
  EXPECT_EQ(integer_overlap(2, 5, 0, 9), 4);
  EXPECT_EQ(integer_overlap(2.5, 5.5, 0, 9), 3);
  EXPECT_EQ(integer_overlap(10, 20, 0, 9), 0);
  // Integer bucket [0, 9] holds 10 points; [0, 4] covers half.
  EXPECT_DOUBLE_EQ(coverage_fraction(Predicate::closed(0, 0, 4), 0, 9), 0.5);
  EXPECT_DOUBLE_EQ(coverage_fraction(Predicate::at_least(0, 5), 0, 9), 0.5);
  EXPECT_DOUBLE_EQ(coverage_fraction(Predicate::equality(0, 3), 3, 3), 1.0);
  EXPECT_DOUBLE_EQ(coverage_fraction(Predicate::invalid(0, 9, 0), 0, 9), 0.0);
  // Non-integer bounds fall back to continuous length.
  EXPECT_DOUBLE_EQ(coverage_fraction(Predicate::closed(0, 0, 0.25), 0, 0.5), 0.5);
}

TEST(QueryTest, ExactCountMonotoneUnderTightening) {
  const Table t = testing::synth(5000, 50, 0.5, 3);
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double lo = static_cast<double>(uniform_index(rng, 50));
    const double hi = lo + static_cast<double>(uniform_index(rng, 50));
    const double lo2 = lo + unit_uniform(rng) * (hi - lo) / 2;
    const double hi2 = std::max(lo2, hi - unit_uniform(rng) * (hi - lo) / 2);
    const auto col = static_cast<std::size_t>(uniform_index(rng, 2));
    const Predicate other = Predicate::at_most(1 - col, static_cast<double>(uniform_index(rng, 50)));
    const auto wide = exact_count(t, Query{{Predicate::closed(col, lo, hi), other}});
    const auto tight = exact_count(t, Query{{Predicate::closed(col, lo2, hi2), other}});
    ASSERT_LE(tight, wide);
  }
}

TEST(QueryTest, ExactCountAdditiveUnderIntegerSplit) {
  const Table t = testing::synth(5000, 50, 0.5, 4);
  Rng rng(12);
  for (int i = 0; i < 2000; ++i) {
    const double l = static_cast<double>(uniform_index(rng, 49));
    const double h = l + 1 + static_cast<double>(uniform_index(rng, static_cast<std::uint64_t>(49 - l)));
    const double k = l + static_cast<double>(uniform_index(rng, static_cast<std::uint64_t>(h - l)));
    const Predicate other = Predicate::at_least(1, static_cast<double>(uniform_index(rng, 50)));
    const auto whole = exact_count(t, Query{{Predicate::closed(0, l, h), other}});
    const auto left = exact_count(t, Query{{Predicate::closed(0, l, k), other}});
    const auto right = exact_count(t, Query{{Predicate::closed(0, k + 1, h), other}});
    ASSERT_EQ(whole, left + right) << l << " " << k << " " << h;
  }
}

}  // namespace
}  // namespace cardlab
