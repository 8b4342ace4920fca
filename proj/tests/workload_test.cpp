#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include "cardlab/workload.hpp"
#include "test_util.hpp"

namespace cardlab {
namespace {

TEST(WorkloadTest, RangePredicateOpensOutOfDomainSide) {
  const DomainStats s{0, 100, 100, 101};
  const auto p = make_range_predicate(0, s, 10, 40);
  EXPECT_EQ(p.kind, PredicateKind::kOpenLow);
  EXPECT_FALSE(p.lo.has_value());
  EXPECT_EQ(*p.hi, 30);

  const auto q = make_range_predicate(0, s, 90, 40);
  EXPECT_EQ(q.kind, PredicateKind::kOpenHigh);
  EXPECT_EQ(*q.lo, 70);

  const auto r = make_range_predicate(0, s, 50, 20);
  EXPECT_EQ(r.kind, PredicateKind::kClosedRange);
  EXPECT_EQ(*r.lo, 40);
  EXPECT_EQ(*r.hi, 60);

  const auto both = make_range_predicate(0, s, 50, 300);
  EXPECT_EQ(both.kind, PredicateKind::kClosedRange);
  EXPECT_EQ(*both.lo, 0);
  EXPECT_EQ(*both.hi, 100);
}

TEST(WorkloadTest, Deterministic) {
  const Table t = testing::synth(2000, 100, 0.5, 1);
  WorkloadConfig cfg;
  cfg.n_queries = 500;
  cfg.seed = 42;
  EXPECT_EQ(gen_workload(t, cfg), gen_workload(t, cfg));
  cfg.seed = 43;
  const auto other = gen_workload(t, cfg);
  cfg.seed = 42;
  EXPECT_NE(gen_workload(t, cfg), other);
}

TEST(WorkloadTest, PredicateCountUniformOnThirteenColumns) {
  std::vector<std::vector<Value>> cols(13, std::vector<Value>(50));
  std::vector<std::string> names;
  for (std::size_t c = 0; c < 13; ++c) {
    names.push_back("c" + std::to_string(c));
    for (std::size_t r = 0; r < 50; ++r) cols[c][r] = static_cast<Value>((r * (c + 1)) % 17);
  }
  const Table t = Table::numeric(names, cols);
  WorkloadConfig cfg;
  cfg.n_queries = 13000;
  cfg.seed = 5;
  std::vector<double> freq(14, 0);
  for (const auto& q : gen_workload(t, cfg)) {
    ASSERT_GE(q.size(), 1u);
    ASSERT_LE(q.size(), 13u);
    freq[q.size()] += 1;
  }
  double chi2 = 0;
  for (std::size_t d = 1; d <= 13; ++d) chi2 += (freq[d] - 1000) * (freq[d] - 1000) / 1000;
  const boost::math::chi_squared dist(12);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01) << chi2;
}

TEST(WorkloadTest, OutOfDomainCenterFraction) {
  const Table t = testing::synth(2000, 100, 0.5, 2);
  WorkloadConfig cfg;
  Rng rng(9);
  std::size_t ood = 0, uniform_width = 0;
  const std::size_t n = 10000;
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = gen_query_detailed(t, cfg, rng);
    ood += g.center == CenterScheme::kOutOfDomain;
    uniform_width += g.width == WidthScheme::kUniform;
  }
  EXPECT_NEAR(static_cast<double>(ood) / n, 0.10, 0.01);
  EXPECT_NEAR(static_cast<double>(uniform_width) / n, 0.50, 0.02);
}

TEST(WorkloadTest, PredicatesRespectDomain) {
  const Table t = testing::synth(3000, 1000, 0.3, 3);
  WorkloadConfig cfg;
  cfg.n_queries = 5000;
  cfg.seed = 8;
  for (const auto& q : gen_workload(t, cfg)) {
    ASSERT_NO_THROW(validate(q, t));
    for (std::size_t i = 1; i < q.predicates.size(); ++i) ASSERT_LT(q.predicates[i - 1].col, q.predicates[i].col);
    for (const auto& p : q.predicates) {
      const auto& s = t.stats(p.col);
      ASSERT_NE(p.kind, PredicateKind::kInvalid);
      if (p.kind == PredicateKind::kClosedRange) {
        ASSERT_LE(s.min, *p.lo);
        ASSERT_LE(*p.lo, *p.hi);
        ASSERT_LE(*p.hi, s.max);
      }
      if (p.kind == PredicateKind::kOpenLow) { ASSERT_LE(*p.hi, s.max); }
      if (p.kind == PredicateKind::kOpenHigh) { ASSERT_GE(*p.lo, s.min); }
    }
  }
}

TEST(WorkloadTest, CategoricalColumnsGetEquality) {
  const Table t({{"c", ColumnKind::kCategorical}, {"n", ColumnKind::kNumeric}}, {{0, 1, 2, 0, 1}, {1, 2, 3, 4, 5}},
                {{"x", "y", "z"}, {}});
  WorkloadConfig cfg;
  cfg.n_queries = 2000;
  cfg.seed = 4;
  std::size_t seen = 0;
  for (const auto& q : gen_workload(t, cfg)) {
    if (const Predicate* p = q.find(0)) {
      ++seen;
      ASSERT_EQ(p->kind, PredicateKind::kEquality);
      ASSERT_EQ(*p->lo, *p->hi);
      ASSERT_GE(*p->lo, 0);
      ASSERT_LT(*p->lo, 3);
      ASSERT_EQ(*p->lo, std::floor(*p->lo));
    }
  }
  EXPECT_GT(seen, 0u);
}

TEST(WorkloadTest, LabelsOnToyTable) {
  const Table t = testing::two_columns({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, {1, 1, 1, 2, 2, 2, 3, 3, 3, 3});
  const std::vector<Query> qs{Query{},
                              Query{{Predicate::closed(0, 3, 7)}},
                              Query{{Predicate::at_least(0, 5), Predicate::equality(1, 3)}},
                              Query{{Predicate::invalid(0, 100, 10)}}};
  const auto l = label(t, qs);
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(l[0].cardinality, 10u);
  EXPECT_DOUBLE_EQ(l[0].selectivity, 1.0);
  EXPECT_EQ(l[1].cardinality, 5u);
  EXPECT_EQ(l[2].cardinality, 4u);
  EXPECT_DOUBLE_EQ(l[2].selectivity, 0.4);
  EXPECT_EQ(l[3].cardinality, 0u);
}

TEST(WorkloadTest, ParallelLabelingPreservesOrder) {
  const Table t = testing::synth(5000, 100, 0.5, 6);
  WorkloadConfig cfg;
  cfg.n_queries = 301;
  cfg.seed = 1;
  const auto qs = gen_workload(t, cfg);
  const auto serial = label(t, qs, 1);
  const auto parallel = label(t, qs, 4);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].query, parallel[i].query);
    EXPECT_EQ(serial[i].cardinality, parallel[i].cardinality);
  }
}

TEST(WorkloadTest, JsonLinesRoundTrip) {
  testing::TempDir dir;
  const Table t = testing::synth(1000, 100, 0.5, 7);
  WorkloadConfig cfg;
  cfg.n_queries = 200;
  cfg.seed = 3;
  const auto qs = gen_workload(t, cfg);
  write_workload_jsonl(qs, dir / "w.jsonl");
  const auto back = read_workload_jsonl(dir / "w.jsonl");
  ASSERT_EQ(back.size(), qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) EXPECT_EQ(back[i].query, qs[i]);

  const auto labeled = label(t, qs);
  write_labeled_jsonl(labeled, dir / "l.jsonl");
  const auto lback = read_workload_jsonl(dir / "l.jsonl");
  for (std::size_t i = 0; i < qs.size(); ++i) EXPECT_EQ(lback[i].cardinality, labeled[i].cardinality);

  // Same input, same bytes.
  write_labeled_jsonl(labeled, dir / "l2.jsonl");
  EXPECT_EQ(testing::read_file(dir / "l.jsonl"), testing::read_file(dir / "l2.jsonl"));
}

TEST(WorkloadTest, ConfigValidation) {
  WorkloadConfig cfg;
  cfg.p_center_data = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.n_queries = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.lambda_factor = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace cardlab
