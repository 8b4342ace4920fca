#include <gtest/gtest.h>

#include "cardlab/histogram.hpp"
#include "cardlab/rules.hpp"
#include "cardlab/sampling.hpp"
#include "test_util.hpp"

namespace cardlab {
namespace {

// Returns a fixed value for every query.
class ConstantEstimator final : public EstimatorBase<ConstantEstimator> {
 public:
  explicit ConstantEstimator(double v) : v_(v) {}
  std::string name() const override { return "const"; }
  void build(const Table&) override {}
  using Estimator::estimate;
  double estimate(const Query&, std::uint64_t) const override { return v_; }
  std::size_t size_bytes() const override { return 8; }
  nlohmann::ordered_json to_json() const override { return {}; }

 private:
  double v_;
};

// Grows as the query narrows.
class InverseWidthEstimator final : public EstimatorBase<InverseWidthEstimator> {
 public:
  std::string name() const override { return "inverse"; }
  void build(const Table& t) override { t_ = &t; }
  using Estimator::estimate;
  double estimate(const Query& q, std::uint64_t) const override {
    double w = 0;
    for (const auto& p : q.predicates) w += p.upper() - p.lower();
    return 1e6 / (1 + std::max(w, 0.0));
  }
  std::size_t size_bytes() const override { return 0; }
  nlohmann::ordered_json to_json() const override { return {}; }

 private:
  const Table* t_ = nullptr;
};

// Exact count plus seed-dependent noise.
class NoisyEstimator final : public EstimatorBase<NoisyEstimator> {
 public:
  std::string name() const override { return "noisy"; }
  void build(const Table& t) override { exact_.build(t); }
  using Estimator::estimate;
  double estimate(const Query& q, std::uint64_t seed) const override {
    return exact_.estimate(q) + static_cast<double>(seed % 3);
  }
  std::size_t size_bytes() const override { return 0; }
  bool deterministic() const override { return false; }
  nlohmann::ordered_json to_json() const override { return {}; }

 private:
  ExactEstimator exact_;
};

Table table() { return testing::synth(5000, 100, 0.5, 1); }

TEST(RulesTest, ExactSatisfiesEverything) {
  const Table t = table();
  ExactEstimator est;
  est.build(t);
  RuleCheckConfig cfg;
  cfg.probes = 500;
  cfg.stability_repeats = 50;
  cfg.seed = 2;
  const auto rep = check_rules(est, t, cfg);
  ASSERT_EQ(rep.results.size(), 5u);
  for (const auto& r : rep.results) {
    EXPECT_TRUE(r.satisfied()) << to_string(r.rule);
  }
  EXPECT_EQ(rep.at(Rule::kMonotonicity).probes, 500u);
  EXPECT_EQ(rep.at(Rule::kConsistency).probes, 500u);
  EXPECT_EQ(rep.at(Rule::kStability).probes, 50u);
  EXPECT_EQ(rep.at(Rule::kFidelityA).probes, 1u);
  EXPECT_EQ(rep.at(Rule::kFidelityB).probes, 2u);
}

TEST(RulesTest, ConstantViolatesAdditivityAndFidelity) {
  const Table t = table();
  const ConstantEstimator est(7);
  ProbeOptions opt;
  opt.probes = 200;
  opt.seed = 3;
  EXPECT_TRUE(probe_monotonicity(est, t, opt).satisfied());
  const auto c = probe_consistency(est, t, opt);
  EXPECT_EQ(c.violations, 200u);
  EXPECT_DOUBLE_EQ(c.max_magnitude, 1.0);  // |7 - 14| / 7
  EXPECT_FALSE(probe_fidelity_a(est, t).satisfied());
  const auto b = probe_fidelity_b(est, t);
  EXPECT_EQ(b.violations, 2u);
  EXPECT_EQ(b.max_magnitude, 7.0);
  EXPECT_TRUE(probe_stability(est, Query{}, 20).satisfied());
}

TEST(RulesTest, InverseWidthViolatesMonotonicity) {
  const Table t = table();
  InverseWidthEstimator est;
  est.build(t);
  ProbeOptions opt;
  opt.probes = 300;
  opt.seed = 4;
  const auto r = probe_monotonicity(est, t, opt);
  EXPECT_EQ(r.probes, 300u);
  EXPECT_GT(r.violation_rate(), 0.5);
  EXPECT_GT(r.max_magnitude, 0.0);
}

TEST(RulesTest, SeedModeMattersForStochasticEstimators) {
  const Table t = table();
  NoisyEstimator est;
  est.build(t);
  ProbeOptions opt;
  opt.probes = 300;
  opt.seed = 5;
  // A shared seed adds the same noise to both halves, so the split counts it twice.
  opt.seeds = SeedMode::kPaired;
  const auto paired = probe_consistency(est, t, opt);
  opt.seeds = SeedMode::kIndependent;
  const auto indep = probe_consistency(est, t, opt);
  EXPECT_GT(paired.violations, 0u);
  EXPECT_GT(indep.violations, 0u);
  opt.seeds = SeedMode::kPaired;
  EXPECT_TRUE(probe_monotonicity(est, t, opt).satisfied());

  const auto q = pick_stability_query(t, WorkloadConfig{}, 6);
  const auto s = probe_stability(est, q, 300, 7);
  EXPECT_FALSE(s.satisfied());
  EXPECT_EQ(s.spread(), 2.0);
}

TEST(RulesTest, StabilityQueryHasTwoPredicatesAndRows) {
  const Table t = table();
  const auto q = pick_stability_query(t, WorkloadConfig{}, 8);
  EXPECT_GE(q.size(), 2u);
  EXPECT_GT(exact_count(t, q), 0u);
  EXPECT_THROW(pick_stability_query(testing::one_column({1, 2}), WorkloadConfig{}, 1), std::invalid_argument);
}

TEST(RulesTest, ProbesAreDeterministic) {
  const Table t = table();
  SampleEstimator est;
  est.build(t);
  RuleCheckConfig cfg;
  cfg.probes = 300;
  cfg.stability_repeats = 20;
  cfg.seed = 9;
  EXPECT_EQ(check_rules(est, t, cfg).to_json(), check_rules(est, t, cfg).to_json());
}

TEST(RulesTest, HistogramsSatisfyRangeRules) {
  const Table t = testing::synth(20000, 1000, 0.5, 10);
  AviEstimator est;
  est.build(t);
  RuleCheckConfig cfg;
  cfg.probes = 2000;
  cfg.stability_repeats = 20;
  cfg.seed = 11;
  const auto rep = check_rules(est, t, cfg);
  for (const auto& r : rep.results) EXPECT_TRUE(r.satisfied()) << to_string(r.rule);
}

TEST(RulesTest, MatrixOutputs) {
  RuleReport a{"avi", {}}, b{"kde", {}};
  for (int i = 0; i < 5; ++i) {
    RuleResult r;
    r.rule = static_cast<Rule>(i);
    r.probes = 10;
    a.results.push_back(r);
    r.violations = i == 3 ? 1 : 0;
    r.probes = i == 3 ? 1 : 10;
    b.results.push_back(r);
  }
  const auto text = rule_matrix_text({a, b});
  EXPECT_NE(text.find("fidelity_a"), std::string::npos);
  EXPECT_NE(text.find("✓ 0.0000"), std::string::npos);
  EXPECT_NE(text.find("× 1.0000"), std::string::npos);
  const auto csv = rule_matrix_csv({a, b});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "estimator,rule,probes,violations,rate,verdict");
  EXPECT_NE(csv.find("kde,fidelity_a,1,1,1,violated\n"), std::string::npos);
  EXPECT_NE(csv.find("avi,monotonicity,10,0,0,satisfied\n"), std::string::npos);
  EXPECT_EQ(b.to_json()["rules"][3]["verdict"], "violated");
}

}  // namespace
}  // namespace cardlab
