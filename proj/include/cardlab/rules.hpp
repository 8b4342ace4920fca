#pragma once

#include <string>
#include <vector>

#include "cardlab/estimator.hpp"
#include "cardlab/workload.hpp"

namespace cardlab {

enum class Rule { kMonotonicity, kConsistency, kStability, kFidelityA, kFidelityB };

std::string_view to_string(Rule rule);

/// How stochastic estimators are seeded within one probe pair.
enum class SeedMode {
  kPaired,       // every estimate in a probe shares one seed
  kIndependent,  // each estimate gets its own seed
};

struct RuleResult {
  Rule rule = Rule::kMonotonicity;
  std::size_t probes = 0;
  std::size_t skipped = 0;
  std::size_t violations = 0;
  double max_magnitude = 0;
  // Stability only: range of the observed estimates.
  double min_estimate = 0;
  double max_estimate = 0;

  bool satisfied() const { return violations == 0; }
  double violation_rate() const { return probes ? static_cast<double>(violations) / static_cast<double>(probes) : 0.0; }
  double spread() const { return max_estimate - min_estimate; }
  nlohmann::ordered_json to_json() const;
};

struct ProbeOptions {
  std::size_t probes = 10000;
  std::uint64_t seed = 0;
  double epsilon = 0;  // rule default when 0
  SeedMode seeds = SeedMode::kPaired;
  WorkloadConfig workload;
};

/// Tightens one range predicate of a generated query; violation when the
/// tighter query's estimate exceeds the original's by more than a factor
/// (1 + epsilon). Magnitude: relative increase.
RuleResult probe_monotonicity(const Estimator& est, const Table& table, const ProbeOptions& opt);

/// Splits one closed range [l, h] at an interior integer k into [l, k] and
/// [k + 1, h]; violation when |e - e1 - e2| > epsilon * max(1, e). Queries
/// without a splittable predicate are skipped and not counted.
RuleResult probe_consistency(const Estimator& est, const Table& table, const ProbeOptions& opt);

/// Estimates `query` with `repeats` distinct seeds; every result differing
/// from the first counts as a violation. Magnitude: spread.
RuleResult probe_stability(const Estimator& est, const Query& query, std::size_t repeats, std::uint64_t seed = 0);

/// Full-domain query; violation when |e - rows| > epsilon * rows.
RuleResult probe_fidelity_a(const Estimator& est, const Table& table, double epsilon = 1e-6);

/// One probe per column with an inverted range (lo > hi) on that column;
/// violation when the estimate exceeds epsilon.
RuleResult probe_fidelity_b(const Estimator& est, const Table& table, double epsilon = 1e-6);

/// First generated query with at least two predicates, none invalid, and a
/// nonzero true count. Used as the stability probe.
Query pick_stability_query(const Table& table, const WorkloadConfig& cfg, std::uint64_t seed);

struct RuleCheckConfig {
  std::size_t probes = 10000;
  std::size_t stability_repeats = 2000;
  std::uint64_t seed = 0;
  SeedMode seeds = SeedMode::kPaired;
  WorkloadConfig workload;

  nlohmann::ordered_json to_json() const;
};

struct RuleReport {
  std::string estimator;
  std::vector<RuleResult> results;  // in Rule order

  const RuleResult& at(Rule rule) const;
  nlohmann::ordered_json to_json() const;
};

RuleReport check_rules(const Estimator& est, const Table& table, const RuleCheckConfig& cfg);

/// Rules x estimators with a check or cross per cell plus the violation rate.
std::string rule_matrix_text(const std::vector<RuleReport>& reports);
/// Long form: estimator,rule,probes,violations,rate,verdict.
std::string rule_matrix_csv(const std::vector<RuleReport>& reports);

}  // namespace cardlab
