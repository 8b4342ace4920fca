#include "cardlab/rules.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "cardlab/random.hpp"

namespace cardlab {

namespace {

constexpr Rule kAllRules[] = {Rule::kMonotonicity, Rule::kConsistency, Rule::kStability, Rule::kFidelityA,
                              Rule::kFidelityB};

// Probe indices run past the requested count when probes are skipped; this
// bounds the search on tables where usable queries are rare.
constexpr std::size_t kMaxAttemptFactor = 20;

struct SeedPair {
  std::uint64_t a, b;
};

SeedPair probe_seeds(Rng& rng, SeedMode mode) {
  const std::uint64_t a = rng();
  return {a, mode == SeedMode::kPaired ? a : rng()};
}

bool is_splittable(const Predicate& p) {
  return p.kind == PredicateKind::kClosedRange && std::floor(*p.hi) - std::ceil(*p.lo) >= 1;
}

}  // namespace

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::kMonotonicity: return "monotonicity";
    case Rule::kConsistency: return "consistency";
    case Rule::kStability: return "stability";
    case Rule::kFidelityA: return "fidelity_a";
    case Rule::kFidelityB: return "fidelity_b";
  }
  return "?";
}

nlohmann::ordered_json RuleResult::to_json() const {
  nlohmann::ordered_json j;
  j["rule"] = std::string(to_string(rule));
  j["probes"] = probes;
  j["skipped"] = skipped;
  j["violations"] = violations;
  j["violation_rate"] = violation_rate();
  j["max_magnitude"] = max_magnitude;
  if (rule == Rule::kStability) {
    j["min_estimate"] = min_estimate;
    j["max_estimate"] = max_estimate;
    j["spread"] = spread();
  }
  j["verdict"] = satisfied() ? "satisfied" : "violated";
  return j;
}

RuleResult probe_monotonicity(const Estimator& est, const Table& table, const ProbeOptions& opt) {
  const double eps = opt.epsilon > 0 ? opt.epsilon : 1e-9;
  RuleResult r;
  r.rule = Rule::kMonotonicity;
  for (std::size_t i = 0; r.probes < opt.probes && i < kMaxAttemptFactor * opt.probes; ++i) {
    Rng rng(derive_seed(opt.seed, i));
    Query q = gen_query(table, opt.workload, rng);
    std::vector<std::size_t> ranges;
    for (std::size_t k = 0; k < q.predicates.size(); ++k) {
      if (q.predicates[k].is_range()) ranges.push_back(k);
    }
    if (ranges.empty()) {
      ++r.skipped;
      continue;
    }
    const auto k = ranges[uniform_index(rng, ranges.size())];
    const Predicate& p = q.predicates[k];
    const auto& s = table.stats(p.col);
    const double L = p.lo.value_or(s.min);
    const double H = p.hi.value_or(s.max);
    const double w = std::max(H - L, 0.0);
    const double lo = L + unit_uniform(rng) * w / 2;
    const double hi = std::max(lo, H - unit_uniform(rng) * w / 2);
    Query tight = q;
    tight.predicates[k] = Predicate::closed(p.col, lo, hi);

    const auto seeds = probe_seeds(rng, opt.seeds);
    const double e = est.estimate(q, seeds.a);
    const double et = est.estimate(tight, seeds.b);
    ++r.probes;
    if (et > e * (1 + eps)) {
      ++r.violations;
      r.max_magnitude = std::max(r.max_magnitude, e > 0 ? et / e - 1 : et);
    }
  }
  return r;
}

RuleResult probe_consistency(const Estimator& est, const Table& table, const ProbeOptions& opt) {
  const double eps = opt.epsilon > 0 ? opt.epsilon : 1e-6;
  RuleResult r;
  r.rule = Rule::kConsistency;
  for (std::size_t i = 0; r.probes < opt.probes && i < kMaxAttemptFactor * opt.probes; ++i) {
    Rng rng(derive_seed(opt.seed, i));
    Query q = gen_query(table, opt.workload, rng);
    std::vector<std::size_t> splittable;
    for (std::size_t k = 0; k < q.predicates.size(); ++k) {
      if (is_splittable(q.predicates[k])) splittable.push_back(k);
    }
    if (splittable.empty()) {
      ++r.skipped;
      continue;
    }
    const auto k = splittable[uniform_index(rng, splittable.size())];
    const Predicate p = q.predicates[k];
    const double first = std::ceil(*p.lo);
    const auto interior = static_cast<std::uint64_t>(std::floor(*p.hi) - first);  // choices of k in [first, last - 1]
    const double split = first + static_cast<double>(uniform_index(rng, interior));
    Query left = q, right = q;
    left.predicates[k] = Predicate::closed(p.col, *p.lo, split);
    right.predicates[k] = Predicate::closed(p.col, split + 1, *p.hi);

    const std::uint64_t s0 = rng();
    const std::uint64_t s1 = opt.seeds == SeedMode::kPaired ? s0 : rng();
    const std::uint64_t s2 = opt.seeds == SeedMode::kPaired ? s0 : rng();
    const double e = est.estimate(q, s0);
    const double e1 = est.estimate(left, s1);
    const double e2 = est.estimate(right, s2);
    ++r.probes;
    const double gap = std::abs(e - e1 - e2);
    const double scale = std::max(1.0, e);
    if (gap > eps * scale) {
      ++r.violations;
      r.max_magnitude = std::max(r.max_magnitude, gap / scale);
    }
  }
  return r;
}

RuleResult probe_stability(const Estimator& est, const Query& query, std::size_t repeats, std::uint64_t seed) {
  RuleResult r;
  r.rule = Rule::kStability;
  if (repeats == 0) return r;
  const double first = est.estimate(query, derive_seed(seed, 0));
  r.min_estimate = r.max_estimate = first;
  r.probes = repeats;
  for (std::size_t i = 1; i < repeats; ++i) {
    const double e = est.estimate(query, derive_seed(seed, i));
    r.min_estimate = std::min(r.min_estimate, e);
    r.max_estimate = std::max(r.max_estimate, e);
    if (e != first) ++r.violations;
  }
  r.max_magnitude = r.spread();
  return r;
}

RuleResult probe_fidelity_a(const Estimator& est, const Table& table, double epsilon) {
  Query q;
  for (std::size_t c = 0; c < table.column_count(); ++c) {
    q.predicates.push_back(Predicate::closed(c, table.stats(c).min, table.stats(c).max));
  }
  const double rows = static_cast<double>(table.row_count());
  const double gap = std::abs(est.estimate(q, 0) - rows);
  RuleResult r;
  r.rule = Rule::kFidelityA;
  r.probes = 1;
  r.max_magnitude = rows > 0 ? gap / rows : gap;
  if (gap > epsilon * rows) r.violations = 1;
  return r;
}

RuleResult probe_fidelity_b(const Estimator& est, const Table& table, double epsilon) {
  RuleResult r;
  r.rule = Rule::kFidelityB;
  for (std::size_t c = 0; c < table.column_count(); ++c) {
    const auto& s = table.stats(c);
    Query q{{Predicate::invalid(c, std::max(s.max, s.min + 1), s.min)}};
    const double e = est.estimate(q, c);
    ++r.probes;
    if (e > epsilon) {
      ++r.violations;
      r.max_magnitude = std::max(r.max_magnitude, e);
    }
  }
  return r;
}

Query pick_stability_query(const Table& table, const WorkloadConfig& cfg, std::uint64_t seed) {
  if (table.column_count() < 2) throw std::invalid_argument("rules: stability query needs two columns");
  for (std::uint64_t i = 0; i < 100000; ++i) {
    Rng rng(derive_seed(seed, i));
    Query q = gen_query(table, cfg, rng);
    if (q.size() >= 2 && exact_count(table, q) > 0) return q;
  }
  throw std::runtime_error("rules: no usable stability query");
}

nlohmann::ordered_json RuleCheckConfig::to_json() const {
  nlohmann::ordered_json j;
  j["probes"] = probes;
  j["stability_repeats"] = stability_repeats;
  j["seed"] = seed;
  j["seeds"] = seeds == SeedMode::kPaired ? "paired" : "independent";
  return j;
}

const RuleResult& RuleReport::at(Rule rule) const {
  for (const auto& r : results) {
    if (r.rule == rule) return r;
  }
  throw std::out_of_range("rules: no result for " + std::string(to_string(rule)));
}

nlohmann::ordered_json RuleReport::to_json() const {
  nlohmann::ordered_json j;
  j["estimator"] = estimator;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : results) arr.push_back(r.to_json());
  j["rules"] = std::move(arr);
  return j;
}

RuleReport check_rules(const Estimator& est, const Table& table, const RuleCheckConfig& cfg) {
  RuleReport rep;
  rep.estimator = est.name();
  ProbeOptions opt{cfg.probes, derive_seed(cfg.seed, 1), 0, cfg.seeds, cfg.workload};
  rep.results.push_back(probe_monotonicity(est, table, opt));
  opt.seed = derive_seed(cfg.seed, 2);
  rep.results.push_back(probe_consistency(est, table, opt));
  const Query q = pick_stability_query(table, cfg.workload, derive_seed(cfg.seed, 3));
  rep.results.push_back(probe_stability(est, q, cfg.stability_repeats, derive_seed(cfg.seed, 4)));
  rep.results.push_back(probe_fidelity_a(est, table));
  rep.results.push_back(probe_fidelity_b(est, table));
  return rep;
}

std::string rule_matrix_text(const std::vector<RuleReport>& reports) {
  std::ostringstream out;
  out << std::left << std::setw(14) << "rule";
  for (const auto& r : reports) out << std::setw(16) << r.estimator;
  out << '\n';
  for (Rule rule : kAllRules) {
    out << std::setw(14) << to_string(rule);
    for (const auto& rep : reports) {
      const auto& r = rep.at(rule);
      std::ostringstream cell;
      cell << (r.satisfied() ? "✓ " : "× ") << std::fixed << std::setprecision(4) << r.violation_rate();
      // The marks are multibyte; pad by code points, not bytes.
      const std::string text = cell.str();
      const auto width = static_cast<std::size_t>(std::count_if(text.begin(), text.end(), [](char ch) { return (ch & 0xC0) != 0x80; }));
      out << text << std::string(16 - std::min<std::size_t>(15, width), ' ');
    }
    out << '\n';
  }
  return out.str();
}

std::string rule_matrix_csv(const std::vector<RuleReport>& reports) {
  std::ostringstream out;
  out << "estimator,rule,probes,violations,rate,verdict\n";
  for (const auto& rep : reports) {
    for (const auto& r : rep.results) {
      out << rep.estimator << ',' << to_string(r.rule) << ',' << r.probes << ',' << r.violations << ','
          << format_value(r.violation_rate()) << ',' << (r.satisfied() ? "satisfied" : "violated") << '\n';
    }
  }
  return out.str();
}

}  // namespace cardlab
