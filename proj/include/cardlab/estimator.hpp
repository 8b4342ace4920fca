#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cardlab/query.hpp"
#include "cardlab/table.hpp"
#include "cardlab/workload.hpp"
#include "json.hpp"

namespace cardlab {

using Seconds = std::chrono::duration<double>;

/// Model size limit. The default is 1.5% of the table's data size
/// (rows x columns x 4 bytes).
struct Budget {
  enum class Kind { kFraction, kBytes, kUnlimited };
  Kind kind = Kind::kFraction;
  double fraction = 0.015;
  std::size_t bytes = 0;

  static Budget of_fraction(double f) { return {Kind::kFraction, f, 0}; }
  static Budget of_bytes(std::size_t b) { return {Kind::kBytes, 0, b}; }
  static Budget unlimited() { return {Kind::kUnlimited, 0, 0}; }

  std::optional<std::size_t> resolve(const Table& table) const;
  nlohmann::ordered_json to_json() const;
  static Budget from_json(const nlohmann::json& j);
};

/// Common capability set of every cardinality estimator.
///
/// Built models are immutable under estimate(); all randomness an estimate
/// needs comes from the per-call seed, so concurrent estimate() calls on one
/// model are safe. update() must not run concurrently with estimate().
class Estimator {
 public:
  virtual ~Estimator() = default;

  virtual std::string name() const = 0;
  virtual void build(const Table& table) = 0;
  /// Nonnegative, finite cardinality estimate.
  virtual double estimate(const Query& query, std::uint64_t seed) const = 0;
  /// Brings the model up to date with `new_table`; returns wall-clock time spent.
  virtual Seconds update(const Table& new_table);
  /// Independent frozen copy, unaffected by later update() calls.
  virtual std::unique_ptr<Estimator> snapshot() const = 0;
  virtual std::size_t size_bytes() const = 0;
  /// False when estimate() depends on the seed.
  virtual bool deterministic() const { return true; }
  /// Versioned model dump with explicit field order.
  virtual nlohmann::ordered_json to_json() const = 0;

  double estimate(const Query& query) const { return estimate(query, 0); }
};

template <class Derived>
class EstimatorBase : public Estimator {
 public:
  std::unique_ptr<Estimator> snapshot() const override {
    return std::make_unique<Derived>(static_cast<const Derived&>(*this));
  }
};

/// Ground truth wrapped as an estimator (full scan per query).
class ExactEstimator final : public EstimatorBase<ExactEstimator> {
 public:
  std::string name() const override { return "exact"; }
  void build(const Table& table) override { table_ = std::make_shared<const Table>(table); }
  using Estimator::estimate;
  double estimate(const Query& query, std::uint64_t seed) const override;
  std::size_t size_bytes() const override { return table_ ? table_->data_size_bytes() : 0; }
  nlohmann::ordered_json to_json() const override;

 private:
  std::shared_ptr<const Table> table_;
};

/// q-error with both arguments clamped to >= 1. Throws on non-finite or
/// negative input.
double q_error(double est, double act);

struct ErrorSummary {
  double p50 = 1;
  double p95 = 1;
  double p99 = 1;
  double max = 1;
  std::size_t count = 0;

  bool operator==(const ErrorSummary&) const = default;
};

/// Nearest-rank percentiles (the ceil(p*n)-th order statistic) plus max.
ErrorSummary summarize(std::vector<double> errors);
double nearest_rank(const std::vector<double>& sorted, double p);

/// Buckets by number of predicates; absent counts have no entry.
std::map<std::size_t, ErrorSummary> group_by_predicate_count(const std::vector<LabeledQuery>& labeled,
                                                             const std::vector<double>& errors);

/// q-errors of `est` on every labeled query (seed i + seed_base for query i).
std::vector<double> evaluate_errors(const Estimator& est, const std::vector<LabeledQuery>& labeled,
                                    std::uint64_t seed_base = 0);

struct ErrorReportRow {
  std::string estimator;
  std::string dataset;
  std::string group;  // "all" or the predicate count
  ErrorSummary summary;
};

nlohmann::ordered_json to_json(const ErrorSummary& s);
nlohmann::ordered_json to_json(const std::vector<ErrorReportRow>& rows);
/// CSV with columns estimator,dataset,group,p50,p95,p99,max,count.
std::string to_csv(const std::vector<ErrorReportRow>& rows);

}  // namespace cardlab
