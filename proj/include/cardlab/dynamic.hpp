#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cardlab/estimator.hpp"

namespace cardlab {

struct UpdateSpec {
  double append_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Sorts a copy of every column independently, samples
/// ceil(fraction * rows) of its rows without replacement and appends them to
/// the original. The appended rows are rank-correlated across all columns.
Table make_appended_table(const Table& table, const UpdateSpec& spec);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Seconds now() const = 0;
};

class SteadyClock final : public Clock {
 public:
  Seconds now() const override;
};

/// Clock that only moves when told to.
class ManualClock final : public Clock {
 public:
  Seconds now() const override { return now_; }
  void advance(Seconds d) { now_ += d; }

 private:
  Seconds now_{0};
};

/// Wraps an estimator so that update() advances a ManualClock by a fixed
/// delay after delegating.
class DelayedUpdate final : public Estimator {
 public:
  DelayedUpdate(std::unique_ptr<Estimator> inner, ManualClock& clock, Seconds delay)
      : inner_(std::move(inner)), clock_(&clock), delay_(delay) {}

  std::string name() const override { return inner_->name(); }
  void build(const Table& table) override { inner_->build(table); }
  using Estimator::estimate;
  double estimate(const Query& query, std::uint64_t seed) const override { return inner_->estimate(query, seed); }
  Seconds update(const Table& new_table) override;
  std::unique_ptr<Estimator> snapshot() const override;
  std::size_t size_bytes() const override { return inner_->size_bytes(); }
  bool deterministic() const override { return inner_->deterministic(); }
  nlohmann::ordered_json to_json() const override { return inner_->to_json(); }

 private:
  std::unique_ptr<Estimator> inner_;
  ManualClock* clock_;
  Seconds delay_;
};

struct DynamicReport {
  std::string estimator;
  double T = 0;  // seconds
  double t_u = 0;
  bool finished = true;
  bool failed = false;
  std::string error;
  std::size_t n = 0;
  std::size_t stale_count = 0;
  std::size_t updated_count = 0;
  ErrorSummary stale;
  ErrorSummary updated;
  ErrorSummary combined;

  double headline() const { return combined.p99; }
  nlohmann::ordered_json to_json() const;
};

/// floor(n * t_u / T), capped at n.
std::size_t stale_query_count(std::size_t n, double t_u, double T);

/// Runs one update on `estimator` (built on the old table) while `labeled`
/// queries (labeled against new_table, in timeline order) arrive uniformly
/// over [0, T]. Query i is estimated with seed seed_base + i.
DynamicReport run_dynamic(Estimator& estimator, const Table& new_table, const std::vector<LabeledQuery>& labeled,
                          double T, const Clock& clock, std::uint64_t seed_base = 0);

struct SweepRow {
  std::string estimator;
  double T = 0;
  double t_u = 0;
  double p99 = 0;
  bool finished = true;
};

/// CSV with columns estimator,T,t_u,p99,finished.
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace cardlab
