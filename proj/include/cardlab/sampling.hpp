#pragma once

#include "cardlab/estimator.hpp"

namespace cardlab {

struct SampleParams {
  double rate = 0.015;
  /// Sample-B: fall back to per-predicate independence when no sample row
  /// satisfies the whole conjunction.
  bool independence_fallback = false;
  std::uint64_t seed = 0;
  Budget budget;
};

/// Uniform row sample without replacement, scaled up to the table size.
class SampleEstimator final : public EstimatorBase<SampleEstimator> {
 public:
  explicit SampleEstimator(SampleParams params = {}) : params_(params) {}

  std::string name() const override { return params_.independence_fallback ? "sample_b" : "sample_a"; }
  void build(const Table& table) override;
  using Estimator::estimate;
  double estimate(const Query& query, std::uint64_t seed) const override;
  std::size_t size_bytes() const override { return sample_.row_count() * sample_.column_count() * 4; }
  nlohmann::ordered_json to_json() const override;

  const Table& sample() const { return sample_; }
  std::size_t source_rows() const { return rows_; }

 private:
  SampleParams params_;
  Table sample_;
  std::size_t rows_ = 0;
};

/// Draws `m` distinct row indices uniformly (partial Fisher-Yates).
std::vector<std::size_t> sample_rows_without_replacement(std::size_t rows, std::size_t m, Rng& rng);

}  // namespace cardlab
