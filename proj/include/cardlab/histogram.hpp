#pragma once

#include <vector>

#include "cardlab/estimator.hpp"

namespace cardlab {

/// Equi-depth histogram over one column. A distinct value never straddles
/// two buckets, so bucket value ranges are disjoint and ordered.
class Hist1D {
 public:
  struct Bucket {
    Value lo = 0;
    Value hi = 0;
    std::size_t count = 0;
    std::size_t distinct = 0;
  };

  Hist1D() = default;
  static Hist1D build(const std::vector<Value>& values, std::size_t max_buckets);

  /// Fraction of rows satisfying `p` (which must reference this column).
  /// Ranges: integer-point overlap with each bucket; equality: the matching
  /// bucket's count / distinct.
  double selectivity(const Predicate& p) const;

  const std::vector<Bucket>& buckets() const { return buckets_; }
  std::size_t rows() const { return rows_; }
  /// 4 bytes per bucket boundary, count and distinct, plus the leading bound.
  std::size_t size_bytes() const { return (3 * buckets_.size() + 1) * 4; }

  nlohmann::ordered_json to_json() const;

 private:
  std::vector<Bucket> buckets_;
  std::size_t rows_ = 0;
};

struct AviParams {
  std::size_t buckets_per_column = 100;
  Budget budget;
};

/// Per-column equi-depth histograms combined under attribute value independence.
class AviEstimator final : public EstimatorBase<AviEstimator> {
 public:
  explicit AviEstimator(AviParams params = {}) : params_(params) {}

  std::string name() const override { return "avi"; }
  void build(const Table& table) override;
  using Estimator::estimate;
  double estimate(const Query& query, std::uint64_t seed) const override;
  std::size_t size_bytes() const override;
  nlohmann::ordered_json to_json() const override;

  const std::vector<Hist1D>& histograms() const { return hists_; }

 private:
  AviParams params_;
  std::vector<Hist1D> hists_;
  std::size_t rows_ = 0;
};

/// Largest per-column bucket count whose histograms fit `budget` bytes
/// (at least 1).
std::size_t buckets_within_budget(std::size_t columns, std::size_t requested, std::optional<std::size_t> budget);

/// One histogram per column.
std::vector<Hist1D> build_histograms(const Table& table, std::size_t buckets_per_column);

}  // namespace cardlab
