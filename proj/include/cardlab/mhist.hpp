#pragma once

#include <vector>

#include "cardlab/estimator.hpp"

namespace cardlab {

struct MhistParams {
  Budget budget;
};

/// Multi-dimensional MaxDiff(V,A) histogram grown by repeatedly splitting the
/// (bucket, dimension) pair with the largest adjacent area difference.
class MhistEstimator final : public EstimatorBase<MhistEstimator> {
 public:
  struct Bucket {
    std::vector<Value> lo;  // tight per-dimension bounds of the rows inside
    std::vector<Value> hi;
    std::vector<std::size_t> distinct;
    std::size_t count = 0;
  };

  explicit MhistEstimator(MhistParams params = {}) : params_(params) {}

  std::string name() const override { return "mhist"; }
  void build(const Table& table) override;
  using Estimator::estimate;
  double estimate(const Query& query, std::uint64_t seed) const override;
  std::size_t size_bytes() const override { return buckets_.size() * bucket_cost_bytes(dims_); }
  nlohmann::ordered_json to_json() const override;

  const std::vector<Bucket>& buckets() const { return buckets_; }

  static std::size_t bucket_cost_bytes(std::size_t dims) { return 4 * (3 * dims + 1); }

 private:
  MhistParams params_;
  std::vector<Bucket> buckets_;
  std::size_t dims_ = 0;
  std::size_t rows_ = 0;
};

/// MaxDiff score of one dimension: sorted distinct values v_j with
/// frequencies f_j, areas a_j = f_j * (v_{j+1} - v_j) (last spread 1),
/// score = max_j |a_{j+1} - a_j|. Returns the score and the index j* of the
/// value after which to split, or nullopt with fewer than two distinct values.
struct MaxDiffSplit {
  double score = 0;
  std::size_t index = 0;
  Value split_value = 0;  // rows with value <= split_value go left
};
std::optional<MaxDiffSplit> maxdiff_split(std::vector<Value> values);

}  // namespace cardlab
