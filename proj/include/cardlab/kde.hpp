#pragma once

#include <Eigen/Dense>

#include "cardlab/estimator.hpp"

namespace cardlab {

struct KdeParams {
  double rate = 0.015;
  std::uint64_t seed = 0;
  Budget budget;
};

/// Gaussian product-kernel density over a uniform row sample with Scott's
/// rule bandwidths. Discrete predicates are widened by 0.5 on each side so
/// equality has nonzero mass under a continuous kernel.
class KdeEstimator final : public EstimatorBase<KdeEstimator> {
 public:
  static constexpr double kBandwidthFloor = 1e-6;

  explicit KdeEstimator(KdeParams params = {}) : params_(params) {}

  std::string name() const override { return "kde"; }
  void build(const Table& table) override;
  using Estimator::estimate;
  double estimate(const Query& query, std::uint64_t seed) const override;
  std::size_t size_bytes() const override {
    return static_cast<std::size_t>(sample_.size() + bandwidth_.size()) * 4;
  }
  nlohmann::ordered_json to_json() const override;

  const Eigen::MatrixXd& sample() const { return sample_; }
  const Eigen::VectorXd& bandwidth() const { return bandwidth_; }

 private:
  KdeParams params_;
  Eigen::MatrixXd sample_;  // rows = sample points, cols = dimensions
  Eigen::VectorXd bandwidth_;
  std::size_t rows_ = 0;
};

/// Scott's rule: sigma_i * m^(-1/(dims+4)), sigma floored at kBandwidthFloor.
Eigen::VectorXd scott_bandwidth(const Eigen::MatrixXd& sample);

double standard_normal_cdf(double z);

}  // namespace cardlab
