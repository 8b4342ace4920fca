#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cardlab/estimator.hpp"
#include "cardlab/histogram.hpp"
#include "cardlab/workload.hpp"

namespace cardlab {

/// Query featurisation for regression estimators: normalised per-column
/// bounds followed by the logged heuristic estimates (AVI, MinSel, EBO).
struct QueryFeatures {
  std::vector<double> lo;  // per column, in [0,1]; (0,1) when unconstrained
  std::vector<double> hi;
  double avi = 1;
  double min_sel = 1;
  double ebo = 1;
  double log_avi = 0;
  double log_min_sel = 0;
  double log_ebo = 0;

  /// Flat vector <lo_1, hi_1, ..., lo_n, hi_n, log_avi, log_min_sel, log_ebo>.
  Eigen::VectorXd vector() const;
};

/// Column statistics a featuriser needs.
struct FeatureContext {
  std::vector<Hist1D> hists;
  std::vector<DomainStats> stats;
  std::size_t rows = 0;

  static FeatureContext build(const Table& table, std::size_t buckets_per_column);
  std::size_t size_bytes() const;
};

/// Exponential backoff over the (up to) four smallest selectivities:
/// s_(1) * s_(2)^(1/2) * s_(3)^(1/4) * s_(4)^(1/8).
double exponential_backoff(std::vector<double> selectivities);

/// Invalid predicates keep their inverted bounds (lo > hi).
QueryFeatures featurize_query(const Query& query, const FeatureContext& ctx);

struct GbtConfig {
  std::size_t trees = 64;
  std::size_t max_depth = 6;
  double shrinkage = 0.1;
  std::size_t grid = 32;  // candidate thresholds per feature: quantiles of the training values
  std::size_t min_leaf = 5;
  std::optional<std::size_t> max_bytes;  // stop adding trees beyond this size
};

/// Boosted ensemble of least-squares regression trees.
class GbtModel {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    double value = 0;
    int left = -1;
    int right = -1;
  };
  using Tree = std::vector<Node>;

  /// Fits stagewise on (X, y); X rows are samples. Deterministic and
  /// independent of the row order of the training set.
  static GbtModel train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GbtConfig& cfg);

  double predict(const Eigen::VectorXd& x) const;
  const std::vector<Tree>& trees() const { return trees_; }
  double base() const { return base_; }
  double shrinkage() const { return shrinkage_; }
  /// Training mean squared error before any tree and after each tree.
  const std::vector<double>& training_loss() const { return loss_; }
  std::size_t depth(std::size_t tree) const;
  std::size_t size_bytes() const;
  nlohmann::ordered_json to_json() const;

  static constexpr std::size_t kNodeBytes = 12;

 private:
  std::vector<Tree> trees_;
  double base_ = 0;
  double shrinkage_ = 0.1;
  std::vector<double> loss_;
};

/// log(max(selectivity, 1/rows)) regression targets.
Eigen::VectorXd log_selectivity_labels(const std::vector<LabeledQuery>& labeled, std::size_t rows);

GbtModel train_gbt(const std::vector<LabeledQuery>& labeled, const FeatureContext& ctx, const GbtConfig& cfg);
/// exp(prediction) * rows, clamped to [0, rows].
double estimate_gbt(const GbtModel& model, const FeatureContext& ctx, const Query& query);

struct GbtParams {
  GbtConfig model;
  std::size_t train_queries = 10000;
  std::size_t hist_buckets = 50;
  WorkloadConfig workload;  // n_queries is overridden by train_queries
  double update_sample_rate = 0.05;
  std::uint64_t seed = 0;
  Budget budget;
};

/// Query-driven estimator: trains on a generated, labeled workload.
class GbtEstimator final : public EstimatorBase<GbtEstimator> {
 public:
  explicit GbtEstimator(GbtParams params = {}) : params_(params) {}

  std::string name() const override { return "gbt"; }
  void build(const Table& table) override;
  /// Fits on an explicit labeled workload instead of generating one.
  void build(const Table& table, const std::vector<LabeledQuery>& training);
  using Estimator::estimate;
  double estimate(const Query& query, std::uint64_t seed) const override;
  /// Regenerates a workload on the new table, labels it from a uniform
  /// sample, and retrains.
  Seconds update(const Table& new_table) override;
  std::size_t size_bytes() const override { return model_.size_bytes() + ctx_.size_bytes(); }
  nlohmann::ordered_json to_json() const override;

  const GbtModel& model() const { return model_; }
  const FeatureContext& context() const { return ctx_; }

  /// Labels `queries` against a uniform `rate` sample of `table`.
  static std::vector<LabeledQuery> sample_labels(const Table& table, const std::vector<Query>& queries, double rate,
                                                 std::uint64_t seed);

 private:
  void fit(const Table& table, const std::vector<LabeledQuery>& training);

  GbtParams params_;
  FeatureContext ctx_;
  GbtModel model_;
  std::size_t updates_ = 0;
};

}  // namespace cardlab
