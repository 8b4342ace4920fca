#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cardlab/estimator.hpp"
#include "cardlab/progressive.hpp"
#include "cardlab/random.hpp"

namespace cardlab {

struct MadeTrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 256;
  double step_size = 1e-2;  // Adam
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

/// Gradients of the mean negative log-likelihood, shaped like the parameters.
struct MadeGradients {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

/// Single-hidden-layer masked autoencoder for distribution estimation over
/// one-hot encoded discrete columns in natural order. Output block i is a
/// softmax over column i's cells and depends only on input blocks < i.
///
/// Data is passed as a cell-index matrix: rows = columns, cols = records.
class MadeModel final : public AutoregressiveModel {
 public:
  MadeModel() = default;
  MadeModel(std::vector<ColumnCells> cells, std::size_t hidden, std::size_t rows, std::uint64_t seed);

  // AutoregressiveModel
  std::size_t num_positions() const override { return cells_.size(); }
  std::size_t column_at(std::size_t pos) const override { return pos; }
  std::size_t num_cells(std::size_t pos) const override { return domain_[pos]; }
  double cell_fraction(std::size_t pos, std::size_t cell, const Predicate& p) const override {
    return cells_[pos].fraction(cell, p);
  }
  void conditionals(std::size_t pos, const Eigen::MatrixXi& sampled, Eigen::MatrixXd& probs) const override;
  std::size_t row_count() const override { return rows_; }
  void set_row_count(std::size_t rows) { rows_ = rows; }

  /// Conditional distribution of column `col` given values for columns < col.
  Eigen::VectorXd conditional(std::span<const int> prefix, std::size_t col) const;

  /// Mean negative log-likelihood (nats per record).
  double loss(const Eigen::MatrixXi& data) const;
  MadeGradients gradients(const Eigen::MatrixXi& data) const;
  /// Runs `epochs` passes of shuffled mini-batch Adam; returns the loss after
  /// each epoch.
  std::vector<double> train(const Eigen::MatrixXi& data, const MadeTrainConfig& cfg, std::size_t epochs, Rng& rng);

  /// Encodes table rows into cells (columns x rows).
  Eigen::MatrixXi encode(const Table& table) const;

  std::size_t hidden() const { return static_cast<std::size_t>(w1_.rows()); }
  std::size_t parameter_count() const;
  /// 4 bytes per parameter plus the cell boundaries.
  std::size_t size_bytes() const;
  const ColumnCells& cells(std::size_t col) const { return cells_[col]; }

  // Raw parameter access (gradient checks, serialisation).
  Eigen::MatrixXd& w1() { return w1_; }
  Eigen::VectorXd& b1() { return b1_; }
  Eigen::MatrixXd& w2() { return w2_; }
  Eigen::VectorXd& b2() { return b2_; }
  const Eigen::MatrixXd& mask1() const { return m1_; }
  const Eigen::MatrixXd& mask2() const { return m2_; }

  nlohmann::ordered_json to_json() const;

  /// Parameter count for a given layout, without building the model.
  static std::size_t parameter_count_for(const std::vector<std::size_t>& domain, std::size_t hidden);

 private:
  void forward(const Eigen::MatrixXi& data, Eigen::MatrixXd& hidden, Eigen::MatrixXd& logits) const;
  void softmax_blocks(Eigen::MatrixXd& logits) const;

  std::vector<ColumnCells> cells_;
  std::vector<std::size_t> domain_;
  std::vector<Eigen::Index> offset_;  // start of each column's block
  Eigen::Index width_ = 0;            // sum of domains
  Eigen::MatrixXd w1_, m1_;           // hidden x width
  Eigen::VectorXd b1_;
  Eigen::MatrixXd w2_, m2_;           // width x hidden
  Eigen::VectorXd b2_;
  MadeGradients adam_m_, adam_v_;
  std::size_t adam_t_ = 0;
  std::size_t rows_ = 0;
};

struct MadeParams {
  std::size_t hidden = 64;
  std::size_t max_columns = 8;
  std::size_t max_domain = 256;
  std::size_t samples = 512;
  std::size_t update_epochs = 1;
  std::uint64_t seed = 0;
  MadeTrainConfig train;
  Budget budget;
};

/// MADE density model answered by progressive sampling.
class MadeEstimator final : public EstimatorBase<MadeEstimator> {
 public:
  explicit MadeEstimator(MadeParams params = {}) : params_(params) {}

  std::string name() const override { return "made"; }
  void build(const Table& table) override;
  using Estimator::estimate;
  double estimate(const Query& query, std::uint64_t seed) const override;
  /// Continues training for `update_epochs` epochs on the new table.
  Seconds update(const Table& new_table) override;
  std::size_t size_bytes() const override { return model_.size_bytes(); }
  bool deterministic() const override { return false; }
  nlohmann::ordered_json to_json() const override;

  const MadeModel& model() const { return model_; }
  const std::vector<double>& loss_history() const { return loss_history_; }
  ProgressiveResult estimate_with_error(const Query& query, std::uint64_t seed) const;
  void set_update_epochs(std::size_t k) { params_.update_epochs = k; }

 private:
  MadeParams params_;
  MadeModel model_;
  std::vector<double> loss_history_;
  std::size_t updates_ = 0;
};

}  // namespace cardlab
