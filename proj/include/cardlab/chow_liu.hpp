#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cardlab/estimator.hpp"
#include "cardlab/progressive.hpp"

namespace cardlab {

/// Tree-structured Bayesian network: the maximum-mutual-information spanning
/// tree over the columns, rooted at column 0, with add-alpha smoothed
/// conditional probability tables.
class ChowLiuModel final : public AutoregressiveModel {
 public:
  static constexpr int kNoParent = -1;

  ChowLiuModel() = default;

  /// `max_cells` caps the per-column resolution (values are grouped into
  /// contiguous equi-depth cells beyond that).
  static ChowLiuModel build(const Table& table, double alpha, std::size_t max_cells);

  std::size_t num_positions() const override { return order_.size(); }
  std::size_t column_at(std::size_t pos) const override { return order_[pos]; }
  std::size_t num_cells(std::size_t pos) const override { return cells_[order_[pos]].size(); }
  double cell_fraction(std::size_t pos, std::size_t cell, const Predicate& p) const override {
    return cells_[order_[pos]].fraction(cell, p);
  }
  void conditionals(std::size_t pos, const Eigen::MatrixXi& sampled, Eigen::MatrixXd& probs) const override;
  std::size_t row_count() const override { return rows_; }

  const std::vector<int>& parents() const { return parent_; }
  /// Undirected tree edges (lower column first), in selection order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  /// cpt(c)(child_cell, parent_cell); the root's table has one column.
  const Eigen::MatrixXd& cpt(std::size_t col) const { return cpt_[col]; }
  const ColumnCells& cells(std::size_t col) const { return cells_[col]; }
  double alpha() const { return alpha_; }
  std::size_t size_bytes() const;
  nlohmann::ordered_json to_json() const;

 private:
  std::vector<ColumnCells> cells_;
  std::vector<int> parent_;
  std::vector<std::size_t> order_;     // topological (BFS from the root)
  std::vector<std::size_t> position_;  // column -> position in order_
  std::vector<Eigen::MatrixXd> cpt_;
  double alpha_ = 1.0;
  std::size_t rows_ = 0;
};

/// Empirical mutual information (nats) between two cell-encoded columns.
double mutual_information(const std::vector<int>& a, std::size_t ka, const std::vector<int>& b, std::size_t kb);

/// Exact tree-factored query probability times row_count, by summing the
/// factorisation over the query region with message passing.
/// Throws std::length_error when the tables exceed 10^6 cells in total.
double bayes_enumerate_exact(const ChowLiuModel& model, const Query& query);

struct BayesParams {
  double alpha = 1.0;
  std::size_t samples = 512;
  std::size_t max_cells = 1024;
  Budget budget;
};

/// Chow-Liu network answered by progressive sampling.
class BayesEstimator final : public EstimatorBase<BayesEstimator> {
 public:
  explicit BayesEstimator(BayesParams params = {}) : params_(params) {}

  std::string name() const override { return "bayes"; }
  void build(const Table& table) override;
  using Estimator::estimate;
  double estimate(const Query& query, std::uint64_t seed) const override;
  std::size_t size_bytes() const override { return model_.size_bytes(); }
  bool deterministic() const override { return false; }
  nlohmann::ordered_json to_json() const override;

  const ChowLiuModel& model() const { return model_; }
  ProgressiveResult estimate_with_error(const Query& query, std::uint64_t seed) const;

 private:
  BayesParams params_;
  ChowLiuModel model_;
};

}  // namespace cardlab
