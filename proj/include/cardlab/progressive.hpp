#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cardlab/histogram.hpp"
#include "cardlab/query.hpp"

namespace cardlab {

/// A joint distribution factored column by column in a fixed order. Each
/// column's values are grouped into contiguous cells (one cell per distinct
/// value for exact models).
class AutoregressiveModel {
 public:
  virtual ~AutoregressiveModel() = default;

  virtual std::size_t num_positions() const = 0;
  /// Table column sampled at `pos`.
  virtual std::size_t column_at(std::size_t pos) const = 0;
  virtual std::size_t num_cells(std::size_t pos) const = 0;
  /// Fraction of the cell's values satisfying `p` (uniform spread inside a cell).
  virtual double cell_fraction(std::size_t pos, std::size_t cell, const Predicate& p) const = 0;
  /// Fills `probs` (num_cells(pos) x S) with the conditional distribution of
  /// position `pos` for each of the S partial assignments in the first `pos`
  /// rows of `sampled` (positions x S).
  virtual void conditionals(std::size_t pos, const Eigen::MatrixXi& sampled, Eigen::MatrixXd& probs) const = 0;
  virtual std::size_t row_count() const = 0;
};

struct ProgressiveSamplerConfig {
  std::size_t samples = 512;
  std::uint64_t seed = 0;
};

struct ProgressiveResult {
  double estimate = 0;
  double std_error = 0;  // row_count * sd(weights) / sqrt(S)
};

/// Monte-Carlo range estimate: walk positions in order, mask each conditional
/// to the query range, multiply the in-range masses, and draw the next value
/// from the renormalised masked distribution.
ProgressiveResult progressive_sample_estimate(const AutoregressiveModel& model, const Query& query,
                                              const ProgressiveSamplerConfig& cfg);

/// Contiguous value cells for one column, backed by an equi-depth histogram.
class ColumnCells {
 public:
  ColumnCells() = default;
  static ColumnCells build(const std::vector<Value>& values, std::size_t max_cells);

  std::size_t size() const { return hist_.buckets().size(); }
  /// Cell holding `v`; values outside every cell map to the nearest one.
  std::size_t cell_of(Value v) const;
  double fraction(std::size_t cell, const Predicate& p) const {
    const auto& b = hist_.buckets()[cell];
    return coverage_fraction(p, b.lo, b.hi);
  }
  const Hist1D& histogram() const { return hist_; }

 private:
  Hist1D hist_;
};

}  // namespace cardlab
