#include "cardlab/progressive.hpp"

#include <algorithm>
#include <cmath>

#include "cardlab/random.hpp"

namespace cardlab {

ColumnCells ColumnCells::build(const std::vector<Value>& values, std::size_t max_cells) {
  ColumnCells c;
  c.hist_ = Hist1D::build(values, std::max<std::size_t>(1, max_cells));
  return c;
}

std::size_t ColumnCells::cell_of(Value v) const {
  const auto& b = hist_.buckets();
  auto it = std::lower_bound(b.begin(), b.end(), v, [](const Hist1D::Bucket& x, Value y) { return x.hi < y; });
  if (it == b.end()) return b.size() - 1;
  const auto idx = static_cast<std::size_t>(it - b.begin());
  // In a gap between two cells: pick the closer neighbour.
  if (v < it->lo && idx > 0 && v - b[idx - 1].hi < it->lo - v) return idx - 1;
  return idx;
}

ProgressiveResult progressive_sample_estimate(const AutoregressiveModel& model, const Query& query,
                                              const ProgressiveSamplerConfig& cfg) {
  const std::size_t n_pos = model.num_positions();
  const auto S = static_cast<Eigen::Index>(std::max<std::size_t>(cfg.samples, 1));
  const double rows = static_cast<double>(model.row_count());

  // Per-position cell coverage; empty when the column is unconstrained.
  std::vector<Eigen::ArrayXd> coverage(n_pos);
  std::vector<bool> full(n_pos, true);
  std::size_t last_constrained = 0;
  bool any_constrained = false;
  for (std::size_t pos = 0; pos < n_pos; ++pos) {
    const Predicate* p = query.find(model.column_at(pos));
    if (!p) continue;
    if (p->kind == PredicateKind::kInvalid) return {0.0, 0.0};
    Eigen::ArrayXd cov(static_cast<Eigen::Index>(model.num_cells(pos)));
    for (Eigen::Index c = 0; c < cov.size(); ++c) cov[c] = model.cell_fraction(pos, static_cast<std::size_t>(c), *p);
    full[pos] = (cov == 1.0).all();
    if (!full[pos]) {
      last_constrained = pos;
      any_constrained = true;
    }
    coverage[pos] = std::move(cov);
  }
  if (!any_constrained) return {rows, 0.0};

  Rng rng(cfg.seed);
  Eigen::MatrixXi sampled = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n_pos), S);
  Eigen::ArrayXd weight = Eigen::ArrayXd::Ones(S);
  Eigen::MatrixXd probs;
  for (std::size_t pos = 0; pos <= last_constrained; ++pos) {
    model.conditionals(pos, sampled, probs);
    if (!full[pos]) probs.array().colwise() *= coverage[pos];
    for (Eigen::Index s = 0; s < S; ++s) {
      if (weight[s] == 0) continue;
      const double mass = full[pos] ? 1.0 : probs.col(s).sum();
      if (!(mass > 0)) {
        weight[s] = 0;
        continue;
      }
      weight[s] *= mass;
      if (pos == last_constrained) continue;
      const double target = unit_uniform(rng) * (full[pos] ? probs.col(s).sum() : mass);
      double acc = 0;
      Eigen::Index pick = probs.rows() - 1;
      for (Eigen::Index c = 0; c < probs.rows(); ++c) {
        acc += probs(c, s);
        if (target < acc && probs(c, s) > 0) {
          pick = c;
          break;
        }
      }
      while (pick > 0 && probs(pick, s) == 0) --pick;
      sampled(static_cast<Eigen::Index>(pos), s) = static_cast<int>(pick);
    }
  }
  const double mean = weight.mean();
  const double var = S > 1 ? (weight - mean).square().sum() / static_cast<double>(S - 1) : 0.0;
  return {rows * mean, rows * std::sqrt(var / static_cast<double>(S))};
}

}  // namespace cardlab
