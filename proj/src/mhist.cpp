#include "cardlab/mhist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace cardlab {

std::optional<MaxDiffSplit> maxdiff_split(std::vector<Value> values) {
  std::sort(values.begin(), values.end());
  std::vector<Value> distinct;
  std::vector<double> freq;
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    distinct.push_back(values[i]);
    freq.push_back(static_cast<double>(j - i));
    i = j;
  }
  const std::size_t k = distinct.size();
  if (k < 2) return std::nullopt;
  std::vector<double> area(k);
  for (std::size_t j = 0; j < k; ++j) area[j] = freq[j] * (j + 1 < k ? distinct[j + 1] - distinct[j] : 1.0);
  MaxDiffSplit best{-1.0, 0, 0};
  for (std::size_t j = 0; j + 1 < k; ++j) {
    const double diff = std::abs(area[j + 1] - area[j]);
    if (diff > best.score) best = {diff, j, distinct[j]};
  }
  return best;
}

namespace {

struct WorkBucket {
  std::vector<std::uint32_t> rows;
  std::size_t order = 0;
  std::optional<MaxDiffSplit> split;
  std::size_t split_dim = 0;
};

void find_split(const Table& table, WorkBucket& b) {
  b.split.reset();
  std::vector<Value> vals(b.rows.size());
  for (std::size_t d = 0; d < table.column_count(); ++d) {
    const auto& col = table.column(d);
    for (std::size_t i = 0; i < b.rows.size(); ++i) vals[i] = col[b.rows[i]];
    auto s = maxdiff_split(vals);
    if (s && (!b.split || s->score > b.split->score)) {
      b.split = s;
      b.split_dim = d;
    }
  }
}

}  // namespace

void MhistEstimator::build(const Table& table) {
  dims_ = table.column_count();
  rows_ = table.row_count();
  buckets_.clear();
  if (rows_ == 0) return;

  std::size_t max_buckets = SIZE_MAX;
  if (auto budget = params_.budget.resolve(table)) max_buckets = std::max<std::size_t>(1, *budget / bucket_cost_bytes(dims_));

  std::vector<WorkBucket> work(1);
  work[0].rows.resize(rows_);
  for (std::size_t r = 0; r < rows_; ++r) work[0].rows[r] = static_cast<std::uint32_t>(r);
  find_split(table, work[0]);
  std::size_t next_order = 1;

  while (work.size() < max_buckets) {
    // Highest score wins; ties go to the earliest-created bucket (work is kept
    // in creation order), then lower dimension and value index via find_split.
    WorkBucket* best = nullptr;
    for (auto& b : work) {
      if (b.split && (!best || b.split->score > best->split->score)) best = &b;
    }
    if (!best) break;

    WorkBucket right;
    right.order = next_order++;
    std::vector<std::uint32_t> left_rows;
    const auto& col = table.column(best->split_dim);
    const Value cut = best->split->split_value;
    for (auto r : best->rows) (col[r] <= cut ? left_rows : right.rows).push_back(r);
    best->rows = std::move(left_rows);
    find_split(table, *best);
    find_split(table, right);
    work.push_back(std::move(right));
  }

  buckets_.reserve(work.size());
  for (const auto& w : work) {
    Bucket b;
    b.count = w.rows.size();
    for (std::size_t d = 0; d < dims_; ++d) {
      std::vector<Value> vals;
      vals.reserve(w.rows.size());
      for (auto r : w.rows) vals.push_back(table.at(r, d));
      std::sort(vals.begin(), vals.end());
      b.lo.push_back(vals.front());
      b.hi.push_back(vals.back());
      b.distinct.push_back(static_cast<std::size_t>(std::unique(vals.begin(), vals.end()) - vals.begin()));
    }
    buckets_.push_back(std::move(b));
  }
}

double MhistEstimator::estimate(const Query& query, std::uint64_t) const {
  double total = 0;
  for (const auto& b : buckets_) {
    double frac = 1.0;
    for (const auto& p : query.predicates) {
      frac *= coverage_fraction(p, b.lo[p.col], b.hi[p.col]);
      if (frac == 0) break;
    }
    total += static_cast<double>(b.count) * frac;
  }
  return total;
}

nlohmann::ordered_json MhistEstimator::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = "mhist";
  j["version"] = 1;
  j["rows"] = rows_;
  j["dims"] = dims_;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& b : buckets_) {
    arr.push_back({{"lo", b.lo}, {"hi", b.hi}, {"distinct", b.distinct}, {"count", b.count}});
  }
  j["buckets"] = std::move(arr);
  return j;
}

}  // namespace cardlab
