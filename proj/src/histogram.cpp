#include "cardlab/histogram.hpp"

#include <algorithm>
#include <stdexcept>

namespace cardlab {

Hist1D Hist1D::build(const std::vector<Value>& values, std::size_t max_buckets) {
  if (max_buckets < 1) throw std::invalid_argument("Hist1D: need at least one bucket");
  Hist1D h;
  h.rows_ = values.size();
  if (values.empty()) return h;
  std::vector<Value> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  // Enough buckets for every value: one bucket each.
  std::size_t distinct = 1;
  for (std::size_t k = 1; k < sorted.size(); ++k) distinct += sorted[k] != sorted[k - 1];
  const bool per_value = distinct <= max_buckets;

  const double target = static_cast<double>(sorted.size()) / static_cast<double>(max_buckets);
  std::size_t i = 0;
  std::size_t cumulative = 0;
  Bucket cur{sorted[0], sorted[0], 0, 0};
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const std::size_t freq = j - i;
    if (cur.count == 0) cur.lo = sorted[i];
    cur.hi = sorted[i];
    cur.count += freq;
    cur.distinct += 1;
    cumulative += freq;
    i = j;
    const double boundary = target * static_cast<double>(h.buckets_.size() + 1);
    const bool last_allowed = h.buckets_.size() + 1 == max_buckets;
    if (i == sorted.size() || per_value || (!last_allowed && static_cast<double>(cumulative) >= boundary)) {
      h.buckets_.push_back(cur);
      cur = Bucket{};
    }
  }
  return h;
}

double Hist1D::selectivity(const Predicate& p) const {
  if (rows_ == 0 || p.kind == PredicateKind::kInvalid) return 0.0;
  const double rows = static_cast<double>(rows_);
  if (p.kind == PredicateKind::kEquality) {
    const Value v = *p.lo;
    auto it = std::lower_bound(buckets_.begin(), buckets_.end(), v, [](const Bucket& b, Value x) { return b.hi < x; });
    if (it == buckets_.end() || v < it->lo) return 0.0;
    return static_cast<double>(it->count) / static_cast<double>(it->distinct) / rows;
  }
  double matched = 0;
  for (const auto& b : buckets_) {
    if (b.hi < p.lower() || b.lo > p.upper()) continue;
    matched += static_cast<double>(b.count) * coverage_fraction(p, b.lo, b.hi);
  }
  return std::min(1.0, matched / rows);
}

nlohmann::ordered_json Hist1D::to_json() const {
  nlohmann::ordered_json j;
  j["rows"] = rows_;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& b : buckets_) arr.push_back({b.lo, b.hi, b.count, b.distinct});
  j["buckets"] = std::move(arr);
  return j;
}

std::size_t buckets_within_budget(std::size_t columns, std::size_t requested, std::optional<std::size_t> budget) {
  if (!budget || columns == 0) return std::max<std::size_t>(requested, 1);
  const std::size_t per_column_words = *budget / (4 * columns);
  const std::size_t fit = per_column_words > 1 ? (per_column_words - 1) / 3 : 0;
  return std::max<std::size_t>(1, std::min(requested, fit));
}

std::vector<Hist1D> build_histograms(const Table& table, std::size_t buckets_per_column) {
  std::vector<Hist1D> out;
  out.reserve(table.column_count());
  for (std::size_t c = 0; c < table.column_count(); ++c) out.push_back(Hist1D::build(table.column(c), buckets_per_column));
  return out;
}

void AviEstimator::build(const Table& table) {
  rows_ = table.row_count();
  const auto b = buckets_within_budget(table.column_count(), params_.buckets_per_column, params_.budget.resolve(table));
  hists_ = build_histograms(table, b);
}

double AviEstimator::estimate(const Query& query, std::uint64_t) const {
  double sel = 1.0;
  for (const auto& p : query.predicates) sel *= hists_.at(p.col).selectivity(p);
  return sel * static_cast<double>(rows_);
}

std::size_t AviEstimator::size_bytes() const {
  std::size_t n = 0;
  for (const auto& h : hists_) n += h.size_bytes();
  return n;
}

nlohmann::ordered_json AviEstimator::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = "avi";
  j["version"] = 1;
  j["rows"] = rows_;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& h : hists_) arr.push_back(h.to_json());
  j["histograms"] = std::move(arr);
  return j;
}

}  // namespace cardlab
