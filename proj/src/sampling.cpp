#include "cardlab/sampling.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cardlab {

std::vector<std::size_t> sample_rows_without_replacement(std::size_t rows, std::size_t m, Rng& rng) {
  m = std::min(m, rows);
  std::vector<std::size_t> idx(rows);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < m; ++i) std::swap(idx[i], idx[i + uniform_index(rng, rows - i)]);
  idx.resize(m);
  return idx;
}

void SampleEstimator::build(const Table& table) {
  if (!(params_.rate > 0 && params_.rate <= 1)) throw std::invalid_argument("sample: rate must be in (0,1]");
  rows_ = table.row_count();
  auto m = static_cast<std::size_t>(std::llround(params_.rate * static_cast<double>(rows_)));
  if (auto budget = params_.budget.resolve(table); budget && table.column_count() > 0) {
    m = std::min(m, *budget / (table.column_count() * 4));
  }
  if (rows_ > 0) m = std::max<std::size_t>(m, 1);
  Rng rng(params_.seed);
  sample_ = table.select_rows(sample_rows_without_replacement(rows_, m, rng));
}

double SampleEstimator::estimate(const Query& query, std::uint64_t) const {
  const auto m = sample_.row_count();
  if (m == 0) return 0.0;
  for (const auto& p : query.predicates) {
    if (p.kind == PredicateKind::kInvalid) return 0.0;
  }
  const double rows = static_cast<double>(rows_);
  const auto hits = exact_count(sample_, query);
  if (hits > 0 || !params_.independence_fallback) return static_cast<double>(hits) * rows / static_cast<double>(m);

  double sel = 1.0;
  for (const auto& p : query.predicates) {
    const auto n = exact_count(sample_, Query{{p}});
    sel *= n > 0 ? static_cast<double>(n) / static_cast<double>(m) : 1.0 / static_cast<double>(m);
  }
  return sel * rows;
}

nlohmann::ordered_json SampleEstimator::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = name();
  j["version"] = 1;
  j["rate"] = params_.rate;
  j["seed"] = params_.seed;
  j["source_rows"] = rows_;
  j["sample_rows"] = sample_.row_count();
  auto cols = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < sample_.column_count(); ++c) cols.push_back(sample_.column(c));
  j["columns"] = std::move(cols);
  return j;
}

}  // namespace cardlab
