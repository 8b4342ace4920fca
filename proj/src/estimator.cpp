#include "cardlab/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cardlab {

std::optional<std::size_t> Budget::resolve(const Table& table) const {
  switch (kind) {
    case Kind::kUnlimited: return std::nullopt;
    case Kind::kBytes: return bytes;
    case Kind::kFraction:
      // Small slack so e.g. 0.015 * 80000 lands on 1200, not 1199.
      return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(table.data_size_bytes()) + 1e-6));
  }
  return std::nullopt;
}

nlohmann::ordered_json Budget::to_json() const {
  switch (kind) {
    case Kind::kUnlimited: return "unlimited";
    case Kind::kBytes: return {{"bytes", bytes}};
    case Kind::kFraction: return {{"fraction", fraction}};
  }
  return nullptr;
}

Budget Budget::from_json(const nlohmann::json& j) {
  if (j.is_string() && j.get<std::string>() == "unlimited") return unlimited();
  if (j.is_object() && j.contains("bytes")) return of_bytes(j["bytes"].get<std::size_t>());
  if (j.is_object() && j.contains("fraction")) return of_fraction(j["fraction"].get<double>());
  throw std::invalid_argument("budget must be \"unlimited\", {\"bytes\": n} or {\"fraction\": f}");
}

Seconds Estimator::update(const Table& new_table) {
  const auto start = std::chrono::steady_clock::now();
  build(new_table);
  return std::chrono::steady_clock::now() - start;
}

double ExactEstimator::estimate(const Query& query, std::uint64_t) const {
  if (!table_) throw std::logic_error("exact: not built");
  return static_cast<double>(exact_count(*table_, query));
}

nlohmann::ordered_json ExactEstimator::to_json() const {
  return {{"model", "exact"}, {"version", 1}, {"rows", table_ ? table_->row_count() : 0}};
}

double q_error(double est, double act) {
  if (!std::isfinite(est) || !std::isfinite(act)) throw std::invalid_argument("q_error: non-finite input");
  if (est < 0 || act < 0) throw std::invalid_argument("q_error: negative input");
  const double e = std::max(est, 1.0);
  const double a = std::max(act, 1.0);
  return std::max(e, a) / std::min(e, a);
}

double nearest_rank(const std::vector<double>& sorted, double p) {
  const auto n = static_cast<double>(sorted.size());
  // The epsilon guards against p*n landing just above an integer (0.95*100).
  auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

ErrorSummary summarize(std::vector<double> errors) {
  if (errors.empty()) throw std::invalid_argument("summarize: empty input");
  std::sort(errors.begin(), errors.end());
  return {nearest_rank(errors, 0.50), nearest_rank(errors, 0.95), nearest_rank(errors, 0.99), errors.back(), errors.size()};
}

std::map<std::size_t, ErrorSummary> group_by_predicate_count(const std::vector<LabeledQuery>& labeled,
                                                             const std::vector<double>& errors) {
  if (labeled.size() != errors.size()) throw std::invalid_argument("group_by_predicate_count: length mismatch");
  std::map<std::size_t, std::vector<double>> buckets;
  for (std::size_t i = 0; i < labeled.size(); ++i) buckets[labeled[i].query.size()].push_back(errors[i]);
  std::map<std::size_t, ErrorSummary> out;
  for (auto& [k, v] : buckets) out.emplace(k, summarize(std::move(v)));
  return out;
}

std::vector<double> evaluate_errors(const Estimator& est, const std::vector<LabeledQuery>& labeled,
                                    std::uint64_t seed_base) {
  std::vector<double> out;
  out.reserve(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    out.push_back(q_error(est.estimate(labeled[i].query, seed_base + i), static_cast<double>(labeled[i].cardinality)));
  }
  return out;
}

nlohmann::ordered_json to_json(const ErrorSummary& s) {
  return {{"p50", s.p50}, {"p95", s.p95}, {"p99", s.p99}, {"max", s.max}, {"count", s.count}};
}

nlohmann::ordered_json to_json(const std::vector<ErrorReportRow>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["estimator"] = r.estimator;
    j["dataset"] = r.dataset;
    j["group"] = r.group;
    const auto summary = to_json(r.summary);
    for (const auto& [k, v] : summary.items()) j[k] = v;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::string to_csv(const std::vector<ErrorReportRow>& rows) {
  std::ostringstream out;
  out << "estimator,dataset,group,p50,p95,p99,max,count\n";
  for (const auto& r : rows) {
    out << r.estimator << ',' << r.dataset << ',' << r.group << ',' << format_value(r.summary.p50) << ','
        << format_value(r.summary.p95) << ',' << format_value(r.summary.p99) << ',' << format_value(r.summary.max) << ','
        << r.summary.count << '\n';
  }
  return out.str();
}

}  // namespace cardlab
