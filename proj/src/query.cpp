#include "cardlab/query.hpp"

#include <stdexcept>
#include <string>

namespace cardlab {

std::string_view to_string(PredicateKind kind) {
  switch (kind) {
    case PredicateKind::kEquality: return "equality";
    case PredicateKind::kClosedRange: return "closed_range";
    case PredicateKind::kOpenLow: return "open_low";
    case PredicateKind::kOpenHigh: return "open_high";
    case PredicateKind::kInvalid: return "invalid";
  }
  return "?";
}

PredicateKind predicate_kind_from_string(std::string_view name) {
  if (name == "equality") return PredicateKind::kEquality;
  if (name == "closed_range") return PredicateKind::kClosedRange;
  if (name == "open_low") return PredicateKind::kOpenLow;
  if (name == "open_high") return PredicateKind::kOpenHigh;
  if (name == "invalid") return PredicateKind::kInvalid;
  throw std::invalid_argument("unknown predicate kind '" + std::string(name) + "'");
}

Predicate Predicate::closed(std::size_t col, Value lo, Value hi) {
  if (lo > hi) throw std::invalid_argument("closed range with lo > hi; use Predicate::invalid");
  return {col, PredicateKind::kClosedRange, lo, hi};
}

bool Query::matches_row(const Table& table, std::size_t row) const {
  for (const auto& p : predicates) {
    if (!p.matches(table.at(row, p.col))) return false;
  }
  return true;
}

const Predicate* Query::find(std::size_t col) const {
  for (const auto& p : predicates) {
    if (p.col == col) return &p;
  }
  return nullptr;
}

void validate(const Query& query, const Table& table) {
  std::vector<bool> used(table.column_count(), false);
  for (const auto& p : query.predicates) {
    if (p.col >= table.column_count()) throw std::invalid_argument("predicate column " + std::to_string(p.col) + " out of range");
    if (used[p.col]) throw std::invalid_argument("column " + std::to_string(p.col) + " constrained twice");
    used[p.col] = true;
    if (p.kind != PredicateKind::kInvalid && p.lower() > p.upper()) throw std::invalid_argument("predicate with lo > hi not flagged invalid");
  }
}

std::uint64_t exact_count(const Table& table, const Query& query) {
  validate(query, table);
  for (const auto& p : query.predicates) {
    if (p.kind == PredicateKind::kInvalid) return 0;
  }
  // Column-at-a-time filtering keeps the inner loop on one contiguous array.
  std::vector<std::uint8_t> alive(table.row_count(), 1);
  for (const auto& p : query.predicates) {
    const auto& col = table.column(p.col);
    const Value lo = p.lower();
    const Value hi = p.upper();
    for (std::size_t r = 0; r < col.size(); ++r) alive[r] &= static_cast<std::uint8_t>(col[r] >= lo && col[r] <= hi);
  }
  std::uint64_t n = 0;
  for (auto a : alive) n += a;
  return n;
}

nlohmann::ordered_json to_json(const Predicate& p) {
  nlohmann::ordered_json j;
  j["col"] = p.col;
  j["kind"] = to_string(p.kind);
  j["lo"] = p.lo ? nlohmann::ordered_json(*p.lo) : nlohmann::ordered_json(nullptr);
  j["hi"] = p.hi ? nlohmann::ordered_json(*p.hi) : nlohmann::ordered_json(nullptr);
  return j;
}

Predicate predicate_from_json(const nlohmann::json& j) {
  Predicate p;
  p.col = j.at("col").get<std::size_t>();
  p.kind = predicate_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("lo") && !j["lo"].is_null()) p.lo = j["lo"].get<Value>();
  if (j.contains("hi") && !j["hi"].is_null()) p.hi = j["hi"].get<Value>();
  const bool needs_lo = p.kind != PredicateKind::kOpenLow;
  const bool needs_hi = p.kind != PredicateKind::kOpenHigh;
  if ((needs_lo && !p.lo) || (needs_hi && !p.hi)) throw std::invalid_argument("predicate missing bound");
  if (p.kind == PredicateKind::kOpenLow) p.lo.reset();
  if (p.kind == PredicateKind::kOpenHigh) p.hi.reset();
  return p;
}

nlohmann::ordered_json to_json(const Query& q) {
  nlohmann::ordered_json j;
  j["predicates"] = nlohmann::ordered_json::array();
  for (const auto& p : q.predicates) j["predicates"].push_back(to_json(p));
  return j;
}

Query query_from_json(const nlohmann::json& j) {
  Query q;
  for (const auto& p : j.at("predicates")) q.predicates.push_back(predicate_from_json(p));
  return q;
}

}  // namespace cardlab
