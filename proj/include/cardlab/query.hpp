#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "cardlab/table.hpp"
#include "json.hpp"

namespace cardlab {

enum class PredicateKind { kEquality, kClosedRange, kOpenLow, kOpenHigh, kInvalid };

std::string_view to_string(PredicateKind kind);
PredicateKind predicate_kind_from_string(std::string_view name);

/// One conjunct over a single column.
///   equality:     A = lo (lo == hi)
///   closed_range: lo <= A <= hi
///   open_low:     A <= hi
///   open_high:    lo <= A
///   invalid:      lo > hi, matches nothing
struct Predicate {
  std::size_t col = 0;
  PredicateKind kind = PredicateKind::kClosedRange;
  std::optional<Value> lo;
  std::optional<Value> hi;

  static Predicate equality(std::size_t col, Value v) { return {col, PredicateKind::kEquality, v, v}; }
  /// Throws std::invalid_argument when lo > hi; use invalid() for that case.
  static Predicate closed(std::size_t col, Value lo, Value hi);
  static Predicate at_most(std::size_t col, Value hi) { return {col, PredicateKind::kOpenLow, std::nullopt, hi}; }
  static Predicate at_least(std::size_t col, Value lo) { return {col, PredicateKind::kOpenHigh, lo, std::nullopt}; }
  /// Explicitly empty range (lo > hi), used by fidelity probes.
  static Predicate invalid(std::size_t col, Value lo, Value hi) { return {col, PredicateKind::kInvalid, lo, hi}; }

  Value lower() const { return lo.value_or(-std::numeric_limits<Value>::infinity()); }
  Value upper() const { return hi.value_or(std::numeric_limits<Value>::infinity()); }
  bool is_range() const {
    return kind == PredicateKind::kClosedRange || kind == PredicateKind::kOpenLow || kind == PredicateKind::kOpenHigh;
  }

  bool matches(Value v) const {
    if (kind == PredicateKind::kInvalid) return false;
    return v >= lower() && v <= upper();
  }

  bool operator==(const Predicate&) const = default;
};

/// Conjunction of predicates, at most one per column.
struct Query {
  std::vector<Predicate> predicates;

  std::size_t size() const { return predicates.size(); }
  bool matches_row(const Table& table, std::size_t row) const;
  /// Returns the predicate on `col`, if any.
  const Predicate* find(std::size_t col) const;

  bool operator==(const Query&) const = default;
};

/// Throws std::invalid_argument when a predicate references a missing column,
/// a column appears twice, or a non-invalid predicate has lo > hi.
void validate(const Query& query, const Table& table);

/// Exact number of rows satisfying the query, by full scan.
std::uint64_t exact_count(const Table& table, const Query& query);

/// Number of integers in [max(lo, a), min(hi, b)].
inline double integer_overlap(Value lo, Value hi, Value a, Value b) {
  const double l = std::ceil(std::max(lo, a));
  const double h = std::floor(std::min(hi, b));
  return h >= l ? h - l + 1.0 : 0.0;
}

/// Fraction of the value interval [a, b] covered by predicate `p`, assuming
/// uniform spread. Integer intervals are measured by their integer points so
/// splitting [l, h] into [l, k] and [k+1, h] is exactly additive; other
/// intervals fall back to continuous length. Invalid predicates cover nothing.
inline double coverage_fraction(const Predicate& p, Value a, Value b) {
  if (p.kind == PredicateKind::kInvalid) return 0.0;
  if (a == std::floor(a) && b == std::floor(b)) {
    const double width = b - a + 1.0;
    return width > 0 ? integer_overlap(p.lower(), p.upper(), a, b) / width : 0.0;
  }
  if (b <= a) return (a >= p.lower() && a <= p.upper()) ? 1.0 : 0.0;
  const double len = std::min(b, p.upper()) - std::max(a, p.lower());
  return len > 0 ? len / (b - a) : 0.0;
}

nlohmann::ordered_json to_json(const Predicate& p);
Predicate predicate_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Query& q);
Query query_from_json(const nlohmann::json& j);

}  // namespace cardlab
