#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cardlab {

using Value = double;

enum class ColumnKind { kNumeric, kCategorical };

std::string_view to_string(ColumnKind kind);
ColumnKind column_kind_from_string(std::string_view name);

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;

  bool operator==(const ColumnSchema&) const = default;
};

using Schema = std::vector<ColumnSchema>;

class TableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DomainStats {
  Value min = 0;
  Value max = 0;
  Value size = 0;  // max - min
  std::size_t distinct = 0;
};

/// Columnar, immutable-after-construction dataset. Numeric columns hold raw
/// values; categorical columns hold dictionary codes (0..|dict|-1) stored as
/// Values so every estimator sees one uniform encoded representation.
class Table {
 public:
  Table() = default;

  /// Builds a table from already-encoded columns. `dictionaries[c]` must be
  /// empty for numeric columns. Throws TableError on any invariant violation.
  Table(Schema schema, std::vector<std::vector<Value>> columns,
        std::vector<std::vector<std::string>> dictionaries = {});

  /// Convenience for all-numeric tables.
  static Table numeric(std::vector<std::string> names, std::vector<std::vector<Value>> columns);

  const Schema& schema() const { return schema_; }
  std::size_t row_count() const { return row_count_; }
  std::size_t column_count() const { return columns_.size(); }

  const std::vector<Value>& column(std::size_t c) const { return columns_.at(c); }
  Value at(std::size_t row, std::size_t col) const { return columns_[col][row]; }
  const std::vector<std::string>& dictionary(std::size_t c) const { return dictionaries_.at(c); }

  /// Decodes a categorical code back to its string (or formats a numeric value).
  std::string decode(std::size_t col, Value v) const;
  /// Returns the code for a categorical string; throws if absent.
  Value encode(std::size_t col, std::string_view s) const;

  /// Cached per-column domain statistics (computed at construction).
  const DomainStats& stats(std::size_t c) const { return stats_.at(c); }

  /// Bytes used for budget accounting: rows x columns x 4.
  std::size_t data_size_bytes() const { return row_count_ * columns_.size() * 4; }

  /// Copies rows [begin, end) into a new table sharing schema and dictionaries.
  Table slice(std::size_t begin, std::size_t end) const;
  /// New table containing the given row indices, in order.
  Table select_rows(const std::vector<std::size_t>& rows) const;
  /// Concatenation; schemas and dictionaries must match.
  Table append(const Table& other) const;

 private:
  void validate_and_index();

  Schema schema_;
  std::vector<std::vector<Value>> columns_;
  std::vector<std::vector<std::string>> dictionaries_;
  std::vector<DomainStats> stats_;
  std::size_t row_count_ = 0;
};

/// Domain statistics of one column; throws TableError on an empty table.
DomainStats domain_stats(const Table& table, std::size_t col);

Schema read_schema_json(const std::filesystem::path& path);
void write_schema_json(const Schema& schema, const std::filesystem::path& path);

/// Reads a headered CSV. Dictionary order is first-appearance order.
Table ingest_csv(const std::filesystem::path& path, const Schema& schema);
/// Writes a headered CSV; categorical codes are decoded, numbers use the
/// shortest round-trip representation so output is byte-stable.
void write_csv(const Table& table, const std::filesystem::path& path);

std::string format_value(Value v);

}  // namespace cardlab
