#include "cardlab/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace cardlab {

std::string_view to_string(ColumnKind kind) {
  return kind == ColumnKind::kNumeric ? "numeric" : "categorical";
}

ColumnKind column_kind_from_string(std::string_view name) {
  if (name == "numeric") return ColumnKind::kNumeric;
  if (name == "categorical") return ColumnKind::kCategorical;
  throw TableError("unknown column kind '" + std::string(name) + "'");
}

std::string format_value(Value v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw TableError("cannot format value");
  return std::string(buf, ptr);
}

Table::Table(Schema schema, std::vector<std::vector<Value>> columns,
             std::vector<std::vector<std::string>> dictionaries)
    : schema_(std::move(schema)), columns_(std::move(columns)), dictionaries_(std::move(dictionaries)) {
  validate_and_index();
}

Table Table::numeric(std::vector<std::string> names, std::vector<std::vector<Value>> columns) {
  Schema schema;
  for (auto& n : names) schema.push_back({std::move(n), ColumnKind::kNumeric});
  return Table(std::move(schema), std::move(columns));
}

void Table::validate_and_index() {
  if (schema_.size() != columns_.size()) throw TableError("schema/column count mismatch");
  dictionaries_.resize(columns_.size());
  std::unordered_set<std::string> names;
  for (const auto& c : schema_) {
    if (!names.insert(c.name).second) throw TableError("duplicate column name '" + c.name + "'");
  }
  row_count_ = columns_.empty() ? 0 : columns_.front().size();
  stats_.clear();
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (columns_[c].size() != row_count_) throw TableError("column '" + schema_[c].name + "' has wrong length");
    if (schema_[c].kind == ColumnKind::kCategorical) {
      std::unordered_set<std::string> seen(dictionaries_[c].begin(), dictionaries_[c].end());
      if (seen.size() != dictionaries_[c].size()) throw TableError("duplicate dictionary entry in '" + schema_[c].name + "'");
      const auto n = static_cast<Value>(dictionaries_[c].size());
      for (Value v : columns_[c]) {
        if (v < 0 || v >= n || v != std::floor(v)) throw TableError("invalid code in '" + schema_[c].name + "'");
      }
    } else if (!dictionaries_[c].empty()) {
      throw TableError("numeric column '" + schema_[c].name + "' has a dictionary");
    }
    DomainStats s;
    if (row_count_ > 0) {
      auto [lo, hi] = std::minmax_element(columns_[c].begin(), columns_[c].end());
      s.min = *lo;
      s.max = *hi;
      s.size = s.max - s.min;
      std::vector<Value> sorted = columns_[c];
      std::sort(sorted.begin(), sorted.end());
      s.distinct = static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
    }
    stats_.push_back(s);
  }
}

std::string Table::decode(std::size_t col, Value v) const {
  if (schema_.at(col).kind == ColumnKind::kCategorical) return dictionaries_[col].at(static_cast<std::size_t>(v));
  return format_value(v);
}

Value Table::encode(std::size_t col, std::string_view s) const {
  const auto& dict = dictionaries_.at(col);
  auto it = std::find(dict.begin(), dict.end(), s);
  if (it == dict.end()) throw TableError("value '" + std::string(s) + "' not in dictionary");
  return static_cast<Value>(it - dict.begin());
}

Table Table::slice(std::size_t begin, std::size_t end) const {
  std::vector<std::size_t> rows;
  for (std::size_t r = begin; r < std::min(end, row_count_); ++r) rows.push_back(r);
  return select_rows(rows);
}

Table Table::select_rows(const std::vector<std::size_t>& rows) const {
  std::vector<std::vector<Value>> cols(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    cols[c].reserve(rows.size());
    for (auto r : rows) cols[c].push_back(columns_[c].at(r));
  }
  return Table(schema_, std::move(cols), dictionaries_);
}

Table Table::append(const Table& other) const {
  if (other.schema_ != schema_ || other.dictionaries_ != dictionaries_) throw TableError("append: schema mismatch");
  auto cols = columns_;
  for (std::size_t c = 0; c < cols.size(); ++c) cols[c].insert(cols[c].end(), other.columns_[c].begin(), other.columns_[c].end());
  return Table(schema_, std::move(cols), dictionaries_);
}

DomainStats domain_stats(const Table& table, std::size_t col) {
  if (col >= table.column_count()) throw TableError("column index out of range");
  if (table.row_count() == 0) throw TableError("domain_stats on empty table");
  return table.stats(col);
}

Schema read_schema_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TableError("cannot open schema file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw TableError("malformed schema file " + path.string() + ": " + e.what());
  }
  Schema schema;
  for (const auto& c : j.at("columns")) {
    schema.push_back({c.at("name").get<std::string>(), column_kind_from_string(c.at("kind").get<std::string>())});
  }
  return schema;
}

void write_schema_json(const Schema& schema, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["columns"] = nlohmann::ordered_json::array();
  for (const auto& c : schema) j["columns"].push_back({{"name", c.name}, {"kind", to_string(c.kind)}});
  std::ofstream out(path);
  if (!out) throw TableError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace

Table ingest_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw TableError("cannot open CSV file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw TableError("CSV file " + path.string() + " has no header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  if (header.size() != schema.size()) throw TableError("CSV header has " + std::to_string(header.size()) + " columns, schema has " + std::to_string(schema.size()));
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (header[c] != schema[c].name) throw TableError("CSV header column " + std::to_string(c) + " is '" + header[c] + "', expected '" + schema[c].name + "'");
  }

  std::vector<std::vector<Value>> columns(schema.size());
  std::vector<std::vector<std::string>> dicts(schema.size());
  std::vector<std::unordered_map<std::string, std::size_t>> codes(schema.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    auto fields = split_csv_line(line);
    if (fields.size() != schema.size()) throw TableError("row " + std::to_string(row) + ": expected " + std::to_string(schema.size()) + " fields, got " + std::to_string(fields.size()));
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const auto& f = fields[c];
      if (schema[c].kind == ColumnKind::kCategorical) {
        auto [it, inserted] = codes[c].try_emplace(f, dicts[c].size());
        if (inserted) dicts[c].push_back(f);
        columns[c].push_back(static_cast<Value>(it->second));
      } else {
        Value v{};
        const char* first = f.data();
        const char* last = f.data() + f.size();
        while (first < last && *first == ' ') ++first;
        if (first < last && *first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
          throw TableError("row " + std::to_string(row) + ", column '" + schema[c].name + "': cannot parse '" + f + "' as a number");
        }
        columns[c].push_back(v);
      }
    }
  }
  return Table(schema, std::move(columns), std::move(dicts));
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TableError("cannot write " + path.string());
  const auto& schema = table.schema();
  for (std::size_t c = 0; c < schema.size(); ++c) out << (c ? "," : "") << csv_escape(schema[c].name);
  out << '\n';
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    for (std::size_t c = 0; c < schema.size(); ++c) out << (c ? "," : "") << csv_escape(table.decode(c, table.at(r, c)));
    out << '\n';
  }
}

}  // namespace cardlab
