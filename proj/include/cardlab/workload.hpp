#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cardlab/query.hpp"
#include "cardlab/random.hpp"
#include "cardlab/table.hpp"

namespace cardlab {

struct WorkloadConfig {
  std::size_t n_queries = 10000;
  std::uint64_t seed = 0;
  double p_center_data = 0.9;    // probability of taking the center from a data tuple
  double p_width_uniform = 0.5;  // probability of a uniform (vs exponential) width
  double lambda_factor = 10.0;   // exponential rate = lambda_factor / size_i

  void validate() const;
};

enum class CenterScheme { kDataTuple, kOutOfDomain };
enum class WidthScheme { kUniform, kExponential };

/// A generated query plus how it was generated.
struct GeneratedQuery {
  Query query;
  CenterScheme center = CenterScheme::kDataTuple;
  WidthScheme width = WidthScheme::kUniform;
};

struct LabeledQuery {
  Query query;
  std::uint64_t cardinality = 0;
  double selectivity = 0;
};

/// Builds the predicate for a numeric column from a center and width,
/// converting any side that leaves [min, max] into an open range.
Predicate make_range_predicate(std::size_t col, const DomainStats& stats, Value center, Value width);

GeneratedQuery gen_query_detailed(const Table& table, const WorkloadConfig& cfg, Rng& rng);
Query gen_query(const Table& table, const WorkloadConfig& cfg, Rng& rng);
std::vector<Query> gen_workload(const Table& table, const WorkloadConfig& cfg);

/// Exact labels. `jobs` > 1 fans out over queries; order is preserved.
std::vector<LabeledQuery> label(const Table& table, const std::vector<Query>& queries, unsigned jobs = 1);

/// One JSON object per line, fields in fixed order.
void write_workload_jsonl(const std::vector<Query>& queries, const std::filesystem::path& path);
void write_labeled_jsonl(const std::vector<LabeledQuery>& labeled, const std::filesystem::path& path);
/// Reads either format; labels are kept when present.
std::vector<LabeledQuery> read_workload_jsonl(const std::filesystem::path& path);

}  // namespace cardlab
