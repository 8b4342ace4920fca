#include "cardlab/workload.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace cardlab {

void WorkloadConfig::validate() const {
  if (n_queries < 1) throw std::invalid_argument("workload: n_queries must be >= 1");
  if (p_center_data < 0 || p_center_data > 1) throw std::invalid_argument("workload: p_center_data must be in [0,1]");
  if (p_width_uniform < 0 || p_width_uniform > 1) throw std::invalid_argument("workload: p_width_uniform must be in [0,1]");
  if (!(lambda_factor > 0)) throw std::invalid_argument("workload: lambda_factor must be > 0");
}

Predicate make_range_predicate(std::size_t col, const DomainStats& stats, Value center, Value width) {
  const Value lo = center - width / 2;
  const Value hi = center + width / 2;
  const bool lo_out = lo < stats.min;
  const bool hi_out = hi > stats.max;
  if (lo_out && hi_out) return Predicate::closed(col, stats.min, stats.max);
  if (lo_out) return Predicate::at_most(col, hi);
  if (hi_out) return Predicate::at_least(col, lo);
  return Predicate::closed(col, lo, hi);
}

GeneratedQuery gen_query_detailed(const Table& table, const WorkloadConfig& cfg, Rng& rng) {
  if (table.row_count() == 0) throw std::invalid_argument("gen_query: empty table");
  const std::size_t n_cols = table.column_count();

  GeneratedQuery out;
  const std::size_t d = 1 + uniform_index(rng, n_cols);
  std::vector<std::size_t> cols(n_cols);
  std::iota(cols.begin(), cols.end(), 0);
  for (std::size_t i = 0; i < d; ++i) std::swap(cols[i], cols[i + uniform_index(rng, n_cols - i)]);
  cols.resize(d);
  std::sort(cols.begin(), cols.end());

  out.center = bernoulli(rng, cfg.p_center_data) ? CenterScheme::kDataTuple : CenterScheme::kOutOfDomain;
  out.width = bernoulli(rng, cfg.p_width_uniform) ? WidthScheme::kUniform : WidthScheme::kExponential;
  const std::size_t row = out.center == CenterScheme::kDataTuple ? uniform_index(rng, table.row_count()) : 0;

  for (auto c : cols) {
    const auto& stats = table.stats(c);
    Value center;
    if (out.center == CenterScheme::kDataTuple) {
      center = table.at(row, c);
    } else if (table.schema()[c].kind == ColumnKind::kCategorical) {
      center = static_cast<Value>(uniform_index(rng, table.dictionary(c).size()));
    } else {
      center = stats.min + unit_uniform(rng) * stats.size;
    }

    if (table.schema()[c].kind == ColumnKind::kCategorical) {
      out.query.predicates.push_back(Predicate::equality(c, center));
      continue;
    }
    Value width = 0;
    if (stats.size > 0) {
      if (out.width == WidthScheme::kUniform) {
        width = unit_uniform(rng) * stats.size;
      } else {
        width = std::min(exponential(rng, cfg.lambda_factor / stats.size), stats.size);
      }
    }
    out.query.predicates.push_back(make_range_predicate(c, stats, center, width));
  }
  return out;
}

Query gen_query(const Table& table, const WorkloadConfig& cfg, Rng& rng) {
  return gen_query_detailed(table, cfg, rng).query;
}

std::vector<Query> gen_workload(const Table& table, const WorkloadConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<Query> out;
  out.reserve(cfg.n_queries);
  for (std::size_t i = 0; i < cfg.n_queries; ++i) out.push_back(gen_query(table, cfg, rng));
  return out;
}

std::vector<LabeledQuery> label(const Table& table, const std::vector<Query>& queries, unsigned jobs) {
  std::vector<LabeledQuery> out(queries.size());
  const double rows = static_cast<double>(table.row_count());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto n = exact_count(table, queries[i]);
      out[i] = {queries[i], n, rows > 0 ? static_cast<double>(n) / rows : 0.0};
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(queries.size())));
  if (jobs <= 1) {
    work(0, queries.size());
    return out;
  }
  std::vector<std::thread> threads;
  const std::size_t chunk = (queries.size() + jobs - 1) / jobs;
  for (unsigned t = 0; t < jobs; ++t) {
    const std::size_t b = t * chunk;
    const std::size_t e = std::min(queries.size(), b + chunk);
    if (b < e) threads.emplace_back(work, b, e);
  }
  for (auto& t : threads) t.join();
  return out;
}

void write_workload_jsonl(const std::vector<Query>& queries, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& q : queries) out << to_json(q).dump() << '\n';
}

void write_labeled_jsonl(const std::vector<LabeledQuery>& labeled, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& l : labeled) {
    auto j = to_json(l.query);
    j["cardinality"] = l.cardinality;
    j["selectivity"] = l.selectivity;
    out << j.dump() << '\n';
  }
}

std::vector<LabeledQuery> read_workload_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open workload file " + path.string());
  std::vector<LabeledQuery> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      LabeledQuery l;
      l.query = query_from_json(j);
      if (j.contains("cardinality")) l.cardinality = j["cardinality"].get<std::uint64_t>();
      if (j.contains("selectivity")) l.selectivity = j["selectivity"].get<double>();
      out.push_back(std::move(l));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cardlab
