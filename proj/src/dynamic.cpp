#include "cardlab/dynamic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cardlab/random.hpp"
#include "cardlab/sampling.hpp"

namespace cardlab {

void UpdateSpec::validate() const {
  if (!(append_fraction > 0 && append_fraction <= 1)) throw std::invalid_argument("update: append_fraction must be in (0,1]");
}

Table make_appended_table(const Table& table, const UpdateSpec& spec) {
  spec.validate();
  if (table.row_count() == 0) throw std::invalid_argument("update: empty table");
  std::vector<std::vector<Value>> sorted;
  std::vector<std::vector<std::string>> dicts;
  for (std::size_t c = 0; c < table.column_count(); ++c) {
    sorted.push_back(table.column(c));
    std::sort(sorted.back().begin(), sorted.back().end());
    dicts.push_back(table.dictionary(c));
  }
  const Table sorted_copy(table.schema(), std::move(sorted), std::move(dicts));
  const auto m = static_cast<std::size_t>(std::ceil(spec.append_fraction * static_cast<double>(table.row_count()) - 1e-9));
  Rng rng(spec.seed);
  auto rows = sample_rows_without_replacement(sorted_copy.row_count(), m, rng);
  return table.append(sorted_copy.select_rows(rows));
}

Seconds SteadyClock::now() const {
  return std::chrono::duration_cast<Seconds>(std::chrono::steady_clock::now().time_since_epoch());
}

Seconds DelayedUpdate::update(const Table& new_table) {
  inner_->update(new_table);
  clock_->advance(delay_);
  return delay_;
}

std::unique_ptr<Estimator> DelayedUpdate::snapshot() const {
  return std::make_unique<DelayedUpdate>(inner_->snapshot(), *clock_, delay_);
}

std::size_t stale_query_count(std::size_t n, double t_u, double T) {
  if (!(T > 0)) throw std::invalid_argument("dynamic: T must be positive");
  if (t_u >= T) return n;
  const double stale = std::floor(static_cast<double>(n) * std::max(t_u, 0.0) / T);
  return std::min(n, static_cast<std::size_t>(stale));
}

DynamicReport run_dynamic(Estimator& estimator, const Table& new_table, const std::vector<LabeledQuery>& labeled,
                          double T, const Clock& clock, std::uint64_t seed_base) {
  if (!(T > 0)) throw std::invalid_argument("dynamic: T must be positive");
  if (labeled.empty()) throw std::invalid_argument("dynamic: no queries");
  DynamicReport r;
  r.estimator = estimator.name();
  r.T = T;
  r.n = labeled.size();

  const auto stale_model = estimator.snapshot();
  const Seconds start = clock.now();
  try {
    estimator.update(new_table);
  } catch (const std::exception& e) {
    r.failed = true;
    r.error = e.what();
  }
  r.t_u = (clock.now() - start).count();
  r.finished = !r.failed && r.t_u <= T;
  r.stale_count = r.finished ? stale_query_count(r.n, r.t_u, T) : r.n;
  r.updated_count = r.n - r.stale_count;

  std::vector<double> stale_errors, updated_errors, all;
  for (std::size_t i = 0; i < r.n; ++i) {
    const Estimator& model = i < r.stale_count ? *stale_model : estimator;
    const double q = q_error(model.estimate(labeled[i].query, seed_base + i), static_cast<double>(labeled[i].cardinality));
    (i < r.stale_count ? stale_errors : updated_errors).push_back(q);
    all.push_back(q);
  }
  if (!stale_errors.empty()) r.stale = summarize(stale_errors);
  else r.stale.count = 0;
  if (!updated_errors.empty()) r.updated = summarize(updated_errors);
  else r.updated.count = 0;
  r.combined = summarize(all);
  return r;
}

nlohmann::ordered_json DynamicReport::to_json() const {
  nlohmann::ordered_json j;
  j["estimator"] = estimator;
  j["T"] = T;
  j["t_u"] = t_u;
  j["finished"] = finished;
  j["failed"] = failed;
  if (failed) j["error"] = error;
  j["n"] = n;
  j["stale_count"] = stale_count;
  j["updated_count"] = updated_count;
  j["stale"] = cardlab::to_json(stale);
  j["updated"] = cardlab::to_json(updated);
  j["combined"] = cardlab::to_json(combined);
  j["p99"] = headline();
  return j;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "estimator,T,t_u,p99,finished\n";
  for (const auto& r : rows) {
    out << r.estimator << ',' << format_value(r.T) << ',' << format_value(r.t_u) << ',' << format_value(r.p99) << ','
        << (r.finished ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace cardlab
