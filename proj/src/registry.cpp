#include "cardlab/registry.hpp"

#include <set>
#include <stdexcept>

#include "cardlab/chow_liu.hpp"
#include "cardlab/gbt.hpp"
#include "cardlab/histogram.hpp"
#include "cardlab/kde.hpp"
#include "cardlab/made.hpp"
#include "cardlab/mhist.hpp"
#include "cardlab/sampling.hpp"

namespace cardlab {

namespace {

using ojson = nlohmann::ordered_json;

// Reads keys out of a params object, remembering which were consumed so
// leftovers can be reported.
class ParamReader {
 public:
  ParamReader(const std::string& owner, const nlohmann::json& j) : owner_(owner), j_(j.is_null() ? nlohmann::json::object() : j) {
    if (!j_.is_object()) throw std::invalid_argument(owner_ + ": params must be an object");
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument(owner_ + ": bad value for '" + key + "'");
    }
  }

  Budget budget(const std::string& key, Budget fallback) {
    seen_.insert(key);
    return j_.contains(key) ? Budget::from_json(j_.at(key)) : fallback;
  }

  const nlohmann::json& sub(const std::string& key) {
    seen_.insert(key);
    static const nlohmann::json empty = nlohmann::json::object();
    return j_.contains(key) ? j_.at(key) : empty;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw std::invalid_argument(owner_ + ": unknown parameter '" + k + "'");
    }
  }

 private:
  std::string owner_;
  nlohmann::json j_;
  std::set<std::string> seen_;
};

SampleParams sample_params(const nlohmann::json& j, std::uint64_t seed, bool fallback) {
  ParamReader r("sample", j);
  SampleParams p;
  p.rate = r.get("rate", p.rate);
  p.seed = r.get("seed", seed);
  p.budget = r.budget("budget", p.budget);
  p.independence_fallback = fallback;
  r.finish();
  return p;
}

ojson to_json(const SampleParams& p) { return {{"rate", p.rate}, {"seed", p.seed}, {"budget", p.budget.to_json()}}; }

AviParams avi_params(const nlohmann::json& j) {
  ParamReader r("avi", j);
  AviParams p;
  p.buckets_per_column = r.get("buckets_per_column", p.buckets_per_column);
  p.budget = r.budget("budget", p.budget);
  r.finish();
  return p;
}

ojson to_json(const AviParams& p) { return {{"buckets_per_column", p.buckets_per_column}, {"budget", p.budget.to_json()}}; }

MhistParams mhist_params(const nlohmann::json& j) {
  ParamReader r("mhist", j);
  MhistParams p;
  p.budget = r.budget("budget", p.budget);
  r.finish();
  return p;
}

KdeParams kde_params(const nlohmann::json& j, std::uint64_t seed) {
  ParamReader r("kde", j);
  KdeParams p;
  p.rate = r.get("rate", p.rate);
  p.seed = r.get("seed", seed);
  p.budget = r.budget("budget", p.budget);
  r.finish();
  return p;
}

BayesParams bayes_params(const nlohmann::json& j) {
  ParamReader r("bayes", j);
  BayesParams p;
  p.alpha = r.get("alpha", p.alpha);
  p.samples = r.get("samples", p.samples);
  p.max_cells = r.get("max_cells", p.max_cells);
  p.budget = r.budget("budget", p.budget);
  r.finish();
  return p;
}

WorkloadConfig workload_params(const nlohmann::json& j, WorkloadConfig w) {
  ParamReader r("workload", j);
  w.n_queries = r.get("n_queries", w.n_queries);
  w.seed = r.get("seed", w.seed);
  w.p_center_data = r.get("p_center_data", w.p_center_data);
  w.p_width_uniform = r.get("p_width_uniform", w.p_width_uniform);
  w.lambda_factor = r.get("lambda_factor", w.lambda_factor);
  r.finish();
  w.validate();
  return w;
}

ojson workload_json(const WorkloadConfig& w) {
  return {{"p_center_data", w.p_center_data}, {"p_width_uniform", w.p_width_uniform}, {"lambda_factor", w.lambda_factor}};
}

GbtParams gbt_params(const nlohmann::json& j, std::uint64_t seed) {
  ParamReader r("gbt", j);
  GbtParams p;
  p.model.trees = r.get("trees", p.model.trees);
  p.model.max_depth = r.get("max_depth", p.model.max_depth);
  p.model.shrinkage = r.get("shrinkage", p.model.shrinkage);
  p.model.grid = r.get("grid", p.model.grid);
  p.model.min_leaf = r.get("min_leaf", p.model.min_leaf);
  p.train_queries = r.get("train_queries", p.train_queries);
  p.hist_buckets = r.get("hist_buckets", p.hist_buckets);
  p.update_sample_rate = r.get("update_sample_rate", p.update_sample_rate);
  p.seed = r.get("seed", seed);
  p.workload = workload_params(r.sub("workload"), p.workload);
  p.budget = r.budget("budget", p.budget);
  r.finish();
  return p;
}

ojson to_json(const GbtParams& p) {
  return {{"trees", p.model.trees},
          {"max_depth", p.model.max_depth},
          {"shrinkage", p.model.shrinkage},
          {"grid", p.model.grid},
          {"min_leaf", p.model.min_leaf},
          {"train_queries", p.train_queries},
          {"hist_buckets", p.hist_buckets},
          {"update_sample_rate", p.update_sample_rate},
          {"seed", p.seed},
          {"workload", workload_json(p.workload)},
          {"budget", p.budget.to_json()}};
}

MadeParams made_params(const nlohmann::json& j, std::uint64_t seed) {
  ParamReader r("made", j);
  MadeParams p;
  p.hidden = r.get("hidden", p.hidden);
  p.max_columns = r.get("max_columns", p.max_columns);
  p.max_domain = r.get("max_domain", p.max_domain);
  p.samples = r.get("samples", p.samples);
  p.update_epochs = r.get("update_epochs", p.update_epochs);
  p.seed = r.get("seed", seed);
  p.train.epochs = r.get("epochs", p.train.epochs);
  p.train.batch_size = r.get("batch_size", p.train.batch_size);
  p.train.step_size = r.get("step_size", p.train.step_size);
  p.budget = r.budget("budget", p.budget);
  r.finish();
  return p;
}

ojson to_json(const MadeParams& p) {
  return {{"hidden", p.hidden},
          {"max_columns", p.max_columns},
          {"max_domain", p.max_domain},
          {"samples", p.samples},
          {"update_epochs", p.update_epochs},
          {"seed", p.seed},
          {"epochs", p.train.epochs},
          {"batch_size", p.train.batch_size},
          {"step_size", p.train.step_size},
          {"budget", p.budget.to_json()}};
}

}  // namespace

const std::vector<std::string>& estimator_names() {
  static const std::vector<std::string> names{"exact", "sample_a", "sample_b", "avi", "mhist", "kde", "bayes", "gbt", "made"};
  return names;
}

nlohmann::ordered_json resolve_estimator_params(const std::string& name, const nlohmann::json& params, std::uint64_t seed) {
  if (name == "exact") {
    ParamReader("exact", params).finish();
    return ojson::object();
  }
  if (name == "sample_a" || name == "sample_b") return to_json(sample_params(params, seed, name == "sample_b"));
  if (name == "avi") return to_json(avi_params(params));
  if (name == "mhist") return {{"budget", mhist_params(params).budget.to_json()}};
  if (name == "kde") {
    const auto p = kde_params(params, seed);
    return {{"rate", p.rate}, {"seed", p.seed}, {"budget", p.budget.to_json()}};
  }
  if (name == "bayes") {
    const auto p = bayes_params(params);
    return {{"alpha", p.alpha}, {"samples", p.samples}, {"max_cells", p.max_cells}, {"budget", p.budget.to_json()}};
  }
  if (name == "gbt") return to_json(gbt_params(params, seed));
  if (name == "made") return to_json(made_params(params, seed));
  throw std::invalid_argument("unknown estimator '" + name + "'");
}

std::unique_ptr<Estimator> make_estimator(const std::string& name, const nlohmann::json& params, std::uint64_t seed) {
  if (name == "exact") {
    ParamReader("exact", params).finish();
    return std::make_unique<ExactEstimator>();
  }
  if (name == "sample_a" || name == "sample_b") return std::make_unique<SampleEstimator>(sample_params(params, seed, name == "sample_b"));
  if (name == "avi") return std::make_unique<AviEstimator>(avi_params(params));
  if (name == "mhist") return std::make_unique<MhistEstimator>(mhist_params(params));
  if (name == "kde") return std::make_unique<KdeEstimator>(kde_params(params, seed));
  if (name == "bayes") return std::make_unique<BayesEstimator>(bayes_params(params));
  if (name == "gbt") return std::make_unique<GbtEstimator>(gbt_params(params, seed));
  if (name == "made") return std::make_unique<MadeEstimator>(made_params(params, seed));
  throw std::invalid_argument("unknown estimator '" + name + "'");
}

}  // namespace cardlab
