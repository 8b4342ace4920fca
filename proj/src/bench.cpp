#include "cardlab/bench.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "cardlab/random.hpp"
#include "cardlab/registry.hpp"

namespace cardlab {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

void check_keys(const nlohmann::json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw std::invalid_argument(where + ": unknown key '" + k + "'");
  }
}

fs::path resolve_path(const nlohmann::json& j, const fs::path& base, const std::string& what) {
  fs::path p = j.get<std::string>();
  if (p.is_relative() && !base.empty()) p = base / p;
  if (!fs::exists(p)) throw std::invalid_argument(what + " not found: " + p.string());
  return p;
}

WorkloadConfig parse_workload(const nlohmann::json& j, std::uint64_t seed) {
  WorkloadConfig w;
  w.n_queries = j.value("n_queries", w.n_queries);
  w.seed = j.value("seed", seed);
  w.p_center_data = j.value("p_center_data", w.p_center_data);
  w.p_width_uniform = j.value("p_width_uniform", w.p_width_uniform);
  w.lambda_factor = j.value("lambda_factor", w.lambda_factor);
  w.validate();
  return w;
}

ojson workload_json(const WorkloadConfig& w) {
  return {{"n_queries", w.n_queries},
          {"seed", w.seed},
          {"p_center_data", w.p_center_data},
          {"p_width_uniform", w.p_width_uniform},
          {"lambda_factor", w.lambda_factor}};
}

ojson synth_json(const SynthConfig& s) {
  return {{"skew", s.skew}, {"correlation", s.correlation}, {"domain_size", s.domain_size}, {"rows", s.rows}, {"seed", s.seed}};
}

ojson with_config(const RunConfig& cfg, const std::string& command) {
  ojson j;
  j["command"] = command;
  j["config"] = cfg.to_json();
  return j;
}

std::unique_ptr<Estimator> make(const EstimatorSpec& spec, std::uint64_t seed) {
  return make_estimator(spec.name, spec.params, seed);
}

}  // namespace

RunConfig RunConfig::resolve(const nlohmann::json& doc, std::optional<std::uint64_t> seed, std::optional<unsigned> jobs,
                             const fs::path& base_dir) {
  check_keys(doc, "config", {"seed", "jobs", "dataset", "workload", "estimators", "dynamic", "rules"});
  RunConfig cfg;
  if (seed) {
    cfg.seed = *seed;
  } else if (doc.contains("seed") && doc["seed"].is_number_unsigned()) {
    cfg.seed = doc["seed"].get<std::uint64_t>();
  } else {
    throw std::invalid_argument("config: a nonnegative integer seed is required (config 'seed' or --seed)");
  }
  cfg.jobs = jobs ? *jobs : doc.value("jobs", 1u);
  if (cfg.jobs == 0) throw std::invalid_argument("config: jobs must be >= 1");

  const auto& ds = doc.contains("dataset") ? doc["dataset"] : nlohmann::json::object();
  check_keys(ds, "dataset", {"name", "synth", "csv", "schema"});
  if (ds.contains("csv")) {
    if (!ds.contains("schema")) throw std::invalid_argument("dataset: csv requires schema");
    cfg.dataset.csv = resolve_path(ds["csv"], base_dir, "dataset csv");
    cfg.dataset.schema = resolve_path(ds["schema"], base_dir, "dataset schema");
    cfg.dataset.name = ds.value("name", cfg.dataset.csv.stem().string());
  } else {
    const auto& sj = ds.contains("synth") ? ds["synth"] : nlohmann::json::object();
    check_keys(sj, "dataset.synth", {"skew", "correlation", "domain_size", "rows", "seed"});
    SynthConfig s;
    s.skew = sj.value("skew", s.skew);
    s.correlation = sj.value("correlation", s.correlation);
    s.domain_size = sj.value("domain_size", s.domain_size);
    s.rows = sj.value("rows", s.rows);
    s.seed = sj.value("seed", derive_seed(cfg.seed, 1));
    s.validate();
    cfg.dataset.synth = s;
    cfg.dataset.name = ds.value("name", std::string("synth"));
  }

  const auto& wj = doc.contains("workload") ? doc["workload"] : nlohmann::json::object();
  check_keys(wj, "workload", {"file", "n_queries", "seed", "p_center_data", "p_width_uniform", "lambda_factor"});
  cfg.workload.config = parse_workload(wj, derive_seed(cfg.seed, 2));
  if (wj.contains("file")) cfg.workload.file = resolve_path(wj["file"], base_dir, "workload file");

  if (doc.contains("estimators")) {
    if (!doc["estimators"].is_array()) throw std::invalid_argument("estimators: expected an array");
    std::size_t i = 0;
    for (const auto& e : doc["estimators"]) {
      EstimatorSpec spec;
      nlohmann::json params = nlohmann::json::object();
      if (e.is_string()) {
        spec.name = e.get<std::string>();
      } else {
        check_keys(e, "estimators[" + std::to_string(i) + "]", {"name", "params"});
        spec.name = e.at("name").get<std::string>();
        if (e.contains("params")) params = e["params"];
      }
      spec.params = resolve_estimator_params(spec.name, params, derive_seed(cfg.seed, 100 + i));
      cfg.estimators.push_back(std::move(spec));
      ++i;
    }
  }

  const auto& dj = doc.contains("dynamic") ? doc["dynamic"] : nlohmann::json::object();
  check_keys(dj, "dynamic", {"T", "append_fraction", "seed", "mock_update_seconds"});
  if (dj.contains("T")) {
    cfg.dynamic.T = dj["T"].is_array() ? dj["T"].get<std::vector<double>>() : std::vector<double>{dj["T"].get<double>()};
  }
  for (double t : cfg.dynamic.T) {
    if (!(t > 0)) throw std::invalid_argument("dynamic: every T must be positive");
  }
  cfg.dynamic.update.append_fraction = dj.value("append_fraction", cfg.dynamic.update.append_fraction);
  cfg.dynamic.update.seed = dj.value("seed", derive_seed(cfg.seed, 3));
  cfg.dynamic.update.validate();
  if (dj.contains("mock_update_seconds") && !dj["mock_update_seconds"].is_null()) {
    cfg.dynamic.mock_update_seconds = dj["mock_update_seconds"].get<double>();
  }

  const auto& rj = doc.contains("rules") ? doc["rules"] : nlohmann::json::object();
  check_keys(rj, "rules", {"probes", "stability_repeats", "seed", "seeds"});
  cfg.rules.probes = rj.value("probes", cfg.rules.probes);
  cfg.rules.stability_repeats = rj.value("stability_repeats", cfg.rules.stability_repeats);
  cfg.rules.seed = rj.value("seed", derive_seed(cfg.seed, 4));
  const auto mode = rj.value("seeds", std::string("paired"));
  if (mode != "paired" && mode != "independent") throw std::invalid_argument("rules: seeds must be paired or independent");
  cfg.rules.seeds = mode == "paired" ? SeedMode::kPaired : SeedMode::kIndependent;
  cfg.rules.workload = cfg.workload.config;
  return cfg;
}

RunConfig RunConfig::load(const fs::path& path, std::optional<std::uint64_t> seed, std::optional<unsigned> jobs) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return resolve(doc, seed, jobs, path.parent_path());
}

ojson RunConfig::to_json() const {
  ojson j;
  j["seed"] = seed;
  j["jobs"] = jobs;
  ojson ds;
  ds["name"] = dataset.name;
  if (dataset.synth) {
    ds["synth"] = synth_json(*dataset.synth);
  } else {
    ds["csv"] = dataset.csv.string();
    ds["schema"] = dataset.schema.string();
  }
  j["dataset"] = std::move(ds);
  ojson wl = workload_json(workload.config);
  if (!workload.file.empty()) wl["file"] = workload.file.string();
  j["workload"] = std::move(wl);
  auto ests = ojson::array();
  for (const auto& e : estimators) ests.push_back({{"name", e.name}, {"params", e.params}});
  j["estimators"] = std::move(ests);
  ojson dy;
  dy["T"] = dynamic.T;
  dy["append_fraction"] = dynamic.update.append_fraction;
  dy["seed"] = dynamic.update.seed;
  dy["mock_update_seconds"] = dynamic.mock_update_seconds ? ojson(*dynamic.mock_update_seconds) : ojson(nullptr);
  j["dynamic"] = std::move(dy);
  ojson ru;
  ru["probes"] = rules.probes;
  ru["stability_repeats"] = rules.stability_repeats;
  ru["seed"] = rules.seed;
  ru["seeds"] = rules.seeds == SeedMode::kPaired ? "paired" : "independent";
  j["rules"] = std::move(ru);
  return j;
}

Table load_dataset(const DatasetSpec& spec) {
  if (spec.synth) return gen_synth(*spec.synth);
  return ingest_csv(spec.csv, read_schema_json(spec.schema));
}

std::vector<Query> load_or_generate_workload(const WorkloadSpec& spec, const Table& table) {
  if (spec.file.empty()) return gen_workload(table, spec.config);
  std::vector<Query> out;
  for (auto& lq : read_workload_jsonl(spec.file)) {
    validate(lq.query, table);
    out.push_back(std::move(lq.query));
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

ojson cmd_gen_data(const RunConfig& cfg, const fs::path& out) {
  if (!cfg.dataset.synth) throw std::invalid_argument("gen-data: dataset must be synthetic");
  const Table t = gen_synth(*cfg.dataset.synth);
  fs::create_directories(out);
  write_csv(t, out / "data.csv");
  write_schema_json(t.schema(), out / "schema.json");
  ojson j = with_config(cfg, "gen-data");
  j["rows"] = t.row_count();
  auto cols = ojson::array();
  for (std::size_t c = 0; c < t.column_count(); ++c) {
    const auto& s = t.stats(c);
    cols.push_back({{"name", t.schema()[c].name}, {"min", s.min}, {"max", s.max}, {"distinct", s.distinct}});
  }
  j["columns"] = std::move(cols);
  write_json(out / "provenance.json", j);
  return j;
}

ojson cmd_gen_workload(const RunConfig& cfg, const fs::path& out) {
  const Table t = load_dataset(cfg.dataset);
  const auto queries = gen_workload(t, cfg.workload.config);
  fs::create_directories(out);
  write_workload_jsonl(queries, out / "workload.jsonl");
  ojson j = with_config(cfg, "gen-workload");
  j["queries"] = queries.size();
  write_json(out / "provenance.json", j);
  return j;
}

ojson cmd_label(const RunConfig& cfg, const fs::path& out) {
  const Table t = load_dataset(cfg.dataset);
  const auto labeled = label(t, load_or_generate_workload(cfg.workload, t), cfg.jobs);
  fs::create_directories(out);
  write_labeled_jsonl(labeled, out / "labeled.jsonl");
  ojson j = with_config(cfg, "label");
  j["queries"] = labeled.size();
  j["rows"] = t.row_count();
  write_json(out / "provenance.json", j);
  return j;
}

ojson cmd_evaluate(const RunConfig& cfg, const fs::path& out) {
  if (cfg.estimators.empty()) throw std::invalid_argument("evaluate: no estimators configured");
  const Table t = load_dataset(cfg.dataset);
  const auto labeled = label(t, load_or_generate_workload(cfg.workload, t), cfg.jobs);
  const std::uint64_t seed_base = derive_seed(cfg.seed, 6);

  std::vector<ErrorReportRow> rows;
  auto models = ojson::array();
  auto timing = ojson::array();
  for (const auto& spec : cfg.estimators) {
    ojson m;
    m["estimator"] = spec.name;
    try {
      auto est = make(spec, cfg.seed);
      const auto b0 = std::chrono::steady_clock::now();
      est->build(t);
      const Seconds build = std::chrono::steady_clock::now() - b0;
      const auto e0 = std::chrono::steady_clock::now();
      const auto errors = evaluate_errors(*est, labeled, seed_base);
      const Seconds infer = std::chrono::steady_clock::now() - e0;
      rows.push_back({spec.name, cfg.dataset.name, "all", summarize(errors)});
      for (const auto& [k, s] : group_by_predicate_count(labeled, errors)) {
        rows.push_back({spec.name, cfg.dataset.name, std::to_string(k), s});
      }
      m["status"] = "ok";
      m["size_bytes"] = est->size_bytes();
      timing.push_back({{"estimator", spec.name},
                        {"build_seconds", build.count()},
                        {"inference_seconds_per_query", infer.count() / static_cast<double>(labeled.size())}});
    } catch (const std::exception& e) {
      m["status"] = "failed";
      m["error"] = e.what();
    }
    models.push_back(std::move(m));
  }

  ojson j = with_config(cfg, "evaluate");
  j["dataset"] = cfg.dataset.name;
  j["rows"] = t.row_count();
  j["queries"] = labeled.size();
  j["estimators"] = std::move(models);
  j["errors"] = to_json(rows);
  fs::create_directories(out);
  write_json(out / "report.json", j);
  write_text(out / "report.csv", to_csv(rows));
  write_json(out / "timing.json", {{"command", "evaluate"}, {"estimators", std::move(timing)}});
  return j;
}

ojson cmd_dynamic(const RunConfig& cfg, const fs::path& out) {
  if (cfg.estimators.empty()) throw std::invalid_argument("dynamic: no estimators configured");
  const Table old_table = load_dataset(cfg.dataset);
  const Table new_table = make_appended_table(old_table, cfg.dynamic.update);
  const auto labeled = label(new_table, load_or_generate_workload(cfg.workload, new_table), cfg.jobs);
  const std::uint64_t seed_base = derive_seed(cfg.seed, 6);

  auto reports = ojson::array();
  std::vector<SweepRow> sweep;
  for (const auto& spec : cfg.estimators) {
    std::unique_ptr<Estimator> built;
    std::string build_error;
    try {
      built = make(spec, cfg.seed);
      built->build(old_table);
    } catch (const std::exception& e) {
      build_error = e.what();
    }
    for (double T : cfg.dynamic.T) {
      if (!built) {
        reports.push_back({{"estimator", spec.name}, {"T", T}, {"failed", true}, {"error", build_error}});
        sweep.push_back({spec.name, T, 0, 0, false});
        continue;
      }
      DynamicReport r;
      if (cfg.dynamic.mock_update_seconds) {
        ManualClock clock;
        DelayedUpdate est(built->snapshot(), clock, Seconds(*cfg.dynamic.mock_update_seconds));
        r = run_dynamic(est, new_table, labeled, T, clock, seed_base);
      } else {
        const SteadyClock clock;
        auto est = built->snapshot();
        r = run_dynamic(*est, new_table, labeled, T, clock, seed_base);
      }
      reports.push_back(r.to_json());
      sweep.push_back({r.estimator, T, r.t_u, r.headline(), r.finished});
    }
  }
  ojson j = with_config(cfg, "dynamic");
  j["old_rows"] = old_table.row_count();
  j["new_rows"] = new_table.row_count();
  j["queries"] = labeled.size();
  j["reports"] = std::move(reports);
  fs::create_directories(out);
  write_json(out / "dynamic.json", j);
  write_text(out / "sweep.csv", sweep_csv(sweep));
  return j;
}

ojson cmd_rules(const RunConfig& cfg, const fs::path& out) {
  if (cfg.estimators.empty()) throw std::invalid_argument("rules: no estimators configured");
  const Table t = load_dataset(cfg.dataset);
  std::vector<RuleReport> reports;
  auto failures = ojson::array();
  for (const auto& spec : cfg.estimators) {
    try {
      auto est = make(spec, cfg.seed);
      est->build(t);
      reports.push_back(check_rules(*est, t, cfg.rules));
    } catch (const std::exception& e) {
      failures.push_back({{"estimator", spec.name}, {"error", e.what()}});
    }
  }
  ojson j = with_config(cfg, "rules");
  auto arr = ojson::array();
  for (const auto& r : reports) arr.push_back(r.to_json());
  j["reports"] = std::move(arr);
  j["failures"] = std::move(failures);
  fs::create_directories(out);
  write_json(out / "rules.json", j);
  write_text(out / "rules.txt", rule_matrix_text(reports));
  write_text(out / "rules.csv", rule_matrix_csv(reports));
  return j;
}

}  // namespace cardlab
