#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cardlab/dynamic.hpp"
#include "cardlab/rules.hpp"
#include "cardlab/synth.hpp"
#include "cardlab/workload.hpp"

namespace cardlab {

struct DatasetSpec {
  std::string name = "synth";
  std::optional<SynthConfig> synth;  // either synth or csv + schema
  std::filesystem::path csv;
  std::filesystem::path schema;
};

struct WorkloadSpec {
  WorkloadConfig config;
  std::filesystem::path file;  // used instead of generation when set
};

struct EstimatorSpec {
  std::string name;
  nlohmann::ordered_json params;  // resolved
};

struct DynamicSpec {
  std::vector<double> T{1.0};
  UpdateSpec update;
  std::optional<double> mock_update_seconds;  // inject t_u instead of measuring
};

struct RunConfig {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  DatasetSpec dataset;
  WorkloadSpec workload;
  std::vector<EstimatorSpec> estimators;
  DynamicSpec dynamic;
  RuleCheckConfig rules;

  /// Parses a config document, filling defaults and deriving every unset
  /// seed from the master seed. `seed` overrides the document's seed; one
  /// of the two is required. Relative paths resolve against `base_dir`.
  static RunConfig resolve(const nlohmann::json& doc, std::optional<std::uint64_t> seed = std::nullopt,
                           std::optional<unsigned> jobs = std::nullopt, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path, std::optional<std::uint64_t> seed = std::nullopt,
                        std::optional<unsigned> jobs = std::nullopt);
  /// Fully resolved config; resolve(to_json()) reproduces this config.
  nlohmann::ordered_json to_json() const;
};

Table load_dataset(const DatasetSpec& spec);
/// The workload file's queries, or a generated workload.
std::vector<Query> load_or_generate_workload(const WorkloadSpec& spec, const Table& table);

// Each command writes its outputs under `out` (created if missing) and
// returns the main report. Reports embed the resolved config.
nlohmann::ordered_json cmd_gen_data(const RunConfig& cfg, const std::filesystem::path& out);
nlohmann::ordered_json cmd_gen_workload(const RunConfig& cfg, const std::filesystem::path& out);
nlohmann::ordered_json cmd_label(const RunConfig& cfg, const std::filesystem::path& out);
/// report.json / report.csv carry accuracy and size; wall-clock timings go
/// to timing.json so the report itself is reproducible byte for byte.
nlohmann::ordered_json cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& out);
nlohmann::ordered_json cmd_dynamic(const RunConfig& cfg, const std::filesystem::path& out);
nlohmann::ordered_json cmd_rules(const RunConfig& cfg, const std::filesystem::path& out);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

}  // namespace cardlab
