#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cardlab/bench.hpp"

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--seed", opt.seed, "master seed (overrides the config)");
  cmd->add_option("--jobs", opt.jobs, "worker threads for labeling")->check(CLI::PositiveNumber);
}

int fail(const std::string& kind, const std::string& message) {
  nlohmann::ordered_json err;
  err["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << err.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cardinality estimator benchmark"};
  app.require_subcommand(1);
  Options opt;

  using Command = nlohmann::ordered_json (*)(const cardlab::RunConfig&, const std::filesystem::path&);
  struct Entry {
    const char* name;
    Command fn;
    const char* help;
  };
  const Entry commands[] = {
      {"gen-data", cardlab::cmd_gen_data, "write the dataset as CSV plus a schema"},
      {"gen-workload", cardlab::cmd_gen_workload, "write a generated workload as JSONL"},
      {"label", cardlab::cmd_label, "write the workload with exact cardinalities"},
      {"evaluate", cardlab::cmd_evaluate, "static q-error report per estimator"},
      {"dynamic", cardlab::cmd_dynamic, "stale/updated q-error after an append"},
      {"rules", cardlab::cmd_rules, "logical-rule satisfaction matrix"},
  };
  for (const auto& c : commands) add_common(app.add_subcommand(c.name, c.help), opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    const auto cfg = cardlab::RunConfig::load(opt.config, opt.seed, opt.jobs);
    for (const auto& c : commands) {
      if (app.got_subcommand(c.name)) {
        c.fn(cfg, opt.out);
        std::cout << nlohmann::ordered_json{{"status", "ok"}, {"command", c.name}, {"out", opt.out}}.dump() << '\n';
      }
    }
  } catch (const std::invalid_argument& e) {
    return fail("config", e.what());
  } catch (const std::exception& e) {
    return fail("runtime", e.what());
  }
  return 0;
}
