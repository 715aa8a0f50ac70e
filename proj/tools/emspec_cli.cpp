#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "emspec/config.hpp"
#include "emspec/error.hpp"
#include "emspec/experiment.hpp"
#include "emspec/version.hpp"

namespace {

using nlohmann::json;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> realizations;
  std::optional<int> workers;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--realizations", o.realizations, "number of realizations");
  cmd->add_option("--workers", o.workers, "worker threads (default: $EMSPEC_WORKERS or 1)");
  cmd->add_option("--out", o.out, "output directory");
}

emspec::ExperimentConfig resolve(const Overrides& o, emspec::ExperimentKind fallback) {
  emspec::ExperimentConfig cfg =
      o.config_path.empty() ? emspec::default_config(fallback) : emspec::load_config(o.config_path);
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.realizations) cfg.realizations = *o.realizations;
  if (o.workers) {
    cfg.workers = *o.workers;
  } else if (const char* env = std::getenv("EMSPEC_WORKERS"); env && *env) {
    try {
      cfg.workers = std::stoi(env);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("EMSPEC_WORKERS is not an integer: ") + env);
    }
  }
  if (o.out) cfg.output_dir = *o.out;
  return cfg;
}

int fail(const std::string& kind, const std::string& message, json extra = json::object()) {
  json err = {{"status", "error"}, {"error", kind}, {"message", message}};
  err.update(extra);
  std::cerr << err.dump() << '\n';
  return kind == "invalid_config" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power-map deformations of sample correlation matrices"};
  app.set_version_flag("--version", std::string(emspec::kVersion));
  app.require_subcommand(1);

  Overrides run_opts, validate_opts, table_opts;
  auto* run_cmd = app.add_subcommand("run", "run an experiment and write its tables");
  add_common(run_cmd, run_opts);
  run_cmd->get_option("--config")->required();

  auto* validate_cmd = app.add_subcommand("validate", "print config diagnostics as JSON");
  add_common(validate_cmd, validate_opts);
  validate_cmd->get_option("--config")->required();

  std::optional<int> table_n;
  std::optional<double> table_q, table_c;
  auto* table_cmd = app.add_subcommand("theory-table", "closed-form theory values as CSV");
  add_common(table_cmd, table_opts);
  table_cmd->add_option("--n-series", table_n, "N");
  table_cmd->add_option("--exponent", table_q, "power-map exponent q");
  table_cmd->add_option("--coeff", table_c, "one-block coefficient c");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) {
      const auto cfg = resolve(run_opts, emspec::ExperimentKind::woe_emerging);
      const auto summary = emspec::run(cfg);
      json ok = {{"status", "ok"}, {"output_dir", cfg.output_dir}, {"files", summary.files}};
      std::cout << ok.dump() << '\n';
      return 0;
    }
    if (*validate_cmd) {
      const auto cfg = resolve(validate_opts, emspec::ExperimentKind::woe_emerging);
      const auto diagnostics = emspec::validate(cfg);
      std::cout << emspec::diagnostics_json(diagnostics).dump(2) << '\n';
      return emspec::has_errors(diagnostics) ? 2 : 0;
    }
    auto cfg = resolve(table_opts, emspec::ExperimentKind::theory_table);
    cfg.experiment = emspec::ExperimentKind::theory_table;
    if (table_n) cfg.n_series = *table_n;
    if (table_q) cfg.exponent = *table_q;
    if (table_c) {
      cfg.population.kind = "one-block";
      cfg.population.coeff = *table_c;
    }
    if (table_opts.out) {
      const auto summary = emspec::run(cfg);
      std::cout << json{{"status", "ok"}, {"output_dir", cfg.output_dir}, {"files", summary.files}}.dump() << '\n';
    } else {
      auto diagnostics = emspec::validate(cfg);
      if (emspec::has_errors(diagnostics)) throw emspec::ConfigError(std::move(diagnostics));
      std::cout << emspec::theory_csv(emspec::theory_table(cfg));
    }
    return 0;
  } catch (const emspec::ConfigError& e) {
    return fail("invalid_config", e.what(), {{"diagnostics", emspec::diagnostics_json(e.diagnostics())}});
  } catch (const emspec::SolverError& e) {
    return fail("solver_failure", e.what(), {{"iterations", e.iterations()}, {"residual", e.residual()}});
  } catch (const std::invalid_argument& e) {
    return fail("invalid_config", e.what());
  } catch (const std::exception& e) {
    return fail("runtime_error", e.what());
  }
}
