#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "emspec/config.hpp"

namespace emspec {

struct Diagnostic {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string field;
  std::string message;
};

/// Every violation in the config, not just the first, plus warnings for
/// linear-response guard triggers when moments are compared with theory.
std::vector<Diagnostic> validate(const ExperimentConfig& config);
bool has_errors(const std::vector<Diagnostic>& diagnostics);
nlohmann::json diagnostics_json(const std::vector<Diagnostic>& diagnostics);

/// Thrown by run() for a config that fails validation.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

std::shared_ptr<const PopulationCorrelation> build_population(const PopulationSpec& spec, int n);

struct TheoryRow {
  std::string quantity;
  int horizon = 0;
  int n_series = 0;
  double kappa = 0.0;
  double coeff = 0.0;
  double alpha = 0.0;
  double value = 0.0;
};

/// Closed-form quantities for every T in config.horizons at fixed N, alpha and,
/// for one-block rows, c = population.coeff.
std::vector<TheoryRow> theory_table(const ExperimentConfig& config);

/// Columns: quantity,T,N,kappa,c,alpha,value.
std::string theory_csv(const std::vector<TheoryRow>& rows);

struct RunSummary {
  std::vector<std::string> files;  // paths relative to output_dir
  nlohmann::json provenance;       // contents of run.json
};

/// Runs the configured experiment and writes its tables and run.json into
/// config.output_dir. Output tables depend only on the config (not on the
/// worker count). Throws ConfigError for an invalid config.
RunSummary run(const ExperimentConfig& config);

}  // namespace emspec
