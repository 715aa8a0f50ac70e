#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "emspec/ensembles.hpp"
#include "emspec/portfolio.hpp"

namespace emspec {

enum class ExperimentKind { woe_emerging, cwoe_one_block, cwoe_blocks, cwoe_banded, portfolio, theory_table };

std::string to_string(ExperimentKind kind);
/// Throws std::invalid_argument for an unknown name.
ExperimentKind experiment_from_string(const std::string& name);

struct HistogramSpec {
  int bins = 60;
  std::optional<std::pair<double, double>> emerging_range;
  std::optional<std::pair<double, double>> bulk_range;
  std::optional<std::pair<double, double>> corrections_range;
};

/// xi as given in a config. kind is one of identity, one-block, blocks, banded.
struct PopulationSpec {
  std::string kind = "identity";
  double coeff = 0.0;
  std::vector<Block> blocks;
};

/// Everything needed to reproduce one run.
///
/// JSON schema (all keys optional except "experiment"):
///   experiment        woe-emerging | cwoe-one-block | cwoe-blocks | cwoe-banded |
///                     portfolio | theory-table
///   n_series          N
///   horizons          list of T; "horizon" (single T) or "kappa" (T = round(kappa N))
///                     are accepted on input
///   variance          entry variance sigma^2
///   exponent          power-map q; "alpha" (q = 1 + alpha) is accepted on input
///   population        {"kind": ..., "coeff": c, "blocks": [[size, coeff], ...]}
///   realizations, master_seed, output_dir, workers, compare_moments
///   histogram         {"bins": B, "emerging_range": [lo, hi], "bulk_range": [lo, hi],
///                      "corrections_range": [lo, hi]}
///   portfolio         {"n_assets", "block_size", "block_coeff", "vol_min", "vol_max",
///                      "vol_seed", "exponents": [q, ...]}
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::woe_emerging;
  int n_series = 256;
  std::vector<int> horizons{128};
  double variance = 1.0;
  double exponent = 1.001;
  PopulationSpec population;
  int realizations = 10;
  std::uint64_t master_seed = 1;
  std::string output_dir = "out";
  int workers = 1;
  bool compare_moments = true;
  HistogramSpec histogram;
  PortfolioModelSpec portfolio;
  std::vector<double> portfolio_exponents = default_exponent_grid();

  double alpha() const { return exponent - 1.0; }
};

/// Defaults that differ per experiment (e.g. the portfolio horizon grid).
ExperimentConfig default_config(ExperimentKind kind);

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys take the experiment's defaults. Throws std::invalid_argument
/// on malformed values.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

}  // namespace emspec
