#include "emspec/config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace emspec {

namespace {

using nlohmann::json;

json range_json(const std::optional<std::pair<double, double>>& r) {
  if (!r) return nullptr;
  return json::array({r->first, r->second});
}

std::optional<std::pair<double, double>> range_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2) {
    throw std::invalid_argument(std::string("histogram.") + key + " must be [lo, hi]");
  }
  return std::make_pair(v[0].get<double>(), v[1].get<double>());
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::woe_emerging: return "woe-emerging";
    case ExperimentKind::cwoe_one_block: return "cwoe-one-block";
    case ExperimentKind::cwoe_blocks: return "cwoe-blocks";
    case ExperimentKind::cwoe_banded: return "cwoe-banded";
    case ExperimentKind::portfolio: return "portfolio";
    case ExperimentKind::theory_table: return "theory-table";
  }
  return "unknown";
}

ExperimentKind experiment_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::woe_emerging, ExperimentKind::cwoe_one_block, ExperimentKind::cwoe_blocks,
                 ExperimentKind::cwoe_banded, ExperimentKind::portfolio, ExperimentKind::theory_table}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  switch (kind) {
    case ExperimentKind::woe_emerging:
      break;
    case ExperimentKind::cwoe_one_block:
      c.n_series = 1024;
      c.horizons = {512};
      c.population = {"one-block", 0.5, {}};
      break;
    case ExperimentKind::cwoe_blocks:
      c.n_series = 1024;
      c.horizons = {512};
      c.population = {"blocks", 0.0, {{512, 0.9}, {256, 0.45}, {256, 0.225}}};
      break;
    case ExperimentKind::cwoe_banded:
      c.n_series = 1024;
      c.horizons = {512};
      c.population = {"banded", 0.8, {}};
      break;
    case ExperimentKind::portfolio:
      c.n_series = 100;
      c.horizons = {50, 75, 100, 125, 150, 200, 300, 500, 1000};
      c.realizations = 100;
      break;
    case ExperimentKind::theory_table:
      c.n_series = 1024;
      c.horizons = {2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
      break;
  }
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  json blocks = json::array();
  for (const auto& b : c.population.blocks) blocks.push_back(json::array({b.size, b.coeff}));
  return json{
      {"experiment", to_string(c.experiment)},
      {"n_series", c.n_series},
      {"horizons", c.horizons},
      {"variance", c.variance},
      {"exponent", c.exponent},
      {"population", {{"kind", c.population.kind}, {"coeff", c.population.coeff}, {"blocks", blocks}}},
      {"realizations", c.realizations},
      {"master_seed", c.master_seed},
      {"output_dir", c.output_dir},
      {"workers", c.workers},
      {"compare_moments", c.compare_moments},
      {"histogram",
       {{"bins", c.histogram.bins},
        {"emerging_range", range_json(c.histogram.emerging_range)},
        {"bulk_range", range_json(c.histogram.bulk_range)},
        {"corrections_range", range_json(c.histogram.corrections_range)}}},
      {"portfolio",
       {{"n_assets", c.portfolio.n_assets},
        {"block_size", c.portfolio.block_size},
        {"block_coeff", c.portfolio.block_coeff},
        {"vol_min", c.portfolio.vol_min},
        {"vol_max", c.portfolio.vol_max},
        {"vol_seed", c.portfolio.vol_seed},
        {"exponents", c.portfolio_exponents}}},
  };
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    if (!j.contains("experiment")) throw std::invalid_argument("config is missing 'experiment'");
    ExperimentConfig c = default_config(experiment_from_string(j.at("experiment").get<std::string>()));
    c.n_series = j.value("n_series", c.n_series);
    if (j.contains("horizons")) {
      c.horizons = j.at("horizons").get<std::vector<int>>();
    } else if (j.contains("horizon")) {
      c.horizons = {j.at("horizon").get<int>()};
    } else if (j.contains("kappa")) {
      c.horizons = {static_cast<int>(std::lround(j.at("kappa").get<double>() * c.n_series))};
    }
    c.variance = j.value("variance", c.variance);
    if (j.contains("exponent")) {
      c.exponent = j.at("exponent").get<double>();
    } else if (j.contains("alpha")) {
      c.exponent = 1.0 + j.at("alpha").get<double>();
    }
    if (j.contains("population")) {
      const auto& p = j.at("population");
      c.population.kind = p.value("kind", c.population.kind);
      c.population.coeff = p.value("coeff", c.population.coeff);
      if (p.contains("blocks")) {
        c.population.blocks.clear();
        for (const auto& b : p.at("blocks")) {
          if (!b.is_array() || b.size() != 2) throw std::invalid_argument("blocks entries must be [size, coeff]");
          c.population.blocks.push_back({b[0].get<int>(), b[1].get<double>()});
        }
      }
    }
    c.realizations = j.value("realizations", c.realizations);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.workers = j.value("workers", c.workers);
    c.compare_moments = j.value("compare_moments", c.compare_moments);
    if (j.contains("histogram")) {
      const auto& h = j.at("histogram");
      c.histogram.bins = h.value("bins", c.histogram.bins);
      c.histogram.emerging_range = range_from(h, "emerging_range");
      c.histogram.bulk_range = range_from(h, "bulk_range");
      c.histogram.corrections_range = range_from(h, "corrections_range");
    }
    if (j.contains("portfolio")) {
      const auto& p = j.at("portfolio");
      c.portfolio.n_assets = p.value("n_assets", c.portfolio.n_assets);
      c.portfolio.block_size = p.value("block_size", c.portfolio.block_size);
      c.portfolio.block_coeff = p.value("block_coeff", c.portfolio.block_coeff);
      c.portfolio.vol_min = p.value("vol_min", c.portfolio.vol_min);
      c.portfolio.vol_max = p.value("vol_max", c.portfolio.vol_max);
      c.portfolio.vol_seed = p.value("vol_seed", c.portfolio.vol_seed);
      if (p.contains("exponents")) c.portfolio_exponents = p.at("exponents").get<std::vector<double>>();
    }
    if (c.experiment == ExperimentKind::portfolio && !j.contains("n_series")) {
      c.n_series = c.portfolio.n_assets;
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config file " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace emspec
