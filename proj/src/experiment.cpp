#include "emspec/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>

#include "emspec/parallel.hpp"
#include "emspec/report.hpp"
#include "emspec/rng.hpp"
#include "emspec/spectral.hpp"
#include "emspec/theory.hpp"
#include "emspec/version.hpp"

namespace emspec {

namespace {

using nlohmann::json;
using Severity = Diagnostic::Severity;

bool is_ensemble(ExperimentKind k) {
  return k == ExperimentKind::woe_emerging || k == ExperimentKind::cwoe_one_block ||
         k == ExperimentKind::cwoe_blocks || k == ExperimentKind::cwoe_banded;
}

std::string expected_population(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::woe_emerging: return "identity";
    case ExperimentKind::cwoe_one_block: return "one-block";
    case ExperimentKind::cwoe_blocks: return "blocks";
    case ExperimentKind::cwoe_banded: return "banded";
    default: return "";
  }
}

void check_range(std::vector<Diagnostic>& out, const std::optional<std::pair<double, double>>& r,
                 const std::string& field) {
  if (r && !(r->first < r->second)) out.push_back({Severity::error, field, "range must satisfy lo < hi"});
}

// ---------------------------------------------------------------------------
// Ensemble experiments
// ---------------------------------------------------------------------------

struct MomentRow {
  int horizon;
  std::string quantity;
  std::optional<double> empirical;
  std::optional<double> stderr_value;
  std::optional<double> theory;
  std::optional<double> theory_asymptotic;
};

std::string moments_csv(const std::vector<MomentRow>& rows) {
  std::ostringstream out;
  out << "T,quantity,empirical,stderr,theory,theory_asymptotic\n";
  for (const auto& r : rows) {
    out << r.horizon << ',' << r.quantity << ',' << format_number(r.empirical) << ','
        << format_number(r.stderr_value) << ',' << format_number(r.theory) << ','
        << format_number(r.theory_asymptotic) << '\n';
  }
  return out.str();
}

struct MeanError {
  double mean = 0.0;
  double error = 0.0;
};

MeanError mean_error(const std::vector<double>& v) {
  MeanError m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= v.size();
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.error = std::sqrt(ss / (v.size() - 1) / v.size());
  }
  return m;
}

// Number of population eigenvalues expected to detach from the bulk.
int separated_count(const PopulationCorrelation& xi, double kappa) {
  if (xi.kind != PopulationKind::one_block && xi.kind != PopulationKind::block_diagonal) return 0;
  int count = 0;
  for (const auto& b : xi.blocks) {
    if (b.coeff > 0.0 && b.coeff >= 1.0 / (b.size * std::sqrt(kappa))) ++count;
  }
  return count;
}

std::vector<double> centers(const DensityHistogram& h) {
  std::vector<double> c(h.bins());
  for (std::size_t b = 0; b < h.bins(); ++b) c[b] = h.center(b);
  return c;
}

std::pair<double, double> spread_range(const std::vector<double>& v) {
  auto r = default_emerging_range(v);
  if (!(r.first < r.second)) r = {r.first - 1.0, r.first + 1.0};
  return r;
}

struct EnsembleOutput {
  std::vector<MomentRow> moments;
  json moments_report = json::object();
  json details = json::object();
};

void run_ensemble_horizon(const ExperimentConfig& cfg, int horizon,
                          const std::shared_ptr<const PopulationCorrelation>& xi, EnsembleOutput& out,
                          std::vector<std::string>& files) {
  const EnsembleShape shape{cfg.n_series, horizon, cfg.variance};
  const Deformation d = Deformation::from_exponent(cfg.exponent);
  const double alpha = d.alpha();
  const double kappa = shape.kappa();
  const int n = cfg.n_series;
  const std::uint64_t horizon_seed = substream_seed(cfg.master_seed, static_cast<std::uint64_t>(horizon));

  const auto splits = parallel_map(cfg.realizations, cfg.workers, [&](int r) {
    const SampleMatrix c = cwoe_sample(xi, shape, substream_seed(horizon_seed, static_cast<std::uint64_t>(r)));
    return split_spectrum(c, d);
  });

  MomentAccumulator acc;
  for (const auto& s : splits) acc.add(s);
  const MomentSet m = acc.result();
  out.moments_report[std::to_string(horizon)] = moments_json(m);

  const int nonzero = std::min(n, horizon);
  const int separated = separated_count(*xi, kappa);
  const int emerging_count = splits.front().emerging_count;

  std::vector<double> bulk_values, correction_values, emerging_values;
  std::vector<double> largest, largest_correction, lowest_emerging, separation_ratio;
  for (const auto& s : splits) {
    for (int j = n - nonzero; j < n - separated; ++j) {
      bulk_values.push_back(s.base_values(j));
      correction_values.push_back(s.corrections(j));
    }
    for (double x : s.emerging()) emerging_values.push_back(x);
    largest.push_back(s.base_values(n - 1));
    largest_correction.push_back(s.corrections(n - 1));
    if (emerging_count > 0) {
      lowest_emerging.push_back(*std::min_element(s.emerging().begin(), s.emerging().end()));
      separation_ratio.push_back(edge_separation(s.emerging()).ratio());
    }
  }

  const bool unit_variance = cfg.variance == 1.0;
  const bool theory_on = cfg.compare_moments && unit_variance;
  const double c = xi->coeff;
  const std::string suffix = "_T" + std::to_string(horizon) + ".csv";
  const int bins = cfg.histogram.bins;
  json& detail = out.details[std::to_string(horizon)];

  // Theory moments.
  std::optional<MomentPair> th_total, th_total_asym, th_bulk, th_bulk_asym, th_emerging, th_emerging_asym;
  std::optional<AnsatzParams> th_params, th_params_asym;
  std::optional<AnsatzParams> correction_ansatz;  // for the density of nonzero corrections
  if (theory_on && cfg.experiment == ExperimentKind::woe_emerging) {
    th_total = MomentPair{delta_m1_exact(horizon, alpha), delta_m2_exact(horizon, n, alpha)};
    th_total_asym = delta_m_asymptotic(horizon, kappa, alpha);
    th_params_asym = ansatz_asymptotic(horizon, alpha);
    const double s = th_params_asym->s;
    if (kappa >= 1.0) {
      th_bulk = th_total;
      th_bulk_asym = th_total_asym;
      th_emerging = th_emerging_asym = MomentPair{0.0, 0.0};
      try {
        th_params = ansatz_invert(*th_total, kappa);
      } catch (const std::domain_error&) {
      }
    } else {
      th_bulk = bulk_moment_extrapolation(th_total->first, th_total->second, s, kappa);
      th_bulk_asym = bulk_moment_extrapolation(th_total_asym->first, th_total_asym->second, s, kappa);
      th_emerging = MomentPair{th_total->first - th_bulk->first, th_total->second - th_bulk->second};
      th_emerging_asym = emerging_moments(s, kappa);
    }
    correction_ansatz = th_params_asym;
  } else if (theory_on && cfg.experiment == ExperimentKind::cwoe_one_block) {
    th_total = oneblock_delta_moments(horizon, kappa, c, alpha);
    try {
      const OneBlockAnsatz a = oneblock_ansatz(th_total->first, th_total->second, c, kappa);
      th_params = a.params;
      th_bulk = a.bulk;
      th_emerging = MomentPair{th_total->first - a.bulk.first, th_total->second - a.bulk.second};
      correction_ansatz = AnsatzParams{a.params.s * (1.0 - c), a.params.r};
    } catch (const std::domain_error&) {
    }
  }

  // Empirical ansatz parameters.
  std::optional<AnsatzParams> emp_params;
  try {
    AnsatzParams p = ansatz_invert(kappa >= 1.0 ? m.total : m.bulk, kappa);
    if (cfg.experiment == ExperimentKind::cwoe_one_block) p.s /= (1.0 - c);
    emp_params = p;
  } catch (const std::domain_error&) {
  }

  auto push = [&](const std::string& q, std::optional<double> e, std::optional<double> se,
                  std::optional<double> t, std::optional<double> ta) {
    out.moments.push_back({horizon, q, e, se, t, ta});
  };
  auto first = [](const std::optional<MomentPair>& p) -> std::optional<double> {
    return p ? std::optional<double>(p->first) : std::nullopt;
  };
  auto second = [](const std::optional<MomentPair>& p) -> std::optional<double> {
    return p ? std::optional<double>(p->second) : std::nullopt;
  };
  auto s_of = [](const std::optional<AnsatzParams>& p) -> std::optional<double> {
    return p ? std::optional<double>(p->s) : std::nullopt;
  };
  auto r_of = [](const std::optional<AnsatzParams>& p) -> std::optional<double> {
    return p ? std::optional<double>(p->r) : std::nullopt;
  };

  push("dm1", m.total.first, m.total_error.first, first(th_total), first(th_total_asym));
  push("dm2", m.total.second, m.total_error.second, second(th_total), second(th_total_asym));
  push("dm1_emerging", m.emerging.first, m.emerging_error.first, first(th_emerging), first(th_emerging_asym));
  push("dm2_emerging", m.emerging.second, m.emerging_error.second, second(th_emerging), second(th_emerging_asym));
  push("dm1_bulk", m.bulk.first, m.bulk_error.first, first(th_bulk), first(th_bulk_asym));
  push("dm2_bulk", m.bulk.second, m.bulk_error.second, second(th_bulk), second(th_bulk_asym));
  push("s", s_of(emp_params), std::nullopt, s_of(th_params), s_of(th_params_asym));
  push("r", r_of(emp_params), std::nullopt, r_of(th_params), r_of(th_params_asym));

  const MeanError top = mean_error(largest);
  const MeanError top_corr = mean_error(largest_correction);
  if (cfg.experiment == ExperimentKind::cwoe_one_block || cfg.experiment == ExperimentKind::cwoe_blocks) {
    std::optional<double> top_theory, corr_theory;
    if (cfg.experiment == ExperimentKind::cwoe_one_block && theory_on && c > 0.0) {
      top_theory = oneblock_separated_position(n, kappa, c);
      if (top.mean > 0.0) corr_theory = largest_correction_estimate(top.mean, alpha);
    }
    if (separated > 0) {
      std::vector<double> first_moments, second_moments;
      for (const auto& s : splits) {
        double a = 0.0, b = 0.0;
        for (int j = 0; j < n - separated; ++j) {
          a += s.corrections(j);
          b += s.corrections(j) * s.corrections(j);
        }
        first_moments.push_back(a / n);
        second_moments.push_back(b / n);
      }
      const MeanError f = mean_error(first_moments);
      const MeanError g = mean_error(second_moments);
      push("dm1_without_separated", f.mean, f.error, first(th_total), std::nullopt);
      push("dm2_without_separated", g.mean, g.error, second(th_total), std::nullopt);
    }
    push("largest_eigenvalue", top.mean, top.error, top_theory, std::nullopt);
    push("largest_correction", top_corr.mean, top_corr.error, corr_theory, std::nullopt);
    if (!separation_ratio.empty()) {
      const MeanError sep = mean_error(separation_ratio);
      push("emerging_separation_ratio", sep.mean, sep.error, std::nullopt, std::nullopt);
    }
  }

  // Bulk eigenvalue density.
  double lambda_plus = 0.0;
  if (cfg.experiment == ExperimentKind::woe_emerging) {
    lambda_plus = mp_edges(kappa, cfg.variance).upper;
  } else if (cfg.experiment == ExperimentKind::cwoe_one_block) {
    lambda_plus = mp_edges(kappa, cfg.variance * (1.0 - c)).upper;
  } else {
    for (double v : bulk_values) lambda_plus = std::max(lambda_plus, v);
  }
  const auto bulk_range = cfg.histogram.bulk_range.value_or(default_bulk_range(lambda_plus));
  const DensityHistogram bulk_hist = histogram(bulk_values, bins, bulk_range, std::min(kappa, 1.0));
  std::vector<double> bulk_theory;
  {
    const auto x = centers(bulk_hist);
    if (cfg.experiment == ExperimentKind::woe_emerging) {
      for (double l : x) bulk_theory.push_back(mp_density(l, kappa, cfg.variance));
    } else if (cfg.experiment == ExperimentKind::cwoe_one_block) {
      for (double l : x) bulk_theory.push_back(mp_density(l, kappa, cfg.variance * (1.0 - c)));
    } else {
      const std::vector<double> spectrum(xi->spectrum.data(), xi->spectrum.data() + xi->spectrum.size());
      ResolventQuery q;
      q.xi_spectrum = spectrum;
      q.kappa = kappa;
      q.variance = cfg.variance;
      q.epsilon = default_broadening(spectrum, kappa, cfg.variance);
      bulk_theory = cwoe_density_grid(x, q, true);
      detail["resolvent_epsilon"] = q.epsilon;
    }
  }
  write_file(cfg.output_dir + "/density_bulk" + suffix, histogram_csv(bulk_hist, bulk_theory));
  files.push_back("density_bulk" + suffix);
  detail["bulk"] = {{"underflow", bulk_hist.underflow}, {"overflow", bulk_hist.overflow},
                    {"normalization", bulk_hist.normalization}};

  // Nonzero-eigenvalue corrections.
  const auto corr_range = cfg.histogram.corrections_range.value_or(spread_range(correction_values));
  const DensityHistogram corr_hist = histogram(correction_values, bins, corr_range, std::min(kappa, 1.0));
  std::vector<double> corr_theory;
  if (correction_ansatz && correction_ansatz->s != 0.0) {
    for (double x : centers(corr_hist)) {
      try {
        corr_theory.push_back(ansatz_density(x, *correction_ansatz, kappa));
      } catch (const std::domain_error&) {
        corr_theory.push_back(std::nan(""));
      }
    }
  }
  write_file(cfg.output_dir + "/density_corrections" + suffix, histogram_csv(corr_hist, corr_theory));
  files.push_back("density_corrections" + suffix);
  detail["corrections"] = {{"underflow", corr_hist.underflow}, {"overflow", corr_hist.overflow},
                           {"normalization", corr_hist.normalization}};

  // Emerging spectrum.
  if (emerging_count > 0) {
    const auto em_range = cfg.histogram.emerging_range.value_or(spread_range(emerging_values));
    const DensityHistogram em_hist = histogram(emerging_values, bins, em_range, 1.0 - kappa);
    write_file(cfg.output_dir + "/density_emerging" + suffix, histogram_csv(em_hist));
    files.push_back("density_emerging" + suffix);
    detail["emerging"] = {{"underflow", em_hist.underflow}, {"overflow", em_hist.overflow},
                          {"normalization", em_hist.normalization}};
  }

  // Marginals of the separated eigenvalues.
  if (cfg.experiment == ExperimentKind::cwoe_one_block || cfg.experiment == ExperimentKind::cwoe_blocks) {
    const int marginal_bins = std::max(1, std::min(bins, 20));
    auto marginal = [&](const std::string& name, const std::vector<double>& v) {
      if (v.empty()) return;
      const DensityHistogram h = histogram(v, marginal_bins, spread_range(v), 1.0);
      write_file(cfg.output_dir + "/" + name + suffix, histogram_csv(h));
      files.push_back(name + suffix);
    };
    marginal("density_separated", largest);
    marginal("density_separated_corrections", largest_correction);
    marginal("density_separated_emerging", lowest_emerging);
  }
}

// ---------------------------------------------------------------------------
// Portfolio
// ---------------------------------------------------------------------------

std::string portfolio_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "method,T,q,mean_ratio,stderr,homogeneous_ratio\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.horizon << ',' << format_number(r.exponent) << ','
        << format_number(r.mean_ratio) << ','
        << (r.mean_ratio ? format_number(r.stderr_ratio) : std::string()) << ','
        << format_number(r.homogeneous_ratio) << '\n';
  }
  return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------

ConfigError::ConfigError(std::vector<Diagnostic> diagnostics)
    : std::invalid_argument([&] {
        std::string msg = "invalid config";
        for (const auto& d : diagnostics) {
          if (d.severity == Severity::error) msg += "; " + d.field + ": " + d.message;
        }
        return msg;
      }()),
      diagnostics_(std::move(diagnostics)) {}

std::vector<Diagnostic> validate(const ExperimentConfig& cfg) {
  std::vector<Diagnostic> out;
  auto error = [&](const std::string& f, const std::string& m) { out.push_back({Severity::error, f, m}); };
  auto warn = [&](const std::string& f, const std::string& m) { out.push_back({Severity::warning, f, m}); };

  if (!std::isfinite(cfg.exponent) || cfg.exponent < 1.0) error("exponent", "exponent below 1");
  if (cfg.realizations < 1) error("realizations", "realizations must be at least 1");
  if (cfg.workers < 1) error("workers", "workers must be at least 1");
  if (!(cfg.variance > 0.0) || !std::isfinite(cfg.variance)) error("variance", "variance must be positive");
  if (cfg.horizons.empty()) error("horizons", "at least one horizon is required");
  for (int t : cfg.horizons) {
    if (t < 1) error("horizons", "horizon must be at least 1");
    if (cfg.experiment == ExperimentKind::portfolio && t < 2) error("horizons", "portfolio horizons must be at least 2");
  }
  if (cfg.histogram.bins < 1) error("histogram.bins", "bins must be at least 1");
  check_range(out, cfg.histogram.emerging_range, "histogram.emerging_range");
  check_range(out, cfg.histogram.bulk_range, "histogram.bulk_range");
  check_range(out, cfg.histogram.corrections_range, "histogram.corrections_range");

  if (cfg.experiment != ExperimentKind::portfolio && cfg.n_series < 2) {
    error("n_series", "n_series must be at least 2");
  }

  if (is_ensemble(cfg.experiment)) {
    const std::string want = expected_population(cfg.experiment);
    const auto& p = cfg.population;
    if (p.kind != want) {
      error("population.kind",
            to_string(cfg.experiment) + " requires population kind '" + want + "', got '" + p.kind + "'");
    }
    if ((p.kind == "one-block" || p.kind == "banded") && !(p.coeff >= 0.0 && p.coeff < 1.0)) {
      error("population.coeff", "correlation coefficient must lie in [0, 1)");
    }
    if (p.kind == "blocks") {
      if (p.blocks.empty()) error("population.blocks", "at least one block is required");
      int total = 0;
      for (const auto& b : p.blocks) {
        if (b.size < 1) error("population.blocks", "block sizes must be at least 1");
        if (!(b.coeff >= 0.0 && b.coeff < 1.0)) error("population.blocks", "block coefficients must lie in [0, 1)");
        total += b.size;
      }
      if (!p.blocks.empty() && total != cfg.n_series) {
        error("population.blocks", "block sizes sum to " + std::to_string(total) + ", expected n_series = " +
                                       std::to_string(cfg.n_series));
      }
    }
    if (cfg.variance != 1.0 && cfg.compare_moments) {
      warn("variance", "theory columns assume unit variance and are left empty");
    }
  }

  const bool guarded = (is_ensemble(cfg.experiment) && cfg.compare_moments) ||
                       cfg.experiment == ExperimentKind::theory_table;
  if (guarded && cfg.n_series >= 1 && std::isfinite(cfg.exponent)) {
    for (int t : cfg.horizons) {
      if (t < 1) continue;
      const double kappa = static_cast<double>(t) / cfg.n_series;
      for (const auto& w : linear_response_warnings(t, kappa, cfg.exponent - 1.0)) {
        warn("T=" + std::to_string(t), w);
      }
    }
  }

  if (cfg.experiment == ExperimentKind::portfolio) {
    const auto& p = cfg.portfolio;
    if (p.n_assets < 2) error("portfolio.n_assets", "n_assets must be at least 2");
    if (p.block_size < 1 || (p.n_assets >= 1 && p.n_assets % std::max(p.block_size, 1) != 0)) {
      error("portfolio.block_size", "n_assets must be a positive multiple of block_size");
    }
    if (!(p.block_coeff >= 0.0 && p.block_coeff < 1.0)) error("portfolio.block_coeff", "coefficient must lie in [0, 1)");
    if (!(p.vol_min > 0.0 && p.vol_min <= p.vol_max)) error("portfolio.vol_min", "need 0 < vol_min <= vol_max");
    if (cfg.portfolio_exponents.empty()) error("portfolio.exponents", "at least one exponent is required");
    for (double q : cfg.portfolio_exponents) {
      if (!std::isfinite(q) || q < 1.0) error("portfolio.exponents", "exponent below 1");
    }
  }
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

nlohmann::json diagnostics_json(const std::vector<Diagnostic>& diagnostics) {
  json arr = json::array();
  for (const auto& d : diagnostics) {
    arr.push_back({{"severity", d.severity == Severity::error ? "error" : "warning"},
                   {"field", d.field},
                   {"message", d.message}});
  }
  return arr;
}

std::shared_ptr<const PopulationCorrelation> build_population(const PopulationSpec& spec, int n) {
  if (spec.kind == "identity") return std::make_shared<const PopulationCorrelation>(build_identity(n));
  if (spec.kind == "one-block") return std::make_shared<const PopulationCorrelation>(build_one_block(n, spec.coeff));
  if (spec.kind == "banded") return std::make_shared<const PopulationCorrelation>(build_banded(n, spec.coeff));
  if (spec.kind == "blocks") {
    auto xi = build_block_diagonal(spec.blocks);
    if (xi.dimension() != n) throw std::invalid_argument("block sizes do not sum to n_series");
    return std::make_shared<const PopulationCorrelation>(std::move(xi));
  }
  throw std::invalid_argument("unknown population kind '" + spec.kind + "'");
}

std::vector<TheoryRow> theory_table(const ExperimentConfig& cfg) {
  const double alpha = cfg.alpha();
  const int n = cfg.n_series;
  const double c = cfg.population.kind == "one-block" ? cfg.population.coeff : 0.0;
  std::vector<TheoryRow> rows;
  for (int t : cfg.horizons) {
    const double kappa = static_cast<double>(t) / n;
    auto add = [&](const std::string& q, double v, double coeff = 0.0) {
      rows.push_back({q, t, n, kappa, coeff, alpha, v});
    };
    const auto edges = mp_edges(kappa);
    add("mp_lambda_minus", edges.lower);
    add("mp_lambda_plus", edges.upper);
    add("mp_zero_mass", mp_zero_mass(kappa));
    const double dm1 = delta_m1_exact(t, alpha);
    const double dm2 = delta_m2_exact(t, n, alpha);
    const MomentPair asym = delta_m_asymptotic(t, kappa, alpha);
    add("delta_m1_exact", dm1);
    add("delta_m2_exact", dm2);
    add("delta_m1_asymptotic", asym.first);
    add("delta_m2_asymptotic", asym.second);
    const AnsatzParams pa = ansatz_asymptotic(t, alpha);
    add("ansatz_s_asymptotic", pa.s);
    add("ansatz_r_asymptotic", pa.r);
    if (kappa >= 1.0) {
      try {
        const AnsatzParams pe = ansatz_invert({dm1, dm2}, kappa);
        add("ansatz_s_exact", pe.s);
        add("ansatz_r_exact", pe.r);
      } catch (const std::domain_error&) {
      }
    } else {
      const MomentPair bulk = bulk_moment_extrapolation(dm1, dm2, pa.s, kappa);
      const MomentPair em = emerging_moments(pa.s, kappa);
      add("bulk_dm1_extrapolated", bulk.first);
      add("bulk_dm2_extrapolated", bulk.second);
      add("emerging_dm1", em.first);
      add("emerging_dm2", em.second);
    }
    if (c > 0.0) {
      const MomentPair ob = oneblock_delta_moments(t, kappa, c, alpha);
      add("oneblock_dm1", ob.first, c);
      add("oneblock_dm2", ob.second, c);
      try {
        const OneBlockAnsatz a = oneblock_ansatz(ob.first, ob.second, c, kappa);
        add("oneblock_s", a.params.s, c);
        add("oneblock_r", a.params.r, c);
        add("oneblock_bulk_dm1", a.bulk.first, c);
        add("oneblock_bulk_dm2", a.bulk.second, c);
      } catch (const std::domain_error&) {
      }
      const auto sep = oneblock_density(0.0, n, kappa, c).separated_position;
      if (sep) {
        add("oneblock_separated_position", *sep, c);
        add("largest_correction_estimate", largest_correction_estimate(*sep, alpha), c);
      }
    }
  }
  return rows;
}

std::string theory_csv(const std::vector<TheoryRow>& rows) {
  std::ostringstream out;
  out << "quantity,T,N,kappa,c,alpha,value\n";
  for (const auto& r : rows) {
    out << r.quantity << ',' << r.horizon << ',' << r.n_series << ',' << format_number(r.kappa) << ','
        << format_number(r.coeff) << ',' << format_number(r.alpha) << ',' << format_number(r.value) << '\n';
  }
  return out.str();
}

RunSummary run(const ExperimentConfig& cfg) {
  auto diagnostics = validate(cfg);
  if (has_errors(diagnostics)) throw ConfigError(std::move(diagnostics));
  const auto started = std::chrono::steady_clock::now();
  std::filesystem::create_directories(cfg.output_dir);

  RunSummary summary;
  json details = json::object();

  if (is_ensemble(cfg.experiment)) {
    const auto xi = build_population(cfg.population, cfg.n_series);
    EnsembleOutput out;
    for (int t : cfg.horizons) run_ensemble_horizon(cfg, t, xi, out, summary.files);
    write_file(cfg.output_dir + "/moments.csv", moments_csv(out.moments));
    write_file(cfg.output_dir + "/moments.json", out.moments_report.dump(2) + "\n");
    summary.files.push_back("moments.csv");
    summary.files.push_back("moments.json");
    details = out.details;
  } else if (cfg.experiment == ExperimentKind::portfolio) {
    PortfolioModelSpec spec = cfg.portfolio;
    const PortfolioModel model = make_portfolio_model(spec);
    SweepOptions opt;
    opt.horizons = cfg.horizons;
    opt.exponents = cfg.portfolio_exponents;
    opt.realizations = cfg.realizations;
    opt.master_seed = cfg.master_seed;
    opt.workers = cfg.workers;
    const auto rows = run_sweep(model, opt);
    write_file(cfg.output_dir + "/portfolio.csv", portfolio_csv(rows));
    summary.files.push_back("portfolio.csv");
    json sweep = json::array();
    for (const auto& r : rows) {
      sweep.push_back({{"method", r.method}, {"T", r.horizon}, {"q", r.exponent},
                       {"valid_realizations", r.valid_realizations}, {"realizations", r.realizations}});
    }
    std::vector<double> vols(model.volatilities.data(), model.volatilities.data() + model.volatilities.size());
    details = {{"volatilities", vols},
               {"minimal_variance", minimal_variance(model)},
               {"homogeneous_ratio", homogeneous_ratio(model)},
               {"sweep", sweep}};
  } else {
    write_file(cfg.output_dir + "/theory.csv", theory_csv(theory_table(cfg)));
    summary.files.push_back("theory.csv");
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  summary.files.push_back("run.json");
  summary.provenance = {{"config", to_json(cfg)},
                        {"master_seed", cfg.master_seed},
                        {"version", kVersion},
                        {"compiler", __VERSION__},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." + std::to_string(EIGEN_MINOR_VERSION)},
                        {"gaussian_sampler", "mt19937_64 53-bit uniforms + Box-Muller"},
                        {"wall_time_seconds", wall},
                        {"files", summary.files},
                        {"diagnostics", diagnostics_json(diagnostics)},
                        {"details", details}};
  write_file(cfg.output_dir + "/run.json", summary.provenance.dump(2) + "\n");
  return summary;
}

}  // namespace emspec
