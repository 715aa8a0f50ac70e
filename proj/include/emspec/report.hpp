#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "emspec/spectral.hpp"

namespace emspec {

/// 17 significant digits in lowercase scientific notation ("%.16e").
std::string format_number(double x);
/// Empty string for a missing value.
std::string format_number(const std::optional<double>& x);

/// Columns: bin_lo,bin_hi,density[,theory]. `theory`, when given, holds one
/// value per bin (the theory curve at the bin center).
std::string histogram_csv(const DensityHistogram& h, std::span<const double> theory = {});

/// Moment report with standard errors:
/// {"realizations": R, "total": {"first", "second", "first_stderr", "second_stderr"},
///  "emerging": {...}, "bulk": {...}}
nlohmann::json moments_json(const MomentSet& m);

/// Writes text to path, creating parent directories. Throws std::runtime_error on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace emspec
