#include "emspec/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace emspec {

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::string format_number(const std::optional<double>& x) { return x ? format_number(*x) : std::string(); }

std::string histogram_csv(const DensityHistogram& h, std::span<const double> theory) {
  if (!theory.empty() && theory.size() != h.bins()) {
    throw std::invalid_argument("theory column must have one value per bin");
  }
  std::ostringstream out;
  out << "bin_lo,bin_hi,density" << (theory.empty() ? "" : ",theory") << '\n';
  for (std::size_t b = 0; b < h.bins(); ++b) {
    out << format_number(h.bin_edges[b]) << ',' << format_number(h.bin_edges[b + 1]) << ','
        << format_number(h.density[b]);
    if (!theory.empty()) out << ',' << format_number(theory[b]);
    out << '\n';
  }
  return out.str();
}

nlohmann::json moments_json(const MomentSet& m) {
  auto part = [](const MomentPair& v, const MomentPair& e) {
    return nlohmann::json{{"first", v.first}, {"second", v.second}, {"first_stderr", e.first},
                          {"second_stderr", e.second}};
  };
  return {{"realizations", m.realizations},
          {"total", part(m.total, m.total_error)},
          {"emerging", part(m.emerging, m.emerging_error)},
          {"bulk", part(m.bulk, m.bulk_error)}};
}

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace emspec
