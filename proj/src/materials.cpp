#include "ccbox/materials.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "ccbox/error.hpp"

#ifndef CCBOX_DATA_DIR
#define CCBOX_DATA_DIR "data"
#endif

namespace ccbox {

namespace {

constexpr std::string_view kHeader = "energy_keV,mu_pe_per_mm,mu_compton_per_mm";
constexpr double kRequiredMinKeV = 10.0;
constexpr double kRequiredMaxKeV = 3500.0;

double parse_double(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  const auto *first = field.data();
  const auto *last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParameterError("material table line " + std::to_string(line_no) + ": bad number '" + std::string(field) +
                         "'");
  }
  return value;
}

}  // namespace

MaterialTable MaterialTable::parse_csv(std::string_view text, MaterialId id) {
  MaterialTable table;
  table.id = id;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != kHeader) throw ParameterError("material table: unexpected header '" + std::string(line) + "'");
      continue;
    }
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos) {
      throw ParameterError("material table line " + std::to_string(line_no) + ": expected 3 fields");
    }
    table.energy_kev.push_back(parse_double(line.substr(0, c1), line_no));
    table.mu_photoelectric.push_back(parse_double(line.substr(c1 + 1, c2 - c1 - 1), line_no));
    table.mu_compton.push_back(parse_double(line.substr(c2 + 1), line_no));
  }
  table.validate();
  return table;
}

MaterialTable MaterialTable::load_csv(const std::filesystem::path &path, MaterialId id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open material table " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), id);
}

void MaterialTable::validate() const {
  const std::size_t n = energy_kev.size();
  if (n < 2 || mu_photoelectric.size() != n || mu_compton.size() != n) {
    throw ParameterError("material table: need at least two complete rows");
  }
  if (energy_kev.front() > kRequiredMinKeV || energy_kev.back() < kRequiredMaxKeV) {
    throw ParameterError("material table: grid must cover [10 keV, 3500 keV]");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !(energy_kev[i] > energy_kev[i - 1])) {
      throw ParameterError("material table: energies must be strictly increasing");
    }
    if (!(mu_photoelectric[i] > 0.0) || !(mu_compton[i] > 0.0)) {
      throw ParameterError("material table: coefficients must be positive");
    }
  }
}

Attenuation lookup_attenuation(const MaterialTable &table, double energy_kev) {
  const auto &grid = table.energy_kev;
  if (!(energy_kev >= grid.front() && energy_kev <= grid.back())) {
    throw OutOfRangeError("attenuation lookup at " + std::to_string(energy_kev) + " keV outside table grid");
  }
  const auto it = std::lower_bound(grid.begin(), grid.end(), energy_kev);
  const auto i = static_cast<std::size_t>(it - grid.begin());
  if (*it == energy_kev) return {table.mu_photoelectric[i], table.mu_compton[i]};

  const std::size_t lo = i - 1;
  const double t = std::log(energy_kev / grid[lo]) / std::log(grid[i] / grid[lo]);
  auto interp = [&](const std::vector<double> &mu) { return mu[lo] * std::pow(mu[i] / mu[lo], t); };
  return {interp(table.mu_photoelectric), interp(table.mu_compton)};
}

MaterialLibrary MaterialLibrary::load(const std::filesystem::path &dir) {
  return {MaterialTable::load_csv(dir / "gagg.csv", MaterialId::gagg),
          MaterialTable::load_csv(dir / "bgo.csv", MaterialId::bgo)};
}

std::filesystem::path MaterialLibrary::default_dir() { return CCBOX_DATA_DIR; }

}  // namespace ccbox
