#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "ccbox/geometry.hpp"

namespace ccbox {

/// Linear attenuation coefficients at one energy, 1/mm.
struct Attenuation {
  double photoelectric{0.0};
  double compton{0.0};
  double total() const { return photoelectric + compton; }
};

/// Tabulated photoelectric and Compton attenuation for one material.
/// Energies in keV, strictly increasing; coefficients in 1/mm, positive.
struct MaterialTable {
  MaterialId id{MaterialId::gagg};
  std::vector<double> energy_kev;
  std::vector<double> mu_photoelectric;
  std::vector<double> mu_compton;

  /// Parse and validate CSV text with header
  /// `energy_keV,mu_pe_per_mm,mu_compton_per_mm`.
  static MaterialTable parse_csv(std::string_view text, MaterialId id);
  static MaterialTable load_csv(const std::filesystem::path &path, MaterialId id);

  /// Throws ParameterError unless the table covers [10 keV, 3.5 MeV] with a
  /// strictly increasing grid and positive coefficients.
  void validate() const;
};

/// Log-log interpolation between bracketing grid points; exact at grid
/// points. Throws OutOfRangeError outside the grid.
Attenuation lookup_attenuation(const MaterialTable &table, double energy_kev);

/// The two materials used by the detector model.
struct MaterialLibrary {
  MaterialTable gagg;
  MaterialTable bgo;

  const MaterialTable &operator[](MaterialId id) const { return id == MaterialId::gagg ? gagg : bgo; }

  /// Loads gagg.csv and bgo.csv from `dir`.
  static MaterialLibrary load(const std::filesystem::path &dir);
  /// Directory of the bundled tables.
  static std::filesystem::path default_dir();
};

}  // namespace ccbox
