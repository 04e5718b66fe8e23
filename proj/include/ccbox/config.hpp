#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "ccbox/events.hpp"
#include "ccbox/geometry.hpp"
#include "ccbox/transport.hpp"

namespace ccbox {

/// Diffuse background sources. Fluxes are photons / cm^2 / s over the
/// simulated energy band.
struct BackgroundConfig {
  bool enabled{true};
  double cxb_flux{0.5};
  double cxb_index{-2.88};
  double albedo_flux{1.0};
  double albedo_index{-1.35};

  void validate() const;
};

/// Everything that determines a generated dataset.
struct SimulationConfig {
  std::vector<double> durations_s{1.0, 3.0, 10.0, 30.0, 100.0};
  int runs_per_duration{1000};
  double flux{1.0};
  double photon_index_min{-2.5};
  double photon_index_max{-1.3};
  double e_min_kev{30.0};
  double e_max_kev{3000.0};
  double fov_half_angle_deg{30.0};
  BackgroundConfig background;
  ResolutionModel resolution;
  EventThresholds thresholds;
  double cone_sigma_deg{2.0};
  double truth_sigma_px{2.0};
  double generation_radius_mm{0.0};  // 0: automatic
  std::uint64_t seed{1};
  GeometryParams geometry;

  /// Throws ParameterError naming the offending field.
  void validate() const;
};

void validate(const GeometryParams &params);
void validate(const EventThresholds &thresholds);
void validate(const ResolutionModel &model);

// Unknown keys are rejected; absent keys keep their defaults.
void to_json(nlohmann::json &j, const GeometryParams &p);
void from_json(const nlohmann::json &j, GeometryParams &p);
void to_json(nlohmann::json &j, const BackgroundConfig &b);
void from_json(const nlohmann::json &j, BackgroundConfig &b);
void to_json(nlohmann::json &j, const ResolutionModel &r);
void from_json(const nlohmann::json &j, ResolutionModel &r);
void to_json(nlohmann::json &j, const EventThresholds &t);
void from_json(const nlohmann::json &j, EventThresholds &t);
void to_json(nlohmann::json &j, const SimulationConfig &c);
void from_json(const nlohmann::json &j, SimulationConfig &c);

/// Parse and validate a config file. Throws IoError or ParameterError.
SimulationConfig load_simulation_config(const std::filesystem::path &path);

}  // namespace ccbox
