#include "ccbox/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string>

#include <fmt/format.h>

#include "ccbox/error.hpp"

namespace ccbox {

namespace {

using nlohmann::json;

void require(bool ok, const char *field, const char *rule) {
  if (!ok) throw ParameterError(fmt::format("config: {} must be {}", field, rule));
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }
bool non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

void reject_unknown(const json &j, const char *section, std::initializer_list<const char *> keys) {
  if (!j.is_object()) throw ParameterError(fmt::format("config: {} must be an object", section));
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto &item : j.items()) {
    if (!known.contains(item.key())) throw ParameterError(fmt::format("config: unknown key '{}' in {}", item.key(), section));
  }
}

template <class T>
void read(const json &j, const char *key, T &out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception &e) {
    throw ParameterError(fmt::format("config: bad value for '{}': {}", key, e.what()));
  }
}

}  // namespace

void validate(const GeometryParams &p) {
  require(p.modules_per_side >= 1, "geometry.modules_per_side", ">= 1");
  require(positive(p.module_size_mm), "geometry.module_size_mm", "positive");
  require(positive(p.front_pixel_pitch_mm), "geometry.front_pixel_pitch_mm", "positive");
  require(positive(p.front_thickness_mm), "geometry.front_thickness_mm", "positive");
  require(positive(p.pinhole_side_mm), "geometry.pinhole_side_mm", "positive");
  require(p.pinhole_side_mm < p.modules_per_side * p.module_size_mm, "geometry.pinhole_side_mm",
          "smaller than the front layer");
  require(p.rear_layers >= 1, "geometry.rear_layers", ">= 1");
  require(positive(p.rear_layer_thickness_mm), "geometry.rear_layer_thickness_mm", "positive");
  require(positive(p.rear_pixel_pitch_mm), "geometry.rear_pixel_pitch_mm", "positive");
  require(non_negative(p.front_to_rear_gap_mm), "geometry.front_to_rear_gap_mm", "non-negative");
  require(positive(p.side_panel_thickness_mm), "geometry.side_panel_thickness_mm", "positive");
  require(positive(p.bgo_thickness_mm), "geometry.bgo_thickness_mm", "positive");
}

void validate(const EventThresholds &t) {
  require(non_negative(t.trigger_kev), "thresholds.trigger_kev", "non-negative");
  require(non_negative(t.veto_kev), "thresholds.veto_kev", "non-negative");
  require(non_negative(t.compton_min_kev) && t.compton_max_kev > t.compton_min_kev, "thresholds.compton window",
          "a non-empty non-negative interval");
  require(non_negative(t.pinhole_min_kev) && t.pinhole_max_kev > t.pinhole_min_kev, "thresholds.pinhole window",
          "a non-empty non-negative interval");
}

void validate(const ResolutionModel &r) { require(non_negative(r.r662), "resolution.r662", "non-negative"); }

void BackgroundConfig::validate() const {
  require(non_negative(cxb_flux), "background.cxb_flux", "non-negative");
  require(non_negative(albedo_flux), "background.albedo_flux", "non-negative");
  require(std::isfinite(cxb_index), "background.cxb_index", "finite");
  require(std::isfinite(albedo_index), "background.albedo_index", "finite");
}

void SimulationConfig::validate() const {
  require(!durations_s.empty(), "durations_s", "non-empty");
  for (double d : durations_s) require(positive(d), "durations_s", "positive");
  require(std::set<double>(durations_s.begin(), durations_s.end()).size() == durations_s.size(), "durations_s",
          "free of duplicates");
  require(runs_per_duration >= 1, "runs_per_duration", ">= 1");
  require(positive(flux), "flux", "positive");
  require(std::isfinite(photon_index_min) && std::isfinite(photon_index_max) && photon_index_min <= photon_index_max,
          "photon_index_range", "an ordered finite interval");
  require(positive(e_min_kev) && e_max_kev > e_min_kev, "energy band", "a positive increasing interval");
  require(positive(fov_half_angle_deg) && fov_half_angle_deg <= 90.0, "fov_half_angle_deg", "in (0, 90]");
  require(positive(cone_sigma_deg), "cone_sigma_deg", "positive");
  require(non_negative(truth_sigma_px), "truth_sigma_px", "non-negative");
  require(non_negative(generation_radius_mm), "generation_radius_mm", "non-negative");
  background.validate();
  ccbox::validate(resolution);
  ccbox::validate(thresholds);
  ccbox::validate(geometry);
}

void to_json(json &j, const GeometryParams &p) {
  j = json{{"modules_per_side", p.modules_per_side},
           {"module_size_mm", p.module_size_mm},
           {"front_pixel_pitch_mm", p.front_pixel_pitch_mm},
           {"front_thickness_mm", p.front_thickness_mm},
           {"pinhole_side_mm", p.pinhole_side_mm},
           {"rear_layers", p.rear_layers},
           {"rear_layer_thickness_mm", p.rear_layer_thickness_mm},
           {"rear_pixel_pitch_mm", p.rear_pixel_pitch_mm},
           {"front_to_rear_gap_mm", p.front_to_rear_gap_mm},
           {"side_panel_thickness_mm", p.side_panel_thickness_mm},
           {"bgo_thickness_mm", p.bgo_thickness_mm}};
}

void from_json(const json &j, GeometryParams &p) {
  reject_unknown(j, "geometry",
                 {"modules_per_side", "module_size_mm", "front_pixel_pitch_mm", "front_thickness_mm", "pinhole_side_mm",
                  "rear_layers", "rear_layer_thickness_mm", "rear_pixel_pitch_mm", "front_to_rear_gap_mm",
                  "side_panel_thickness_mm", "bgo_thickness_mm"});
  read(j, "modules_per_side", p.modules_per_side);
  read(j, "module_size_mm", p.module_size_mm);
  read(j, "front_pixel_pitch_mm", p.front_pixel_pitch_mm);
  read(j, "front_thickness_mm", p.front_thickness_mm);
  read(j, "pinhole_side_mm", p.pinhole_side_mm);
  read(j, "rear_layers", p.rear_layers);
  read(j, "rear_layer_thickness_mm", p.rear_layer_thickness_mm);
  read(j, "rear_pixel_pitch_mm", p.rear_pixel_pitch_mm);
  read(j, "front_to_rear_gap_mm", p.front_to_rear_gap_mm);
  read(j, "side_panel_thickness_mm", p.side_panel_thickness_mm);
  read(j, "bgo_thickness_mm", p.bgo_thickness_mm);
}

void to_json(json &j, const BackgroundConfig &b) {
  j = json{{"enabled", b.enabled},
           {"cxb_flux", b.cxb_flux},
           {"cxb_index", b.cxb_index},
           {"albedo_flux", b.albedo_flux},
           {"albedo_index", b.albedo_index}};
}

void from_json(const json &j, BackgroundConfig &b) {
  reject_unknown(j, "background", {"enabled", "cxb_flux", "cxb_index", "albedo_flux", "albedo_index"});
  read(j, "enabled", b.enabled);
  read(j, "cxb_flux", b.cxb_flux);
  read(j, "cxb_index", b.cxb_index);
  read(j, "albedo_flux", b.albedo_flux);
  read(j, "albedo_index", b.albedo_index);
}

void to_json(json &j, const ResolutionModel &r) { j = json{{"r662", r.r662}}; }

void from_json(const json &j, ResolutionModel &r) {
  reject_unknown(j, "resolution", {"r662"});
  read(j, "r662", r.r662);
}

void to_json(json &j, const EventThresholds &t) {
  j = json{{"trigger_kev", t.trigger_kev},         {"veto_kev", t.veto_kev},
           {"compton_min_kev", t.compton_min_kev}, {"compton_max_kev", t.compton_max_kev},
           {"pinhole_min_kev", t.pinhole_min_kev}, {"pinhole_max_kev", t.pinhole_max_kev}};
}

void from_json(const json &j, EventThresholds &t) {
  reject_unknown(j, "thresholds",
                 {"trigger_kev", "veto_kev", "compton_min_kev", "compton_max_kev", "pinhole_min_kev", "pinhole_max_kev"});
  read(j, "trigger_kev", t.trigger_kev);
  read(j, "veto_kev", t.veto_kev);
  read(j, "compton_min_kev", t.compton_min_kev);
  read(j, "compton_max_kev", t.compton_max_kev);
  read(j, "pinhole_min_kev", t.pinhole_min_kev);
  read(j, "pinhole_max_kev", t.pinhole_max_kev);
}

void to_json(json &j, const SimulationConfig &c) {
  j = json{{"durations_s", c.durations_s},
           {"runs_per_duration", c.runs_per_duration},
           {"flux", c.flux},
           {"photon_index_range", {c.photon_index_min, c.photon_index_max}},
           {"energy_band_kev", {c.e_min_kev, c.e_max_kev}},
           {"fov_half_angle_deg", c.fov_half_angle_deg},
           {"background", c.background},
           {"resolution", c.resolution},
           {"thresholds", c.thresholds},
           {"cone_sigma_deg", c.cone_sigma_deg},
           {"truth_sigma_px", c.truth_sigma_px},
           {"generation_radius_mm", c.generation_radius_mm},
           {"seed", c.seed},
           {"geometry", c.geometry}};
}

void from_json(const json &j, SimulationConfig &c) {
  reject_unknown(j, "config",
                 {"durations_s", "runs_per_duration", "flux", "photon_index_range", "energy_band_kev",
                  "fov_half_angle_deg", "background", "resolution", "thresholds", "cone_sigma_deg", "truth_sigma_px",
                  "generation_radius_mm", "seed", "geometry"});
  read(j, "durations_s", c.durations_s);
  read(j, "runs_per_duration", c.runs_per_duration);
  read(j, "flux", c.flux);
  if (j.contains("photon_index_range")) {
    std::vector<double> r;
    read(j, "photon_index_range", r);
    require(r.size() == 2, "photon_index_range", "a [min, max] pair");
    c.photon_index_min = r[0];
    c.photon_index_max = r[1];
  }
  if (j.contains("energy_band_kev")) {
    std::vector<double> r;
    read(j, "energy_band_kev", r);
    require(r.size() == 2, "energy_band_kev", "a [min, max] pair");
    c.e_min_kev = r[0];
    c.e_max_kev = r[1];
  }
  read(j, "fov_half_angle_deg", c.fov_half_angle_deg);
  read(j, "background", c.background);
  read(j, "resolution", c.resolution);
  read(j, "thresholds", c.thresholds);
  read(j, "cone_sigma_deg", c.cone_sigma_deg);
  read(j, "truth_sigma_px", c.truth_sigma_px);
  read(j, "generation_radius_mm", c.generation_radius_mm);
  read(j, "seed", c.seed);
  read(j, "geometry", c.geometry);
}

SimulationConfig load_simulation_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config {}", path.string()));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error &e) {
    throw ParameterError(fmt::format("config {}: {}", path.string(), e.what()));
  }
  SimulationConfig c = j.get<SimulationConfig>();
  c.validate();
  return c;
}

}  // namespace ccbox
