#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ccbox/events.hpp"
#include "ccbox/geometry.hpp"
#include "ccbox/interaction.hpp"
#include "ccbox/materials.hpp"
#include "ccbox/random.hpp"

namespace ccbox {

enum class SourceKind : std::uint8_t { grb_point = 0, cxb = 1, albedo = 2 };
inline constexpr std::size_t kSourceKindCount = 3;
std::string_view to_string(SourceKind kind);

/// A photon source for one observation.
///
/// `flux` is photons / cm^2 / s through the generation disk over the energy
/// band. For point sources `direction` points from the detector to the
/// source; diffuse sources draw a fresh direction per photon (CXB from the
/// upper hemisphere, albedo from the lower).
struct SourceSpec {
  SourceKind kind{SourceKind::grb_point};
  double flux{1.0};
  double photon_index{-2.0};
  Vec3 direction{0.0, 0.0, 1.0};
  double duration_s{1.0};
  double e_min_kev{30.0};
  double e_max_kev{3000.0};
  double fov_half_angle_deg{30.0};

  void validate() const;
};

struct Photon {
  Vec3 position;   // mm
  Vec3 direction;  // unit, direction of travel
  double energy_kev{0.0};
};

/// Full tracking record of one primary photon.
struct PhotonHistory {
  double initial_energy_kev{0.0};
  Vec3 initial_direction;
  std::vector<Interaction> interactions;
  double escaped_energy_kev{0.0};

  double deposited_kev() const;
};

/// Disk normal to each source direction from which primaries start. Its
/// projected area is the flux-to-count normalization.
struct GenerationDisk {
  Vec3 center;      // detector centre, mm
  double radius_mm{0.0};

  /// Disk enclosing the detector bounding box with the given margin.
  static GenerationDisk enclosing(const DetectorGeometry &geometry, double margin = 0.2);
  double area_cm2() const;
};

/// Sample energy, direction and start point of one primary photon.
Photon generate_primary(const SourceSpec &source, const GenerationDisk &disk, Rng &rng);

/// Photons are followed down to this energy; the remainder is deposited.
inline constexpr double kTrackingCutoffKeV = 10.0;

/// Analog tracking with photoelectric absorption and Klein-Nishina Compton
/// scattering. Every history conserves energy:
/// sum(deposits) + escaped = initial energy.
PhotonHistory transport_photon(const Photon &photon, const DetectorGeometry &geometry,
                               const MaterialLibrary &materials, Rng &rng);

/// Detector response: Gaussian energy smearing with
/// FWHM(E) = r662 * sqrt(662 keV / E) * E, and readout position quantization.
struct ResolutionModel {
  double r662{0.08};

  double sigma_kev(double energy_kev) const;
};

/// Smeared, quantized copy of the history's interactions. Smeared deposits
/// are floored at zero.
std::vector<Interaction> apply_resolution(const PhotonHistory &history, const ResolutionModel &model,
                                          const DetectorGeometry &geometry, Rng &rng);

/// Everything needed to simulate one observation.
struct RunConfig {
  std::vector<SourceSpec> sources;
  ResolutionModel resolution;
  double trigger_kev{30.0};
  double generation_radius_mm{0.0};  // 0: enclosing disk with 20% margin
  std::uint64_t seed{0};
};

/// Result of one simulated observation.
struct RunRecord {
  std::vector<EventRecord> events;
  std::vector<SourceKind> event_origin;  // parallel to events
  Vec3 truth_direction{0.0, 0.0, 1.0};
  double photon_index{0.0};
  double duration_s{0.0};
  double flux{0.0};
  std::uint64_t seed{0};
  bool background{false};
  std::array<std::uint64_t, kSourceKindCount> generated_photons{};
  double generation_area_cm2{0.0};
};

/// Poisson photon counts per source, tracking, resolution and event building.
/// Throws ParameterError with no sources or more than one point source.
/// Events are shuffled across sources. Deterministic in (config, seed).
RunRecord simulate_run(const RunConfig &config, const DetectorGeometry &geometry, const MaterialLibrary &materials);

}  // namespace ccbox
