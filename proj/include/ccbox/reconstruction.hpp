#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "ccbox/constants.hpp"
#include "ccbox/events.hpp"
#include "ccbox/geometry.hpp"
#include "ccbox/skymap.hpp"

namespace ccbox {

/// Compton scattering angle (rad) from scatter deposit e1 and absorber
/// deposit e2 (keV). Throws UnphysicalEventError when |cos theta| > 1 beyond
/// kCosineSlack, or for e1 < 0, e2 <= 0.
double scattering_angle(double e1_kev, double e2_kev);

/// Cone of possible source directions for one Compton event, far-field.
struct ConeParams {
  Vec3 axis;          // unit, from absorber towards scatterer
  double half_angle;  // rad
  double width;       // Gaussian ring sigma, rad
};

/// Minimum scatter-absorber separation that still defines a cone axis, mm.
inline constexpr double kMinConeBaselineMm = 0.5;

/// Throws DegenerateAxisError for separations below kMinConeBaselineMm and
/// propagates UnphysicalEventError.
ConeParams cone_from_event(const EventRecord &event, double width_rad);

/// Add exp(-(delta - theta)^2 / (2 sigma^2)) to every valid pixel whose
/// angular distance delta from the axis is within 3 sigma of theta.
void backproject_cone(SkyAccumulator &map, const ConeParams &cone);

/// Add 1 to the pixel containing the ray from the rear hit through the
/// pinhole centre.
void backproject_pinhole(SkyAccumulator &map, const EventRecord &event, const DetectorGeometry &geometry);

enum class ReconMode { compton, pinhole, both };
ReconMode parse_recon_mode(std::string_view text);
std::string_view to_string(ReconMode mode);

struct ReconstructionConfig {
  EventThresholds thresholds;
  double cone_width_rad{2.0 * kDegToRad};
  /// Worker count for cone accumulation. 1 is the strict sequential path
  /// and is bit-reproducible; more workers sum per-worker partial maps.
  int jobs{1};
};

struct ReconstructionResult {
  SkyMap compton;
  SkyMap pinhole;
  std::size_t compton_events{0};
  std::size_t pinhole_events{0};
};

/// Classify events, back-project each candidate into its map and normalize
/// each map by its maximum. Modes not requested yield all-zero maps.
ReconstructionResult reconstruct(std::span<const EventRecord> events, ReconMode mode,
                                 const ReconstructionConfig &config, const DetectorGeometry &geometry);

/// Sum of the two (already normalized) maps, renormalized to a peak of 1.
SkyMap combine_maps(const SkyMap &compton, const SkyMap &pinhole);

/// Angular Resolution Measure: angle(source, cone axis) - kinematic angle.
double arm(const EventRecord &event, const Vec3 &source_direction);

/// Drop Compton candidates with |ARM| > window (or whose cone cannot be
/// built); every other event passes unchanged.
std::vector<EventRecord> arm_filter(std::span<const EventRecord> events, const Vec3 &source_direction,
                                    double window_rad, const EventThresholds &thresholds);

}  // namespace ccbox
