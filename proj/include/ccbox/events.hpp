#pragma once

#include <array>
#include <span>
#include <string_view>

#include "ccbox/geometry.hpp"
#include "ccbox/interaction.hpp"

namespace ccbox {

/// Number of raw features per event: (E, x, y, z) for each segment class in
/// the order front, rear, side, bgo.
inline constexpr std::size_t kFeatureCount = 4 * kSegmentCount;

using FeatureVector = std::array<double, kFeatureCount>;

/// Aggregated deposit of one segment class. Absent segments are all-zero.
struct SegmentHit {
  double energy_kev{0.0};
  Vec3 position{};

  friend bool operator==(const SegmentHit &, const SegmentHit &) = default;
};

/// One detected event: per segment class, the summed energy and the position
/// of the largest single deposit.
struct EventRecord {
  std::array<SegmentHit, kSegmentCount> hits{};

  SegmentHit &operator[](Segment s) { return hits[static_cast<std::size_t>(s)]; }
  const SegmentHit &operator[](Segment s) const { return hits[static_cast<std::size_t>(s)]; }

  double total_energy() const;
  FeatureVector features() const;
  static EventRecord from_features(const FeatureVector &f);

  friend bool operator==(const EventRecord &, const EventRecord &) = default;
};

/// Per-feature affine bounds used to map raw features onto [0, 1].
struct NormalizationBounds {
  FeatureVector min{};
  FeatureVector max{};

  /// Energies on [0, max_energy_kev]; positions on the detector bounding box.
  static NormalizationBounds for_geometry(const DetectorGeometry &geometry, double max_energy_kev = 3000.0);
  void validate() const;
};

/// Sum deposits per segment class and keep the position of the largest
/// deposit (first in tracking order on ties). Throws SubThresholdError when
/// the total deposit is below `trigger_kev`.
EventRecord build_event(std::span<const Interaction> interactions, double trigger_kev = 30.0);

/// (v - min) / (max - min), clamped to [0, 1].
FeatureVector normalize_event(const EventRecord &event, const NormalizationBounds &bounds);
EventRecord denormalize_event(const FeatureVector &normalized, const NormalizationBounds &bounds);

/// Selection thresholds shared by classification and reconstruction.
struct EventThresholds {
  double trigger_kev{30.0};
  double veto_kev{50.0};
  double compton_min_kev{30.0};
  double compton_max_kev{3000.0};
  double pinhole_min_kev{30.0};
  double pinhole_max_kev{200.0};
};

enum class EventKind { compton, pinhole, rejected };
enum class RejectReason { none, veto, energy_window, unphysical, no_mode };

struct EventClass {
  EventKind kind{EventKind::rejected};
  RejectReason reason{RejectReason::none};

  bool accepted() const { return kind != EventKind::rejected; }
  friend bool operator==(const EventClass &, const EventClass &) = default;
};

std::string_view to_string(EventKind kind);
std::string_view to_string(RejectReason reason);

/// Total classification:
///  - BGO deposit above the veto threshold rejects the event;
///  - front and rear hits with physical kinematics and a total inside the
///    Compton window make a Compton candidate;
///  - a rear-only hit inside the pinhole band makes a pinhole candidate;
///  - anything else is rejected.
EventClass classify_event(const EventRecord &event, const EventThresholds &thresholds);

}  // namespace ccbox
