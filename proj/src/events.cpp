#include "ccbox/events.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccbox/error.hpp"
#include "ccbox/kinematics.hpp"

namespace ccbox {

double EventRecord::total_energy() const {
  double sum = 0.0;
  for (const auto &h : hits) sum += h.energy_kev;
  return sum;
}

FeatureVector EventRecord::features() const {
  FeatureVector f{};
  for (std::size_t s = 0; s < kSegmentCount; ++s) {
    f[4 * s + 0] = hits[s].energy_kev;
    f[4 * s + 1] = hits[s].position.x;
    f[4 * s + 2] = hits[s].position.y;
    f[4 * s + 3] = hits[s].position.z;
  }
  return f;
}

EventRecord EventRecord::from_features(const FeatureVector &f) {
  EventRecord e;
  for (std::size_t s = 0; s < kSegmentCount; ++s) {
    e.hits[s].energy_kev = f[4 * s + 0];
    e.hits[s].position = {f[4 * s + 1], f[4 * s + 2], f[4 * s + 3]};
  }
  return e;
}

NormalizationBounds NormalizationBounds::for_geometry(const DetectorGeometry &geometry, double max_energy_kev) {
  const Box b = geometry.bounding_box();
  NormalizationBounds nb;
  for (std::size_t s = 0; s < kSegmentCount; ++s) {
    nb.min[4 * s] = 0.0;
    nb.max[4 * s] = max_energy_kev;
    for (int a = 0; a < 3; ++a) {
      nb.min[4 * s + 1 + a] = b.lo[a];
      nb.max[4 * s + 1 + a] = b.hi[a];
    }
  }
  nb.validate();
  return nb;
}

void NormalizationBounds::validate() const {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!(min[i] < max[i])) throw ParameterError("normalization bounds: need min < max for every feature");
  }
}

EventRecord build_event(std::span<const Interaction> interactions, double trigger_kev) {
  EventRecord event;
  std::array<double, kSegmentCount> best{};
  double total = 0.0;
  for (const auto &it : interactions) {
    if (!(it.deposit_kev > 0.0)) continue;
    const auto s = static_cast<std::size_t>(it.segment);
    event.hits[s].energy_kev += it.deposit_kev;
    // strict > keeps the earliest interaction on ties
    if (it.deposit_kev > best[s]) {
      best[s] = it.deposit_kev;
      event.hits[s].position = it.position;
    }
    total += it.deposit_kev;
  }
  if (total < trigger_kev || total <= 0.0) {
    throw SubThresholdError("event total deposit " + std::to_string(total) + " keV below trigger");
  }
  return event;
}

FeatureVector normalize_event(const EventRecord &event, const NormalizationBounds &bounds) {
  FeatureVector f = event.features();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    f[i] = std::clamp((f[i] - bounds.min[i]) / (bounds.max[i] - bounds.min[i]), 0.0, 1.0);
  }
  return f;
}

EventRecord denormalize_event(const FeatureVector &normalized, const NormalizationBounds &bounds) {
  FeatureVector f{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    f[i] = bounds.min[i] + normalized[i] * (bounds.max[i] - bounds.min[i]);
  }
  return EventRecord::from_features(f);
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::compton:
      return "compton";
    case EventKind::pinhole:
      return "pinhole";
    case EventKind::rejected:
      return "rejected";
  }
  return "unknown";
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::none:
      return "none";
    case RejectReason::veto:
      return "veto";
    case RejectReason::energy_window:
      return "energy_window";
    case RejectReason::unphysical:
      return "unphysical";
    case RejectReason::no_mode:
      return "no_mode";
  }
  return "unknown";
}

EventClass classify_event(const EventRecord &event, const EventThresholds &t) {
  const double front = event[Segment::front].energy_kev;
  const double rear = event[Segment::rear].energy_kev;
  const double side = event[Segment::side].energy_kev;
  const double bgo = event[Segment::bgo].energy_kev;

  if (bgo > t.veto_kev) return {EventKind::rejected, RejectReason::veto};

  if (front > 0.0 && rear > 0.0) {
    const double total = front + rear;
    if (total < t.compton_min_kev || total > t.compton_max_kev) {
      return {EventKind::rejected, RejectReason::energy_window};
    }
    if (!compton_kinematics_physical(front, rear)) return {EventKind::rejected, RejectReason::unphysical};
    return {EventKind::compton, RejectReason::none};
  }

  if (rear > 0.0 && front == 0.0 && side == 0.0) {
    if (rear < t.pinhole_min_kev || rear > t.pinhole_max_kev) {
      return {EventKind::rejected, RejectReason::energy_window};
    }
    return {EventKind::pinhole, RejectReason::none};
  }

  return {EventKind::rejected, RejectReason::no_mode};
}

}  // namespace ccbox
