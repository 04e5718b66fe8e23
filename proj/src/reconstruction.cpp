#include "ccbox/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "ccbox/error.hpp"
#include "ccbox/kinematics.hpp"

namespace ccbox {

double scattering_angle(double e1_kev, double e2_kev) {
  if (!(e1_kev >= 0.0) || !(e2_kev > 0.0)) {
    throw UnphysicalEventError("scattering angle: need E1 >= 0 and E2 > 0");
  }
  const double c = compton_cosine(e1_kev, e2_kev);
  if (!std::isfinite(c) || std::abs(c) > 1.0 + kCosineSlack) {
    throw UnphysicalEventError("scattering angle: cos theta = " + std::to_string(c) + " outside [-1, 1]");
  }
  return std::acos(std::clamp(c, -1.0, 1.0));
}

ConeParams cone_from_event(const EventRecord &event, double width_rad) {
  const Vec3 baseline = event[Segment::front].position - event[Segment::rear].position;
  const double length = norm(baseline);
  if (!(length >= kMinConeBaselineMm)) {
    throw DegenerateAxisError("cone axis: scatter and absorber " + std::to_string(length) + " mm apart");
  }
  const double theta = scattering_angle(event[Segment::front].energy_kev, event[Segment::rear].energy_kev);
  return {baseline * (1.0 / length), theta, width_rad};
}

void backproject_cone(SkyAccumulator &map, const ConeParams &cone) {
  const PixelTable &table = valid_pixel_table();
  const double reach = 3.0 * cone.width;
  const double cos_lo = std::cos(std::min(kPi, cone.half_angle + reach));
  const double cos_hi = std::cos(std::max(0.0, cone.half_angle - reach));
  const double inv_two_var = 1.0 / (2.0 * cone.width * cone.width);
  auto data = map.data();
  for (std::size_t k = 0; k < table.index.size(); ++k) {
    const double c = dot(table.direction[k], cone.axis);
    // cheap band test before the arccos; the exact test follows
    if (c < cos_lo - 1e-12 || c > cos_hi + 1e-12) continue;
    const double delta = std::acos(std::clamp(c, -1.0, 1.0));
    const double diff = delta - cone.half_angle;
    if (std::abs(diff) > reach) continue;
    data[table.index[k]] += std::exp(-diff * diff * inv_two_var);
  }
}

void backproject_pinhole(SkyAccumulator &map, const EventRecord &event, const DetectorGeometry &geometry) {
  const Vec3 ray = geometry.pinhole_center() - event[Segment::rear].position;
  const double length = norm(ray);
  if (!(length > 0.0)) return;
  if (auto px = direction_to_pixel(ray * (1.0 / length))) map.at(px->i, px->j) += 1.0;
}

ReconMode parse_recon_mode(std::string_view text) {
  if (text == "compton") return ReconMode::compton;
  if (text == "pinhole") return ReconMode::pinhole;
  if (text == "both") return ReconMode::both;
  throw ParameterError("unknown reconstruction mode '" + std::string(text) + "'");
}

std::string_view to_string(ReconMode mode) {
  switch (mode) {
    case ReconMode::compton:
      return "compton";
    case ReconMode::pinhole:
      return "pinhole";
    case ReconMode::both:
      return "both";
  }
  return "unknown";
}

namespace {

void accumulate_cones(SkyAccumulator &acc, std::span<const ConeParams> cones, int jobs) {
  if (cones.empty()) return;
  const std::size_t workers = std::min(static_cast<std::size_t>(std::max(jobs, 1)), cones.size());
  if (workers <= 1) {
    for (const auto &c : cones) backproject_cone(acc, c);
    return;
  }
  // Contiguous chunks reduced in worker order keep the result deterministic
  // for a fixed worker count.
  std::vector<SkyAccumulator> partial(workers);
  {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (cones.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(cones.size(), begin + chunk);
        for (std::size_t k = begin; k < end; ++k) backproject_cone(partial[w], cones[k]);
      });
    }
  }
  for (const auto &p : partial) acc += p;
}

}  // namespace

ReconstructionResult reconstruct(std::span<const EventRecord> events, ReconMode mode,
                                 const ReconstructionConfig &config, const DetectorGeometry &geometry) {
  const bool want_compton = mode != ReconMode::pinhole;
  const bool want_pinhole = mode != ReconMode::compton;

  ReconstructionResult result;
  SkyAccumulator compton_acc;
  SkyAccumulator pinhole_acc;
  std::vector<ConeParams> cones;

  for (const auto &event : events) {
    const EventClass cls = classify_event(event, config.thresholds);
    if (cls.kind == EventKind::compton && want_compton) {
      try {
        cones.push_back(cone_from_event(event, config.cone_width_rad));
      } catch (const DegenerateAxisError &) {
        continue;
      } catch (const UnphysicalEventError &) {
        continue;
      }
    } else if (cls.kind == EventKind::pinhole && want_pinhole) {
      backproject_pinhole(pinhole_acc, event, geometry);
      ++result.pinhole_events;
    }
  }
  result.compton_events = cones.size();
  accumulate_cones(compton_acc, cones, config.jobs);

  result.compton = normalized_to_max(compton_acc);
  result.pinhole = normalized_to_max(pinhole_acc);
  return result;
}

SkyMap combine_maps(const SkyMap &compton, const SkyMap &pinhole) {
  if (!compton.same_shape(pinhole)) throw DimensionMismatchError("combine_maps: shapes differ");
  SkyAccumulator acc(compton.width(), compton.height());
  auto a = acc.data();
  auto c = compton.data();
  auto p = pinhole.data();
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = static_cast<double>(c[k]) + static_cast<double>(p[k]);
  return normalized_to_max(acc);
}

double arm(const EventRecord &event, const Vec3 &source_direction) {
  const ConeParams cone = cone_from_event(event, 1.0);
  return angle_between(source_direction, cone.axis) - cone.half_angle;
}

std::vector<EventRecord> arm_filter(std::span<const EventRecord> events, const Vec3 &source_direction,
                                    double window_rad, const EventThresholds &thresholds) {
  if (!(window_rad >= 0.0)) throw ParameterError("arm_filter: window must be non-negative");
  std::vector<EventRecord> kept;
  kept.reserve(events.size());
  for (const auto &event : events) {
    if (classify_event(event, thresholds).kind != EventKind::compton) {
      kept.push_back(event);
      continue;
    }
    try {
      if (std::abs(arm(event, source_direction)) <= window_rad) kept.push_back(event);
    } catch (const Error &) {
      // no usable cone: cannot be consistent with any source
    }
  }
  return kept;
}

}  // namespace ccbox
