#pragma once

#include <cstdint>

#include "ccbox/geometry.hpp"
#include "ccbox/vec3.hpp"

namespace ccbox {

enum class Process : std::uint8_t { photoelectric = 0, compton = 1 };

/// One energy deposit along a photon track.
struct Interaction {
  Vec3 position;            // mm
  double deposit_kev{0.0};  // > 0 before smearing
  Segment segment{Segment::front};
  Process process{Process::photoelectric};
  std::uint16_t volume{0};  // index into DetectorGeometry::volumes()
};

}  // namespace ccbox
