#include "ccbox/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccbox/error.hpp"

namespace ccbox {

std::string_view to_string(Segment s) {
  switch (s) {
    case Segment::front:
      return "front";
    case Segment::rear:
      return "rear";
    case Segment::side:
      return "side";
    case Segment::bgo:
      return "bgo";
  }
  return "unknown";
}

std::optional<RayHit> ray_box_intersection(const Vec3 &origin, const Vec3 &direction, const Box &box) {
  double t_in = -std::numeric_limits<double>::infinity();
  double t_out = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const double o = origin[axis];
    const double d = direction[axis];
    const double lo = box.lo[axis];
    const double hi = box.hi[axis];
    if (d == 0.0) {
      if (o < lo || o > hi) return std::nullopt;
      continue;
    }
    const double inv = 1.0 / d;
    double t0 = (lo - o) * inv;
    double t1 = (hi - o) * inv;
    if (t0 > t1) std::swap(t0, t1);
    t_in = std::max(t_in, t0);
    t_out = std::min(t_out, t1);
  }
  if (!(t_out > std::max(t_in, 0.0))) return std::nullopt;
  return RayHit{t_in, t_out};
}

double grid_cell_center(double value, double origin, double pitch) {
  const double k = std::floor((value - origin) / pitch);
  return origin + (k + 0.5) * pitch;
}

namespace {

void require_positive(double v, const char *name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string("geometry: ") + name + " must be positive");
}

}  // namespace

DetectorGeometry::DetectorGeometry(const GeometryParams &params) : params_(params) {
  if (params.modules_per_side < 1) throw ParameterError("geometry: modules_per_side must be >= 1");
  if (params.rear_layers < 1) throw ParameterError("geometry: rear_layers must be >= 1");
  require_positive(params.module_size_mm, "module_size_mm");
  require_positive(params.front_pixel_pitch_mm, "front_pixel_pitch_mm");
  require_positive(params.front_thickness_mm, "front_thickness_mm");
  require_positive(params.pinhole_side_mm, "pinhole_side_mm");
  require_positive(params.rear_layer_thickness_mm, "rear_layer_thickness_mm");
  require_positive(params.rear_pixel_pitch_mm, "rear_pixel_pitch_mm");
  require_positive(params.front_to_rear_gap_mm, "front_to_rear_gap_mm");
  require_positive(params.side_panel_thickness_mm, "side_panel_thickness_mm");
  require_positive(params.bgo_thickness_mm, "bgo_thickness_mm");

  const double half = 0.5 * footprint_side();
  const double ph = 0.5 * params.pinhole_side_mm;
  if (!(ph < half)) throw ParameterError("geometry: pinhole must lie strictly inside the front layer");

  const double front_lo = -params.front_thickness_mm;
  const double rear_top = front_lo - params.front_to_rear_gap_mm;
  const double rear_bottom = rear_top - params.rear_layers * params.rear_layer_thickness_mm;
  const double s = params.side_panel_thickness_mm;
  const double b = params.bgo_thickness_mm;
  const double fp = params.front_pixel_pitch_mm;
  const double rp = params.rear_pixel_pitch_mm;

  pinhole_ = Box{{-ph, -ph, front_lo}, {ph, ph, 0.0}};

  auto add = [this](std::string name, Box box, Segment seg, MaterialId mat, int layer, double pitch) {
    volumes_.push_back(Volume{std::move(name), box, seg, mat, layer, pitch});
  };

  // Front layer framing the pinhole.
  add("front_xneg", {{-half, -half, front_lo}, {-ph, half, 0.0}}, Segment::front, MaterialId::gagg, 0, fp);
  add("front_xpos", {{ph, -half, front_lo}, {half, half, 0.0}}, Segment::front, MaterialId::gagg, 0, fp);
  add("front_yneg", {{-ph, -half, front_lo}, {ph, -ph, 0.0}}, Segment::front, MaterialId::gagg, 0, fp);
  add("front_ypos", {{-ph, ph, front_lo}, {ph, half, 0.0}}, Segment::front, MaterialId::gagg, 0, fp);

  for (int k = 0; k < params.rear_layers; ++k) {
    const double top = rear_top - k * params.rear_layer_thickness_mm;
    add("rear_layer" + std::to_string(k), {{-half, -half, top - params.rear_layer_thickness_mm}, {half, half, top}},
        Segment::rear, MaterialId::gagg, k, rp);
  }

  add("side_xneg", {{-half - s, -half, rear_bottom}, {-half, half, 0.0}}, Segment::side, MaterialId::gagg, 0, 0.0);
  add("side_xpos", {{half, -half, rear_bottom}, {half + s, half, 0.0}}, Segment::side, MaterialId::gagg, 0, 0.0);
  add("side_yneg", {{-half, -half - s, rear_bottom}, {half, -half, 0.0}}, Segment::side, MaterialId::gagg, 0, 0.0);
  add("side_ypos", {{-half, half, rear_bottom}, {half, half + s, 0.0}}, Segment::side, MaterialId::gagg, 0, 0.0);

  const double inner = half + s;
  const double outer = inner + b;
  add("bgo_xneg", {{-outer, -outer, rear_bottom}, {-inner, outer, 0.0}}, Segment::bgo, MaterialId::bgo, 0, 0.0);
  add("bgo_xpos", {{inner, -outer, rear_bottom}, {outer, outer, 0.0}}, Segment::bgo, MaterialId::bgo, 0, 0.0);
  add("bgo_yneg", {{-inner, -outer, rear_bottom}, {inner, -inner, 0.0}}, Segment::bgo, MaterialId::bgo, 0, 0.0);
  add("bgo_ypos", {{-inner, inner, rear_bottom}, {inner, outer, 0.0}}, Segment::bgo, MaterialId::bgo, 0, 0.0);
  add("bgo_bottom", {{-outer, -outer, rear_bottom - b}, {outer, outer, rear_bottom}}, Segment::bgo, MaterialId::bgo, 0,
      0.0);

  for (std::size_t i = 0; i < volumes_.size(); ++i) {
    for (std::size_t j = i + 1; j < volumes_.size(); ++j) {
      if (volumes_[i].box.interiors_overlap(volumes_[j].box)) {
        throw ParameterError("geometry: volumes " + volumes_[i].name + " and " + volumes_[j].name + " overlap");
      }
    }
  }

  bounds_ = volumes_.front().box;
  for (const auto &v : volumes_) {
    for (int a = 0; a < 3; ++a) {
      bounds_.lo[a] = std::min(bounds_.lo[a], v.box.lo[a]);
      bounds_.hi[a] = std::max(bounds_.hi[a], v.box.hi[a]);
    }
  }
}

std::optional<std::size_t> DetectorGeometry::locate(const Vec3 &p) const {
  for (std::size_t i = 0; i < volumes_.size(); ++i) {
    if (volumes_[i].box.contains(p)) return i;
  }
  return std::nullopt;
}

Vec3 DetectorGeometry::quantize(std::size_t index, const Vec3 &p) const {
  const Volume &v = volumes_.at(index);
  const Vec3 c = v.box.center();
  if (v.pixel_pitch <= 0.0) return c;
  const double origin = -0.5 * footprint_side();
  Vec3 q{0.0, 0.0, c.z};
  for (int axis = 0; axis < 2; ++axis) {
    const double lo_edge = v.box.lo[axis];
    const double hi_edge = v.box.hi[axis];
    // Cell index clamped to the cells overlapping the volume.
    const double k_min = std::floor((lo_edge - origin) / v.pixel_pitch);
    const double k_max = std::ceil((hi_edge - origin) / v.pixel_pitch) - 1.0;
    const double k = std::clamp(std::floor((p[axis] - origin) / v.pixel_pitch), k_min, k_max);
    // Cells cut by the pinhole report the centre of their material part.
    const double lo = std::max(origin + k * v.pixel_pitch, lo_edge);
    const double hi = std::min(origin + (k + 1.0) * v.pixel_pitch, hi_edge);
    q[axis] = 0.5 * (lo + hi);
  }
  return q;
}

DetectorGeometry build_default_geometry() { return DetectorGeometry(GeometryParams{}); }

}  // namespace ccbox
