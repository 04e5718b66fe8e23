#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccbox/vec3.hpp"

namespace ccbox {

/// Detector class used for event aggregation; order fixes the layout of the
/// 16-feature event vector.
enum class Segment : std::uint8_t { front = 0, rear = 1, side = 2, bgo = 3 };
inline constexpr std::size_t kSegmentCount = 4;
inline constexpr std::array<Segment, kSegmentCount> kAllSegments{Segment::front, Segment::rear, Segment::side,
                                                                 Segment::bgo};
std::string_view to_string(Segment s);

enum class MaterialId : std::uint8_t { gagg = 0, bgo = 1 };

/// Axis-aligned box, mm.
struct Box {
  Vec3 lo;
  Vec3 hi;

  /// Half-open containment [lo, hi) so that boxes sharing a face never both
  /// claim a point.
  bool contains(const Vec3 &p) const {
    return p.x >= lo.x && p.x < hi.x && p.y >= lo.y && p.y < hi.y && p.z >= lo.z && p.z < hi.z;
  }
  bool contains_closed(const Vec3 &p, double tol = 0.0) const {
    return p.x >= lo.x - tol && p.x <= hi.x + tol && p.y >= lo.y - tol && p.y <= hi.y + tol && p.z >= lo.z - tol &&
           p.z <= hi.z + tol;
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 size() const { return hi - lo; }
  bool interiors_overlap(const Box &o) const {
    return lo.x < o.hi.x && o.lo.x < hi.x && lo.y < o.hi.y && o.lo.y < hi.y && lo.z < o.hi.z && o.lo.z < hi.z;
  }
};

/// Path parameters where a ray enters and leaves a box.
struct RayHit {
  double t_in;
  double t_out;
};

/// Slab-method intersection. Returns hit only when t_out > max(t_in, 0);
/// t_in is negative when the origin is inside the box.
std::optional<RayHit> ray_box_intersection(const Vec3 &origin, const Vec3 &direction, const Box &box);

/// Centre of the grid cell containing `value` on a grid with cell edges at
/// origin + k * pitch.
double grid_cell_center(double value, double origin, double pitch);

struct Volume {
  std::string name;
  Box box;
  Segment segment;
  MaterialId material;
  int layer{0};              // DOI layer for rear volumes
  double pixel_pitch{0.0};   // lateral readout pitch; 0 for monolithic readout
};

/// Every tunable dimension of the CC-Box model. Mirrors the geometry JSON.
struct GeometryParams {
  int modules_per_side{2};
  double module_size_mm{50.0};
  double front_pixel_pitch_mm{1.0};
  double front_thickness_mm{5.0};
  double pinhole_side_mm{5.5};
  int rear_layers{4};
  double rear_layer_thickness_mm{20.0};
  double rear_pixel_pitch_mm{2.0};
  double front_to_rear_gap_mm{10.0};
  double side_panel_thickness_mm{10.0};
  double bgo_thickness_mm{10.0};
};

/// Parametric CC-Box: front GAGG layer with a square pinhole, a stack of GAGG
/// DOI layers, GAGG side panels and BGO shields on four sides and the bottom.
///
/// The front layer top face sits at z = 0 and everything else lies below it.
/// The front layer is represented by four boxes framing the pinhole so that
/// all volumes stay disjoint axis-aligned boxes. Immutable after construction.
class DetectorGeometry {
 public:
  explicit DetectorGeometry(const GeometryParams &params);

  const GeometryParams &params() const { return params_; }
  std::span<const Volume> volumes() const { return volumes_; }
  const Volume &volume(std::size_t i) const { return volumes_.at(i); }

  /// Index of the volume containing p, if any.
  std::optional<std::size_t> locate(const Vec3 &p) const;

  /// Side length of the square module array (front and rear footprint).
  double footprint_side() const { return params_.modules_per_side * params_.module_size_mm; }
  double rear_footprint_area_mm2() const { return footprint_side() * footprint_side(); }

  Box pinhole() const { return pinhole_; }
  Vec3 pinhole_center() const { return pinhole_.center(); }
  Box bounding_box() const { return bounds_; }

  /// Readout position for a true interaction point inside volume `index`:
  /// pixel centre laterally (clipped to the volume), layer centre in z.
  /// Monolithic volumes report their box centre.
  Vec3 quantize(std::size_t index, const Vec3 &p) const;

 private:
  GeometryParams params_;
  std::vector<Volume> volumes_;
  Box pinhole_;
  Box bounds_;
};

DetectorGeometry build_default_geometry();

}  // namespace ccbox
