#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ccbox/vec3.hpp"

namespace ccbox {

/// Standard map side. Pixel (i, j) covers direction cosines
/// u = (i + 0.5) / 128 - 1, v = (j + 0.5) / 128 - 1 of the upper hemisphere.
inline constexpr int kMapSize = 256;

/// Row-major intensity grid: element (i, j) lives at j * width + i, so i runs
/// along u and j along v.
template <class T>
class SkyGrid {
 public:
  using value_type = T;

  SkyGrid() : SkyGrid(kMapSize, kMapSize) {}
  SkyGrid(int width, int height)
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, T{}) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  T &at(int i, int j) { return data_[static_cast<std::size_t>(j) * width_ + i]; }
  const T &at(int i, int j) const { return data_[static_cast<std::size_t>(j) * width_ + i]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  T max_value() const {
    T m{};
    for (const T &v : data_) m = v > m ? v : m;
    return m;
  }
  bool all_zero() const {
    for (const T &v : data_) {
      if (v != T{}) return false;
    }
    return true;
  }
  bool same_shape(const SkyGrid &o) const { return width_ == o.width_ && height_ == o.height_; }

  SkyGrid &operator+=(const SkyGrid &o) {
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }

  friend bool operator==(const SkyGrid &, const SkyGrid &) = default;

 private:
  int width_;
  int height_;
  std::vector<T> data_;
};

/// Stored and compared maps.
using SkyMap = SkyGrid<float>;
/// Double-precision grid used while accumulating back-projections.
using SkyAccumulator = SkyGrid<double>;

struct PixelIndex {
  int i;
  int j;
  friend bool operator==(const PixelIndex &, const PixelIndex &) = default;
};

inline double pixel_u(int i) { return (i + 0.5) / (kMapSize / 2) - 1.0; }
inline double pixel_v(int j) { return (j + 0.5) / (kMapSize / 2) - 1.0; }

/// Pixel centre inside the unit disk.
inline bool pixel_valid(int i, int j) {
  const double u = pixel_u(i);
  const double v = pixel_v(j);
  return u * u + v * v <= 1.0;
}

/// Unit direction of a pixel centre (valid pixels only).
Vec3 pixel_direction(int i, int j);

/// Pixel containing direction d; nullopt below the horizon or when the
/// containing pixel is invalid.
std::optional<PixelIndex> direction_to_pixel(const Vec3 &d);

/// Continuous pixel coordinates (i, j) of direction d's (u, v).
std::pair<double, double> direction_to_pixel_coords(const Vec3 &d);

/// Direction from (u, v); points outside the disk are pulled to its edge.
Vec3 direction_from_uv(double u, double v);

/// Angular size of one pixel at the map centre, rad.
double pixel_angle_rad();

/// Directions of all valid pixels with their flat indices.
struct PixelTable {
  std::vector<std::size_t> index;
  std::vector<Vec3> direction;
};
const PixelTable &valid_pixel_table();

/// Divide by the maximum; all-zero input stays zero.
SkyMap normalized_to_max(const SkyAccumulator &acc);
SkyMap normalized_to_max(const SkyMap &map);

}  // namespace ccbox
