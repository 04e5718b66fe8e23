#include "ccbox/skymap.hpp"

#include <algorithm>
#include <cmath>

namespace ccbox {

Vec3 pixel_direction(int i, int j) { return direction_from_uv(pixel_u(i), pixel_v(j)); }

Vec3 direction_from_uv(double u, double v) {
  const double r2 = u * u + v * v;
  if (r2 > 1.0) {
    const double r = std::sqrt(r2);
    return {u / r, v / r, 0.0};
  }
  return {u, v, std::sqrt(1.0 - r2)};
}

std::pair<double, double> direction_to_pixel_coords(const Vec3 &d) {
  const double half = kMapSize / 2;
  return {(d.x + 1.0) * half - 0.5, (d.y + 1.0) * half - 0.5};
}

std::optional<PixelIndex> direction_to_pixel(const Vec3 &d) {
  if (d.z < 0.0) return std::nullopt;
  const double half = kMapSize / 2;
  const int i = static_cast<int>(std::floor((d.x + 1.0) * half));
  const int j = static_cast<int>(std::floor((d.y + 1.0) * half));
  if (i < 0 || j < 0 || i >= kMapSize || j >= kMapSize) return std::nullopt;
  if (!pixel_valid(i, j)) return std::nullopt;
  return PixelIndex{i, j};
}

double pixel_angle_rad() { return std::asin(2.0 / kMapSize); }

const PixelTable &valid_pixel_table() {
  static const PixelTable table = [] {
    PixelTable t;
    for (int j = 0; j < kMapSize; ++j) {
      for (int i = 0; i < kMapSize; ++i) {
        if (!pixel_valid(i, j)) continue;
        t.index.push_back(static_cast<std::size_t>(j) * kMapSize + i);
        t.direction.push_back(pixel_direction(i, j));
      }
    }
    return t;
  }();
  return table;
}

namespace {

template <class T>
SkyMap normalize_impl(const SkyGrid<T> &in) {
  SkyMap out(in.width(), in.height());
  const T peak = in.max_value();
  if (!(peak > T{})) return out;
  auto src = in.data();
  auto dst = out.data();
  for (std::size_t k = 0; k < src.size(); ++k) {
    dst[k] = static_cast<float>(std::max(0.0, static_cast<double>(src[k]) / static_cast<double>(peak)));
  }
  return out;
}

}  // namespace

SkyMap normalized_to_max(const SkyAccumulator &acc) { return normalize_impl(acc); }
SkyMap normalized_to_max(const SkyMap &map) { return normalize_impl(map); }

}  // namespace ccbox
