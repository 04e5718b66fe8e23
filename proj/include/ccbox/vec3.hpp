#pragma once

#include <cmath>

namespace ccbox {

/// Cartesian 3-vector in detector coordinates (mm, or dimensionless for
/// directions). +z points to the zenith.
struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  constexpr Vec3 &operator+=(const Vec3 &o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3 &operator-=(const Vec3 &o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3 &operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3 &b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3 &b) { return a -= b; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator-(const Vec3 &a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr bool operator==(const Vec3 &, const Vec3 &) = default;

  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  double &operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
};

constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3 &a, const Vec3 &b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3 &a) { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(const Vec3 &a) { return a * (1.0 / norm(a)); }

/// Angle between two vectors in radians, stable near 0 and pi.
inline double angle_between(const Vec3 &a, const Vec3 &b) {
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

/// Rotate unit vector `dir` by polar angle `theta` about itself with azimuth
/// `phi` measured in an arbitrary but fixed perpendicular frame.
Vec3 rotate_direction(const Vec3 &dir, double cos_theta, double phi);

/// Two unit vectors orthogonal to `n` and to each other.
void orthonormal_basis(const Vec3 &n, Vec3 &e1, Vec3 &e2);

}  // namespace ccbox
