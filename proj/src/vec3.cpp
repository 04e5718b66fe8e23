#include "ccbox/vec3.hpp"

#include <algorithm>

namespace ccbox {

void orthonormal_basis(const Vec3 &n, Vec3 &e1, Vec3 &e2) {
  // Pick the helper axis least aligned with n.
  const Vec3 helper = std::abs(n.x) < 0.6 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  e1 = normalized(cross(n, helper));
  e2 = cross(n, e1);
}

Vec3 rotate_direction(const Vec3 &dir, double cos_theta, double phi) {
  Vec3 e1, e2;
  orthonormal_basis(dir, e1, e2);
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  const Vec3 out = cos_theta * dir + sin_theta * (std::cos(phi) * e1 + std::sin(phi) * e2);
  return normalized(out);
}

}  // namespace ccbox
