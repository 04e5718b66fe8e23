#include "ccbox/kinematics.hpp"

#include <cmath>

#include "ccbox/constants.hpp"

namespace ccbox {

double compton_cosine(double e1_kev, double e2_kev) {
  return 1.0 - kElectronMassKeV / e2_kev + kElectronMassKeV / (e1_kev + e2_kev);
}

bool compton_kinematics_physical(double e1_kev, double e2_kev) {
  if (!(e1_kev >= 0.0) || !(e2_kev > 0.0)) return false;
  const double c = compton_cosine(e1_kev, e2_kev);
  return std::isfinite(c) && std::abs(c) <= 1.0 + kCosineSlack;
}

}  // namespace ccbox
