#include "ccbox/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "ccbox/constants.hpp"
#include "ccbox/error.hpp"

namespace ccbox {

double sample_power_law(double photon_index, double e_min_kev, double e_max_kev, Rng &rng) {
  if (!std::isfinite(photon_index)) throw ParameterError("power law: photon index must be finite");
  if (!(e_min_kev > 0.0) || !(e_min_kev < e_max_kev)) throw ParameterError("power law: need 0 < E_min < E_max");

  // E = E_min * (1 + u ((E_max/E_min)^a - 1))^(1/a), a = index + 1, written
  // with expm1/log1p so that a -> 0 approaches E_min (E_max/E_min)^u.
  const double a = photon_index + 1.0;
  const double log_ratio = std::log(e_max_kev / e_min_kev);
  const double u = rng.uniform();
  double log_scale;
  if (a == 0.0) {
    log_scale = u * log_ratio;
  } else {
    log_scale = std::log1p(u * std::expm1(a * log_ratio)) / a;
  }
  return std::clamp(e_min_kev * std::exp(log_scale), e_min_kev, e_max_kev);
}

Vec3 sample_source_direction(double half_angle_deg, Rng &rng) {
  const double cos_min = std::cos(half_angle_deg * kDegToRad);
  const double cos_t = 1.0 - rng.uniform() * (1.0 - cos_min);
  const double phi = 2.0 * kPi * rng.uniform();
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  return {sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t};
}

Vec3 sample_hemisphere(bool upper, Rng &rng) {
  // cos theta uniform in (0, 1]
  const double cos_t = rng.uniform_pos();
  const double phi = 2.0 * kPi * rng.uniform();
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  return {sin_t * std::cos(phi), sin_t * std::sin(phi), upper ? cos_t : -cos_t};
}

double sample_klein_nishina(double energy_kev, Rng &rng) {
  const double k = energy_kev / kElectronMassKeV;
  const double eps0 = 1.0 / (1.0 + 2.0 * k);
  const double eps0_sq = eps0 * eps0;
  const double alpha1 = -std::log(eps0);
  const double alpha2 = 0.5 * (1.0 - eps0_sq);
  const double p1 = alpha1 / (alpha1 + alpha2);

  while (true) {
    double eps;
    double eps_sq;
    if (rng.uniform() < p1) {
      // f1 ~ 1/eps on [eps0, 1]
      eps = std::exp(-alpha1 * rng.uniform());
      eps_sq = eps * eps;
    } else {
      // f2 ~ eps on [eps0, 1]
      eps_sq = eps0_sq + (1.0 - eps0_sq) * rng.uniform();
      eps = std::sqrt(eps_sq);
    }
    const double one_minus_cos = (1.0 - eps) / (eps * k);
    const double sin_sq = one_minus_cos * (2.0 - one_minus_cos);
    const double accept = 1.0 - eps * sin_sq / (1.0 + eps_sq);
    if (rng.uniform() >= accept) continue;
    const double theta = std::acos(std::clamp(1.0 - one_minus_cos, -1.0, 1.0));
    if (theta > 0.0) return theta;
  }
}

double compton_outgoing_energy(double energy_kev, double theta) {
  return energy_kev / (1.0 + (energy_kev / kElectronMassKeV) * (1.0 - std::cos(theta)));
}

}  // namespace ccbox
