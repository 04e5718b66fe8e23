#pragma once

#include "ccbox/random.hpp"
#include "ccbox/vec3.hpp"

namespace ccbox {

/// Energy (keV) from pdf proportional to E^photon_index on [e_min, e_max] by
/// inverse CDF. photon_index = -1 reduces to the log-uniform form.
/// Throws ParameterError for non-finite index or an empty/non-positive band.
double sample_power_law(double photon_index, double e_min_kev, double e_max_kev, Rng &rng);

/// Direction uniform on the spherical cap of the given half-angle around +z.
Vec3 sample_source_direction(double half_angle_deg, Rng &rng);

/// Direction uniform in solid angle over the upper (z > 0) or lower (z < 0)
/// hemisphere.
Vec3 sample_hemisphere(bool upper, Rng &rng);

/// Klein-Nishina polar scattering angle (rad) at photon energy `energy_kev`,
/// by the two-branch rejection method on the energy ratio. Result in (0, pi].
double sample_klein_nishina(double energy_kev, Rng &rng);

/// Scattered photon energy E / (1 + (E / m_e c^2)(1 - cos theta)).
double compton_outgoing_energy(double energy_kev, double theta);

}  // namespace ccbox
