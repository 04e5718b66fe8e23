#pragma once

namespace ccbox {

/// |cos theta| may exceed 1 by this much before an event counts as
/// unphysical; such values are clamped. Covers rounding of deposits quoted
/// to 1 eV.
inline constexpr double kCosineSlack = 1e-5;

/// Compton formula: cos theta from the scatter deposit `e1` and the absorber
/// deposit `e2` (keV). Unclamped.
double compton_cosine(double e1_kev, double e2_kev);

/// True when compton_cosine(e1, e2) lies within [-1, 1] up to kCosineSlack.
bool compton_kinematics_physical(double e1_kev, double e2_kev);

}  // namespace ccbox
