#pragma once

#include <numbers>

namespace ccbox {

/// Electron rest energy, keV (CODATA 2018).
inline constexpr double kElectronMassKeV = 510.99895;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

/// FWHM = kFwhmPerSigma * sigma for a Gaussian.
inline constexpr double kFwhmPerSigma = 2.3548200450309493;

}  // namespace ccbox
