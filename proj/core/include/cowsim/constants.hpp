#pragma once

namespace cowsim {

// CODATA 2018 exact values.
inline constexpr double kPlanckJs = 6.62607015e-34;
inline constexpr double kElementaryChargeC = 1.602176634e-19;
inline constexpr double kSpeedOfLightMps = 299792458.0;

// 193.1 THz carrier (1552.5 nm telecom C-band line).
inline constexpr double kDefaultCenterFrequencyHz = 193.1e12;

}  // namespace cowsim
