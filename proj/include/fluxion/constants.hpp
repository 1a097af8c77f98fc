#pragma once

// Physical constants (SI, CODATA 2018 exact values) and version metadata.

#include <numbers>

namespace fluxion::constants {

inline constexpr double hbar = 1.054571817e-34;              // J s
inline constexpr double elementary_charge = 1.602176634e-19; // C
inline constexpr double phi0_bar = hbar / (2.0 * elementary_charge); // reduced flux quantum, Wb
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr const char* version = "1.0.0";

} // namespace fluxion::constants
