// Physical constants and frequency-unit helpers
//
// Internally every frequency is angular (rad/s) and every time is in seconds.
// Inputs quoted as ordinary frequency (Hz) go through hz().

#pragma once

#include <numbers>

namespace sbsim {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg

// Ordinary frequency (Hz) -> angular frequency (rad/s).
constexpr double hz(double f) noexcept { return two_pi * f; }

// Angular frequency (rad/s) -> ordinary frequency (Hz).
constexpr double to_hz(double omega) noexcept { return omega / two_pi; }

}  // namespace sbsim
