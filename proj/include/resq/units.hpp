#pragma once

#include <numbers>

// Internal unit system: angular frequencies in rad/s, times in seconds.
// Multiplying a number by one of these constants converts it in:
//   double w = 6.6 * units::GHz;   // 2*pi*6.6e9 rad/s
// and dividing converts back out for I/O.
namespace resq::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double GHz = two_pi * 1e9;
inline constexpr double MHz = two_pi * 1e6;
inline constexpr double kHz = two_pi * 1e3;

inline constexpr double s = 1.0;
inline constexpr double us = 1e-6;
inline constexpr double ns = 1e-9;
inline constexpr double ps = 1e-12;

}  // namespace resq::units
