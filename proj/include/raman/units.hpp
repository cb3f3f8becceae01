#pragma once

#include <numbers>

// Internal units: hbar = 1, every frequency is an angular frequency in rad/s,
// times in seconds, powers in watts, lengths in metres. Conversions to Hz
// happen only at I/O boundaries.
namespace raman::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double epsilon0 = 8.8541878128e-12;   // F / m
inline constexpr double speed_of_light = 299792458.0;  // m / s
inline constexpr double bohr_magneton = 9.2740100783e-24;  // J / T
inline constexpr double atomic_dipole = 8.478353625e-30;   // e a0 in C m

constexpr double hz_to_angular(double hz) { return two_pi * hz; }
constexpr double angular_to_hz(double w) { return w / two_pi; }

constexpr double kHz(double v) { return two_pi * 1e3 * v; }
constexpr double MHz(double v) { return two_pi * 1e6 * v; }
constexpr double THz(double v) { return two_pi * 1e12 * v; }

constexpr double mW(double v) { return 1e-3 * v; }
constexpr double um(double v) { return 1e-6 * v; }
constexpr double us(double v) { return 1e-6 * v; }
constexpr double ms(double v) { return 1e-3 * v; }
constexpr double gauss(double v) { return 1e-4 * v; }

}  // namespace raman::units
