#pragma once

#include <vector>

#include "raman/manifold.hpp"

namespace raman::presets {

inline constexpr double kParallelPower = 0.195;
inline constexpr double kPerpPower = 0.152;

/// R_par (index 0, reference) and R_perp (index 1, offset omega_r) with the
/// calibrated waists and polarizations.
std::vector<Beam> calibrated_beams(double parallel_power, double perp_power, double omega_r);

/// The same geometry with ideal polarizations (pure sigma-, equal thirds).
std::vector<Beam> nominal_beams(double parallel_power, double perp_power, double omega_r);

}  // namespace raman::presets
