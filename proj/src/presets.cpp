#include "raman/presets.hpp"

#include "raman/units.hpp"

namespace raman::presets {

using namespace units;

std::vector<Beam> calibrated_beams(double parallel_power, double perp_power, double omega_r) {
  return {
      Beam{"R_par", THz(-44.0), parallel_power, um(30.60), polarization_from_fractions(0.872, 0.0, 0.128), 0.0},
      Beam{"R_perp", THz(-44.0), perp_power, um(32.16), linear_perpendicular_polarization(0.329), omega_r},
  };
}

std::vector<Beam> nominal_beams(double parallel_power, double perp_power, double omega_r) {
  return {
      Beam{"R_par", THz(-44.0), parallel_power, um(30.0), polarization_from_fractions(1.0, 0.0, 0.0), 0.0},
      Beam{"R_perp", THz(-44.0), perp_power, um(30.0), linear_perpendicular_polarization(1.0 / 3.0), omega_r},
  };
}

}  // namespace raman::presets
