#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "raman/dynamics.hpp"
#include "raman/manifold.hpp"

namespace raman {

enum class ShiftMethod { SecondOrder, Numeric };

std::string_view to_string(ShiftMethod method);

struct LightShift {
  double value = 0.0;    // rad/s
  bool warning = false;  // |Delta| < 1000 max|Omega| for some coupling
};

/// sum over beams and excited sublevels of |Omega_ie|^2 / (4 Delta_e) for qudit
/// level i. F7/2 terms only with include_f.
LightShift light_shift_second_order(const Atom& atom, std::size_t level, std::span<const Beam> beams,
                                    bool include_f);

struct ShiftTable {
  ShiftMethod method = ShiftMethod::SecondOrder;
  Eigen::VectorXd total;                // rad/s per level
  std::vector<Eigen::VectorXd> per_beam;  // rad/s per level, one entry per beam
  bool warning = false;
};

ShiftTable shift_table(const Atom& atom, std::span<const Beam> beams, bool include_f,
                       ShiftMethod method = ShiftMethod::SecondOrder);

/// Static diagonal of h plus second-order corrections from the off-diagonal
/// and beat-carrying couplings. Couplings between the skipped pair are left out
/// (they are the resonant ones when driving that transition).
Eigen::VectorXd numeric_dressed_energies(const EffectiveHamiltonian& h,
                                         std::optional<std::pair<std::size_t, std::size_t>> skip = std::nullopt);

/// Bare qudit energies plus light shifts.
Eigen::VectorXd dressed_energies(const Atom& atom, std::span<const Beam> beams, bool include_f,
                                 ShiftMethod method = ShiftMethod::SecondOrder,
                                 std::optional<std::pair<std::size_t, std::size_t>> skip = std::nullopt);

/// omega_ij = E_i - E_j of the dressed energies.
Eigen::MatrixXd dressed_splittings(const Atom& atom, std::span<const Beam> beams, bool include_f,
                                   ShiftMethod method = ShiftMethod::SecondOrder);

struct Resonance {
  double omega_r = 0.0;
  int iterations = 0;
  Eigen::VectorXd energies;
};

/// Self-consistent omega_r = 2 |E_i - E_j| / n with the beams re-offset at
/// each step (damped fixed point, 1 Hz tolerance, at most 50 iterations).
Resonance resonance_frequency(const Atom& atom, std::span<const Beam> beams, std::size_t i, std::size_t j,
                              int photons, bool include_f, ShiftMethod method = ShiftMethod::Numeric);

}  // namespace raman
