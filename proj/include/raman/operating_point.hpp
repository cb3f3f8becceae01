#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "raman/dynamics.hpp"
#include "raman/manifold.hpp"
#include "raman/stark.hpp"

namespace raman {

/// Resonant drive of one multi-photon transition: Stark-corrected resonance,
/// analytic (generator) and numeric (Floquet) Rabi frequencies.
struct OperatingPoint {
  ShiftMethod method = ShiftMethod::Numeric;
  double stark_resonance = 0.0;
  Eigen::VectorXd energies;
  cdouble analytic{0.0};
  double numeric_rabi = 0.0;
  double numeric_resonance = 0.0;

  double analytic_pi_time() const;
  double numeric_pi_time() const;
};

/// Falls back to second-order shifts when the numeric dressed energies are
/// ambiguous. The numeric side is skipped when with_numeric is false.
OperatingPoint operating_point(const Atom& atom, std::span<const Beam> beams, std::size_t initial, std::size_t final,
                               int photons, bool include_f, bool with_numeric = true,
                               const PropagationOptions& options = {});

}  // namespace raman
