#include "raman/operating_point.hpp"

#include <cmath>

#include "raman/error.hpp"
#include "raman/pathways.hpp"
#include "raman/units.hpp"

namespace raman {

double OperatingPoint::analytic_pi_time() const {
  const double a = std::abs(analytic);
  if (a == 0.0) throw Error(ErrorKind::InvalidState, "transition has no analytic coupling");
  return units::pi / a;
}

double OperatingPoint::numeric_pi_time() const {
  if (!(numeric_rabi > 0.0)) throw Error(ErrorKind::InvalidState, "numeric Rabi frequency not computed");
  return units::pi / numeric_rabi;
}

OperatingPoint operating_point(const Atom& atom, std::span<const Beam> beams, std::size_t initial, std::size_t final,
                               int photons, bool include_f, bool with_numeric, const PropagationOptions& options) {
  OperatingPoint op;
  Resonance res;
  try {
    res = resonance_frequency(atom, beams, initial, final, photons, include_f, ShiftMethod::Numeric);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::LabelingAmbiguity) throw;
    op.method = ShiftMethod::SecondOrder;
    res = resonance_frequency(atom, beams, initial, final, photons, include_f, ShiftMethod::SecondOrder);
  }
  op.stark_resonance = res.omega_r;
  op.energies = res.energies;
  const auto drive = with_offset(beams, res.omega_r);
  op.analytic = multiphoton_rabi(atom, drive, res.energies, initial, final, photons, include_f);
  if (with_numeric) {
    const NumericRabi nr = numeric_rabi_frequency(atom, beams, initial, final, photons, res.omega_r,
                                                  std::abs(op.analytic), include_f, options);
    op.numeric_rabi = nr.rabi;
    op.numeric_resonance = nr.resonance;
  }
  return op;
}

}  // namespace raman
