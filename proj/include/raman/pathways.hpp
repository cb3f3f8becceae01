#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "raman/manifold.hpp"

namespace raman {

/// One Raman step: absorb a photon from absorb_beam (from -> upper), then
/// emit into emit_beam (upper -> to).
struct RamanStep {
  std::size_t from = 0;
  ManifoldTag upper = ManifoldTag::P32;
  std::size_t upper_index = 0;
  std::size_t to = 0;
  std::size_t absorb_beam = 0;
  std::size_t emit_beam = 0;
};

struct Pathway {
  std::size_t initial = 0;
  std::size_t final = 0;
  std::vector<RamanStep> steps;
  /// omega_{initial,k} minus the beat accumulated up to lower intermediate k,
  /// one entry per intermediate, bare energies.
  std::vector<double> intermediate_detunings;

  int photons() const { return 2 * static_cast<int>(steps.size()); }
  std::size_t visits(ManifoldTag tag) const;
};

/// Net beat of a step in rad/s: offset(emit) - offset(absorb). A resonant
/// pathway's beats sum to E_initial - E_final.
double step_beat(const RamanStep& step, std::span<const Beam> beams);

/// All selection-rule-allowed pathways with the given photon count whose
/// beats sum to the target. The default target is
/// sign(E_i - E_f) (photons / 2) omega_r with omega_r the largest beam offset
/// difference. Intermediates that revisit the initial state before any beat
/// or the final state at the full beat are secular and excluded. F5/2 is
/// never used; F7/2 only when include_f.
std::vector<Pathway> enumerate_pathways(const Atom& atom, std::span<const Beam> beams, std::size_t initial,
                                        std::size_t final, int photons, bool include_f,
                                        std::optional<double> net_beat = std::nullopt);

struct OmegaFactor {
  std::size_t beam = 0;
  std::size_t lower = 0;
  ManifoldTag upper = ManifoldTag::P32;
  std::size_t upper_index = 0;
  bool conjugate = false;
};

struct RabiTerm {
  double coefficient = 0.0;  // -2 / 4^n
  std::vector<OmegaFactor> factors;
  std::vector<double> optical;       // Delta per upper visit
  std::vector<double> intermediate;  // omega_ik - accumulated beat
  std::vector<double> beats;         // accumulated beat at each intermediate
  Pathway pathway;

  cdouble evaluate(const RabiSet& rabi) const;
};

struct RabiExpression {
  std::vector<RabiTerm> terms;

  cdouble evaluate(const RabiSet& rabi) const;
  /// One line per term: sign, 1/2^(2n-1), Omega factors, denominator factors.
  std::string format(const Atom& atom, std::span<const Beam> beams) const;
};

/// Dyson-series term list for the pathways. energies are the (possibly
/// dressed) qudit energies. Throws degenerate-resonance if any intermediate
/// denominator is below 2 pi x 1 kHz.
RabiExpression generate_rabi_expression(std::span<const Pathway> pathways, const Atom& atom,
                                        std::span<const Beam> beams, const Eigen::VectorXd& energies);

/// Hand-coded |0> -> |3> four-photon Rabi frequency with the red (reference)
/// and blue (offset) beam D5/2 -> P3/2 matrices.
cdouble four_photon_rabi(const RabiMatrix& red, const RabiMatrix& blue, double delta,
                         const Eigen::VectorXd& energies, double omega_r);

/// Hand-coded five-term |0> -> |4> six-photon Rabi frequency, as printed.
cdouble six_photon_rabi(const RabiMatrix& red, const RabiMatrix& blue, double delta,
                        const Eigen::VectorXd& energies, double omega_r);

/// Sum over pathways with exactly one F7/2 visit (and the rest P3/2).
cdouble f_state_correction(const Atom& atom, std::span<const Beam> beams, const Eigen::VectorXd& energies,
                           std::size_t initial, std::size_t final, int photons,
                           std::optional<double> net_beat = std::nullopt);

/// Generator value restricted to P3/2 pathways plus, when include_f, the
/// single-F-visit corrections.
cdouble multiphoton_rabi(const Atom& atom, std::span<const Beam> beams, const Eigen::VectorXd& energies,
                         std::size_t initial, std::size_t final, int photons, bool include_f,
                         std::optional<double> net_beat = std::nullopt);

/// Uppers used by pathway sets: P3/2, plus F7/2 when requested.
std::vector<ManifoldTag> pathway_uppers(const Atom& atom, bool include_f);

}  // namespace raman
