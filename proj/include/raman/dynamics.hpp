#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "raman/manifold.hpp"

namespace raman {

enum class EnvelopeShape { Square, Sin2, Sin4, Tabulated };

std::string_view to_string(EnvelopeShape shape);
EnvelopeShape envelope_shape_from_string(std::string_view name);

/// Field-amplitude envelope. Shaped beams follow the envelope; the others are
/// square over the same window.
class PulseEnvelope {
 public:
  static PulseEnvelope square(double duration);
  /// sin^2 or sin^4 rise and fall, each ramp_fraction * duration long.
  static PulseEnvelope ramped(EnvelopeShape shape, double duration, double ramp_fraction = 0.125,
                              std::vector<std::size_t> shaped_beams = {1});
  /// Linear interpolation through (times, values); times start at 0.
  static PulseEnvelope tabulated(std::vector<double> times, std::vector<double> values,
                                 std::vector<std::size_t> shaped_beams = {1});

  EnvelopeShape shape() const { return shape_; }
  double duration() const { return duration_; }
  double ramp_fraction() const { return ramp_fraction_; }
  const std::vector<std::size_t>& shaped_beams() const { return shaped_; }

  double amplitude(double t) const;
  double beam_amplitude(std::size_t beam, double t) const;

 private:
  PulseEnvelope() = default;

  EnvelopeShape shape_ = EnvelopeShape::Square;
  double duration_ = 0.0;
  double ramp_fraction_ = 0.0;
  std::vector<std::size_t> shaped_;
  std::vector<double> times_;
  std::vector<double> values_;
};

using SmallMatrix = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 16, 16>;
using SmallVector = Eigen::Matrix<cdouble, Eigen::Dynamic, 1, Eigen::ColMajor, 16, 1>;

/// H_row,col += f_a(t) f_b(t) amplitude exp(i beat t) in the lab frame.
struct CouplingTerm {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t beam_a = 0;
  std::size_t beam_b = 0;
  cdouble amplitude{0.0};
  double beat = 0.0;
};

/// Qudit-manifold Hamiltonian with the upper manifolds eliminated. Terms
/// cover every ordered beam pair, so light shifts sit on the diagonal terms
/// with a == b and the two-beam interference terms oscillate at the beat.
class EffectiveHamiltonian {
 public:
  EffectiveHamiltonian(Eigen::VectorXd bare, std::vector<CouplingTerm> terms, std::size_t beam_count);

  std::size_t dimension() const { return static_cast<std::size_t>(bare_.size()); }
  std::size_t beam_count() const { return beam_count_; }
  const Eigen::VectorXd& bare() const { return bare_; }
  const std::vector<CouplingTerm>& terms() const { return terms_; }

  /// Bare energies plus time-averaged light shifts at full amplitude.
  Eigen::VectorXd static_diagonal() const;

  /// Matrix at time t in the frame rotating at the given per-level
  /// frequencies (frame = bare gives the interaction picture; frame = 0 the
  /// lab frame). amplitudes holds f_b(t) per beam.
  SmallMatrix matrix(double t, std::span<const double> amplitudes, const Eigen::VectorXd& frame) const;

  /// Largest |frequency| among the terms in the given frame.
  double fastest_frequency(const Eigen::VectorXd& frame) const;
  /// Upper bound of the operator norm at full amplitude.
  double norm_bound(const Eigen::VectorXd& frame) const;

 private:
  Eigen::VectorXd bare_;
  std::vector<CouplingTerm> terms_;
  std::size_t beam_count_;
};

/// Terms sum_e conj(Omega^a_ke) Omega^b_le / (4 Delta) over P3/2 (and F7/2 if
/// include_f), with 1/Delta the mean of the two beams' inverse detunings.
EffectiveHamiltonian build_effective_hamiltonian(const Atom& atom, std::span<const Beam> beams, bool include_f);

struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXcd amplitudes;  // time x level, interaction picture
  Eigen::MatrixXd populations;
  std::string description;

  std::size_t size() const { return times.size(); }
};

struct PropagationOptions {
  std::size_t samples = 2001;
  int steps_per_period = 96;
  double max_phase = 0.04;  // bound on ||H|| dt
};

/// Fourth-order Magnus propagation (two Gauss points) in the interaction
/// picture of the bare Zeeman ladder.
Trajectory propagate(const EffectiveHamiltonian& h, const Eigen::VectorXcd& psi0, double duration,
                     const PulseEnvelope& envelope, const PropagationOptions& options = {});

/// Propagator from t0 to t1 (t1 < t0 runs backwards) in the given frame.
/// A null envelope means every beam at full amplitude.
Eigen::MatrixXcd propagator(const EffectiveHamiltonian& h, double t0, double t1, const PulseEnvelope* envelope,
                            const Eigen::VectorXd& frame, const PropagationOptions& options = {});

struct PiPulseMetrics {
  double fidelity = 0.0;
  double max_intermediate = 0.0;
  double pi_time = 0.0;
  double final_leakage = 0.0;
};

/// Fidelity is the target population at its first maximum (values above 1/2
/// that dominate a window of +-25% around them).
PiPulseMetrics pi_pulse_metrics(const Trajectory& traj, std::size_t initial, std::size_t target);

/// Final target population for each offset (run in parallel, input order).
std::vector<std::pair<double, double>> rabi_spectroscopy(
    const std::function<EffectiveHamiltonian(double)>& builder, std::span<const double> offsets, double duration,
    std::size_t initial, std::size_t target, const PulseEnvelope& envelope, const PropagationOptions& options = {},
    unsigned workers = 0);

/// Dominant oscillation frequency of a population series: zero-padded FFT
/// peak, quadratic interpolation, then a damped-sinusoid least-squares
/// refinement.
double extract_rabi_frequency(std::span<const double> times, std::span<const double> population);
double extract_rabi_frequency(const Trajectory& traj, std::size_t target);

struct NumericRabi {
  double rabi = 0.0;       // minimum quasi-energy splitting, rad/s
  double resonance = 0.0;  // omega_r at the minimum
  int iterations = 0;
};

/// Quasi-energy splitting of the Floquet pair living on {initial, final}
/// over one period of the commensurate frame.
double floquet_splitting(const Atom& atom, std::span<const Beam> beams, std::size_t initial, std::size_t final,
                         int photons, double omega_r, bool include_f, const PropagationOptions& options = {});

/// Minimizes the Floquet splitting over omega_r starting from a guess.
/// scale_hint is a rough Rabi frequency used to size the first bracket.
NumericRabi numeric_rabi_frequency(const Atom& atom, std::span<const Beam> beams, std::size_t initial,
                                   std::size_t final, int photons, double omega_guess, double scale_hint,
                                   bool include_f, const PropagationOptions& options = {});

struct PsdPoint {
  double offset_hz = 0.0;
  double db = 0.0;
};

/// Periodogram of envelope(t) cos(carrier t) over the pulse, zero padded,
/// normalized to 0 dB at the carrier peak.
std::vector<PsdPoint> pulse_psd(const PulseEnvelope& envelope, double carrier, double sample_rate,
                                std::size_t beam = 1);

/// Largest PSD value (dB) within +-half_width (Hz) of offset (Hz), either sign.
double psd_peak_near(std::span<const PsdPoint> psd, double offset_hz, double half_width_hz);

}  // namespace raman
