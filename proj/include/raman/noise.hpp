#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "raman/dynamics.hpp"
#include "raman/manifold.hpp"

namespace raman {

/// Shot-to-shot Gaussian frequency offset (sigma_f in Hz, for the stated
/// delta_m) and exponential damping gamma (1/s).
struct DephasingModel {
  double sigma_f = 0.0;
  double gamma = 0.0;
  int delta_m = 1;

  /// Time-domain width 1 / (2 pi sigma_f).
  double sigma_t() const;
  static DephasingModel from_sigma_t(double sigma_t, double gamma = 0.0, int delta_m = 1);
  void validate() const;
};

struct SensitivityScaling {
  double g_ratio = 1.0;      // e.g. 3/5 for D5/2 relative to the S1/2 ground qubit
  double improvement = 1.0;  // apparatus coherence improvement, divides sigma_f and gamma
};

/// sigma_f scaled from the model's delta_m to delta_m (ratio delta_m /
/// model.delta_m), times g_ratio, divided by improvement; gamma divided by
/// improvement.
DephasingModel scale_sensitivity(const DephasingModel& model, int delta_m, const SensitivityScaling& scaling = {});

/// Gauss-Hermite nodes and weights for int exp(-x^2) f(x) dx (Golub-Welsch).
std::pair<std::vector<double>, std::vector<double>> gauss_hermite(std::size_t n);

/// Gaussian average over delta ~ N(0, (2 pi sigma_f)^2) of the detuned Rabi
/// probability, times exp(-gamma t).
double decohered_flop(double t, double rabi, double sigma_f, double gamma);

/// exp(-(2 pi sigma_f T)^2 / 2).
double ramsey_contrast(double delay, double sigma_f);

/// Delay at which ramsey_contrast falls to 1/e.
double ramsey_coherence_time(double sigma_f);

struct ScatterModel {
  double leave_fraction = 0.94;
};

/// sum over beams and P3/2 sublevels of Gamma_P |Omega_ie|^2 / (4 Delta^2).
double scattering_rate(const Atom& atom, std::size_t level, std::span<const Beam> beams);

struct ScatterError {
  double total = 0.0;
  double non_erasure = 0.0;
};

/// epsilon = (Gamma_initial + Gamma_target) t_g / 2.
ScatterError pi_pulse_scatter_error(double gamma_initial, double gamma_target, double t_g,
                                    const ScatterModel& model = {});

/// |P| = a1^2 a2^2 / (a1^2 a2^2 + b1^2 b2^2 + 4 Delta^2 detuning^2) for the
/// intermediate of a three-level cascade with Raman couplings (a1 a2) into it
/// and (b1 b2) out of it.
struct CascadeCoupling {
  double a1 = 0.0;
  double a2 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double delta = 0.0;
  double detuning = 0.0;
};

double cascade_population_bound(const CascadeCoupling& c);

enum class CascadeLevel { PlusThreeHalves, PlusOneHalf };

/// Couplings of the |0> -> |3> four-photon cascade through m = +3/2 or +1/2
/// with beams[0] the reference (red) beam and beams[1] the offset (blue) beam,
/// both on P3/2. energies are the dressed qudit energies.
CascadeCoupling four_photon_cascade(const Atom& atom, std::span<const Beam> beams, const Eigen::VectorXd& energies,
                                    double omega_r, CascadeLevel which);

struct FidelityBudget {
  double pi_time = 0.0;
  double leakage = 0.0;
  double dephasing = 0.0;
  double scatter = 0.0;
  double total = 0.0;
};

/// Itemizes a pi pulse of duration t_g at Rabi frequency pi / t_g: leakage as
/// given, dephasing 1 - decohered_flop, scatter from the two rates.
FidelityBudget total_fidelity_budget(double t_g, double leakage, const DephasingModel& dephasing,
                                     double gamma_initial, double gamma_target, const ScatterModel& scatter = {});

}  // namespace raman
