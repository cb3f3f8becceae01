#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "raman/manifold.hpp"

namespace raman {

enum class DatasetKind { Flop, Ramsey, SplittingVsPower, RabiVsPower };

std::string_view to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(std::string_view name);

/// One measured series. Units: flop (s, probability), ramsey (s, contrast),
/// splitting-vs-power (W of R_par, rad/s), rabi-vs-power (W of R_perp, rad/s).
struct Dataset {
  DatasetKind kind = DatasetKind::Flop;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sigma;
  std::map<std::string, double> metadata;

  std::size_t size() const { return x.size(); }
  /// Throws invalid-parameter unless sizes match, sigma > 0 and x increases.
  void validate() const;
};

/// CSV with a one-line header: x,y,sigma. Metadata rows start with '#' and
/// read "# key=value". Hz columns are converted to rad/s for the frequency kinds.
Dataset read_dataset_csv(std::istream& in, DatasetKind kind);
void write_dataset_csv(std::ostream& out, const Dataset& data);

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd values;
  Eigen::VectorXd uncertainties;
  Eigen::VectorXd residuals;  // weighted
  double chi2 = 0.0;
  int dof = 0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
  bool unbounded = false;

  double value(std::string_view name) const;
  double uncertainty(std::string_view name) const;
};

struct LeastSquaresProblem {
  std::vector<std::string> names;
  Eigen::VectorXd initial;
  /// Typical magnitude of each parameter, sets finite-difference steps.
  Eigen::VectorXd scale;
  /// Weighted residuals (model - y) / sigma.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residuals;
};

struct FitOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-10;
  double initial_damping = 1e-3;
  /// Smallest allowed singular-value ratio of the scaled Jacobian.
  double rank_tolerance = 1e-7;
};

/// Damped Gauss-Newton with multiplicative damping (x10 on rejection, /10 on
/// acceptance) and forward-difference Jacobians. Uncertainties come from the
/// inverse curvature scaled by chi2 / dof.
FitResult levenberg_marquardt(const LeastSquaresProblem& problem, const FitOptions& options = {});

/// Fits (Omega, gamma) of decohered_flop with sigma_f (Hz) held fixed.
FitResult fit_flop(const Dataset& data, double sigma_f, const FitOptions& options = {});

/// Fits A exp(-T^2 kappa / 2) and reports (sigma_t, amplitude) with
/// sigma_t = 1 / sqrt(kappa). kappa <= 0 within error flags unbounded.
FitResult fit_ramsey(const Dataset& data, const FitOptions& options = {});

/// Geometry and polarization of the two Raman beams as fitted.
struct BeamParameters {
  double parallel_waist = 30e-6;
  double perp_waist = 30e-6;
  double parallel_pi = 0.0;
  double parallel_sigma_plus = 0.0;
  double perp_pi = 1.0 / 3.0;
  double detuning = 0.0;  // rad/s, both beams

  std::vector<Beam> beams(double parallel_power, double perp_power, double omega_r) const;
};

/// E_pair - E_(pair+1) with R_par alone at the given power (second order,
/// P3/2 and F7/2).
double splitting_model(const Atom& atom, const BeamParameters& p, std::size_t pair, double parallel_power);

/// |Omega| of the two-photon |initial> -> |initial+1> transition at its
/// Stark-corrected resonance, with the four-photon pathways of the same net
/// beat added coherently.
double raman_rabi_model(const Atom& atom, const BeamParameters& p, std::size_t initial, double parallel_power,
                        double perp_power);

/// Fits parallel_waist, perp_waist, parallel_pi, parallel_sigma_plus.
/// Splitting datasets carry metadata "pair"; the Rabi dataset carries
/// "parallel_power" and "initial". An empty rabi dataset fits splittings
/// alone. Throws underconstrained-fit naming the null directions when the
/// Jacobian is rank deficient.
FitResult joint_fit_beams(const Atom& atom, const std::vector<Dataset>& splittings, const Dataset* rabi,
                          const BeamParameters& initial, const FitOptions& options = {});

struct PerpPolarization {
  double sigma_minus = 0.0;
  double pi = 0.0;
  double sigma_plus = 0.0;
  double pi_uncertainty = 0.0;
};

/// pi fraction of a beam propagating perpendicular to the field (equal sigma
/// components) that reproduces the measured (E_0 - E_1) differential shift
/// under the second-order model. shift and its uncertainty in rad/s.
PerpPolarization constrain_perp_polarization(const Atom& atom, double shift, double shift_uncertainty, double power,
                                             double waist, double detuning);

}  // namespace raman
