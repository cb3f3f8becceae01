#include "raman/noise.hpp"

#include <algorithm>
#include <limits>
#include <cmath>

#include "raman/error.hpp"
#include "raman/units.hpp"

namespace raman {
namespace {

constexpr std::size_t kQuadratureNodes = 128;

const std::pair<std::vector<double>, std::vector<double>>& default_rule() {
  static const auto rule = gauss_hermite(kQuadratureNodes);
  return rule;
}

}  // namespace

double DephasingModel::sigma_t() const {
  return sigma_f > 0.0 ? 1.0 / (units::two_pi * sigma_f) : std::numeric_limits<double>::infinity();
}

DephasingModel DephasingModel::from_sigma_t(double sigma_t, double gamma, int delta_m) {
  if (!(sigma_t > 0.0)) throw Error(ErrorKind::InvalidParameter, "sigma_t must be positive");
  DephasingModel m{1.0 / (units::two_pi * sigma_t), gamma, delta_m};
  m.validate();
  return m;
}

void DephasingModel::validate() const {
  if (!(sigma_f >= 0.0) || !(gamma >= 0.0)) throw Error(ErrorKind::InvalidParameter, "sigma_f and gamma must be >= 0");
  if (delta_m < 1) throw Error(ErrorKind::InvalidParameter, "delta_m must be >= 1");
}

DephasingModel scale_sensitivity(const DephasingModel& model, int delta_m, const SensitivityScaling& scaling) {
  model.validate();
  if (delta_m < 1) throw Error(ErrorKind::InvalidParameter, "delta_m must be >= 1");
  if (!(scaling.g_ratio > 0.0) || !(scaling.improvement > 0.0))
    throw Error(ErrorKind::InvalidParameter, "scaling factors must be positive");
  DephasingModel out = model;
  out.delta_m = delta_m;
  out.sigma_f = model.sigma_f * delta_m / model.delta_m * scaling.g_ratio / scaling.improvement;
  out.gamma = model.gamma / scaling.improvement;
  return out;
}

std::pair<std::vector<double>, std::vector<double>> gauss_hermite(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidParameter, "need at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k < n; ++k) {
    const double b = std::sqrt(static_cast<double>(k) / 2.0);
    jacobi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = b;
    jacobi(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k)) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  std::vector<double> x(n), w(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()(static_cast<Eigen::Index>(k));
    const double v = es.eigenvectors()(0, static_cast<Eigen::Index>(k));
    w[k] = std::sqrt(units::pi) * v * v;
  }
  return {x, w};
}

double decohered_flop(double t, double rabi, double sigma_f, double gamma) {
  if (t < 0.0) throw Error(ErrorKind::InvalidParameter, "time must be >= 0");
  if (sigma_f < 0.0 || gamma < 0.0) throw Error(ErrorKind::InvalidParameter, "sigma_f and gamma must be >= 0");
  auto detuned = [&](double delta) {
    const double w2 = rabi * rabi + delta * delta;
    if (w2 == 0.0) return 0.0;
    const double s = std::sin(0.5 * std::sqrt(w2) * t);
    return rabi * rabi / w2 * s * s;
  };
  const double damping = std::exp(-gamma * t);
  if (sigma_f == 0.0) return detuned(0.0) * damping;
  const double width = units::two_pi * sigma_f;
  const auto& [x, w] = default_rule();
  double sum = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) sum += w[k] * detuned(std::sqrt(2.0) * width * x[k]);
  return std::clamp(sum / std::sqrt(units::pi), 0.0, 1.0) * damping;
}

double ramsey_contrast(double delay, double sigma_f) {
  if (delay < 0.0 || sigma_f < 0.0) throw Error(ErrorKind::InvalidParameter, "delay and sigma_f must be >= 0");
  const double x = units::two_pi * sigma_f * delay;
  return std::exp(-0.5 * x * x);
}

double ramsey_coherence_time(double sigma_f) {
  if (!(sigma_f > 0.0)) throw Error(ErrorKind::InvalidParameter, "sigma_f must be positive");
  return std::sqrt(2.0) / (units::two_pi * sigma_f);
}

double scattering_rate(const Atom& atom, std::size_t level, std::span<const Beam> beams) {
  const Manifold& p = atom.manifold(ManifoldTag::P32);
  if (!p.lifetime()) throw Error(ErrorKind::InvalidParameter, "P3/2 lifetime is not set");
  if (level >= atom.qudit_manifold().size()) throw Error(ErrorKind::InvalidParameter, "level index out of range");
  const double gamma_p = 1.0 / *p.lifetime();
  double rate = 0.0;
  for (const Beam& beam : beams) {
    const double delta = beam_detuning(atom, beam, ManifoldTag::P32);
    const RabiMatrix r = rabi_matrix(beam, atom, atom.qudit(), ManifoldTag::P32);
    for (std::size_t e = 0; e < p.size(); ++e) rate += gamma_p * std::norm(r(level, e)) / (4.0 * delta * delta);
  }
  return rate;
}

ScatterError pi_pulse_scatter_error(double gamma_initial, double gamma_target, double t_g, const ScatterModel& model) {
  if (gamma_initial < 0.0 || gamma_target < 0.0 || t_g < 0.0)
    throw Error(ErrorKind::InvalidParameter, "rates and gate time must be >= 0");
  if (model.leave_fraction < 0.0 || model.leave_fraction > 1.0)
    throw Error(ErrorKind::InvalidParameter, "leave fraction must be in [0, 1]");
  ScatterError e;
  e.total = 0.5 * (gamma_initial + gamma_target) * t_g;
  e.non_erasure = e.total * (1.0 - model.leave_fraction);
  return e;
}

double cascade_population_bound(const CascadeCoupling& c) {
  const double in = c.a1 * c.a1 * c.a2 * c.a2;
  const double out = c.b1 * c.b1 * c.b2 * c.b2;
  const double gap = 4.0 * c.delta * c.delta * c.detuning * c.detuning;
  const double denom = in + out + gap;
  return denom > 0.0 ? in / denom : 0.0;
}

CascadeCoupling four_photon_cascade(const Atom& atom, std::span<const Beam> beams, const Eigen::VectorXd& energies,
                                    double omega_r, CascadeLevel which) {
  if (beams.size() < 2) throw Error(ErrorKind::InvalidParameter, "cascade needs a red and a blue beam");
  if (atom.qudit_manifold().size() < 4) throw Error(ErrorKind::InvalidParameter, "cascade needs four qudit levels");
  const RabiMatrix red = rabi_matrix(beams[0], atom, atom.qudit(), ManifoldTag::P32);
  const RabiMatrix blue = rabi_matrix(beams[1], atom, atom.qudit(), ManifoldTag::P32);
  CascadeCoupling c;
  c.delta = beam_detuning(atom, beams[0], ManifoldTag::P32);
  c.a1 = std::abs(red(0, 0));
  if (which == CascadeLevel::PlusThreeHalves) {
    c.a2 = std::abs(blue(1, 0));
    c.b1 = std::abs(red(1, 1));
    c.b2 = std::abs(blue(3, 1));
    c.detuning = omega_r - (energies(0) - energies(1));
  } else {
    c.a2 = std::abs(blue(2, 0));
    c.b1 = std::abs(red(2, 2));
    c.b2 = std::abs(blue(3, 2));
    c.detuning = (energies(0) - energies(2)) - omega_r;
  }
  return c;
}

FidelityBudget total_fidelity_budget(double t_g, double leakage, const DephasingModel& dephasing,
                                     double gamma_initial, double gamma_target, const ScatterModel& scatter) {
  if (!(t_g > 0.0)) throw Error(ErrorKind::InvalidParameter, "gate time must be positive");
  dephasing.validate();
  FidelityBudget b;
  b.pi_time = t_g;
  b.leakage = leakage;
  b.dephasing = 1.0 - decohered_flop(t_g, units::pi / t_g, dephasing.sigma_f, dephasing.gamma);
  b.scatter = pi_pulse_scatter_error(gamma_initial, gamma_target, t_g, scatter).total;
  b.total = b.leakage + b.dephasing + b.scatter;
  return b;
}

}  // namespace raman
