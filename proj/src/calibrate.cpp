#include "raman/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "raman/dynamics.hpp"
#include "raman/error.hpp"
#include "raman/noise.hpp"
#include "raman/pathways.hpp"
#include "raman/stark.hpp"
#include "raman/units.hpp"

namespace raman {
namespace {

bool frequency_kind(DatasetKind kind) {
  return kind == DatasetKind::SplittingVsPower || kind == DatasetKind::RabiVsPower;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (trim(field.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::InvalidParameter, fmt::format("line {}: '{}' is not a number", line, field));
}

Eigen::MatrixXd jacobian(const LeastSquaresProblem& problem, const Eigen::VectorXd& p, const Eigen::VectorXd& r0) {
  Eigen::MatrixXd j(r0.size(), p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double h = 1e-6 * std::max(std::abs(p(k)), problem.scale(k));
    Eigen::VectorXd q = p;
    q(k) += h;
    j.col(k) = (problem.residuals(q) - r0) / h;
  }
  return j;
}

// Largest |cos| between a Jacobian column and the residual.
double gradient_measure(const Eigen::MatrixXd& j, const Eigen::VectorXd& r) {
  const double rn = r.norm();
  if (rn == 0.0) return 0.0;
  double g = 0.0;
  for (Eigen::Index k = 0; k < j.cols(); ++k) {
    const double cn = j.col(k).norm();
    if (cn > 0.0) g = std::max(g, std::abs(j.col(k).dot(r)) / (cn * rn));
  }
  return g;
}

void check_rank(const LeastSquaresProblem& problem, const Eigen::MatrixXd& j, double tolerance) {
  const Eigen::MatrixXd scaled = j * problem.scale.asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double top = s.size() ? s(0) : 0.0;
  std::string nulls;
  for (Eigen::Index k = 0; k < scaled.cols(); ++k) {
    const double sv = k < s.size() ? s(k) : 0.0;
    if (top > 0.0 && sv > tolerance * top) continue;
    std::string dir;
    for (Eigen::Index c = 0; c < scaled.cols(); ++c) {
      const double v = svd.matrixV()(c, k);
      if (std::abs(v) > 0.05)
        dir += fmt::format("{}{:+.3f} {}", dir.empty() ? "" : " ", v, problem.names[static_cast<std::size_t>(c)]);
    }
    nulls += fmt::format("{}[{}]", nulls.empty() ? "" : ", ", dir);
  }
  if (!nulls.empty()) throw Error(ErrorKind::UnderconstrainedFit, "null directions " + nulls);
}

double polarization_amplitude_remainder(double a, double b) {
  const double rest = 1.0 - a * a - b * b;
  if (rest < 0.0) throw Error(ErrorKind::InvalidParameter, "polarization amplitudes exceed unit norm");
  return std::sqrt(rest);
}

}  // namespace

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Flop: return "flop";
    case DatasetKind::Ramsey: return "ramsey";
    case DatasetKind::SplittingVsPower: return "splitting-vs-power";
    case DatasetKind::RabiVsPower: return "rabi-vs-power";
  }
  return "?";
}

DatasetKind dataset_kind_from_string(std::string_view name) {
  if (name == "flop") return DatasetKind::Flop;
  if (name == "ramsey") return DatasetKind::Ramsey;
  if (name == "splitting-vs-power") return DatasetKind::SplittingVsPower;
  if (name == "rabi-vs-power") return DatasetKind::RabiVsPower;
  throw Error(ErrorKind::InvalidParameter, "unknown dataset kind '" + std::string(name) + "'");
}

void Dataset::validate() const {
  if (y.size() != x.size() || sigma.size() != x.size())
    throw Error(ErrorKind::InvalidParameter, "dataset columns differ in length");
  for (double s : sigma)
    if (!(s > 0.0)) throw Error(ErrorKind::InvalidParameter, "dataset uncertainties must be positive");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw Error(ErrorKind::InvalidParameter, "dataset x must increase strictly");
}

Dataset read_dataset_csv(std::istream& in, DatasetKind kind) {
  Dataset d;
  d.kind = kind;
  const double scale = frequency_kind(kind) ? units::two_pi : 1.0;
  std::string line;
  std::size_t number = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      d.metadata[trim(line.substr(1, eq - 1))] = parse_double(trim(line.substr(eq + 1)), number);
      continue;
    }
    if (!header) {
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<double> row;
    while (std::getline(ss, field, ',')) row.push_back(parse_double(trim(field), number));
    if (row.size() != 3) throw Error(ErrorKind::InvalidParameter, fmt::format("line {}: expected x,y,sigma", number));
    d.x.push_back(row[0]);
    d.y.push_back(row[1] * scale);
    d.sigma.push_back(row[2] * scale);
  }
  d.validate();
  return d;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const bool freq = frequency_kind(data.kind);
  const double scale = freq ? 1.0 / units::two_pi : 1.0;
  out << "# kind=" << static_cast<int>(data.kind) << '\n';
  for (const auto& [k, v] : data.metadata) out << fmt::format("# {}={:.17g}\n", k, v);
  switch (data.kind) {
    case DatasetKind::Flop: out << "time_s,population,sigma\n"; break;
    case DatasetKind::Ramsey: out << "delay_s,contrast,sigma\n"; break;
    case DatasetKind::SplittingVsPower: out << "parallel_power_W,splitting_Hz,sigma_Hz\n"; break;
    case DatasetKind::RabiVsPower: out << "perp_power_W,rabi_Hz,sigma_Hz\n"; break;
  }
  for (std::size_t i = 0; i < data.size(); ++i)
    out << fmt::format("{:.17g},{:.17g},{:.17g}\n", data.x[i], data.y[i] * scale, data.sigma[i] * scale);
}

double FitResult::value(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return values(static_cast<Eigen::Index>(i));
  throw Error(ErrorKind::InvalidParameter, "no fit parameter '" + std::string(name) + "'");
}

double FitResult::uncertainty(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return uncertainties(static_cast<Eigen::Index>(i));
  throw Error(ErrorKind::InvalidParameter, "no fit parameter '" + std::string(name) + "'");
}

FitResult levenberg_marquardt(const LeastSquaresProblem& problem, const FitOptions& options) {
  const Eigen::Index n = problem.initial.size();
  if (problem.scale.size() != n || static_cast<Eigen::Index>(problem.names.size()) != n)
    throw Error(ErrorKind::InvalidParameter, "parameter names, initial values and scales differ in length");

  Eigen::VectorXd p = problem.initial;
  Eigen::VectorXd r = problem.residuals(p);
  if (r.size() < n) throw Error(ErrorKind::UnderconstrainedFit, "fewer residuals than parameters");
  double chi2 = r.squaredNorm();
  double lambda = options.initial_damping;
  Eigen::MatrixXd j = jacobian(problem, p, r);
  check_rank(problem, j, options.rank_tolerance);

  FitResult out;
  bool converged = false;
  int it = 0;
  for (; it < options.max_iterations && !converged; ++it) {
    const double g = gradient_measure(j, r);
    if (g < options.gradient_tolerance || chi2 == 0.0) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd jtr = j.transpose() * r;
    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index k = 0; k < n; ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-30);
      const Eigen::VectorXd step = -a.ldlt().solve(jtr);
      Eigen::VectorXd trial = p + step;
      Eigen::VectorXd rt;
      double chi2_trial = std::numeric_limits<double>::infinity();
      try {
        rt = problem.residuals(trial);
        chi2_trial = rt.allFinite() ? rt.squaredNorm() : chi2_trial;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InvalidParameter && e.kind() != ErrorKind::DegenerateResonance) throw;
      }
      if (chi2_trial <= chi2) {
        const double rel_step = (step.array() / p.cwiseAbs().cwiseMax(problem.scale).array()).abs().maxCoeff();
        const double rel_drop = (chi2 - chi2_trial) / std::max(chi2, 1e-300);
        p = trial;
        r = rt;
        chi2 = chi2_trial;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        j = jacobian(problem, p, r);
        if (rel_step < options.step_tolerance || (rel_drop < 1e-14 && rel_step < 1e-6)) converged = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e16) {
          converged = gradient_measure(j, r) < 1e-4;
          break;
        }
      }
    }
    if (!accepted) break;
  }

  out.names = problem.names;
  out.values = p;
  out.residuals = r;
  out.chi2 = chi2;
  out.dof = static_cast<int>(r.size() - n);
  out.iterations = it;
  out.gradient_norm = gradient_measure(j, r);
  out.converged = converged;
  if (!converged)
    throw Error(ErrorKind::FitFailed, fmt::format("no convergence after {} iterations (chi2 {:.6g}, gradient {:.3g})",
                                                  it, chi2, out.gradient_norm));
  const double variance = out.dof > 0 ? chi2 / out.dof : 1.0;
  const Eigen::MatrixXd cov = (j.transpose() * j).completeOrthogonalDecomposition().pseudoInverse() * variance;
  out.uncertainties = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

FitResult fit_flop(const Dataset& data, double sigma_f, const FitOptions& options) {
  data.validate();
  if (data.size() < 10) throw Error(ErrorKind::FitFailed, "flop fit needs at least 10 points");
  const double span = data.x.back() - data.x.front();
  double mean = 0.0;
  for (double v : data.y) mean += v;
  mean /= static_cast<double>(data.size());
  double var = 0.0;
  for (double v : data.y) var += (v - mean) * (v - mean);
  if (var < 1e-12 * static_cast<double>(data.size())) throw Error(ErrorKind::FitFailed, "flop data are constant");

  auto residuals = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double model = decohered_flop(data.x[i], p(0), sigma_f, 0.0) * std::exp(-p(1) * data.x[i]);
      r(static_cast<Eigen::Index>(i)) = (model - data.y[i]) / data.sigma[i];
    }
    return r;
  };

  double omega0 = 0.0;
  try {
    omega0 = extract_rabi_frequency(data.x, data.y);
  } catch (const Error&) {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 400; ++k) {
      const double w = units::pi / span * std::pow(10.0, 3.0 * k / 399.0);
      const double c = residuals(Eigen::Vector2d(w, 0.0)).squaredNorm();
      if (c < best) best = c, omega0 = w;
    }
  }
  LeastSquaresProblem problem{{"rabi", "gamma"}, Eigen::Vector2d(omega0, 0.0),
                              Eigen::Vector2d(std::abs(omega0), 1.0 / span), residuals};
  FitResult fit = levenberg_marquardt(problem, options);
  fit.values(0) = std::abs(fit.values(0));
  if (fit.values(0) * span < units::two_pi) throw Error(ErrorKind::FitFailed, "flop data span less than one period");
  return fit;
}

FitResult fit_ramsey(const Dataset& data, const FitOptions& options) {
  data.validate();
  if (data.size() < 3) throw Error(ErrorKind::FitFailed, "ramsey fit needs at least 3 points");
  const double amp0 = *std::max_element(data.y.begin(), data.y.end());
  double kappa0 = 1.0 / (data.x.back() * data.x.back());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.x[i] > 0.0 && data.y[i] < amp0 / std::exp(1.0)) {
      kappa0 = 2.0 / (data.x[i] * data.x[i]);
      break;
    }
  }
  auto residuals = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double model = p(1) * std::exp(-0.5 * p(0) * data.x[i] * data.x[i]);
      r(static_cast<Eigen::Index>(i)) = (model - data.y[i]) / data.sigma[i];
    }
    return r;
  };
  LeastSquaresProblem problem{{"kappa", "amplitude"}, Eigen::Vector2d(kappa0, amp0),
                              Eigen::Vector2d(kappa0, std::max(amp0, 1e-3)), residuals};
  FitResult k = levenberg_marquardt(problem, options);

  FitResult out = k;
  out.names = {"sigma_t", "amplitude"};
  const double kappa = k.values(0);
  const double dk = k.uncertainties(0);
  if (kappa <= std::max(dk, 0.0) || kappa <= 0.0) {
    out.unbounded = true;
    out.values(0) = std::numeric_limits<double>::infinity();
    out.uncertainties(0) = std::numeric_limits<double>::infinity();
  } else {
    out.values(0) = 1.0 / std::sqrt(kappa);
    out.uncertainties(0) = 0.5 * dk / std::pow(kappa, 1.5);
  }
  return out;
}

std::vector<Beam> BeamParameters::beams(double parallel_power, double perp_power, double omega_r) const {
  const double minus = 1.0 - parallel_pi - parallel_sigma_plus;
  if (minus < -1e-15 || parallel_pi < 0.0 || parallel_sigma_plus < 0.0)
    throw Error(ErrorKind::InvalidParameter, "parallel polarization fractions outside the simplex");
  return {
      Beam{"R_par", detuning, parallel_power, parallel_waist,
           polarization_from_fractions(std::max(minus, 0.0), parallel_pi, parallel_sigma_plus), 0.0},
      Beam{"R_perp", detuning, perp_power, perp_waist, linear_perpendicular_polarization(perp_pi), omega_r},
  };
}

double splitting_model(const Atom& atom, const BeamParameters& p, std::size_t pair, double parallel_power) {
  if (pair + 1 >= atom.qudit_manifold().size()) throw Error(ErrorKind::InvalidParameter, "splitting pair out of range");
  const auto beams = p.beams(parallel_power, 0.0, 0.0);
  const std::span<const Beam> par(beams.data(), 1);
  const Eigen::VectorXd e = dressed_energies(atom, par, true, ShiftMethod::SecondOrder);
  return e(static_cast<Eigen::Index>(pair)) - e(static_cast<Eigen::Index>(pair + 1));
}

double raman_rabi_model(const Atom& atom, const BeamParameters& p, std::size_t initial, double parallel_power,
                        double perp_power) {
  const std::size_t final = initial + 1;
  const auto beams = p.beams(parallel_power, perp_power, 0.0);
  const Resonance res = resonance_frequency(atom, beams, initial, final, 2, false, ShiftMethod::SecondOrder);
  const auto drive = with_offset(beams, res.omega_r);
  const double sign = res.energies(static_cast<Eigen::Index>(initial)) >= res.energies(static_cast<Eigen::Index>(final))
                          ? 1.0
                          : -1.0;
  const cdouble two = multiphoton_rabi(atom, drive, res.energies, initial, final, 2, false);
  const cdouble four = multiphoton_rabi(atom, drive, res.energies, initial, final, 4, false, sign * res.omega_r);
  return std::abs(two + four);
}

FitResult joint_fit_beams(const Atom& atom, const std::vector<Dataset>& splittings, const Dataset* rabi,
                          const BeamParameters& initial, const FitOptions& options) {
  for (const auto& d : splittings) {
    d.validate();
    if (d.kind != DatasetKind::SplittingVsPower || !d.metadata.count("pair"))
      throw Error(ErrorKind::InvalidParameter, "splitting datasets need kind splitting-vs-power and a 'pair' entry");
  }
  const bool with_rabi = rabi && rabi->size() > 0;
  if (with_rabi) {
    rabi->validate();
    if (rabi->kind != DatasetKind::RabiVsPower || !rabi->metadata.count("parallel_power"))
      throw Error(ErrorKind::InvalidParameter, "rabi dataset needs kind rabi-vs-power and 'parallel_power'");
  }

  // Polarization enters through signed amplitudes so the fit can cross the
  // simplex edges smoothly; fractions are their squares.
  auto params_of = [&](const Eigen::VectorXd& v) {
    BeamParameters b = initial;
    b.parallel_waist = v(0);
    b.perp_waist = v(1);
    polarization_amplitude_remainder(v(2), v(3));
    b.parallel_pi = v(2) * v(2);
    b.parallel_sigma_plus = v(3) * v(3);
    return b;
  };
  auto residuals = [&](const Eigen::VectorXd& v) {
    const BeamParameters b = params_of(v);
    std::vector<double> r;
    for (const auto& d : splittings) {
      const auto pair = static_cast<std::size_t>(d.metadata.at("pair"));
      for (std::size_t i = 0; i < d.size(); ++i)
        r.push_back((splitting_model(atom, b, pair, d.x[i]) - d.y[i]) / d.sigma[i]);
    }
    if (with_rabi) {
      const double par = rabi->metadata.at("parallel_power");
      const auto init = static_cast<std::size_t>(rabi->metadata.count("initial") ? rabi->metadata.at("initial") : 0.0);
      for (std::size_t i = 0; i < rabi->size(); ++i)
        r.push_back((raman_rabi_model(atom, b, init, par, rabi->x[i]) - rabi->y[i]) / rabi->sigma[i]);
    }
    return Eigen::Map<Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size())).eval();
  };

  Eigen::Vector4d start(initial.parallel_waist, initial.perp_waist, std::sqrt(initial.parallel_pi),
                        std::sqrt(initial.parallel_sigma_plus));
  Eigen::Vector4d scale(initial.parallel_waist, initial.perp_waist, 0.1, 0.1);
  LeastSquaresProblem problem{{"parallel_waist", "perp_waist", "parallel_pi_amplitude", "parallel_sigma_plus_amplitude"},
                              start, scale, residuals};
  return levenberg_marquardt(problem, options);
}

PerpPolarization constrain_perp_polarization(const Atom& atom, double shift, double shift_uncertainty, double power,
                                             double waist, double detuning) {
  auto differential = [&](double f_pi) {
    const std::vector<Beam> beam{
        Beam{"R_perp", detuning, power, waist, linear_perpendicular_polarization(f_pi), 0.0}};
    return light_shift_second_order(atom, 0, beam, false).value - light_shift_second_order(atom, 1, beam, false).value;
  };
  // The second-order differential shift is linear in the pi fraction.
  const double d0 = differential(0.0);
  const double d1 = differential(1.0);
  if (d1 == d0) throw Error(ErrorKind::InconsistentMeasurement, "differential shift does not depend on polarization");
  const double f = (shift - d0) / (d1 - d0);
  if (f < 0.0 || f > 1.0)
    throw Error(ErrorKind::InconsistentMeasurement,
                fmt::format("shift {:.6g} Hz needs pi fraction {:.4f}", units::angular_to_hz(shift), f));
  PerpPolarization out;
  out.pi = f;
  out.sigma_minus = out.sigma_plus = 0.5 * (1.0 - f);
  out.pi_uncertainty = std::abs(shift_uncertainty / (d1 - d0));
  return out;
}

}  // namespace raman
