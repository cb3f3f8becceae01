#include "raman/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fftw3.h>
#include <fmt/format.h>

#include "raman/error.hpp"
#include "raman/parallel.hpp"
#include "raman/pathways.hpp"
#include "raman/units.hpp"

namespace raman {
namespace {

constexpr cdouble kI{0.0, 1.0};

double ramp_profile(EnvelopeShape shape, double x) {
  const double s = std::sin(0.5 * units::pi * std::clamp(x, 0.0, 1.0));
  const double s2 = s * s;
  return shape == EnvelopeShape::Sin4 ? s2 * s2 : s2;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

}  // namespace

std::string_view to_string(EnvelopeShape shape) {
  switch (shape) {
    case EnvelopeShape::Square: return "square";
    case EnvelopeShape::Sin2: return "sin2";
    case EnvelopeShape::Sin4: return "sin4";
    case EnvelopeShape::Tabulated: return "tabulated";
  }
  return "?";
}

EnvelopeShape envelope_shape_from_string(std::string_view name) {
  if (name == "square") return EnvelopeShape::Square;
  if (name == "sin2") return EnvelopeShape::Sin2;
  if (name == "sin4") return EnvelopeShape::Sin4;
  if (name == "tabulated") return EnvelopeShape::Tabulated;
  throw Error(ErrorKind::InvalidParameter, "unknown envelope shape '" + std::string(name) + "'");
}

PulseEnvelope PulseEnvelope::square(double duration) {
  if (!(duration > 0.0)) throw Error(ErrorKind::InvalidParameter, "pulse duration must be positive");
  PulseEnvelope e;
  e.shape_ = EnvelopeShape::Square;
  e.duration_ = duration;
  return e;
}

PulseEnvelope PulseEnvelope::ramped(EnvelopeShape shape, double duration, double ramp_fraction,
                                    std::vector<std::size_t> shaped_beams) {
  if (!(duration > 0.0)) throw Error(ErrorKind::InvalidParameter, "pulse duration must be positive");
  if (shape != EnvelopeShape::Sin2 && shape != EnvelopeShape::Sin4)
    throw Error(ErrorKind::InvalidParameter, "ramped envelopes are sin2 or sin4");
  if (!(ramp_fraction > 0.0 && ramp_fraction <= 0.5))
    throw Error(ErrorKind::InvalidParameter, "ramp fraction must be in (0, 0.5]");
  PulseEnvelope e;
  e.shape_ = shape;
  e.duration_ = duration;
  e.ramp_fraction_ = ramp_fraction;
  e.shaped_ = std::move(shaped_beams);
  return e;
}

PulseEnvelope PulseEnvelope::tabulated(std::vector<double> times, std::vector<double> values,
                                       std::vector<std::size_t> shaped_beams) {
  if (times.size() < 2 || times.size() != values.size())
    throw Error(ErrorKind::InvalidParameter, "tabulated envelope needs matching time/value arrays of length >= 2");
  if (times.front() != 0.0) throw Error(ErrorKind::InvalidParameter, "tabulated envelope must start at t = 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw Error(ErrorKind::InvalidParameter, "tabulated times must increase");
  for (double v : values)
    if (v < 0.0 || v > 1.0) throw Error(ErrorKind::InvalidParameter, "tabulated amplitude outside [0, 1]");
  PulseEnvelope e;
  e.shape_ = EnvelopeShape::Tabulated;
  e.duration_ = times.back();
  e.times_ = std::move(times);
  e.values_ = std::move(values);
  e.shaped_ = std::move(shaped_beams);
  return e;
}

double PulseEnvelope::amplitude(double t) const {
  if (t < 0.0 || t > duration_) return 0.0;
  switch (shape_) {
    case EnvelopeShape::Square: return 1.0;
    case EnvelopeShape::Sin2:
    case EnvelopeShape::Sin4: {
      const double ramp = ramp_fraction_ * duration_;
      if (t < ramp) return ramp_profile(shape_, t / ramp);
      if (t > duration_ - ramp) return ramp_profile(shape_, (duration_ - t) / ramp);
      return 1.0;
    }
    case EnvelopeShape::Tabulated: {
      auto it = std::upper_bound(times_.begin(), times_.end(), t);
      if (it == times_.end()) return values_.back();
      const auto i = static_cast<std::size_t>(it - times_.begin());
      const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
      return values_[i - 1] + w * (values_[i] - values_[i - 1]);
    }
  }
  return 0.0;
}

double PulseEnvelope::beam_amplitude(std::size_t beam, double t) const {
  if (t < 0.0 || t > duration_) return 0.0;
  if (shape_ == EnvelopeShape::Square) return 1.0;
  if (std::find(shaped_.begin(), shaped_.end(), beam) != shaped_.end()) return amplitude(t);
  return 1.0;
}

EffectiveHamiltonian::EffectiveHamiltonian(Eigen::VectorXd bare, std::vector<CouplingTerm> terms,
                                           std::size_t beam_count)
    : bare_(std::move(bare)), terms_(std::move(terms)), beam_count_(beam_count) {
  if (bare_.size() > 16) throw Error(ErrorKind::InvalidParameter, "effective Hamiltonian limited to 16 levels");
  for (const auto& t : terms_)
    if (t.row >= dimension() || t.col >= dimension() || t.beam_a >= beam_count_ || t.beam_b >= beam_count_)
      throw Error(ErrorKind::InvalidParameter, "coupling term index out of range");
}

Eigen::VectorXd EffectiveHamiltonian::static_diagonal() const {
  Eigen::VectorXd d = bare_;
  for (const auto& t : terms_)
    if (t.row == t.col && t.beat == 0.0) d(static_cast<Eigen::Index>(t.row)) += t.amplitude.real();
  return d;
}

SmallMatrix EffectiveHamiltonian::matrix(double t, std::span<const double> amplitudes,
                                         const Eigen::VectorXd& frame) const {
  const auto n = static_cast<Eigen::Index>(dimension());
  SmallMatrix m = SmallMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) m(k, k) = bare_(k) - frame(k);
  for (const auto& term : terms_) {
    const double f = amplitudes[term.beam_a] * amplitudes[term.beam_b];
    if (f == 0.0) continue;
    const auto r = static_cast<Eigen::Index>(term.row);
    const auto c = static_cast<Eigen::Index>(term.col);
    const double w = term.beat + frame(r) - frame(c);
    m(r, c) += f * term.amplitude * std::polar(1.0, w * t);
  }
  return m;
}

double EffectiveHamiltonian::fastest_frequency(const Eigen::VectorXd& frame) const {
  double w = 0.0;
  for (const auto& term : terms_) {
    if (term.amplitude == cdouble{0.0}) continue;
    const auto r = static_cast<Eigen::Index>(term.row);
    const auto c = static_cast<Eigen::Index>(term.col);
    w = std::max(w, std::abs(term.beat + frame(r) - frame(c)));
  }
  return w;
}

double EffectiveHamiltonian::norm_bound(const Eigen::VectorXd& frame) const {
  Eigen::VectorXd row = (bare_ - frame).cwiseAbs();
  for (const auto& term : terms_) row(static_cast<Eigen::Index>(term.row)) += std::abs(term.amplitude);
  return row.size() ? row.maxCoeff() : 0.0;
}

EffectiveHamiltonian build_effective_hamiltonian(const Atom& atom, std::span<const Beam> beams, bool include_f) {
  const std::vector<ManifoldTag> uppers = pathway_uppers(atom, include_f);
  const RabiSet rabi = make_rabi_set(atom, beams, uppers);
  const std::size_t dim = atom.qudit_manifold().size();

  std::vector<CouplingTerm> terms;
  for (std::size_t a = 0; a < beams.size(); ++a) {
    for (std::size_t b = 0; b < beams.size(); ++b) {
      const double beat = beams[a].frequency_offset - beams[b].frequency_offset;
      for (std::size_t k = 0; k < dim; ++k) {
        for (std::size_t l = 0; l < dim; ++l) {
          cdouble amp{0.0};
          for (ManifoldTag up : uppers) {
            const double inv = 0.5 * (1.0 / beam_detuning(atom, beams[a], up) + 1.0 / beam_detuning(atom, beams[b], up));
            const RabiMatrix& ra = rabi.at({a, up});
            const RabiMatrix& rb = rabi.at({b, up});
            for (std::size_t e = 0; e < atom.manifold(up).size(); ++e)
              amp += std::conj(ra(k, e)) * rb(l, e) * inv / 4.0;
          }
          if (amp != cdouble{0.0}) terms.push_back({k, l, a, b, amp, beat});
        }
      }
    }
  }
  return EffectiveHamiltonian(atom.qudit_energies(), std::move(terms), beams.size());
}

namespace {

struct Stepper {
  const EffectiveHamiltonian& h;
  const PulseEnvelope* envelope;
  const Eigen::VectorXd& frame;
  std::vector<double> amps;

  SmallMatrix at(double t) {
    for (std::size_t b = 0; b < amps.size(); ++b) amps[b] = envelope ? envelope->beam_amplitude(b, t) : 1.0;
    return h.matrix(t, amps, frame);
  }

  SmallMatrix step(double t, double dt) {
    static const double c = std::sqrt(3.0) / 6.0;
    const SmallMatrix h1 = at(t + dt * (0.5 - c));
    const SmallMatrix h2 = at(t + dt * (0.5 + c));
    SmallMatrix k = (0.5 * dt) * (h1 + h2) - kI * (std::sqrt(3.0) / 12.0 * dt * dt) * (h2 * h1 - h1 * h2);
    k = (0.5 * (k + k.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<SmallMatrix> es(k);
    const auto& v = es.eigenvectors();
    SmallVector phase(k.rows());
    for (Eigen::Index i = 0; i < k.rows(); ++i) phase(i) = std::polar(1.0, -es.eigenvalues()(i));
    return v * phase.asDiagonal() * v.adjoint();
  }
};

std::size_t step_count(const EffectiveHamiltonian& h, double span, const Eigen::VectorXd& frame,
                       const PropagationOptions& options) {
  double dt = span;
  const double norm = h.norm_bound(frame);
  if (norm > 0.0) dt = std::min(dt, options.max_phase / norm);
  const double fastest = h.fastest_frequency(frame);
  if (fastest > 0.0) dt = std::min(dt, units::two_pi / (fastest * options.steps_per_period));
  return static_cast<std::size_t>(std::ceil(span / dt - 1e-12));
}

}  // namespace

Eigen::MatrixXcd propagator(const EffectiveHamiltonian& h, double t0, double t1, const PulseEnvelope* envelope,
                            const Eigen::VectorXd& frame, const PropagationOptions& options) {
  if (frame.size() != static_cast<Eigen::Index>(h.dimension()))
    throw Error(ErrorKind::InvalidParameter, "frame size mismatch");
  const auto n = static_cast<Eigen::Index>(h.dimension());
  SmallMatrix u = SmallMatrix::Identity(n, n);
  const double span = t1 - t0;
  if (span == 0.0) return u;
  const std::size_t steps = std::max<std::size_t>(1, step_count(h, std::abs(span), frame, options));
  const double dt = span / static_cast<double>(steps);
  Stepper stepper{h, envelope, frame, std::vector<double>(h.beam_count(), 1.0)};
  for (std::size_t s = 0; s < steps; ++s) u = (stepper.step(t0 + dt * static_cast<double>(s), dt) * u).eval();
  return u;
}

Trajectory propagate(const EffectiveHamiltonian& h, const Eigen::VectorXcd& psi0, double duration,
                     const PulseEnvelope& envelope, const PropagationOptions& options) {
  if (psi0.size() != static_cast<Eigen::Index>(h.dimension()))
    throw Error(ErrorKind::InvalidState, "initial state has the wrong dimension");
  if (std::abs(psi0.squaredNorm() - 1.0) > 1e-9) throw Error(ErrorKind::InvalidState, "initial state is not normalized");
  if (!(duration > 0.0)) throw Error(ErrorKind::InvalidParameter, "duration must be positive");
  if (options.samples < 2) throw Error(ErrorKind::InvalidParameter, "need at least two samples");

  const Eigen::VectorXd& frame = h.bare();
  const std::size_t intervals = options.samples - 1;
  const std::size_t total = std::max<std::size_t>(1, step_count(h, duration, frame, options));
  const std::size_t per_sample = (total + intervals - 1) / intervals;
  const double dt = duration / static_cast<double>(per_sample * intervals);

  Trajectory traj;
  traj.times.resize(options.samples);
  traj.amplitudes.resize(static_cast<Eigen::Index>(options.samples), psi0.size());
  Stepper stepper{h, &envelope, frame, std::vector<double>(h.beam_count(), 1.0)};
  SmallVector psi = psi0;
  traj.times[0] = 0.0;
  traj.amplitudes.row(0) = psi.transpose();
  for (std::size_t s = 0; s < intervals; ++s) {
    for (std::size_t k = 0; k < per_sample; ++k) {
      const double t = dt * static_cast<double>(s * per_sample + k);
      psi = (stepper.step(t, dt) * psi).eval();
    }
    traj.times[s + 1] = dt * static_cast<double>((s + 1) * per_sample);
    traj.amplitudes.row(static_cast<Eigen::Index>(s + 1)) = psi.transpose();
  }
  traj.populations = traj.amplitudes.cwiseAbs2();
  traj.description = fmt::format("envelope={} duration={:.9g}s steps={}", to_string(envelope.shape()), duration,
                                 per_sample * intervals);
  return traj;
}

PiPulseMetrics pi_pulse_metrics(const Trajectory& traj, std::size_t initial, std::size_t target) {
  const auto n = static_cast<Eigen::Index>(traj.size());
  const auto dim = traj.populations.cols();
  if (static_cast<Eigen::Index>(target) >= dim || static_cast<Eigen::Index>(initial) >= dim)
    throw Error(ErrorKind::InvalidParameter, "level index out of range");
  const auto tcol = static_cast<Eigen::Index>(target);
  const auto icol = static_cast<Eigen::Index>(initial);

  PiPulseMetrics m;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double inter = 1.0 - traj.populations(r, tcol) - (initial == target ? 0.0 : traj.populations(r, icol));
    m.max_intermediate = std::max(m.max_intermediate, inter);
  }
  m.final_leakage = std::max(0.0, 1.0 - traj.populations(n - 1, tcol) - traj.populations(n - 1, icol));

  for (Eigen::Index r = 1; r + 1 < n; ++r) {
    const double p = traj.populations(r, tcol);
    if (p < 0.5 || p < traj.populations(r - 1, tcol) || p <= traj.populations(r + 1, tcol)) continue;
    const double t = traj.times[static_cast<std::size_t>(r)];
    const double window = 0.25 * t;
    bool dominant = true;
    bool falls_after = false;
    for (Eigen::Index q = 0; q < n && dominant; ++q) {
      const double tq = traj.times[static_cast<std::size_t>(q)];
      if (std::abs(tq - t) > window) continue;
      if (traj.populations(q, tcol) > p) dominant = false;
      if (tq > t) falls_after = true;
    }
    if (!dominant || !falls_after || t + window > traj.times.back()) continue;
    const double y0 = traj.populations(r - 1, tcol);
    const double y2 = traj.populations(r + 1, tcol);
    const double denom = y0 - 2.0 * p + y2;
    const double shift = denom < 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
    const double h = traj.times[static_cast<std::size_t>(r + 1)] - t;
    m.pi_time = t + shift * h;
    m.fidelity = p;
    return m;
  }
  throw Error(ErrorKind::InsufficientDuration, "no population maximum of the target inside the trajectory");
}

std::vector<std::pair<double, double>> rabi_spectroscopy(const std::function<EffectiveHamiltonian(double)>& builder,
                                                         std::span<const double> offsets, double duration,
                                                         std::size_t initial, std::size_t target,
                                                         const PulseEnvelope& envelope,
                                                         const PropagationOptions& options, unsigned workers) {
  PropagationOptions opt = options;
  opt.samples = 2;
  return parallel_map(offsets.size(), workers, [&](std::size_t i) {
    const EffectiveHamiltonian h = builder(offsets[i]);
    Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(h.dimension()));
    psi0(static_cast<Eigen::Index>(initial)) = 1.0;
    const Trajectory traj = propagate(h, psi0, duration, envelope, opt);
    return std::pair{offsets[i], traj.populations(1, static_cast<Eigen::Index>(target))};
  });
}

namespace {

// Residual of the best linear fit a + exp(-g t)(b cos wt + c sin wt).
double sinusoid_residual(std::span<const double> t, std::span<const double> y, double w, double g) {
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d aty = Eigen::Vector3d::Zero();
  double yy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double d = std::exp(-g * t[i]);
    const Eigen::Vector3d row(1.0, d * std::cos(w * t[i]), d * std::sin(w * t[i]));
    ata += row * row.transpose();
    aty += row * y[i];
    yy += y[i] * y[i];
  }
  const Eigen::Vector3d x = ata.ldlt().solve(aty);
  return yy - x.dot(aty);
}

template <class F>
double golden_minimize(F f, double lo, double hi, int iterations) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - r * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + r * (b - a); fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double extract_rabi_frequency(std::span<const double> times, std::span<const double> population) {
  const std::size_t n = times.size();
  if (n < 8 || population.size() != n) throw Error(ErrorKind::ExtractionFailed, "too few samples");
  const double dt = (times.back() - times.front()) / static_cast<double>(n - 1);
  if (!(dt > 0.0)) throw Error(ErrorKind::ExtractionFailed, "degenerate time grid");
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(times[i] - times[i - 1] - dt) > 1e-6 * dt)
      throw Error(ErrorKind::ExtractionFailed, "time grid must be uniform");

  const double mean = std::accumulate(population.begin(), population.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double p : population) var += (p - mean) * (p - mean);
  if (var / static_cast<double>(n) < 1e-14) throw Error(ErrorKind::ExtractionFailed, "population does not oscillate");

  const std::size_t m = next_pow2(16 * n);
  std::vector<double> in(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) in[i] = population[i] - mean;
  std::vector<fftw_complex> out(m / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in.data(), out.data(), FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  std::vector<double> mag(m / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::hypot(out[k][0], out[k][1]);
  const std::size_t k_min = std::max<std::size_t>(1, m / (2 * n));
  std::size_t k_peak = k_min;
  for (std::size_t k = k_min; k + 1 < mag.size(); ++k)
    if (mag[k] > mag[k_peak]) k_peak = k;
  std::vector<double> sorted(mag.begin() + static_cast<std::ptrdiff_t>(k_min), mag.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double median = sorted[sorted.size() / 2];
  if (k_peak <= k_min || k_peak + 1 >= mag.size() || mag[k_peak] < 10.0 * median)
    throw Error(ErrorKind::ExtractionFailed, "no spectral peak above the noise floor");

  const double y0 = mag[k_peak - 1], y1 = mag[k_peak], y2 = mag[k_peak + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  const double offset = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
  const double bin = units::two_pi / (static_cast<double>(m) * dt);
  double w = (static_cast<double>(k_peak) + offset) * bin;

  std::vector<double> t(times.begin(), times.end());
  for (double& x : t) x -= times.front();
  const double coarse = units::two_pi / (static_cast<double>(n) * dt);
  double g = 0.0;
  for (int round = 0; round < 3; ++round) {
    w = golden_minimize([&](double x) { return sinusoid_residual(t, population, x, g); }, w - coarse, w + coarse, 60);
    g = golden_minimize([&](double x) { return sinusoid_residual(t, population, w, x); }, 0.0, 0.5 * w, 60);
  }
  return w;
}

double extract_rabi_frequency(const Trajectory& traj, std::size_t target) {
  std::vector<double> p(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i)
    p[i] = traj.populations(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(target));
  return extract_rabi_frequency(traj.times, p);
}

double floquet_splitting(const Atom& atom, std::span<const Beam> beams, std::size_t initial, std::size_t final,
                         int photons, double omega_r, bool include_f, const PropagationOptions& options) {
  if (photons <= 0 || photons % 2 != 0) throw Error(ErrorKind::InvalidParameter, "photon count must be even");
  if (!(omega_r > 0.0)) throw Error(ErrorKind::InvalidParameter, "omega_r must be positive");
  const auto drive = with_offset(beams, omega_r);
  const EffectiveHamiltonian h = build_effective_hamiltonian(atom, drive, include_f);
  const Manifold& q = atom.qudit_manifold();
  const int two_dm = std::abs(q.two_m(initial) - q.two_m(final));
  if (two_dm == 0 || two_dm % 2 != 0) throw Error(ErrorKind::InvalidParameter, "initial and final must differ in m");
  const int dm = two_dm / 2;
  const Eigen::VectorXd& bare = h.bare();
  const double gap = bare(static_cast<Eigen::Index>(initial)) - bare(static_cast<Eigen::Index>(final));
  const double m_gap = 0.5 * (q.two_m(initial) - q.two_m(final));
  const double sign = (gap / m_gap) >= 0.0 ? 1.0 : -1.0;
  const double omega_s = sign * photons * omega_r / (2.0 * dm);

  Eigen::VectorXd frame(bare.size());
  for (Eigen::Index k = 0; k < frame.size(); ++k) frame(k) = omega_s * 0.5 * q.two_m(static_cast<std::size_t>(k));
  const int g = std::gcd(2 * dm, photons);
  const double period = units::two_pi * 2.0 * dm / (g * omega_r);

  const Eigen::MatrixXcd u = propagator(h, 0.0, period, nullptr, frame, options);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(u);
  const auto& vec = es.eigenvectors();
  std::vector<std::pair<double, Eigen::Index>> weight;
  for (Eigen::Index c = 0; c < vec.cols(); ++c)
    weight.push_back({std::norm(vec(static_cast<Eigen::Index>(initial), c)) + std::norm(vec(static_cast<Eigen::Index>(final), c)), c});
  std::sort(weight.begin(), weight.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const double e1 = -std::arg(es.eigenvalues()(weight[0].second)) / period;
  const double e2 = -std::arg(es.eigenvalues()(weight[1].second)) / period;
  const double zone = units::two_pi / period;
  double d = std::fmod(std::abs(e1 - e2), zone);
  return std::min(d, zone - d);
}

NumericRabi numeric_rabi_frequency(const Atom& atom, std::span<const Beam> beams, std::size_t initial,
                                   std::size_t final, int photons, double omega_guess, double scale_hint,
                                   bool include_f, const PropagationOptions& options) {
  auto s2 = [&](double w) {
    const double s = floquet_splitting(atom, beams, initial, final, photons, w, include_f, options);
    return s * s;
  };
  NumericRabi out;
  double w = omega_guess;
  double h = std::max(4.0 * std::abs(scale_hint) / photons, units::hz_to_angular(1.0));
  for (int it = 0; it < 12; ++it) {
    out.iterations = it + 1;
    const double fm = s2(w - h), f0 = s2(w), fp = s2(w + h);
    const double curv = fm - 2.0 * f0 + fp;
    double step;
    if (curv <= 0.0) {
      step = fm < fp ? -h : h;
      h *= 2.0;
    } else {
      step = 0.5 * h * (fm - fp) / curv;
      if (std::abs(step) > 2.0 * h) step = std::copysign(2.0 * h, step);
      h = std::max(std::abs(step), 0.25 * h);
    }
    w += step;
    if (std::abs(step) < units::hz_to_angular(1e-3)) break;
  }
  out.resonance = w;
  out.rabi = std::sqrt(s2(w));
  return out;
}

std::vector<PsdPoint> pulse_psd(const PulseEnvelope& envelope, double carrier, double sample_rate, std::size_t beam) {
  if (!(envelope.duration() > 0.0)) throw Error(ErrorKind::InvalidParameter, "pulse duration must be positive");
  const double carrier_hz = units::angular_to_hz(carrier);
  if (!(sample_rate > 4.0 * carrier_hz)) throw Error(ErrorKind::InvalidParameter, "sample rate must exceed 4x the carrier");
  const auto n = static_cast<std::size_t>(std::floor(envelope.duration() * sample_rate)) + 1;
  if (n < 2) throw Error(ErrorKind::InvalidParameter, "pulse shorter than one sample");
  const std::size_t m = next_pow2(8 * n);
  std::vector<double> in(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    in[i] = envelope.beam_amplitude(beam, t) * std::cos(carrier * t);
  }
  std::vector<fftw_complex> out(m / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in.data(), out.data(), FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  std::vector<double> power(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) power[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  const double peak = *std::max_element(power.begin(), power.end());
  std::vector<PsdPoint> psd(power.size());
  for (std::size_t k = 0; k < power.size(); ++k) {
    psd[k].offset_hz = static_cast<double>(k) * sample_rate / static_cast<double>(m) - carrier_hz;
    psd[k].db = 10.0 * std::log10(std::max(power[k] / peak, 1e-300));
  }
  return psd;
}

double psd_peak_near(std::span<const PsdPoint> psd, double offset_hz, double half_width_hz) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : psd)
    if (std::abs(std::abs(p.offset_hz) - offset_hz) <= half_width_hz) best = std::max(best, p.db);
  return best;
}

}  // namespace raman
