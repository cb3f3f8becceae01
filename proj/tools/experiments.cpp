#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "raman/calibrate.hpp"
#include "raman/dynamics.hpp"
#include "raman/error.hpp"
#include "raman/noise.hpp"
#include "raman/operating_point.hpp"
#include "raman/parallel.hpp"
#include "raman/pathways.hpp"
#include "raman/stark.hpp"
#include "raman/units.hpp"
#include "svg.hpp"

namespace raman::cli {
namespace {

using json = nlohmann::ordered_json;
using units::two_pi;

// Everything a command needs, parsed once from the config.
struct Setup {
  Atom atom = Atom::calcium40();
  BeamParameters geometry;
  double parallel_power = 0.0;
  double perp_power = 0.0;
  std::size_t initial = 0;
  std::size_t final = 0;
  int photons = 4;
  bool include_f = false;
  PropagationOptions propagation;

  std::vector<Beam> beams(double perp) const { return geometry.beams(parallel_power, perp, 0.0); }
  std::vector<Beam> beams() const { return beams(perp_power); }
  int delta_m() const {
    const auto& q = atom.qudit_manifold();
    return std::abs(q.two_m(initial) - q.two_m(final)) / 2;
  }
};

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::Config, what); }

std::size_t level_index(const Atom& atom, const Config& c, const std::string& key) {
  const int two_m = c.two_m(key);
  const auto idx = atom.qudit_manifold().index_of(two_m);
  if (!idx) config_error(key + " = " + c.str(key) + ": no such sublevel in the qudit manifold");
  return *idx;
}

Setup make_setup(const Config& c) {
  Setup s;
  if (c.str("atom.preset") != "calcium40") config_error("atom.preset: only 'calcium40' is available");
  const double zeeman = c.number("atom.zeeman_mhz");
  if (!(zeeman > 0.0)) config_error("atom.zeeman_mhz must be positive");
  const Atom base = Atom::calcium40();
  s.atom = base.with_field(base.field() * zeeman / units::angular_to_hz(base.zeeman_splitting(ManifoldTag::D52)) * 1e6);

  s.parallel_power = c.number("beams.parallel_power_mw") * 1e-3;
  s.perp_power = c.number("beams.perp_power_mw") * 1e-3;
  if (s.parallel_power < 0.0 || s.perp_power < 0.0) config_error("beam powers must be >= 0");
  s.geometry.detuning = units::THz(c.number("beams.detuning_thz"));
  if (s.geometry.detuning == 0.0) config_error("beams.detuning_thz must be nonzero");
  s.geometry.parallel_waist = c.number("beams.parallel_waist_um") * 1e-6;
  s.geometry.perp_waist = c.number("beams.perp_waist_um") * 1e-6;
  if (!(s.geometry.parallel_waist > 0.0) || !(s.geometry.perp_waist > 0.0)) config_error("beam waists must be positive");
  const auto fr = c.numbers("beams.parallel_fractions");
  if (fr.size() != 3 || *std::min_element(fr.begin(), fr.end()) < 0.0 ||
      std::abs(fr[0] + fr[1] + fr[2] - 1.0) > 1e-6)
    config_error("beams.parallel_fractions: three non-negative fractions (sigma-, pi, sigma+) summing to 1");
  s.geometry.parallel_pi = fr[1];
  s.geometry.parallel_sigma_plus = fr[2];
  s.geometry.perp_pi = c.number("beams.perp_pi_fraction");
  if (s.geometry.perp_pi < 0.0 || s.geometry.perp_pi > 1.0) config_error("beams.perp_pi_fraction must be in [0, 1]");

  s.initial = level_index(s.atom, c, "transition.initial_mj");
  s.final = level_index(s.atom, c, "transition.final_mj");
  if (s.initial == s.final) config_error("transition: initial and final levels coincide");
  const long photons = c.integer("transition.photons");
  if (photons < 2 || photons > 8 || photons % 2 != 0) config_error("transition.photons must be 2, 4, 6 or 8");
  s.photons = static_cast<int>(photons);
  if (s.delta_m() > s.photons) config_error("transition: |delta m| exceeds the photon number");
  s.include_f = c.flag("transition.include_f");

  const long samples = c.integer("pulse.samples");
  if (samples < 2 || samples > 1000000) config_error("pulse.samples must be in [2, 1e6]");
  s.propagation.samples = static_cast<std::size_t>(samples);
  const long spp = c.integer("pulse.steps_per_period");
  if (spp < 4) config_error("pulse.steps_per_period must be >= 4");
  s.propagation.steps_per_period = static_cast<int>(spp);
  s.propagation.max_phase = c.number("pulse.max_phase");
  if (!(s.propagation.max_phase > 0.0) || s.propagation.max_phase > 1.0) config_error("pulse.max_phase must be in (0, 1]");
  return s;
}

std::vector<double> sweep_powers(const Config& c) {
  const double a = c.number("sweep.start_mw"), b = c.number("sweep.stop_mw");
  const long n = c.integer("sweep.points");
  if (n < 2) config_error("sweep.points must be >= 2");
  if (!(a > 0.0) || !(b > a)) config_error("sweep: need 0 < start_mw < stop_mw");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = 1e-3 * (a + (b - a) * k / (n - 1));
  return out;
}

EnvelopeShape configured_shape(const Config& c) {
  EnvelopeShape shape;
  try {
    shape = envelope_shape_from_string(c.str("pulse.shape"));
  } catch (const Error&) {
    config_error("pulse.shape must be square, sin2 or sin4");
  }
  if (shape == EnvelopeShape::Tabulated) config_error("pulse.shape: tabulated envelopes are library-only");
  const double rf = c.number("pulse.ramp_fraction");
  if (!(rf > 0.0) || rf > 0.5) config_error("pulse.ramp_fraction must be in (0, 0.5]");
  return shape;
}

PulseEnvelope make_envelope(EnvelopeShape shape, double duration, double ramp_fraction) {
  return shape == EnvelopeShape::Square ? PulseEnvelope::square(duration)
                                        : PulseEnvelope::ramped(shape, duration, ramp_fraction);
}

// Ramp lengthening that keeps the same area of f^2 (the four-photon coupling
// scales with the square of the shaped field).
double area_stretch(EnvelopeShape shape, double ramp_fraction) {
  switch (shape) {
    case EnvelopeShape::Sin2: return 1.0 / (1.0 - 2.0 * (1.0 - 3.0 / 8.0) * ramp_fraction);
    case EnvelopeShape::Sin4: return 1.0 / (1.0 - 2.0 * (1.0 - 35.0 / 128.0) * ramp_fraction);
    default: return 1.0;
  }
}

std::string mj_label(const Atom& atom, std::size_t k) {
  const int two_m = atom.qudit_manifold().two_m(k);
  return fmt::format("{:+d}/2", two_m);
}

std::string g(double v) { return fmt::format("{:.10g}", v); }

json config_json(const Config& c) {
  json j = json::object();
  for (const auto& k : c.keys()) j[k] = c.str(k);
  return j;
}

json header(const RunContext& ctx, const std::string& command) {
  json j;
  j["command"] = command;
  j["seed"] = ctx.seed;
  j["config"] = config_json(ctx.config);
  return j;
}

OutputFile json_file(const std::string& name, const json& j) { return {name, j.dump(2) + "\n"}; }

// Whole-ladder two-photon drives have no isolated Floquet pair.
bool numeric_defined(const Setup& s) { return !(s.photons == 2 && s.delta_m() == 1); }

OperatingPoint drive_point(const Setup& s, double perp) {
  return operating_point(s.atom, s.beams(perp), s.initial, s.final, s.photons, s.include_f, numeric_defined(s),
                         s.propagation);
}

double drive_resonance(const OperatingPoint& op) {
  return op.numeric_rabi > 0.0 ? op.numeric_resonance : op.stark_resonance;
}

double drive_pi_time(const OperatingPoint& op) {
  return op.numeric_rabi > 0.0 ? op.numeric_pi_time() : op.analytic_pi_time();
}

Eigen::VectorXcd basis(std::size_t dim, std::size_t k) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(k)) = 1.0;
  return v;
}

double max_intermediate(const Trajectory& t, std::size_t initial, std::size_t final) {
  double m = 0.0;
  for (Eigen::Index r = 0; r < t.populations.rows(); ++r)
    m = std::max(m, 1.0 - t.populations(r, static_cast<Eigen::Index>(initial)) -
                        t.populations(r, static_cast<Eigen::Index>(final)));
  return m;
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::vector<double> local_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? i : i + 1;
    if (a != b && y[a] > 0.0 && y[b] > 0.0) out[i] = std::log(y[b] / y[a]) / std::log(x[b] / x[a]);
  }
  return out;
}

// ---------------------------------------------------------------- flop

std::vector<OutputFile> cmd_flop(const RunContext& ctx) {
  const Setup s = make_setup(ctx.config);
  const EnvelopeShape shape = configured_shape(ctx.config);
  const double rf = ctx.config.number("pulse.ramp_fraction");
  const double requested = ctx.config.number("pulse.duration_us") * 1e-6;
  if (requested < 0.0) config_error("pulse.duration_us must be >= 0");

  const OperatingPoint op = drive_point(s, s.perp_power);
  const double tp = drive_pi_time(op);
  const double duration = requested > 0.0 ? requested : 4.0 * tp * area_stretch(shape, rf);
  const auto drive = with_offset(s.beams(), drive_resonance(op));
  const EffectiveHamiltonian h = build_effective_hamiltonian(s.atom, drive, s.include_f);
  const Trajectory traj = propagate(h, basis(h.dimension(), s.initial), duration, make_envelope(shape, duration, rf),
                                    s.propagation);

  std::string csv = "time_us";
  for (std::size_t k = 0; k < h.dimension(); ++k) csv += ",P_m" + mj_label(s.atom, k);
  csv += "\n";
  for (std::size_t r = 0; r < traj.size(); ++r) {
    csv += g(traj.times[r] * 1e6);
    for (std::size_t k = 0; k < h.dimension(); ++k)
      csv += "," + g(traj.populations(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)));
    csv += "\n";
  }

  json j = header(ctx, "flop");
  j["resonance_offset_hz"] = units::angular_to_hz(drive_resonance(op));
  j["shift_method"] = std::string(to_string(op.method));
  j["analytic_rabi_hz"] = units::angular_to_hz(std::abs(op.analytic));
  j["numeric_rabi_hz"] = op.numeric_rabi > 0.0 ? json(units::angular_to_hz(op.numeric_rabi)) : json(nullptr);
  j["expected_pi_time_us"] = tp * 1e6;
  j["duration_us"] = duration * 1e6;
  j["integrator"] = traj.description;
  try {
    const PiPulseMetrics m = pi_pulse_metrics(traj, s.initial, s.final);
    j["pi_time_us"] = m.pi_time * 1e6;
    j["fidelity"] = m.fidelity;
  } catch (const Error&) {
    j["pi_time_us"] = nullptr;
    j["fidelity"] = nullptr;
  }
  j["max_intermediate"] = max_intermediate(traj, s.initial, s.final);

  std::vector<OutputFile> out{{"flop.csv", csv}, json_file("flop.json", j)};
  if (ctx.svg) {
    std::vector<Series> series;
    for (std::size_t k = 0; k < h.dimension(); ++k) {
      Series sr{"m=" + mj_label(s.atom, k), {}, {}};
      for (std::size_t r = 0; r < traj.size(); ++r) {
        sr.x.push_back(traj.times[r] * 1e6);
        sr.y.push_back(traj.populations(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)));
      }
      series.push_back(std::move(sr));
    }
    out.push_back({"flop.svg", line_plot_svg({"Rabi flopping", "time (us)", "population"}, series)});
  }
  return out;
}

// ---------------------------------------------------------------- spectrum

std::vector<OutputFile> cmd_spectrum(const RunContext& ctx) {
  const Setup s = make_setup(ctx.config);
  const EnvelopeShape shape = configured_shape(ctx.config);
  const double rf = ctx.config.number("pulse.ramp_fraction");
  const long points = ctx.config.integer("spectrum.points");
  if (points < 3) config_error("spectrum.points must be >= 3");
  const double span_cfg = ctx.config.number("spectrum.span_khz");
  if (span_cfg < 0.0) config_error("spectrum.span_khz must be >= 0");

  const OperatingPoint op = drive_point(s, s.perp_power);
  const double tp = drive_pi_time(op);
  const double rabi = units::pi / tp;
  const double duration = ctx.config.number("pulse.duration_us") > 0.0 ? ctx.config.number("pulse.duration_us") * 1e-6
                                                                       : tp * area_stretch(shape, rf);
  // The resonance condition is on photons/2 * omega_r, so the line width in
  // omega_r shrinks by that factor.
  const double half = span_cfg > 0.0 ? units::kHz(span_cfg) / 2.0 : 8.0 * rabi / s.photons;
  const double centre = op.stark_resonance;
  std::vector<double> offsets(static_cast<std::size_t>(points));
  for (long k = 0; k < points; ++k)
    offsets[static_cast<std::size_t>(k)] = centre - half + 2.0 * half * k / (points - 1);

  const auto beams = s.beams();
  auto builder = [&](double w) { return build_effective_hamiltonian(s.atom, with_offset(beams, w), s.include_f); };
  const auto scan = rabi_spectroscopy(builder, offsets, duration, s.initial, s.final,
                                      make_envelope(shape, duration, rf), s.propagation, ctx.workers);

  const double bare = 2.0 * std::abs(s.atom.qudit_energies()(static_cast<Eigen::Index>(s.initial)) -
                                     s.atom.qudit_energies()(static_cast<Eigen::Index>(s.final))) /
                      s.photons;
  std::string csv = "offset_khz,detuning_from_bare_khz,P_target\n";
  std::size_t peak = 0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    csv += g(units::angular_to_hz(scan[i].first) / 1e3) + "," +
           g(units::angular_to_hz(scan[i].first - bare) / 1e3) + "," + g(scan[i].second) + "\n";
    if (scan[i].second > scan[peak].second) peak = i;
  }
  double peak_w = scan[peak].first;
  if (peak > 0 && peak + 1 < scan.size()) {
    const double y0 = scan[peak - 1].second, y1 = scan[peak].second, y2 = scan[peak + 1].second;
    const double d = y0 - 2.0 * y1 + y2;
    if (d < 0.0) peak_w += 0.5 * (y0 - y2) / d * (scan[1].first - scan[0].first);
  }

  json j = header(ctx, "spectrum");
  j["bare_resonance_hz"] = units::angular_to_hz(bare);
  j["stark_resonance_hz"] = units::angular_to_hz(op.stark_resonance);
  j["peak_hz"] = units::angular_to_hz(peak_w);
  j["peak_population"] = scan[peak].second;
  j["step_hz"] = units::angular_to_hz(scan[1].first - scan[0].first);
  j["duration_us"] = duration * 1e6;

  std::vector<OutputFile> out{{"spectrum.csv", csv}, json_file("spectrum.json", j)};
  if (ctx.svg) {
    Series sr{"P_target", {}, {}};
    for (const auto& [w, p] : scan) sr.x.push_back(units::angular_to_hz(w - bare) / 1e3), sr.y.push_back(p);
    out.push_back({"spectrum.svg", line_plot_svg({"Rabi spectroscopy", "omega_r - bare (kHz)", "population"}, {sr})});
  }
  return out;
}

// ---------------------------------------------------------------- power sweep

std::vector<OutputFile> cmd_power_sweep(const RunContext& ctx) {
  const Setup s = make_setup(ctx.config);
  const auto powers = sweep_powers(ctx.config);
  struct Row {
    double analytic, bare, numeric;
  };
  const auto rows = parallel_map(powers.size(), ctx.workers, [&](std::size_t i) {
    const OperatingPoint op = drive_point(s, powers[i]);
    const double w_bare = 2.0 * std::abs(s.atom.qudit_energies()(static_cast<Eigen::Index>(s.initial)) -
                                         s.atom.qudit_energies()(static_cast<Eigen::Index>(s.final))) /
                          s.photons;
    const auto drive = with_offset(s.beams(powers[i]), w_bare);
    const double bare = std::abs(
        multiphoton_rabi(s.atom, drive, s.atom.qudit_energies(), s.initial, s.final, s.photons, s.include_f));
    return Row{std::abs(op.analytic), bare, op.numeric_rabi};
  });

  std::vector<double> a, b, n;
  for (const auto& r : rows) a.push_back(r.analytic), b.push_back(r.bare), n.push_back(r.numeric);
  const auto sa = local_slopes(powers, a), sb = local_slopes(powers, b), sn = local_slopes(powers, n);
  const bool has_numeric = numeric_defined(s);

  std::string csv =
      "perp_power_mw,analytic_hz,analytic_bare_hz,numeric_hz,residual,slope_analytic,slope_analytic_bare,slope_numeric\n";
  for (std::size_t i = 0; i < powers.size(); ++i) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double num = has_numeric ? n[i] : nan;
    csv += fmt::format("{},{},{},{},{},{},{},{}\n", g(powers[i] * 1e3), g(units::angular_to_hz(a[i])),
                       g(units::angular_to_hz(b[i])), g(units::angular_to_hz(num)), g((a[i] - num) / num), g(sa[i]),
                       g(sb[i]), g(has_numeric ? sn[i] : nan));
  }
  json j = header(ctx, "power-sweep");
  j["slope_analytic"] = log_slope(powers, a);
  j["slope_analytic_bare"] = log_slope(powers, b);
  j["slope_numeric"] = has_numeric ? json(log_slope(powers, n)) : json(nullptr);
  if (!has_numeric) j["note"] = "two-photon delta m = 1 drives every neighbouring pair; no isolated numeric Rabi frequency";

  std::vector<OutputFile> out{{"power_sweep.csv", csv}, json_file("power_sweep.json", j)};
  if (ctx.svg) {
    std::vector<Series> series{{"analytic", {}, {}}, {"analytic (bare)", {}, {}}};
    if (has_numeric) series.push_back({"numeric", {}, {}});
    for (std::size_t i = 0; i < powers.size(); ++i) {
      for (auto& sr : series) sr.x.push_back(powers[i] * 1e3);
      series[0].y.push_back(units::angular_to_hz(a[i]));
      series[1].y.push_back(units::angular_to_hz(b[i]));
      if (has_numeric) series[2].y.push_back(units::angular_to_hz(n[i]));
    }
    out.push_back({"power_sweep.svg",
                   line_plot_svg({"Rabi frequency vs R_perp power", "P_perp (mW)", "Rabi (Hz)", true, true}, series)});
  }
  return out;
}

// ---------------------------------------------------------------- shape compare

struct ShapeRun {
  EnvelopeShape shape;
  double duration;
  Trajectory traj;
};

// Duration maximizing the final target population near the area-matched guess.
double best_duration(const EffectiveHamiltonian& h, const Setup& s, EnvelopeShape shape, double rf, double guess) {
  PropagationOptions fast = s.propagation;
  fast.samples = 2;
  auto transfer = [&](double t) {
    return propagate(h, basis(h.dimension(), s.initial), t, make_envelope(shape, t, rf), fast)
        .populations(1, static_cast<Eigen::Index>(s.final));
  };
  double lo = 0.85 * guess, hi = 1.15 * guess;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
  double fc = transfer(c), fd = transfer(d);
  for (int i = 0; i < 18; ++i) {
    if (fc > fd) {
      hi = d, d = c, fd = fc;
      c = hi - r * (hi - lo), fc = transfer(c);
    } else {
      lo = c, c = d, fc = fd;
      d = lo + r * (hi - lo), fd = transfer(d);
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<OutputFile> cmd_shape_compare(const RunContext& ctx) {
  const Setup s = make_setup(ctx.config);
  const double rf = ctx.config.number("pulse.ramp_fraction");
  if (!(rf > 0.0) || rf > 0.5) config_error("pulse.ramp_fraction must be in (0, 0.5]");
  const OperatingPoint op = drive_point(s, s.perp_power);
  const double tp = drive_pi_time(op);
  const auto drive = with_offset(s.beams(), drive_resonance(op));
  const EffectiveHamiltonian h = build_effective_hamiltonian(s.atom, drive, s.include_f);

  const std::vector<EnvelopeShape> shapes{EnvelopeShape::Square, EnvelopeShape::Sin2, EnvelopeShape::Sin4};
  const auto runs = parallel_map(shapes.size(), ctx.workers, [&](std::size_t i) {
    const EnvelopeShape shape = shapes[i];
    const double t = shape == EnvelopeShape::Square ? tp : best_duration(h, s, shape, rf, tp * area_stretch(shape, rf));
    return ShapeRun{shape, t,
                    propagate(h, basis(h.dimension(), s.initial), t, make_envelope(shape, t, rf), s.propagation)};
  });

  std::string csv = "shape,duration_us,final_target,max_intermediate,final_leakage\n";
  json j = header(ctx, "shape-compare");
  json rows = json::array();
  double square_final = 0.0, square_max = 0.0;
  for (const auto& run : runs) {
    const auto last = static_cast<Eigen::Index>(run.traj.size() - 1);
    const double target = run.traj.populations(last, static_cast<Eigen::Index>(s.final));
    const double leak = std::max(0.0, 1.0 - target - run.traj.populations(last, static_cast<Eigen::Index>(s.initial)));
    const double mi = max_intermediate(run.traj, s.initial, s.final);
    if (run.shape == EnvelopeShape::Square) square_final = leak, square_max = mi;
    csv += fmt::format("{},{},{},{},{}\n", to_string(run.shape), g(run.duration * 1e6), g(target), g(mi), g(leak));
    json r;
    r["shape"] = std::string(to_string(run.shape));
    r["duration_us"] = run.duration * 1e6;
    r["final_target"] = target;
    r["max_intermediate"] = mi;
    r["final_leakage"] = leak;
    r["leakage_reduction_vs_square_final"] = leak > 0.0 ? json(square_final / leak) : json(nullptr);
    r["leakage_reduction_vs_square_max"] = leak > 0.0 ? json(square_max / leak) : json(nullptr);
    rows.push_back(r);
  }
  j["ramp_fraction"] = rf;
  j["shapes"] = rows;

  std::vector<OutputFile> out{{"shape_compare.csv", csv}, json_file("shape_compare.json", j)};
  if (ctx.svg) {
    std::vector<Series> series;
    for (const auto& run : runs) {
      Series sr{std::string(to_string(run.shape)) + " intermediate", {}, {}};
      for (std::size_t r = 0; r < run.traj.size(); ++r) {
        sr.x.push_back(run.traj.times[r] / run.duration);
        sr.y.push_back(1.0 - run.traj.populations(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s.initial)) -
                       run.traj.populations(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s.final)));
      }
      series.push_back(std::move(sr));
    }
    out.push_back({"shape_compare.svg",
                   line_plot_svg({"Intermediate-state population", "t / duration", "population"}, series)});
  }
  return out;
}

// ---------------------------------------------------------------- psd

std::vector<OutputFile> cmd_psd(const RunContext& ctx) {
  const Setup s = make_setup(ctx.config);
  EnvelopeShape shape = configured_shape(ctx.config);
  if (shape == EnvelopeShape::Square) shape = EnvelopeShape::Sin2;
  const double rf = ctx.config.number("pulse.ramp_fraction");
  const double carrier = units::MHz(ctx.config.number("psd.carrier_mhz"));
  const double rate = ctx.config.number("psd.sample_rate_mhz") * 1e6;
  if (!(carrier > 0.0)) config_error("psd.carrier_mhz must be positive");
  if (!(rate > 4.0 * units::angular_to_hz(carrier))) config_error("psd.sample_rate_mhz must exceed 4x the carrier");

  const OperatingPoint op = drive_point(s, s.perp_power);
  const double tp = drive_pi_time(op);
  const double w = drive_resonance(op);
  const auto square = pulse_psd(PulseEnvelope::square(tp), carrier, rate);
  const double ts = tp * area_stretch(shape, rf);
  const auto shaped = pulse_psd(PulseEnvelope::ramped(shape, ts, rf), carrier, rate);

  // Offsets of the ladder levels between initial and final from the drive.
  std::vector<double> offsets;
  const auto lo = std::min(s.initial, s.final), hi = std::max(s.initial, s.final);
  for (std::size_t k = lo + 1; k < hi; ++k) {
    const double gap = std::abs(op.energies(static_cast<Eigen::Index>(s.initial)) - op.energies(static_cast<Eigen::Index>(k)));
    offsets.push_back(units::angular_to_hz(std::abs(gap - w)));
  }
  std::sort(offsets.begin(), offsets.end());

  const double window = 5e6;
  std::string csv = "envelope,offset_khz,psd_db\n";
  for (const auto& [label, psd] : {std::pair{"square", &square}, std::pair{std::string(to_string(shape)).c_str(), &shaped}}) {
    for (const auto& p : *psd)
      if (std::abs(p.offset_hz) <= window) csv += fmt::format("{},{},{}\n", label, g(p.offset_hz / 1e3), g(p.db));
  }

  json j = header(ctx, "psd");
  j["square_duration_us"] = tp * 1e6;
  j["shaped_duration_us"] = ts * 1e6;
  json pts = json::array();
  for (double off : offsets) {
    const double hw = std::max(0.05 * off, 2.0 * rate / static_cast<double>(square.size()));
    json r;
    r["offset_khz"] = off / 1e3;
    r["square_db"] = psd_peak_near(square, off, hw);
    r["shaped_db"] = psd_peak_near(shaped, off, hw);
    r["suppression_db"] = r["square_db"].get<double>() - r["shaped_db"].get<double>();
    pts.push_back(r);
  }
  j["intermediate_offsets"] = pts;

  std::vector<OutputFile> out{{"psd.csv", csv}, json_file("psd.json", j)};
  if (ctx.svg) {
    Series a{"square", {}, {}}, b{std::string(to_string(shape)), {}, {}};
    for (const auto& p : square)
      if (std::abs(p.offset_hz) <= window) a.x.push_back(p.offset_hz / 1e3), a.y.push_back(p.db);
    for (const auto& p : shaped)
      if (std::abs(p.offset_hz) <= window) b.x.push_back(p.offset_hz / 1e3), b.y.push_back(p.db);
    out.push_back({"psd.svg", line_plot_svg({"Pulse power spectral density", "offset from carrier (kHz)", "dB"}, {a, b})});
  }
  return out;
}

// ---------------------------------------------------------------- budget

DephasingModel configured_dephasing(const Config& c, int delta_m) {
  const double st = c.number("noise.sigma_t_ms") * 1e-3;
  if (!(st > 0.0)) config_error("noise.sigma_t_ms must be positive");
  const double gamma = c.number("noise.gamma");
  if (gamma < 0.0) config_error("noise.gamma must be >= 0");
  const double g_ratio = c.number("noise.g_ratio"), improvement = c.number("noise.improvement");
  if (!(g_ratio > 0.0) || !(improvement > 0.0)) config_error("noise.g_ratio and noise.improvement must be positive");
  return scale_sensitivity(DephasingModel::from_sigma_t(st, gamma, 1), delta_m, {g_ratio, improvement});
}

std::vector<OutputFile> cmd_budget(const RunContext& ctx) {
  const Setup s = make_setup(ctx.config);
  const auto powers = sweep_powers(ctx.config);
  const DephasingModel dephasing = configured_dephasing(ctx.config, s.delta_m());
  const ScatterModel scatter{ctx.config.number("scatter.leave_fraction")};
  if (scatter.leave_fraction < 0.0 || scatter.leave_fraction > 1.0)
    config_error("scatter.leave_fraction must be in [0, 1]");

  const auto rows = parallel_map(powers.size(), ctx.workers, [&](std::size_t i) {
    const OperatingPoint op = drive_point(s, powers[i]);
    const double tp = drive_pi_time(op);
    const auto drive = with_offset(s.beams(powers[i]), drive_resonance(op));
    const EffectiveHamiltonian h = build_effective_hamiltonian(s.atom, drive, s.include_f);
    const Trajectory t = propagate(h, basis(h.dimension(), s.initial), tp, PulseEnvelope::square(tp), s.propagation);
    const double leak = max_intermediate(t, s.initial, s.final);
    return total_fidelity_budget(tp, leak, dephasing, scattering_rate(s.atom, s.initial, drive),
                                 scattering_rate(s.atom, s.final, drive), scatter);
  });

  std::string csv = "perp_power_mw,pi_time_us,leakage,dephasing,scatter,total\n";
  std::size_t best = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& b = rows[i];
    csv += fmt::format("{},{},{},{},{},{}\n", g(powers[i] * 1e3), g(b.pi_time * 1e6), g(b.leakage), g(b.dephasing),
                       g(b.scatter), g(b.total));
    if (b.total < rows[best].total) best = i;
  }
  json j = header(ctx, "budget");
  j["sigma_f_hz"] = dephasing.sigma_f;
  j["gamma"] = dephasing.gamma;
  j["minimum"] = {{"perp_power_mw", powers[best] * 1e3},
                  {"pi_time_us", rows[best].pi_time * 1e6},
                  {"total", rows[best].total}};

  std::vector<OutputFile> out{{"budget.csv", csv}, json_file("budget.json", j)};
  if (ctx.svg) {
    std::vector<Series> series{{"leakage", {}, {}}, {"dephasing", {}, {}}, {"scatter", {}, {}}, {"total", {}, {}}};
    for (const auto& b : rows) {
      for (auto& sr : series) sr.x.push_back(b.pi_time * 1e6);
      series[0].y.push_back(b.leakage);
      series[1].y.push_back(b.dephasing);
      series[2].y.push_back(b.scatter);
      series[3].y.push_back(b.total);
    }
    out.push_back({"budget.svg", line_plot_svg({"Pi-pulse infidelity budget", "pi time (us)", "infidelity", true, true},
                                               series)});
  }
  return out;
}

// ---------------------------------------------------------------- shifts

std::vector<OutputFile> cmd_shifts(const RunContext& ctx) {
  const Setup s = make_setup(ctx.config);
  const auto beams = s.beams();
  const ShiftTable second = shift_table(s.atom, beams, s.include_f, ShiftMethod::SecondOrder);
  Eigen::VectorXd numeric;
  std::string numeric_note;
  try {
    const Resonance res =
        resonance_frequency(s.atom, beams, s.initial, s.final, s.photons, s.include_f, ShiftMethod::SecondOrder);
    numeric = dressed_energies(s.atom, with_offset(beams, res.omega_r), s.include_f, ShiftMethod::Numeric,
                               std::pair{s.initial, s.final}) -
              s.atom.qudit_energies();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::LabelingAmbiguity) throw;
    numeric_note = e.what();
  }

  std::string csv = "level_mj";
  for (const auto& b : beams) csv += ",shift_" + b.label + "_hz";
  csv += ",total_second_order_hz,total_numeric_hz\n";
  for (Eigen::Index k = 0; k < second.total.size(); ++k) {
    csv += mj_label(s.atom, static_cast<std::size_t>(k));
    for (const auto& pb : second.per_beam) csv += "," + g(units::angular_to_hz(pb(k)));
    csv += "," + g(units::angular_to_hz(second.total(k)));
    csv += "," + g(numeric.size() ? units::angular_to_hz(numeric(k)) : std::numeric_limits<double>::quiet_NaN());
    csv += "\n";
  }
  json j = header(ctx, "shifts");
  j["regime_warning"] = second.warning;
  if (!numeric_note.empty()) j["numeric_note"] = numeric_note;
  return {{"shifts.csv", csv}, json_file("shifts.json", j)};
}

// ---------------------------------------------------------------- rabi-expr

std::vector<OutputFile> cmd_rabi_expr(const RunContext& ctx) {
  const Setup s = make_setup(ctx.config);
  const auto beams = s.beams();
  const OperatingPoint op = operating_point(s.atom, beams, s.initial, s.final, s.photons, s.include_f, false);
  const auto drive = with_offset(beams, op.stark_resonance);
  const auto paths = enumerate_pathways(s.atom, drive, s.initial, s.final, s.photons, s.include_f);
  std::vector<Pathway> kept;
  for (const auto& p : paths)
    if (p.visits(ManifoldTag::F72) <= 1) kept.push_back(p);
  const RabiExpression expr = generate_rabi_expression(kept, s.atom, drive, op.energies);
  const RabiSet rabi = make_rabi_set(s.atom, drive, pathway_uppers(s.atom, s.include_f));

  std::ostringstream txt;
  txt << fmt::format("transition m={} -> m={}, {} photons, {} pathways\n", mj_label(s.atom, s.initial),
                     mj_label(s.atom, s.final), s.photons, kept.size());
  txt << fmt::format("omega_r = 2pi x {:.6f} Hz ({} shifts)\n", units::angular_to_hz(op.stark_resonance),
                     to_string(op.method));
  const cdouble total = expr.evaluate(rabi);
  txt << fmt::format("Omega = 2pi x ({:.6f} {:+.6f}i) Hz, |Omega| = 2pi x {:.6f} Hz\n",
                     units::angular_to_hz(total.real()), units::angular_to_hz(total.imag()),
                     units::angular_to_hz(std::abs(total)));
  txt << expr.format(s.atom, drive);

  json j = header(ctx, "rabi-expr");
  j["pathways"] = kept.size();
  j["rabi_hz"] = units::angular_to_hz(std::abs(total));
  json terms = json::array();
  for (const auto& t : expr.terms) {
    const cdouble v = t.evaluate(rabi);
    terms.push_back({{"re_hz", units::angular_to_hz(v.real())}, {"im_hz", units::angular_to_hz(v.imag())}});
  }
  j["terms"] = terms;
  return {{"rabi_expr.txt", txt.str()}, json_file("rabi_expr.json", j)};
}

// ---------------------------------------------------------------- calibrate

std::vector<OutputFile> cmd_calibrate(const RunContext& ctx) {
  const Setup s = make_setup(ctx.config);
  const Config& c = ctx.config;
  const auto par_powers = c.numbers("calibrate.parallel_powers_mw");
  const auto perp_powers = c.numbers("calibrate.perp_powers_mw");
  const double noise = c.number("calibrate.noise");
  const double split_sigma = units::hz_to_angular(c.number("calibrate.splitting_sigma_hz"));
  const double rabi_sigma = c.number("calibrate.rabi_sigma");
  if (noise < 0.0 || !(split_sigma > 0.0) || !(rabi_sigma > 0.0))
    config_error("calibrate: noise must be >= 0 and uncertainties positive");

  std::mt19937_64 rng(ctx.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const BeamParameters truth = s.geometry;
  std::vector<Dataset> splittings;
  for (std::size_t pair = 0; pair + 1 < s.atom.qudit_manifold().size(); ++pair) {
    Dataset d;
    d.kind = DatasetKind::SplittingVsPower;
    d.metadata["pair"] = static_cast<double>(pair);
    for (double p : par_powers) {
      d.x.push_back(p * 1e-3);
      d.y.push_back(splitting_model(s.atom, truth, pair, p * 1e-3) + noise * split_sigma * normal(rng));
      d.sigma.push_back(split_sigma);
    }
    d.validate();
    splittings.push_back(std::move(d));
  }
  Dataset rabi;
  rabi.kind = DatasetKind::RabiVsPower;
  rabi.metadata["parallel_power"] = s.parallel_power;
  rabi.metadata["initial"] = 0.0;
  for (double p : perp_powers) {
    const double y = raman_rabi_model(s.atom, truth, 0, s.parallel_power, p * 1e-3);
    rabi.x.push_back(p * 1e-3);
    rabi.y.push_back(y * (1.0 + noise * rabi_sigma * normal(rng)));
    rabi.sigma.push_back(rabi_sigma * y);
  }
  rabi.validate();

  BeamParameters guess = truth;
  guess.parallel_waist = 30e-6;
  guess.perp_waist = 30e-6;
  guess.parallel_pi = 0.01;
  guess.parallel_sigma_plus = 0.05;
  const FitResult fit = joint_fit_beams(s.atom, splittings, &rabi, guess);

  json j = header(ctx, "calibrate");
  auto frac = [&](const char* name) {
    const double a = fit.value(name);
    return json{{"fraction", a * a}, {"uncertainty", 2.0 * std::abs(a) * fit.uncertainty(name)}};
  };
  const double api = fit.value("parallel_pi_amplitude"), asp = fit.value("parallel_sigma_plus_amplitude");
  j["fit"] = {
      {"parallel_waist_um", fit.value("parallel_waist") * 1e6},
      {"parallel_waist_uncertainty_um", fit.uncertainty("parallel_waist") * 1e6},
      {"perp_waist_um", fit.value("perp_waist") * 1e6},
      {"perp_waist_uncertainty_um", fit.uncertainty("perp_waist") * 1e6},
      {"parallel_sigma_minus", 1.0 - api * api - asp * asp},
      {"parallel_pi", frac("parallel_pi_amplitude")},
      {"parallel_sigma_plus", frac("parallel_sigma_plus_amplitude")},
      {"chi2", fit.chi2},
      {"dof", fit.dof},
      {"iterations", fit.iterations},
      {"gradient", fit.gradient_norm},
  };
  try {
    joint_fit_beams(s.atom, splittings, nullptr, guess);
    j["splittings_only"] = "converged";
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnderconstrainedFit) throw;
    j["splittings_only"] = e.what();
  }
  const PerpPolarization perp = constrain_perp_polarization(
      s.atom, units::hz_to_angular(c.number("calibrate.differential_shift_hz")),
      units::hz_to_angular(c.number("calibrate.differential_shift_sigma_hz")),
      c.number("calibrate.shift_power_mw") * 1e-3, c.number("calibrate.shift_waist_um") * 1e-6, s.geometry.detuning);
  j["perp_polarization"] = {{"sigma_minus", perp.sigma_minus},
                            {"pi", perp.pi},
                            {"sigma_plus", perp.sigma_plus},
                            {"pi_uncertainty", perp.pi_uncertainty}};

  std::ostringstream sp, rb;
  sp << "pair,parallel_power_mw,splitting_hz,sigma_hz\n";
  for (const auto& d : splittings)
    for (std::size_t i = 0; i < d.size(); ++i)
      sp << fmt::format("{},{},{},{}\n", static_cast<int>(d.metadata.at("pair")), g(d.x[i] * 1e3),
                        g(units::angular_to_hz(d.y[i])), g(units::angular_to_hz(d.sigma[i])));
  rb << "perp_power_mw,rabi_hz,sigma_hz\n";
  for (std::size_t i = 0; i < rabi.size(); ++i)
    rb << fmt::format("{},{},{}\n", g(rabi.x[i] * 1e3), g(units::angular_to_hz(rabi.y[i])),
                      g(units::angular_to_hz(rabi.sigma[i])));
  return {{"calibrate_splittings.csv", sp.str()}, {"calibrate_rabi.csv", rb.str()}, json_file("calibrate.json", j)};
}

// ---------------------------------------------------------------- ramsey

std::vector<OutputFile> cmd_ramsey(const RunContext& ctx) {
  const Config& c = ctx.config;
  const DephasingModel model = configured_dephasing(c, 1);
  const double tmax = c.number("ramsey.max_delay_ms") * 1e-3;
  const long points = c.integer("ramsey.points");
  const double noise = c.number("ramsey.noise");
  if (!(tmax > 0.0) || points < 3 || !(noise > 0.0))
    config_error("ramsey: need max_delay_ms > 0, points >= 3, noise > 0");

  std::mt19937_64 rng(ctx.seed);
  std::normal_distribution<double> normal(0.0, noise);
  Dataset d;
  d.kind = DatasetKind::Ramsey;
  for (long k = 0; k < points; ++k) {
    const double t = tmax * k / (points - 1);
    d.x.push_back(t);
    d.y.push_back(ramsey_contrast(t, model.sigma_f) + normal(rng));
    d.sigma.push_back(noise);
  }
  const FitResult fit = fit_ramsey(d);
  const double st = fit.value("sigma_t");

  std::string csv = "delay_ms,contrast,fit\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double model_y = fit.unbounded ? fit.value("amplitude")
                                         : fit.value("amplitude") * std::exp(-0.5 * d.x[i] * d.x[i] / (st * st));
    csv += fmt::format("{},{},{}\n", g(d.x[i] * 1e3), g(d.y[i]), g(model_y));
  }
  json j = header(ctx, "ramsey");
  j["true_sigma_t_ms"] = model.sigma_t() * 1e3;
  j["fit_sigma_t_ms"] = fit.unbounded ? json(nullptr) : json(st * 1e3);
  j["fit_sigma_t_uncertainty_ms"] = fit.unbounded ? json(nullptr) : json(fit.uncertainty("sigma_t") * 1e3);
  j["fit_amplitude"] = fit.value("amplitude");
  j["coherence_time_ms"] = fit.unbounded ? json(nullptr) : json(std::sqrt(2.0) * st * 1e3);
  j["unbounded"] = fit.unbounded;
  j["chi2_per_dof"] = fit.dof > 0 ? fit.chi2 / fit.dof : 0.0;

  std::vector<OutputFile> out{{"ramsey.csv", csv}, json_file("ramsey.json", j)};
  if (ctx.svg) {
    Series data{"data", {}, {}}, model_s{"fit", {}, {}};
    for (std::size_t i = 0; i < d.size(); ++i) {
      data.x.push_back(d.x[i] * 1e3), data.y.push_back(d.y[i]);
      model_s.x.push_back(d.x[i] * 1e3);
      model_s.y.push_back(fit.unbounded ? fit.value("amplitude")
                                        : fit.value("amplitude") * std::exp(-0.5 * d.x[i] * d.x[i] / (st * st)));
    }
    out.push_back({"ramsey.svg", line_plot_svg({"Ramsey contrast", "delay (ms)", "contrast"}, {data, model_s})});
  }
  return out;
}

}  // namespace

void validate_config(const Config& config) {
  const Setup s = make_setup(config);
  (void)s;
  configured_shape(config);
  sweep_powers(config);
  configured_dephasing(config, 1);
  config.numbers("calibrate.parallel_powers_mw");
  config.numbers("calibrate.perp_powers_mw");
  for (const char* key : {"spectrum.span_khz", "psd.carrier_mhz", "psd.sample_rate_mhz", "scatter.leave_fraction",
                          "ramsey.max_delay_ms", "ramsey.noise", "calibrate.noise", "calibrate.splitting_sigma_hz",
                          "calibrate.rabi_sigma", "calibrate.differential_shift_hz",
                          "calibrate.differential_shift_sigma_hz", "calibrate.shift_power_mw",
                          "calibrate.shift_waist_um", "pulse.duration_us"})
    config.number(key);
  config.integer("spectrum.points");
  config.integer("ramsey.points");
}

const std::vector<CommandInfo>& commands() {
  static const std::vector<CommandInfo> table{
      {"flop", "simulate one pulse and write populations vs time", cmd_flop},
      {"spectrum", "final-state population vs Raman detuning", cmd_spectrum},
      {"power-sweep", "Rabi frequency and pi time vs R_perp power", cmd_power_sweep},
      {"shape-compare", "square, sin2 and sin4 pulses at equal area", cmd_shape_compare},
      {"psd", "pulse power spectral density and nearby leakage lines", cmd_psd},
      {"budget", "leakage, dephasing and scattering error vs pulse length", cmd_budget},
      {"shifts", "light shifts per sublevel and per beam", cmd_shifts},
      {"rabi-expr", "symbolic multi-photon Rabi expression with values", cmd_rabi_expr},
      {"calibrate", "fit beam waists and polarization to synthetic data", cmd_calibrate},
      {"ramsey", "synthetic Ramsey decay and coherence-time fit", cmd_ramsey},
  };
  return table;
}

}  // namespace raman::cli
