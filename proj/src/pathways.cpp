#include "raman/pathways.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "raman/error.hpp"
#include "raman/units.hpp"

namespace raman {
namespace {

constexpr double kDegenerateTolerance = units::kHz(1.0);

double max_offset_difference(std::span<const Beam> beams) {
  double w = 0.0;
  for (const auto& a : beams)
    for (const auto& b : beams) w = std::max(w, std::abs(a.frequency_offset - b.frequency_offset));
  return w;
}

std::string upper_label(const Atom& atom, ManifoldTag tag, std::size_t index) {
  const int two_m = atom.manifold(tag).two_m(index);
  return fmt::format("{}({:+d}/2)", to_string(tag), two_m);
}

std::string beat_label(double beat, double omega_r) {
  if (omega_r <= 0.0 || std::abs(beat) < 1e-9 * std::max(1.0, omega_r)) return "";
  const double k = beat / omega_r;
  const double rounded = std::round(k);
  if (std::abs(k - rounded) < 1e-9) {
    if (rounded == 1.0) return "w_r";
    if (rounded == -1.0) return "-w_r";
    return fmt::format("{}w_r", static_cast<int>(rounded));
  }
  return fmt::format("{:.6g}", beat);
}

}  // namespace

std::size_t Pathway::visits(ManifoldTag tag) const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [tag](const RamanStep& s) { return s.upper == tag; }));
}

double step_beat(const RamanStep& step, std::span<const Beam> beams) {
  return beams[step.emit_beam].frequency_offset - beams[step.absorb_beam].frequency_offset;
}

std::vector<ManifoldTag> pathway_uppers(const Atom& atom, bool include_f) {
  std::vector<ManifoldTag> out;
  if (atom.has(ManifoldTag::P32) && atom.dipole_connected(atom.qudit(), ManifoldTag::P32))
    out.push_back(ManifoldTag::P32);
  if (include_f && atom.has(ManifoldTag::F72) && atom.dipole_connected(atom.qudit(), ManifoldTag::F72))
    out.push_back(ManifoldTag::F72);
  return out;
}

std::vector<Pathway> enumerate_pathways(const Atom& atom, std::span<const Beam> beams, std::size_t initial,
                                        std::size_t final, int photons, bool include_f,
                                        std::optional<double> net_beat) {
  if (photons <= 0 || photons % 2 != 0)
    throw Error(ErrorKind::InvalidParameter, fmt::format("photon count must be positive and even, got {}", photons));
  const std::size_t dim = atom.qudit_manifold().size();
  if (initial >= dim || final >= dim) throw Error(ErrorKind::InvalidParameter, "level index out of range");
  if (beams.empty()) throw Error(ErrorKind::InvalidParameter, "no beams");
  for (const auto& b : beams) b.validate();

  const auto uppers = pathway_uppers(atom, include_f);
  const RabiSet rabi = make_rabi_set(atom, beams, uppers);
  const Eigen::VectorXd energy = atom.qudit_energies();
  const double omega_r = max_offset_difference(beams);
  const auto n = static_cast<std::size_t>(photons / 2);

  double target = 0.0;
  if (net_beat) {
    target = *net_beat;
  } else {
    const double gap = energy(static_cast<Eigen::Index>(initial)) - energy(static_cast<Eigen::Index>(final));
    if (gap == 0.0) throw Error(ErrorKind::InvalidParameter, "initial and final are degenerate; give a net beat");
    target = std::copysign(1.0, gap) * static_cast<double>(n) * omega_r;
  }
  const double tol = 1e-9 * std::max({1.0, omega_r, std::abs(target)});

  std::vector<Pathway> out;
  std::vector<RamanStep> steps;
  std::vector<double> beats;

  std::function<void(std::size_t, double)> visit = [&](std::size_t level, double beat) {
    const std::size_t depth = steps.size();
    if (depth == n) {
      if (level != final || std::abs(beat - target) > tol) return;
      Pathway p{initial, final, steps, {}};
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto lk = static_cast<Eigen::Index>(steps[k].to);
        p.intermediate_detunings.push_back(energy(static_cast<Eigen::Index>(initial)) - energy(lk) - beats[k]);
      }
      out.push_back(std::move(p));
      return;
    }
    const std::size_t remaining_after = n - depth - 1;
    for (ManifoldTag up : uppers) {
      const std::size_t up_dim = atom.manifold(up).size();
      for (std::size_t e = 0; e < up_dim; ++e) {
        for (std::size_t a = 0; a < beams.size(); ++a) {
          if (rabi.at({a, up})(level, e) == cdouble{0.0}) continue;
          for (std::size_t b = 0; b < beams.size(); ++b) {
            for (std::size_t k = 0; k < dim; ++k) {
              if (rabi.at({b, up})(k, e) == cdouble{0.0}) continue;
              RamanStep step{level, up, e, k, a, b};
              const double next = beat + step_beat(step, beams);
              if (std::abs(target - next) > static_cast<double>(remaining_after) * omega_r + tol) continue;
              if (remaining_after > 0) {
                if (k == initial && std::abs(next) < tol) continue;
                if (k == final && std::abs(next - target) < tol) continue;
              }
              steps.push_back(step);
              beats.push_back(next);
              visit(k, next);
              steps.pop_back();
              beats.pop_back();
            }
          }
        }
      }
    }
  };
  visit(initial, 0.0);
  return out;
}

cdouble RabiTerm::evaluate(const RabiSet& rabi) const {
  cdouble num = coefficient;
  for (const auto& f : factors) {
    auto it = rabi.find({f.beam, f.upper});
    if (it == rabi.end()) throw Error(ErrorKind::InvalidParameter, "Rabi set lacks a factor of the expression");
    const cdouble v = it->second(f.lower, f.upper_index);
    num *= f.conjugate ? std::conj(v) : v;
  }
  double den = 1.0;
  for (double d : optical) den *= d;
  for (double d : intermediate) den *= d;
  return num / den;
}

cdouble RabiExpression::evaluate(const RabiSet& rabi) const {
  cdouble sum{0.0};
  for (const auto& t : terms) sum += t.evaluate(rabi);
  return sum;
}

std::string RabiExpression::format(const Atom& atom, std::span<const Beam> beams) const {
  const double omega_r = max_offset_difference(beams);
  std::ostringstream os;
  for (const auto& t : terms) {
    const std::size_t n = t.optical.size();
    const bool negative = (n % 2) == 1;
    os << (negative ? "- " : "+ ") << "1/" << (1u << (2 * n - 1)) << " ";
    for (std::size_t i = 0; i < t.factors.size(); ++i) {
      const auto& f = t.factors[i];
      if (i) os << ' ';
      os << (f.conjugate ? "Omega*" : "Omega") << '[' << f.lower << ',' << upper_label(atom, f.upper, f.upper_index)
         << "]{" << beams[f.beam].label << '}';
    }
    os << " / (";
    for (std::size_t i = 0; i < t.pathway.steps.size(); ++i) {
      const auto& s = t.pathway.steps[i];
      if (i) os << ' ';
      os << "Delta[" << to_string(s.upper) << "]{" << beams[s.absorb_beam].label << '}';
    }
    for (std::size_t k = 0; k < t.intermediate.size(); ++k) {
      const std::size_t level = t.pathway.steps[k].to;
      const std::string beat = beat_label(t.beats[k], omega_r);
      os << " (";
      if (level == t.pathway.initial) {
        os << (beat.empty() ? "0" : beat);
      } else {
        if (!beat.empty()) os << beat << " - ";
        else os << "-";
        os << "w_" << t.pathway.initial << level;
      }
      os << ')';
    }
    os << ")  path " << t.pathway.initial;
    for (const auto& s : t.pathway.steps) os << "->" << s.to;
    os << '\n';
  }
  return os.str();
}

RabiExpression generate_rabi_expression(std::span<const Pathway> pathways, const Atom& atom,
                                        std::span<const Beam> beams, const Eigen::VectorXd& energies) {
  if (energies.size() != static_cast<Eigen::Index>(atom.qudit_manifold().size()))
    throw Error(ErrorKind::InvalidParameter, "energy vector does not match the qudit manifold");
  RabiExpression expr;
  for (const auto& p : pathways) {
    const std::size_t n = p.steps.size();
    RabiTerm term;
    term.coefficient = -2.0 / std::pow(4.0, static_cast<double>(n));
    term.pathway = p;
    double beat = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& s = p.steps[k];
      term.factors.push_back({s.absorb_beam, s.from, s.upper, s.upper_index, true});
      term.factors.push_back({s.emit_beam, s.to, s.upper, s.upper_index, false});
      term.optical.push_back(beam_detuning(atom, beams[s.absorb_beam], s.upper));
      beat += step_beat(s, beams);
      if (k + 1 < n) {
        const double d = energies(static_cast<Eigen::Index>(p.initial)) - energies(static_cast<Eigen::Index>(s.to)) - beat;
        if (std::abs(d) < kDegenerateTolerance)
          throw Error(ErrorKind::DegenerateResonance,
                      fmt::format("intermediate |{}> is within {:.3g} Hz of resonance", s.to, units::angular_to_hz(d)));
        term.intermediate.push_back(d);
        term.beats.push_back(beat);
      }
    }
    expr.terms.push_back(std::move(term));
  }
  return expr;
}

namespace {

void check_denominator(double d, const char* what) {
  if (std::abs(d) < kDegenerateTolerance)
    throw Error(ErrorKind::DegenerateResonance, fmt::format("denominator {} is within 1 kHz of zero", what));
}

}  // namespace

cdouble four_photon_rabi(const RabiMatrix& red, const RabiMatrix& blue, double delta,
                         const Eigen::VectorXd& energies, double omega_r) {
  auto w = [&](int i, int j) { return energies(i) - energies(j); };
  // P3/2 sublevels 6..9 are local indices 0..3.
  auto r = [&](std::size_t i, std::size_t p) { return red(i, p - 6); };
  auto b = [&](std::size_t i, std::size_t p) { return blue(i, p - 6); };
  const double d1 = omega_r - w(0, 1);
  const double d2 = omega_r - w(2, 3);
  check_denominator(d1, "w_r - w_01");
  check_denominator(d2, "w_r - w_23");
  return std::conj(r(0, 6)) / (8.0 * delta * delta) *
         (b(1, 6) * std::conj(r(1, 7)) * b(3, 7) / d1 - b(2, 6) * std::conj(r(2, 8)) * b(3, 8) / d2);
}

cdouble six_photon_rabi(const RabiMatrix& red, const RabiMatrix& blue, double delta,
                        const Eigen::VectorXd& energies, double omega_r) {
  auto w = [&](int i, int j) { return energies(i) - energies(j); };
  auto r = [&](std::size_t i, std::size_t p) { return std::conj(red(i, p - 6)); };
  auto b = [&](std::size_t i, std::size_t p) { return blue(i, p - 6); };
  const double a1 = omega_r - w(0, 1);
  const double a2 = 2.0 * omega_r - w(0, 2);
  const double a3 = w(0, 3) - 2.0 * omega_r;
  const double a4 = w(0, 2) - omega_r;
  check_denominator(a1, "w_r - w_01");
  check_denominator(a2, "2w_r - w_02");
  check_denominator(a3, "w_03 - 2w_r");
  check_denominator(a4, "w_02 - w_r");
  check_denominator(omega_r, "w_r");
  const cdouble t1 = b(1, 6) * r(1, 7) * b(2, 7) * r(2, 8) * b(4, 8) / (a1 * a2);
  const cdouble t2 = b(1, 6) * r(1, 7) * b(3, 7) * r(3, 9) * b(4, 9) / (a1 * a3);
  const cdouble t3 = b(2, 6) * r(2, 8) * b(3, 8) * r(3, 9) * b(4, 9) / (a4 * a3);
  const cdouble t4 = b(2, 6) * r(2, 8) * b(2, 8) * r(2, 8) * b(4, 8) / (a4 * a2);
  const cdouble t5 = b(0, 6) * r(0, 6) * b(2, 6) * r(2, 8) * b(4, 8) / (omega_r * a2);
  return r(0, 6) / (32.0 * delta * delta * delta) * (t1 - t2 + t3 - t4 + t5);
}

cdouble f_state_correction(const Atom& atom, std::span<const Beam> beams, const Eigen::VectorXd& energies,
                           std::size_t initial, std::size_t final, int photons, std::optional<double> net_beat) {
  auto all = enumerate_pathways(atom, beams, initial, final, photons, true, net_beat);
  std::vector<Pathway> single;
  for (auto& p : all)
    if (p.visits(ManifoldTag::F72) == 1) single.push_back(std::move(p));
  const auto uppers = pathway_uppers(atom, true);
  const RabiSet rabi = make_rabi_set(atom, beams, uppers);
  return generate_rabi_expression(single, atom, beams, energies).evaluate(rabi);
}

cdouble multiphoton_rabi(const Atom& atom, std::span<const Beam> beams, const Eigen::VectorXd& energies,
                         std::size_t initial, std::size_t final, int photons, bool include_f,
                         std::optional<double> net_beat) {
  auto all = enumerate_pathways(atom, beams, initial, final, photons, include_f, net_beat);
  std::erase_if(all, [](const Pathway& p) { return p.visits(ManifoldTag::F72) > 1; });
  const RabiSet rabi = make_rabi_set(atom, beams, pathway_uppers(atom, include_f));
  return generate_rabi_expression(all, atom, beams, energies).evaluate(rabi);
}

}  // namespace raman
