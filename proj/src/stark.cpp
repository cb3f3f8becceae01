#include "raman/stark.hpp"

#include <cmath>
#include <map>
#include <tuple>

#include "raman/error.hpp"
#include "raman/pathways.hpp"
#include "raman/units.hpp"

namespace raman {
namespace {

constexpr double kRegimeRatio = 1000.0;
constexpr double kMinDenominator = units::two_pi * 1e3;
constexpr double kMaxMixing = 0.3;

}  // namespace

std::string_view to_string(ShiftMethod method) {
  return method == ShiftMethod::SecondOrder ? "second-order" : "numeric";
}

LightShift light_shift_second_order(const Atom& atom, std::size_t level, std::span<const Beam> beams,
                                    bool include_f) {
  if (level >= atom.qudit_manifold().size()) throw Error(ErrorKind::InvalidParameter, "level index out of range");
  LightShift out;
  for (const Beam& beam : beams) {
    for (ManifoldTag up : pathway_uppers(atom, include_f)) {
      const double delta = beam_detuning(atom, beam, up);
      const RabiMatrix r = rabi_matrix(beam, atom, atom.qudit(), up);
      const double max_omega = r.entries.cwiseAbs().maxCoeff();
      if (max_omega > 0.0 && std::abs(delta) < kRegimeRatio * max_omega) out.warning = true;
      for (std::size_t e = 0; e < atom.manifold(up).size(); ++e) out.value += std::norm(r(level, e)) / (4.0 * delta);
    }
  }
  return out;
}

Eigen::VectorXd numeric_dressed_energies(const EffectiveHamiltonian& h,
                                         std::optional<std::pair<std::size_t, std::size_t>> skip) {
  const Eigen::VectorXd diag = h.static_diagonal();
  // Couplings with the same (row, col, beat) from different beam pairs add coherently.
  std::map<std::tuple<std::size_t, std::size_t, double>, cdouble> grouped;
  for (const auto& t : h.terms()) {
    if (t.row == t.col) continue;
    if (skip && ((t.row == skip->first && t.col == skip->second) || (t.row == skip->second && t.col == skip->first)))
      continue;
    grouped[{t.row, t.col, t.beat}] += t.amplitude;
  }
  Eigen::VectorXd out = diag;
  for (const auto& [key, c] : grouped) {
    const auto [row, col, beat] = key;
    if (std::abs(c) == 0.0) continue;
    const double denom = diag(static_cast<Eigen::Index>(row)) - diag(static_cast<Eigen::Index>(col)) + beat;
    if (std::abs(denom) < kMinDenominator || std::abs(c) > kMaxMixing * std::abs(denom))
      throw Error(ErrorKind::LabelingAmbiguity, "coupling between levels " + std::to_string(row) + " and " +
                                                   std::to_string(col) + " is near resonant");
    out(static_cast<Eigen::Index>(row)) += std::norm(c) / denom;
  }
  return out;
}

ShiftTable shift_table(const Atom& atom, std::span<const Beam> beams, bool include_f, ShiftMethod method) {
  ShiftTable table;
  table.method = method;
  const Eigen::VectorXd bare = atom.qudit_energies();
  const auto dim = bare.size();
  table.total = Eigen::VectorXd::Zero(dim);
  for (std::size_t b = 0; b < beams.size(); ++b) {
    Eigen::VectorXd shift(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      const LightShift s = light_shift_second_order(atom, static_cast<std::size_t>(k), beams.subspan(b, 1), include_f);
      shift(k) = s.value;
      table.warning = table.warning || s.warning;
    }
    if (method == ShiftMethod::Numeric)
      shift = numeric_dressed_energies(build_effective_hamiltonian(atom, beams.subspan(b, 1), include_f)) - bare;
    table.per_beam.push_back(shift);
  }
  if (method == ShiftMethod::SecondOrder) {
    for (const auto& s : table.per_beam) table.total += s;
  } else {
    table.total = numeric_dressed_energies(build_effective_hamiltonian(atom, beams, include_f)) - bare;
  }
  return table;
}

Eigen::VectorXd dressed_energies(const Atom& atom, std::span<const Beam> beams, bool include_f, ShiftMethod method,
                                 std::optional<std::pair<std::size_t, std::size_t>> skip) {
  if (method == ShiftMethod::Numeric)
    return numeric_dressed_energies(build_effective_hamiltonian(atom, beams, include_f), skip);
  Eigen::VectorXd e = atom.qudit_energies();
  for (Eigen::Index k = 0; k < e.size(); ++k)
    e(k) += light_shift_second_order(atom, static_cast<std::size_t>(k), beams, include_f).value;
  return e;
}

Eigen::MatrixXd dressed_splittings(const Atom& atom, std::span<const Beam> beams, bool include_f,
                                   ShiftMethod method) {
  const Eigen::VectorXd e = dressed_energies(atom, beams, include_f, method);
  const auto n = e.size();
  Eigen::MatrixXd w(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) w(i, j) = e(i) - e(j);
  return w;
}

Resonance resonance_frequency(const Atom& atom, std::span<const Beam> beams, std::size_t i, std::size_t j,
                              int photons, bool include_f, ShiftMethod method) {
  if (photons <= 0 || photons % 2 != 0) throw Error(ErrorKind::InvalidParameter, "photon count must be even");
  const std::size_t dim = atom.qudit_manifold().size();
  if (i >= dim || j >= dim || i == j) throw Error(ErrorKind::InvalidParameter, "invalid level pair");

  const Eigen::VectorXd bare = atom.qudit_energies();
  auto target = [&](const Eigen::VectorXd& e) {
    return 2.0 * std::abs(e(static_cast<Eigen::Index>(i)) - e(static_cast<Eigen::Index>(j))) / photons;
  };
  Resonance res;
  double w = target(bare);
  constexpr double tolerance = units::two_pi * 1.0;
  for (int it = 1; it <= 50; ++it) {
    const auto drive = with_offset(beams, w);
    res.energies = dressed_energies(atom, drive, include_f, method, std::pair{i, j});
    const double next = target(res.energies);
    res.iterations = it;
    if (std::abs(next - w) < tolerance) {
      res.omega_r = next;
      return res;
    }
    w += 0.5 * (next - w);
  }
  throw Error(ErrorKind::IterationFailed, "resonance iteration did not converge in 50 steps");
}

}  // namespace raman
