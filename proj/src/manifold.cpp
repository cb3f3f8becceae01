#include "raman/manifold.hpp"

#include <algorithm>
#include <cmath>

#include "raman/angular.hpp"
#include "raman/error.hpp"
#include "raman/units.hpp"

namespace raman {

std::string_view to_string(ManifoldTag tag) {
  switch (tag) {
    case ManifoldTag::S12: return "S1/2";
    case ManifoldTag::D52: return "D5/2";
    case ManifoldTag::P32: return "P3/2";
    case ManifoldTag::F72: return "F7/2";
    case ManifoldTag::F52: return "F5/2";
  }
  return "?";
}

ManifoldTag manifold_tag_from_string(std::string_view name) {
  if (name == "S1/2" || name == "S12") return ManifoldTag::S12;
  if (name == "D5/2" || name == "D52") return ManifoldTag::D52;
  if (name == "P3/2" || name == "P32") return ManifoldTag::P32;
  if (name == "F7/2" || name == "F72") return ManifoldTag::F72;
  if (name == "F5/2" || name == "F52") return ManifoldTag::F52;
  throw Error(ErrorKind::InvalidParameter, "unknown manifold '" + std::string(name) + "'");
}

int orbital_l(ManifoldTag tag) {
  switch (tag) {
    case ManifoldTag::S12: return 0;
    case ManifoldTag::P32: return 1;
    case ManifoldTag::D52: return 2;
    case ManifoldTag::F72:
    case ManifoldTag::F52: return 3;
  }
  return 0;
}

namespace {

int natural_two_j(ManifoldTag tag) {
  switch (tag) {
    case ManifoldTag::S12: return 1;
    case ManifoldTag::P32: return 3;
    case ManifoldTag::D52: return 5;
    case ManifoldTag::F72: return 7;
    case ManifoldTag::F52: return 5;
  }
  return 0;
}

}  // namespace

Manifold::Manifold(ManifoldTag tag, int two_j, double g_j, double transition_frequency,
                   std::optional<double> lifetime)
    : tag_(tag), two_j_(two_j), g_j_(g_j), transition_frequency_(transition_frequency), lifetime_(lifetime) {
  if (two_j < 0) throw Error(ErrorKind::InvalidParameter, "negative J");
  if (two_j != natural_two_j(tag))
    throw Error(ErrorKind::InvalidParameter, "J does not match manifold " + std::string(to_string(tag)));
  if (lifetime && *lifetime <= 0.0) throw Error(ErrorKind::InvalidParameter, "lifetime must be positive");
}

std::optional<std::size_t> Manifold::index_of(int two_m) const {
  if (std::abs(two_m) > two_j_ || (two_j_ - two_m) % 2 != 0) return std::nullopt;
  return static_cast<std::size_t>((two_j_ - two_m) / 2);
}

Atom::Atom(std::vector<Manifold> manifolds, std::map<std::pair<ManifoldTag, ManifoldTag>, double> reduced_elements,
           ManifoldTag qudit, double field)
    : manifolds_(std::move(manifolds)), qudit_(qudit), field_(field) {
  if (field < 0.0) throw Error(ErrorKind::InvalidParameter, "magnetic field must be non-negative");
  for (const auto& [pair, value] : reduced_elements) {
    const auto key = std::minmax(pair.first, pair.second);
    auto [it, inserted] = reduced_.emplace(std::pair{key.first, key.second}, value);
    if (!inserted && it->second != value)
      throw Error(ErrorKind::InvalidParameter, "asymmetric reduced element lookup");
  }
  if (!has(qudit)) throw Error(ErrorKind::InvalidParameter, "qudit manifold missing");
}

Atom Atom::calcium40() {
  using namespace units;
  // Centroids chosen so that 976 nm light sits -44 THz from D5/2-P3/2 and
  // -1322 THz from D5/2-F7/2, F5/2.
  const double laser = two_pi * speed_of_light / 976e-9;
  const double omega0 = MHz(2.63);
  const double g_d = 6.0 / 5.0;
  const double field = omega0 * hbar / (g_d * bohr_magneton);
  std::vector<Manifold> manifolds{
      Manifold(ManifoldTag::D52, 5, g_d, 0.0, 1.168),
      Manifold(ManifoldTag::P32, 3, 4.0 / 3.0, laser + THz(44.0), 6.64e-9),
      Manifold(ManifoldTag::F72, 7, 8.0 / 7.0, laser + THz(1322.0)),
      Manifold(ManifoldTag::F52, 5, 6.0 / 7.0, laser + THz(1322.0)),
  };
  std::map<std::pair<ManifoldTag, ManifoldTag>, double> reduced{
      {{ManifoldTag::D52, ManifoldTag::P32}, 3.283},
      {{ManifoldTag::D52, ManifoldTag::F72}, 2.309},
      {{ManifoldTag::D52, ManifoldTag::F52}, 0.5164},
  };
  return Atom(std::move(manifolds), std::move(reduced), ManifoldTag::D52, field);
}

const Manifold& Atom::manifold(ManifoldTag tag) const {
  for (const auto& m : manifolds_)
    if (m.tag() == tag) return m;
  throw Error(ErrorKind::InvalidParameter, "manifold " + std::string(to_string(tag)) + " not configured");
}

bool Atom::has(ManifoldTag tag) const {
  return std::any_of(manifolds_.begin(), manifolds_.end(), [tag](const Manifold& m) { return m.tag() == tag; });
}

Atom Atom::with_field(double field) const {
  Atom copy = *this;
  if (field < 0.0) throw Error(ErrorKind::InvalidParameter, "magnetic field must be non-negative");
  copy.field_ = field;
  return copy;
}

double Atom::reduced_element(ManifoldTag a, ManifoldTag b) const {
  const auto key = std::minmax(a, b);
  auto it = reduced_.find({key.first, key.second});
  if (it == reduced_.end())
    throw Error(ErrorKind::InvalidParameter, "no dipole element between " + std::string(to_string(a)) + " and " +
                                                 std::string(to_string(b)));
  return it->second;
}

bool Atom::dipole_connected(ManifoldTag a, ManifoldTag b) const {
  const auto key = std::minmax(a, b);
  return reduced_.contains({key.first, key.second});
}

std::vector<ManifoldTag> Atom::upper_manifolds() const {
  std::vector<ManifoldTag> out;
  for (const auto& m : manifolds_)
    if (m.tag() != qudit_ && dipole_connected(qudit_, m.tag())) out.push_back(m.tag());
  return out;
}

double Atom::zeeman_splitting(ManifoldTag tag) const { return raman::zeeman_splitting(field_, manifold(tag).g_j()); }

Level Atom::level(ManifoldTag tag, std::size_t index) const {
  const Manifold& m = manifold(tag);
  if (index >= m.size()) throw Error(ErrorKind::InvalidParameter, "level index out of range");
  const int two_m = m.two_m(index);
  return Level{tag, m.two_j(), two_m, zeeman_splitting(tag) * (two_m / 2.0)};
}

std::vector<Level> Atom::levels(ManifoldTag tag) const {
  const Manifold& m = manifold(tag);
  std::vector<Level> out;
  out.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out.push_back(level(tag, i));
  return out;
}

Eigen::VectorXd Atom::qudit_energies() const {
  const auto lv = levels(qudit_);
  Eigen::VectorXd e(static_cast<Eigen::Index>(lv.size()));
  for (std::size_t i = 0; i < lv.size(); ++i) e(static_cast<Eigen::Index>(i)) = lv[i].energy;
  return e;
}

Polarization polarization_from_fractions(double f_sigma_minus, double f_pi, double f_sigma_plus) {
  if (f_sigma_minus < 0.0 || f_pi < 0.0 || f_sigma_plus < 0.0)
    throw Error(ErrorKind::InvalidParameter, "polarization fractions must be non-negative");
  const double total = f_sigma_minus + f_pi + f_sigma_plus;
  if (total <= 0.0) throw Error(ErrorKind::InvalidParameter, "polarization fractions sum to zero");
  return {cdouble{std::sqrt(f_sigma_minus / total)}, cdouble{std::sqrt(f_pi / total)},
          cdouble{std::sqrt(f_sigma_plus / total)}};
}

Polarization linear_perpendicular_polarization(double f_pi) {
  if (f_pi < 0.0 || f_pi > 1.0) throw Error(ErrorKind::InvalidParameter, "pi fraction outside [0, 1]");
  const double s = std::sqrt((1.0 - f_pi) / 2.0);
  return {cdouble{s}, cdouble{std::sqrt(f_pi)}, cdouble{-s}};
}

void Beam::validate() const {
  if (!(waist > 0.0)) throw Error(ErrorKind::InvalidParameter, "beam '" + label + "': waist must be positive");
  if (power < 0.0) throw Error(ErrorKind::InvalidParameter, "beam '" + label + "': power must be non-negative");
  double norm = 0.0;
  for (const auto& e : polarization) norm += std::norm(e);
  if (std::abs(norm - 1.0) > 1e-12)
    throw Error(ErrorKind::InvalidParameter, "beam '" + label + "': polarization is not normalized");
}

Beam Beam::with_power(double p) const {
  Beam b = *this;
  b.power = p;
  return b;
}

std::vector<Beam> with_offset(std::span<const Beam> beams, double omega_r) {
  std::vector<Beam> out(beams.begin(), beams.end());
  for (std::size_t i = 1; i < out.size(); ++i) out[i].frequency_offset = omega_r;
  return out;
}

std::vector<Beam> scaled_powers(std::span<const Beam> beams, double scale) {
  if (scale < 0.0) throw Error(ErrorKind::InvalidParameter, "power scale must be non-negative");
  std::vector<Beam> out(beams.begin(), beams.end());
  for (auto& b : out) b.power *= scale;
  return out;
}

double zeeman_splitting(double field, double g_j) {
  if (field < 0.0) throw Error(ErrorKind::InvalidParameter, "magnetic field must be non-negative");
  return g_j * units::bohr_magneton * field / units::hbar;
}

double beam_detuning(const Atom& atom, const Beam& beam, ManifoldTag upper) {
  const double reference = atom.manifold(ManifoldTag::P32).transition_frequency();
  return beam.detuning - (atom.manifold(upper).transition_frequency() - reference);
}

double peak_field_amplitude(double power, double waist) {
  if (!(waist > 0.0)) throw Error(ErrorKind::InvalidParameter, "waist must be positive");
  if (power < 0.0) throw Error(ErrorKind::InvalidParameter, "power must be non-negative");
  return std::sqrt(4.0 * power / (units::pi * waist * waist * units::epsilon0 * units::speed_of_light));
}

double coupling_coefficient(const Level& lower, const Level& upper, int q) {
  if (std::abs(orbital_l(lower.manifold) - orbital_l(upper.manifold)) != 1 || std::abs(lower.two_j - upper.two_j) > 2)
    throw Error(ErrorKind::InvalidParameter, std::string(to_string(lower.manifold)) + " and " +
                                                 std::string(to_string(upper.manifold)) + " are not dipole connected");
  if (q < -1 || q > 1) throw Error(ErrorKind::InvalidParameter, "photon q must be -1, 0 or +1");
  if (upper.two_m != lower.two_m + 2 * q) return 0.0;
  return clebsch_gordan(lower.two_j, lower.two_m, 2, 2 * q, upper.two_j, upper.two_m);
}

RabiMatrix rabi_matrix(const Beam& beam, const Atom& atom, ManifoldTag lower, ManifoldTag upper) {
  beam.validate();
  const double reduced = atom.reduced_element(lower, upper);
  const double scale = peak_field_amplitude(beam.power, beam.waist) * reduced * units::atomic_dipole / units::hbar;
  const auto lows = atom.levels(lower);
  const auto ups = atom.levels(upper);
  RabiMatrix out{beam.label, lower, upper,
                 Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(lows.size()), static_cast<Eigen::Index>(ups.size()))};
  for (std::size_t i = 0; i < lows.size(); ++i) {
    for (std::size_t j = 0; j < ups.size(); ++j) {
      const int two_q = ups[j].two_m - lows[i].two_m;
      if (std::abs(two_q) > 2) continue;
      const int q = two_q / 2;
      const cdouble e = beam.e(q);
      if (e == cdouble{0.0}) continue;
      out.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          scale * coupling_coefficient(lows[i], ups[j], q) * e;
    }
  }
  return out;
}

RabiSet make_rabi_set(const Atom& atom, std::span<const Beam> beams, std::span<const ManifoldTag> uppers) {
  RabiSet set;
  for (std::size_t b = 0; b < beams.size(); ++b)
    for (ManifoldTag up : uppers) set.emplace(std::pair{b, up}, rabi_matrix(beams[b], atom, atom.qudit(), up));
  return set;
}

}  // namespace raman
