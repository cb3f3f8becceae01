#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace raman {

using cdouble = std::complex<double>;

enum class ManifoldTag { S12, D52, P32, F72, F52 };

std::string_view to_string(ManifoldTag tag);
ManifoldTag manifold_tag_from_string(std::string_view name);

/// Orbital angular momentum of the configuration behind a tag (S=0, P=1, ...).
int orbital_l(ManifoldTag tag);

/// One Zeeman sublevel. Energies are angular frequencies relative to the
/// manifold centroid.
struct Level {
  ManifoldTag manifold = ManifoldTag::D52;
  int two_j = 0;
  int two_m = 0;
  double energy = 0.0;

  double j() const { return two_j / 2.0; }
  double m() const { return two_m / 2.0; }
};

/// A fine-structure manifold. Sublevels are indexed from the highest mJ
/// (index 0, mJ = +J) down to mJ = -J.
class Manifold {
 public:
  Manifold(ManifoldTag tag, int two_j, double g_j, double transition_frequency,
           std::optional<double> lifetime = std::nullopt);

  ManifoldTag tag() const { return tag_; }
  int two_j() const { return two_j_; }
  double g_j() const { return g_j_; }
  /// Centroid angular frequency above the qudit manifold (0 for the qudit itself).
  double transition_frequency() const { return transition_frequency_; }
  std::optional<double> lifetime() const { return lifetime_; }

  std::size_t size() const { return static_cast<std::size_t>(two_j_ + 1); }
  int two_m(std::size_t index) const { return two_j_ - 2 * static_cast<int>(index); }
  std::optional<std::size_t> index_of(int two_m) const;

 private:
  ManifoldTag tag_;
  int two_j_;
  double g_j_;
  double transition_frequency_;
  std::optional<double> lifetime_;
};

/// Atomic structure: manifolds, reduced dipole elements (atomic units) and
/// the quantization field. Immutable once built.
class Atom {
 public:
  Atom(std::vector<Manifold> manifolds, std::map<std::pair<ManifoldTag, ManifoldTag>, double> reduced_elements,
       ManifoldTag qudit, double field);

  /// 40Ca+ with the D5/2 qudit, P3/2, F7/2 and F5/2 manifolds. The field is
  /// derived so that the D5/2 splitting is exactly 2 pi x 2.63 MHz.
  static Atom calcium40();

  const Manifold& manifold(ManifoldTag tag) const;
  bool has(ManifoldTag tag) const;
  ManifoldTag qudit() const { return qudit_; }
  const Manifold& qudit_manifold() const { return manifold(qudit_); }
  double field() const { return field_; }
  Atom with_field(double field) const;

  /// Reduced element |<a||d||b>| in atomic units; symmetric in (a, b).
  double reduced_element(ManifoldTag a, ManifoldTag b) const;
  bool dipole_connected(ManifoldTag a, ManifoldTag b) const;

  /// Upper manifolds with a stored reduced element to the qudit manifold.
  std::vector<ManifoldTag> upper_manifolds() const;

  double zeeman_splitting(ManifoldTag tag) const;
  Level level(ManifoldTag tag, std::size_t index) const;
  std::vector<Level> levels(ManifoldTag tag) const;
  /// Bare qudit energies, index 0 = mJ = +J.
  Eigen::VectorXd qudit_energies() const;

 private:
  std::vector<Manifold> manifolds_;
  std::map<std::pair<ManifoldTag, ManifoldTag>, double> reduced_;
  ManifoldTag qudit_;
  double field_;
};

/// Spherical polarization amplitudes indexed by q + 1 (sigma-, pi, sigma+).
/// e_q is the amplitude that drives Delta mJ = q on absorption.
using Polarization = std::array<cdouble, 3>;

/// Real non-negative amplitudes from intensity fractions (normalized).
Polarization polarization_from_fractions(double f_sigma_minus, double f_pi, double f_sigma_plus);

/// Linear polarization of a beam propagating perpendicular to the field,
/// with intensity fraction f_pi along the field. In the Condon-Shortley
/// spherical basis the sigma components carry opposite signs.
Polarization linear_perpendicular_polarization(double f_pi);

struct Beam {
  std::string label;
  double detuning = 0.0;  // from the qudit <-> P3/2 resonance, rad/s
  double power = 0.0;     // W
  double waist = 0.0;     // 1/e^2 intensity radius, m
  Polarization polarization{cdouble{0.0}, cdouble{0.0}, cdouble{0.0}};
  double frequency_offset = 0.0;  // relative to the reference beam, rad/s

  cdouble e(int q) const { return polarization[static_cast<std::size_t>(q + 1)]; }
  /// Throws invalid-parameter if the polarization is not unit norm or the
  /// waist / power are unphysical.
  void validate() const;
  Beam with_power(double p) const;
};

/// Copy of the beams with every beam after the first (the reference) set to
/// frequency offset omega_r.
std::vector<Beam> with_offset(std::span<const Beam> beams, double omega_r);

/// Copy with every power multiplied by scale.
std::vector<Beam> scaled_powers(std::span<const Beam> beams, double scale);

double zeeman_splitting(double field, double g_j);

/// Optical detuning of a beam from the qudit <-> upper resonance.
double beam_detuning(const Atom& atom, const Beam& beam, ManifoldTag upper);

/// Peak field of a Gaussian beam, sqrt(4 P / (pi w0^2 eps0 c)), in V/m.
double peak_field_amplitude(double power, double waist);

/// <J_upper m_upper | J_lower m_lower; 1 q>. Zero unless m_upper = m_lower + q.
double coupling_coefficient(const Level& lower, const Level& upper, int q);

/// Single-photon Rabi frequencies of one beam between two manifolds:
/// Omega_ij = E0 <upper||d||lower> <J_l m_i; 1 q|J_u m_j> e_q / hbar.
struct RabiMatrix {
  std::string beam_label;
  ManifoldTag lower = ManifoldTag::D52;
  ManifoldTag upper = ManifoldTag::P32;
  Eigen::MatrixXcd entries;  // rows: lower index, cols: upper index

  cdouble operator()(std::size_t lower_index, std::size_t upper_index) const {
    return entries(static_cast<Eigen::Index>(lower_index), static_cast<Eigen::Index>(upper_index));
  }
};

RabiMatrix rabi_matrix(const Beam& beam, const Atom& atom, ManifoldTag lower, ManifoldTag upper);

/// Rabi matrices keyed by (beam index, upper manifold), lower is the qudit.
using RabiSet = std::map<std::pair<std::size_t, ManifoldTag>, RabiMatrix>;

RabiSet make_rabi_set(const Atom& atom, std::span<const Beam> beams, std::span<const ManifoldTag> uppers);

}  // namespace raman
