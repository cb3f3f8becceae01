#include <doctest.h>

#include <cmath>
#include <random>

#include "raman/error.hpp"
#include "raman/noise.hpp"
#include "raman/presets.hpp"
#include "raman/units.hpp"

using namespace raman;

TEST_CASE("Gauss-Hermite rule integrates polynomial moments exactly") {
  const auto [x, w] = gauss_hermite(20);
  // int x^(2k) exp(-x^2) = Gamma(k + 1/2).
  for (int k = 0; k < 10; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += w[i] * std::pow(x[i], 2 * k);
    CHECK(sum == doctest::Approx(std::tgamma(k + 0.5)).epsilon(1e-11));
  }
  double odd = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) odd += w[i] * std::pow(x[i], 5);
  CHECK(odd == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("decohered flop reduces to the ideal flop without noise") {
  const double rabi = units::kHz(8.0);
  for (double t : {10e-6, 62.5e-6, 200e-6}) {
    const double s = std::sin(0.5 * rabi * t);
    CHECK(decohered_flop(t, rabi, 0.0, 0.0) == doctest::Approx(s * s));
    CHECK(decohered_flop(t, rabi, 0.0, 50.0) == doctest::Approx(s * s * std::exp(-50.0 * t)));
  }
}

TEST_CASE("decohered flop matches Monte Carlo over detuning") {
  std::mt19937_64 rng(23);
  const double sigma_f = 400.0, rabi = units::kHz(2.0);
  std::normal_distribution<double> normal(0.0, units::two_pi * sigma_f);
  const std::vector<double> times{100e-6, 250e-6, 700e-6};
  std::vector<double> mc(times.size(), 0.0);
  const int n = 200000;
  for (int s = 0; s < n; ++s) {
    const double d = normal(rng);
    const double w2 = rabi * rabi + d * d;
    for (std::size_t i = 0; i < times.size(); ++i) mc[i] += rabi * rabi / w2 * std::pow(std::sin(0.5 * std::sqrt(w2) * times[i]), 2);
  }
  for (std::size_t i = 0; i < times.size(); ++i)
    CHECK(mc[i] / n == doctest::Approx(decohered_flop(times[i], rabi, sigma_f, 0.0)).epsilon(5e-3));
}

TEST_CASE("Ramsey contrast and coherence time") {
  const DephasingModel m = DephasingModel::from_sigma_t(0.61e-3);
  CHECK(m.sigma_t() == doctest::Approx(0.61e-3));
  CHECK(ramsey_contrast(0.0, m.sigma_f) == 1.0);
  const double te = ramsey_coherence_time(m.sigma_f);
  CHECK(ramsey_contrast(te, m.sigma_f) == doctest::Approx(std::exp(-1.0)));
  CHECK(te == doctest::Approx(std::sqrt(2.0) * 0.61e-3));
  CHECK_THROWS_AS(DephasingModel::from_sigma_t(-1.0), Error);
}

TEST_CASE("sensitivity scaling") {
  const DephasingModel m = DephasingModel::from_sigma_t(0.61e-3, 1.0 / 0.598e-3, 3);
  const DephasingModel better = scale_sensitivity(m, 3, {1.0, 966.0});
  CHECK(1.0 / better.gamma == doctest::Approx(0.578).epsilon(1e-3));
  CHECK(better.sigma_f == doctest::Approx(m.sigma_f / 966.0));
  const DephasingModel five = scale_sensitivity(m, 5, {0.6, 1.0});
  CHECK(five.sigma_f == doctest::Approx(m.sigma_f * 5.0 / 3.0 * 0.6));
  CHECK(five.delta_m == 5);
}

TEST_CASE("cascade population bound") {
  CHECK(cascade_population_bound({1.0, 2.0, 2.0, 1.0, 3.0, 0.0}) == 0.5);
  CHECK(cascade_population_bound({1.0, 1.0, 0.0, 0.0, 1.0, 0.0}) == 1.0);
  // |P| = a^2 / (a^2 + b^2 + 4 D^2 d^2).
  const CascadeCoupling c{2.0, 3.0, 1.0, 5.0, 7.0, 0.1};
  CHECK(cascade_population_bound(c) == doctest::Approx(36.0 / (36.0 + 25.0 + 4.0 * 49.0 * 0.01)));
  const double far = cascade_population_bound({2.0, 3.0, 1.0, 5.0, 7.0, 100.0});
  CHECK(far < cascade_population_bound(c));
}

TEST_CASE("scattering rate is linear in power and error linear in time") {
  const Atom atom = Atom::calcium40();
  const auto a = presets::calibrated_beams(0.1, 0.1, 0.0);
  const auto b = presets::calibrated_beams(0.2, 0.2, 0.0);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(scattering_rate(atom, i, b) == doctest::Approx(2.0 * scattering_rate(atom, i, a)).epsilon(1e-12));

  // Independent oracle for one beam and one level: Gamma_P |Omega|^2 / (4 Delta^2).
  const std::vector<Beam> one{a[0]};
  const RabiMatrix m = rabi_matrix(one[0], atom, ManifoldTag::D52, ManifoldTag::P32);
  double expected = 0.0;
  for (std::size_t p = 0; p < 4; ++p) expected += std::norm(m(0, p)) / (4.0 * one[0].detuning * one[0].detuning);
  CHECK(scattering_rate(atom, 0, one) == doctest::Approx(expected / 6.64e-9).epsilon(1e-12));

  const ScatterError e1 = pi_pulse_scatter_error(2.0, 1.0, 10e-6);
  const ScatterError e2 = pi_pulse_scatter_error(2.0, 1.0, 30e-6);
  CHECK(e1.total == doctest::Approx(1.5e-5));
  CHECK(e2.total == doctest::Approx(3.0 * e1.total));
  CHECK(e2.non_erasure == doctest::Approx(0.06 * e2.total));
}

TEST_CASE("fidelity budget adds its parts") {
  const DephasingModel m = DephasingModel::from_sigma_t(0.61e-3);
  const FidelityBudget b = total_fidelity_budget(50e-6, 0.01, m, 2.0, 1.0);
  CHECK(b.total == doctest::Approx(b.leakage + b.dephasing + b.scatter));
  CHECK(b.dephasing == doctest::Approx(1.0 - decohered_flop(50e-6, units::pi / 50e-6, m.sigma_f, 0.0)));
  CHECK(b.scatter == doctest::Approx(7.5e-5));
  CHECK_THROWS_AS(total_fidelity_budget(0.0, 0.0, m, 1.0, 1.0), Error);
}
