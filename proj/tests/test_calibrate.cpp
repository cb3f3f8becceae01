#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "raman/calibrate.hpp"
#include "raman/error.hpp"
#include "raman/noise.hpp"
#include "raman/stark.hpp"
#include "raman/units.hpp"

using namespace raman;

TEST_CASE("Levenberg-Marquardt recovers an exponential decay") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 0.002);
  std::vector<double> x, y;
  for (int k = 0; k < 60; ++k) {
    x.push_back(0.05 * k);
    y.push_back(1.7 * std::exp(-0.8 * x.back()) + 0.1 + noise(rng));
  }
  LeastSquaresProblem p{{"a", "k", "c"}, Eigen::Vector3d(1.0, 2.0, 0.0), Eigen::Vector3d(1.0, 1.0, 0.1),
                        [&](const Eigen::VectorXd& v) {
                          Eigen::VectorXd r(static_cast<Eigen::Index>(x.size()));
                          for (std::size_t i = 0; i < x.size(); ++i)
                            r(static_cast<Eigen::Index>(i)) = (v(0) * std::exp(-v(1) * x[i]) + v(2) - y[i]) / 0.002;
                          return r;
                        }};
  const FitResult f = levenberg_marquardt(p);
  CHECK(f.converged);
  CHECK(f.dof == 57);
  CHECK(f.value("a") == doctest::Approx(1.7).epsilon(5e-3));
  CHECK(f.value("k") == doctest::Approx(0.8).epsilon(5e-3));
  CHECK(std::abs(f.value("k") - 0.8) < 4.0 * f.uncertainty("k"));
  CHECK(f.chi2 / f.dof == doctest::Approx(1.0).epsilon(0.4));
  CHECK_THROWS_AS(f.value("nope"), Error);
}

TEST_CASE("degenerate parameters are reported as underconstrained") {
  // Only the product a * b enters the model.
  LeastSquaresProblem p{{"a", "b"}, Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(1.0, 1.0),
                        [](const Eigen::VectorXd& v) {
                          Eigen::VectorXd r(5);
                          for (int i = 0; i < 5; ++i) r(i) = v(0) * v(1) * i - 3.0 * i;
                          return r;
                        }};
  try {
    levenberg_marquardt(p);
    FAIL("expected an underconstrained fit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnderconstrainedFit);
  }
}

TEST_CASE("flop fit round trip") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> noise(0.0, 0.01);
  const double rabi = units::kHz(16.9), gamma = 400.0, sigma_f = 150.0;
  Dataset d;
  d.kind = DatasetKind::Flop;
  for (int k = 0; k < 120; ++k) {
    d.x.push_back(k * 2e-6);
    d.y.push_back(decohered_flop(d.x.back(), rabi, sigma_f, gamma) + noise(rng));
    d.sigma.push_back(0.01);
  }
  const FitResult f = fit_flop(d, sigma_f);
  CHECK(f.value("rabi") == doctest::Approx(rabi).epsilon(3e-3));
  CHECK(std::abs(f.value("gamma") - gamma) < 4.0 * f.uncertainty("gamma"));
}

TEST_CASE("Ramsey fit round trip and unbounded coherence") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 0.01);
  Dataset d;
  d.kind = DatasetKind::Ramsey;
  const DephasingModel m = DephasingModel::from_sigma_t(0.61e-3);
  for (int k = 0; k < 41; ++k) {
    d.x.push_back(k * 50e-6);
    d.y.push_back(ramsey_contrast(d.x.back(), m.sigma_f) + noise(rng));
    d.sigma.push_back(0.01);
  }
  const FitResult f = fit_ramsey(d);
  CHECK_FALSE(f.unbounded);
  CHECK(f.value("sigma_t") == doctest::Approx(0.61e-3).epsilon(0.02));
  CHECK(std::abs(f.value("sigma_t") - 0.61e-3) < 4.0 * f.uncertainty("sigma_t"));

  Dataset flat = d;
  for (double& y : flat.y) y = 0.98 + noise(rng);
  const FitResult g = fit_ramsey(flat);
  CHECK(g.unbounded);
  CHECK(std::isinf(g.value("sigma_t")));
}

TEST_CASE("dataset CSV round trip converts Hz columns") {
  Dataset d;
  d.kind = DatasetKind::SplittingVsPower;
  d.metadata["pair"] = 2.0;
  d.x = {0.05, 0.1, 0.2};
  d.y = {units::kHz(10.0), units::kHz(20.0), units::kHz(40.0)};
  d.sigma = {units::hz_to_angular(30.0), units::hz_to_angular(30.0), units::hz_to_angular(30.0)};
  std::stringstream ss;
  write_dataset_csv(ss, d);
  CHECK(ss.str().find("10000") != std::string::npos);
  const Dataset back = read_dataset_csv(ss, DatasetKind::SplittingVsPower);
  CHECK(back.metadata.at("pair") == 2.0);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.x[i] == d.x[i]);
    CHECK(back.y[i] == doctest::Approx(d.y[i]).epsilon(1e-15));
    CHECK(back.sigma[i] == doctest::Approx(d.sigma[i]).epsilon(1e-15));
  }

  std::stringstream bad("x,y,sigma\n0.1,2\n");
  CHECK_THROWS_AS(read_dataset_csv(bad, DatasetKind::Flop), Error);
  std::stringstream unsorted("x,y,sigma\n0.2,1,1\n0.1,1,1\n");
  CHECK_THROWS_AS(read_dataset_csv(unsorted, DatasetKind::Flop), Error);
}

TEST_CASE("perpendicular beam polarization from a differential shift") {
  const Atom atom = Atom::calcium40();
  const double power = 0.152, waist = 32.16e-6, detuning = units::THz(-44.0);
  // Forward model built from the Rabi matrix directly.
  auto differential = [&](double f_pi) {
    const Beam b{"R_perp", detuning, power, waist, linear_perpendicular_polarization(f_pi), 0.0};
    const RabiMatrix m = rabi_matrix(b, atom, ManifoldTag::D52, ManifoldTag::P32);
    double d = 0.0;
    for (std::size_t p = 0; p < 4; ++p) d += (std::norm(m(0, p)) - std::norm(m(1, p))) / (4.0 * detuning);
    return d;
  };
  for (double f : {0.0, 0.329, 0.8}) {
    const PerpPolarization p = constrain_perp_polarization(atom, differential(f), units::hz_to_angular(100.0), power,
                                                           waist, detuning);
    CHECK(p.pi == doctest::Approx(f).scale(1.0).epsilon(1e-9));
    CHECK(p.sigma_minus == doctest::Approx(0.5 * (1.0 - f)).scale(1.0).epsilon(1e-9));
    CHECK(p.pi_uncertainty > 0.0);
  }
  // Equal thirds removes the differential shift.
  CHECK(constrain_perp_polarization(atom, 0.0, 1.0, power, waist, detuning).pi == doctest::Approx(1.0 / 3.0));
  try {
    constrain_perp_polarization(atom, 10.0 * differential(1.0) - 9.0 * differential(0.0), 1.0, power, waist, detuning);
    FAIL("expected an inconsistent measurement");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InconsistentMeasurement);
  }
}
