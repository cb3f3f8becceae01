#include <doctest.h>

#include <cmath>
#include <map>
#include <tuple>

#include <Eigen/Dense>

#include "raman/angular.hpp"

using raman::clebsch_gordan;
using raman::wigner_3j;

namespace {

// Coupled states |J M> built in the product basis |m1>|m2> by lowering from
// the stretched state and Gram-Schmidt against the higher-J states. Returns
// CG[(J, M)](m1 index, m2 index) with the Condon-Shortley choice of positive
// <j1 j1; j2 (J - j1) | J J>.
using Product = Eigen::MatrixXd;

double lower_coefficient(int two_j, int two_m) {
  return 0.5 * std::sqrt(static_cast<double>((two_j + two_m) * (two_j - two_m + 2)));
}

Product lower(const Product& s, int two_j1, int two_j2) {
  Product out = Product::Zero(s.rows(), s.cols());
  for (int a = 0; a < s.rows(); ++a)
    for (int b = 0; b < s.cols(); ++b) {
      const int m1 = two_j1 - 2 * a, m2 = two_j2 - 2 * b;
      if (a + 1 < s.rows()) out(a + 1, b) += lower_coefficient(two_j1, m1) * s(a, b);
      if (b + 1 < s.cols()) out(a, b + 1) += lower_coefficient(two_j2, m2) * s(a, b);
    }
  return out;
}

std::map<std::pair<int, int>, Product> coupled_states(int two_j1, int two_j2) {
  std::map<std::pair<int, int>, Product> states;
  const int rows = two_j1 + 1, cols = two_j2 + 1;
  for (int two_J = two_j1 + two_j2; two_J >= std::abs(two_j1 - two_j2); two_J -= 2) {
    // Top state: orthogonal to every higher-J state with M = J.
    Product top = Product::Zero(rows, cols);
    std::vector<std::pair<int, int>> cells;
    for (int a = 0; a < rows; ++a)
      for (int b = 0; b < cols; ++b)
        if ((two_j1 - 2 * a) + (two_j2 - 2 * b) == two_J) cells.emplace_back(a, b);
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(cells.size()), 0);
    for (int K = two_j1 + two_j2; K > two_J; K -= 2) {
      const Product& s = states.at({K, two_J});
      Eigen::VectorXd v(static_cast<Eigen::Index>(cells.size()));
      for (std::size_t i = 0; i < cells.size(); ++i) v(static_cast<Eigen::Index>(i)) = s(cells[i].first, cells[i].second);
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.col(basis.cols() - 1) = v;
    }
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cells.size()));
    if (basis.cols() == 0) {
      v(0) = 1.0;
    } else {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(basis.transpose());
      v = lu.kernel().col(0);
    }
    v.normalize();
    // m1 = j1 component positive.
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (cells[i].first == 0 && v(static_cast<Eigen::Index>(i)) < 0.0) v = -v;
    for (std::size_t i = 0; i < cells.size(); ++i) top(cells[i].first, cells[i].second) = v(static_cast<Eigen::Index>(i));
    states[{two_J, two_J}] = top;
    Product s = top;
    for (int two_M = two_J - 2; two_M >= -two_J; two_M -= 2) {
      s = lower(s, two_j1, two_j2);
      s /= s.norm();
      states[{two_J, two_M}] = s;
    }
  }
  return states;
}

}  // namespace

TEST_CASE("Clebsch-Gordan coefficients match lowering-operator construction") {
  for (auto [two_j1, two_j2] : {std::pair{5, 2}, std::pair{3, 2}, std::pair{7, 2}, std::pair{1, 1}, std::pair{4, 2}}) {
    const auto states = coupled_states(two_j1, two_j2);
    for (const auto& [key, s] : states) {
      const auto [two_J, two_M] = key;
      for (int a = 0; a <= two_j1; ++a)
        for (int b = 0; b <= two_j2; ++b) {
          const int m1 = two_j1 - 2 * a, m2 = two_j2 - 2 * b;
          CHECK(clebsch_gordan(two_j1, m1, two_j2, m2, two_J, two_M) == doctest::Approx(s(a, b)).epsilon(1e-12));
        }
    }
  }
}

TEST_CASE("Clebsch-Gordan table values") {
  // <3/2 3/2; 1 -1 | 5/2 1/2> = sqrt(1/10) and <1/2 1/2; 1/2 -1/2 | 0 0> = 1/sqrt2.
  CHECK(clebsch_gordan(3, 3, 2, -2, 5, 1) == doctest::Approx(std::sqrt(0.1)));
  CHECK(clebsch_gordan(1, 1, 1, -1, 0, 0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(clebsch_gordan(1, -1, 1, 1, 0, 0) == doctest::Approx(-std::sqrt(0.5)));
  CHECK(clebsch_gordan(5, 5, 2, 2, 7, 7) == doctest::Approx(1.0));
}

TEST_CASE("selection rules give zero") {
  CHECK(clebsch_gordan(5, 1, 2, 2, 3, 1) == 0.0);   // M != m1 + m2
  CHECK(clebsch_gordan(5, 1, 2, 0, 9, 1) == 0.0);   // triangle
  CHECK(clebsch_gordan(5, 7, 2, 0, 7, 7) == 0.0);   // |m1| > j1
}

TEST_CASE("orthogonality of the coupling matrix") {
  const int two_j1 = 5, two_j2 = 2;
  for (int two_J = 3; two_J <= 7; two_J += 2)
    for (int two_K = 3; two_K <= 7; two_K += 2)
      for (int two_M = -3; two_M <= 3; two_M += 2) {
        double sum = 0.0;
        for (int m2 = -2; m2 <= 2; m2 += 2)
          sum += clebsch_gordan(two_j1, two_M - m2, two_j2, m2, two_J, two_M) *
                 clebsch_gordan(two_j1, two_M - m2, two_j2, m2, two_K, two_M);
        CHECK(sum == doctest::Approx(two_J == two_K ? 1.0 : 0.0));
      }
}

TEST_CASE("3j symbol symmetries") {
  for (int m1 = -5; m1 <= 5; m1 += 2)
    for (int m2 = -2; m2 <= 2; m2 += 2) {
      const int m3 = -m1 - m2;
      if (std::abs(m3) > 3) continue;
      const double w = wigner_3j(5, 2, 3, m1, m2, m3);
      // Cyclic permutation is even; exchanging two columns gives (-1)^(j1+j2+j3) = +1 here (sum 5).
      CHECK(wigner_3j(2, 3, 5, m2, m3, m1) == doctest::Approx(w));
      CHECK(wigner_3j(2, 5, 3, m2, m1, m3) == doctest::Approx(-w));
      CHECK(wigner_3j(5, 2, 3, -m1, -m2, -m3) == doctest::Approx(-w));
    }
}
