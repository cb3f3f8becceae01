#include "raman/angular.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

namespace raman {
namespace {

constexpr int kMaxFactorial = 64;

const std::array<double, kMaxFactorial + 1>& factorials() {
  static const auto table = [] {
    std::array<double, kMaxFactorial + 1> f{};
    f[0] = 1.0;
    for (int i = 1; i <= kMaxFactorial; ++i) f[i] = f[i - 1] * i;
    return f;
  }();
  return table;
}

double fact(int n) { return factorials().at(static_cast<std::size_t>(n)); }

bool triangle_ok(int a, int b, int c) {
  return c >= std::abs(a - b) && c <= a + b && ((a + b + c) % 2 == 0);
}

}  // namespace

double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_J, int two_M) {
  if (two_m1 + two_m2 != two_M) return 0.0;
  if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 || std::abs(two_M) > two_J) return 0.0;
  if ((two_j1 + two_m1) % 2 != 0 || (two_j2 + two_m2) % 2 != 0 || (two_J + two_M) % 2 != 0) return 0.0;
  if (!triangle_ok(two_j1, two_j2, two_J)) return 0.0;

  // Everything below is an integer once halved.
  const int a = (two_j1 + two_j2 - two_J) / 2;
  const int b = (two_j1 - two_m1) / 2;
  const int c = (two_j2 + two_m2) / 2;
  const int d = (two_J - two_j2 + two_m1) / 2;
  const int e = (two_J - two_j1 - two_m2) / 2;

  const double norm =
      std::sqrt((two_J + 1) * fact((two_J + two_j1 - two_j2) / 2) * fact((two_J - two_j1 + two_j2) / 2) *
                fact(a) / fact((two_j1 + two_j2 + two_J) / 2 + 1)) *
      std::sqrt(fact((two_J + two_M) / 2) * fact((two_J - two_M) / 2) * fact((two_j1 - two_m1) / 2) *
                fact((two_j1 + two_m1) / 2) * fact((two_j2 - two_m2) / 2) * fact((two_j2 + two_m2) / 2));

  const int k_min = std::max({0, -d, -e});
  const int k_max = std::min({a, b, c});
  double sum = 0.0;
  for (int k = k_min; k <= k_max; ++k) {
    const double term = 1.0 / (fact(k) * fact(a - k) * fact(b - k) * fact(c - k) * fact(d + k) * fact(e + k));
    sum += (k % 2 == 0) ? term : -term;
  }
  return norm * sum;
}

double wigner_3j(int two_j1, int two_j2, int two_j3, int two_m1, int two_m2, int two_m3) {
  if (two_m1 + two_m2 + two_m3 != 0) return 0.0;
  const double cg = clebsch_gordan(two_j1, two_m1, two_j2, two_m2, two_j3, -two_m3);
  const int phase_exp = (two_j1 - two_j2 - two_m3) / 2;
  const double phase = (std::abs(phase_exp) % 2 == 0) ? 1.0 : -1.0;
  return phase * cg / std::sqrt(two_j3 + 1.0);
}

}  // namespace raman
