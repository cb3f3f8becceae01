#pragma once

// Angular-momentum algebra. Quantum numbers are passed doubled (2j, 2m) so
// half-integers stay exact.
namespace raman {

/// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> from the Racah closed-form
/// sum, Condon-Shortley phase convention. Returns 0 when a selection rule fails.
double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_J, int two_M);

/// Wigner 3j symbol expressed through clebsch_gordan.
double wigner_3j(int two_j1, int two_j2, int two_j3, int two_m1, int two_m2, int two_m3);

}  // namespace raman
