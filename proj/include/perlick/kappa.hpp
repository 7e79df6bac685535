#ifndef PERLICK_KAPPA_HPP
#define PERLICK_KAPPA_HPP

#include <optional>

#include "perlick/errors.hpp"

namespace perlick {

// Curvature parameter of the underlying manifold (paper-side constant
// K = -kappa).  kappa > 0 is the spherical branch, kappa = 0 the flat one,
// kappa < 0 the hyperbolic one.  The flat branch is selected by exact
// comparison, never by taking a numerical limit.
struct Curvature {
    double kappa = 0.0;
};

// tk() raises pole_error when |ck| falls below this.
inline constexpr double tk_pole_epsilon = 1e-14;

// kappa-cosine:   cos(sqrt(k) u)   |  1  |  cosh(sqrt(-k) u)
double ck(Curvature k, double u);

// kappa-sine:     sin(sqrt(k) u)/sqrt(k)  |  u  |  sinh(sqrt(-k) u)/sqrt(-k)
double sk(Curvature k, double u);

// kappa-tangent sk/ck.  Total for kappa <= 0; poles at ck = 0 for kappa > 0.
double tk(Curvature k, double u);

// Derivatives:  d ck/du = -kappa sk(u),  d sk/du = ck(u).
double dck(Curvature k, double u);
double dsk(Curvature k, double u);

// Inverse of u -> tk(u) on the standard chart interval.
//   kappa <= 0 : defined for v in (0, 1/sqrt(-kappa)) (upper bound +inf for
//                kappa = 0); out-of-range v yields nullopt.
//   kappa >  0 : total on v != 0; v > 0 maps to the first (north) interval
//                (0, pi/(2 sqrt(kappa))), v < 0 to the second (south) one.
std::optional<double> tk_inverse(Curvature k, double v);

} // namespace perlick

#endif
