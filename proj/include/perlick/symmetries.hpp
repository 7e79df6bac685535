#ifndef PERLICK_SYMMETRIES_HPP
#define PERLICK_SYMMETRIES_HPP

#include <array>
#include <complex>

#include "perlick/model.hpp"

namespace perlick {

// Selects the "+" or "-" member of a shift/ladder pair.
enum class Sign { plus, minus };

inline double sign_value(Sign s) { return s == Sign::plus ? 1.0 : -1.0; }

// Value of a complex constant of motion together with its polar views.
struct ComplexConstant {
    std::complex<double> value;

    double re() const { return value.real(); }
    double im() const { return value.imag(); }
    double modulus() const { return std::abs(value); }

    // Phase canonicalized to [-pi, pi).
    double phase() const {
        double a = std::arg(value);
        if (a >= M_PI)
            a -= 2.0 * M_PI;
        return a;
    }
};

struct AngularMomentum {
    double lx = 0.0;
    double ly = 0.0;
    double lz = 0.0;
    double l_sq = 0.0;
};

// Per-point angular momenta used throughout the factorization machinery.
// l = sqrt(L^2); lz is |p_phi| so the ladder relations hold for either
// orientation of the azimuthal motion (p_phi < 0 orbits are mirror images).
double ell(const PhasePoint& p);
inline double ell_z(const PhasePoint& p) { return std::abs(p.p_phi); }

// Shift functions of the radial motion:
//   B(+-) = (1/sqrt(2)) (-+ i beta p_xi + l/tk(xi) - 1/l),
//   B+ B- = H_xi - lambda_xi,  lambda_xi = -1/2 (1/l^2 - kappa l^2).
// Requires G = 0 and l > 0.
std::complex<double> shift_b(const ModelParams& params, Sign s, const PhasePoint& p);

// Ladder functions of the polar motion:
//   A(+-) = -+ i sin(theta) p_theta + l cos(theta),   A+ A- = L^2 - lz^2.
std::complex<double> ladder_a(Sign s, const PhasePoint& p);

// Shift functions of the polar motion:
//   C(+-) = -+ i p_theta + lz cot(theta),   C+ C- = H_theta - lz^2.
std::complex<double> shift_c(Sign s, const PhasePoint& p);

// Ladder functions of the azimuthal motion:
//   D(+-) = lz e^{-+ i phi},   D+ D- = p_phi^2.   Requires p_phi != 0.
std::complex<double> ladder_d(Sign s, const PhasePoint& p);

// X(+-) = (A+-)^m (B-+)^n, constant along the flow.  Requires G = 0, l > 0
// and the non-planar case l != lz (throws degenerate_error otherwise; planar
// states are served by z_pm).
ComplexConstant x_pm(const ModelParams& params, Sign s, const PhasePoint& p);

// Y(+-) = C(+-) D(-+) = -Lz (Lx +- i Ly).  Requires p_phi != 0.
ComplexConstant y_pm(Sign s, const PhasePoint& p);

// Planar constants Z(+-) = (D+-)^m (B-+)^n with lz in place of l inside B.
// Requires theta = pi/2 and p_theta = 0 (within 1e-12) and p_phi != 0.
ComplexConstant z_pm(const ModelParams& params, Sign s, const PhasePoint& p);

// Closed-form moduli fixed by the other constants of motion:
//   q_x = (l^2 - lz^2)^{m/2} (E + 1/2 (1/l^2 - kappa l^2))^{n/2}
//   q_y = lz sqrt(l^2 - lz^2)
//   q_z = lz^m (E + 1/2 (1/lz^2 - kappa lz^2))^{n/2}
double x_modulus(const ModelParams& params, double energy, double l, double lz);
double y_modulus(double l, double lz);
double z_modulus(const ModelParams& params, double energy, double lz);

// Cartesian angular momentum components from the spherical phase variables:
//   Lx = -sin(phi) p_theta - cot(theta) cos(phi) p_phi
//   Ly =  cos(phi) p_theta - cot(theta) sin(phi) p_phi
//   Lz =  p_phi
AngularMomentum angular_momentum(const PhasePoint& p);

// Runge-Lenz vector p x L - r_hat for the flat kappa = 0, beta = 1 system
// (caller asserts that context; r = xi, p_r = p_xi there).
std::array<double, 3> runge_lenz(const PhasePoint& p);

// Integer power by repeated multiplication (avoids log/exp branch cuts).
std::complex<double> ipow(std::complex<double> base, int exponent);

} // namespace perlick

#endif
