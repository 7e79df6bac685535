#include "perlick/symmetries.hpp"

#include <cmath>

namespace perlick {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

void require_symmetry_context(const ModelParams& params) {
    if (params.G != 0.0)
        throw domain_error("the factorization constants are defined for G = 0");
}

void require_azimuthal(const PhasePoint& p) {
    if (p.p_phi == 0.0)
        throw degenerate_error("p_phi = 0: azimuthal ladder undefined");
}

// Clamps roundoff-negative arguments of the closed-form moduli to zero.
double nonneg(double v, const char* what) {
    if (v < 0.0) {
        if (v < -1e-12)
            throw no_solution_error(std::string(what) + " is negative");
        return 0.0;
    }
    return v;
}

} // namespace

double ell(const PhasePoint& p) { return std::sqrt(l_squared(p)); }

std::complex<double> ipow(std::complex<double> base, int exponent) {
    std::complex<double> out{1.0, 0.0};
    for (int i = 0; i < exponent; ++i)
        out *= base;
    return out;
}

std::complex<double> shift_b(const ModelParams& params, Sign s, const PhasePoint& p) {
    require_symmetry_context(params);
    const double l = ell(p);
    if (!(l > 0.0))
        throw degenerate_error("shift_b requires l > 0");
    const double c = ck(params.kappa, p.xi);
    const double sx = sk(params.kappa, p.xi);
    if (!(sx > 0.0))
        throw domain_error("shift_b: xi outside the chart");
    const double real_part = l * c / sx - 1.0 / l;
    return (1.0 / std::sqrt(2.0)) *
           std::complex<double>(real_part, -sign_value(s) * params.beta() * p.p_xi);
}

std::complex<double> ladder_a(Sign s, const PhasePoint& p) {
    const double l = ell(p);
    return std::complex<double>(l * std::cos(p.theta),
                                -sign_value(s) * std::sin(p.theta) * p.p_theta);
}

std::complex<double> shift_c(Sign s, const PhasePoint& p) {
    if (!(p.theta > 0.0 && p.theta < M_PI))
        throw domain_error("shift_c requires theta in (0, pi)");
    const double cot = std::cos(p.theta) / std::sin(p.theta);
    return std::complex<double>(ell_z(p) * cot, -sign_value(s) * p.p_theta);
}

std::complex<double> ladder_d(Sign s, const PhasePoint& p) {
    require_azimuthal(p);
    // D(+-) carries e^{-+ i phi}.
    return ell_z(p) * std::exp(-sign_value(s) * kI * p.phi);
}

ComplexConstant x_pm(const ModelParams& params, Sign s, const PhasePoint& p) {
    require_symmetry_context(params);
    const double l2 = l_squared(p);
    const double lz = ell_z(p);
    if (l2 - lz * lz <= 1e-14 * std::max(1.0, l2))
        throw degenerate_error("l = lz: X degenerate, use the planar z_pm constants");
    const Sign opposite = (s == Sign::plus) ? Sign::minus : Sign::plus;
    return ComplexConstant{ipow(ladder_a(s, p), params.m) *
                           ipow(shift_b(params, opposite, p), params.n)};
}

ComplexConstant y_pm(Sign s, const PhasePoint& p) {
    require_azimuthal(p);
    const Sign opposite = (s == Sign::plus) ? Sign::minus : Sign::plus;
    return ComplexConstant{shift_c(s, p) * ladder_d(opposite, p)};
}

ComplexConstant z_pm(const ModelParams& params, Sign s, const PhasePoint& p) {
    require_symmetry_context(params);
    require_azimuthal(p);
    if (std::abs(p.theta - 0.5 * M_PI) > 1e-12 || std::abs(p.p_theta) > 1e-12)
        throw domain_error("z_pm requires the planar state theta = pi/2, p_theta = 0");
    const double lz = ell_z(p);
    const double c = ck(params.kappa, p.xi);
    const double sx = sk(params.kappa, p.xi);
    if (!(sx > 0.0))
        throw domain_error("z_pm: xi outside the chart");
    const double real_part = lz * c / sx - 1.0 / lz;
    // B with lz in place of l.
    const auto b = [&](Sign sb) {
        return (1.0 / std::sqrt(2.0)) *
               std::complex<double>(real_part,
                                    -sign_value(sb) * params.beta() * p.p_xi);
    };
    const Sign opposite = (s == Sign::plus) ? Sign::minus : Sign::plus;
    return ComplexConstant{ipow(ladder_d(s, p), params.m) * ipow(b(opposite), params.n)};
}

double x_modulus(const ModelParams& params, double energy, double l, double lz) {
    const double planar_gap = nonneg(l * l - lz * lz, "l^2 - lz^2");
    const double radial = nonneg(
        energy + 0.5 * (1.0 / (l * l) - params.kappa.kappa * l * l), "E - E_min");
    return std::pow(planar_gap, 0.5 * params.m) * std::pow(radial, 0.5 * params.n);
}

double y_modulus(double l, double lz) {
    return lz * std::sqrt(nonneg(l * l - lz * lz, "l^2 - lz^2"));
}

double z_modulus(const ModelParams& params, double energy, double lz) {
    const double radial = nonneg(
        energy + 0.5 * (1.0 / (lz * lz) - params.kappa.kappa * lz * lz), "E - E_min");
    return std::pow(lz, params.m) * std::pow(radial, 0.5 * params.n);
}

AngularMomentum angular_momentum(const PhasePoint& p) {
    const double sin_t = std::sin(p.theta);
    const double cot = (p.p_phi == 0.0 && sin_t == 0.0)
                           ? 0.0
                           : std::cos(p.theta) / sin_t;
    AngularMomentum out;
    out.lx = -std::sin(p.phi) * p.p_theta - cot * std::cos(p.phi) * p.p_phi;
    out.ly = std::cos(p.phi) * p.p_theta - cot * std::sin(p.phi) * p.p_phi;
    out.lz = p.p_phi;
    out.l_sq = l_squared(p);
    return out;
}

std::array<double, 3> runge_lenz(const PhasePoint& p) {
    // Flat chart: r = xi, p_r = p_xi.
    const double st = std::sin(p.theta), ct = std::cos(p.theta);
    const double sp = std::sin(p.phi), cp = std::cos(p.phi);
    const std::array<double, 3> r_hat{st * cp, st * sp, ct};
    const std::array<double, 3> theta_hat{ct * cp, ct * sp, -st};
    const std::array<double, 3> phi_hat{-sp, cp, 0.0};

    const double pt = p.p_theta / p.xi;
    const double pp = (p.p_phi == 0.0) ? 0.0 : p.p_phi / (p.xi * st);
    std::array<double, 3> mom;
    std::array<double, 3> pos;
    for (int i = 0; i < 3; ++i) {
        mom[i] = p.p_xi * r_hat[i] + pt * theta_hat[i] + pp * phi_hat[i];
        pos[i] = p.xi * r_hat[i];
    }

    const std::array<double, 3> ang{pos[1] * mom[2] - pos[2] * mom[1],
                                    pos[2] * mom[0] - pos[0] * mom[2],
                                    pos[0] * mom[1] - pos[1] * mom[0]};
    return {mom[1] * ang[2] - mom[2] * ang[1] - r_hat[0],
            mom[2] * ang[0] - mom[0] * ang[2] - r_hat[1],
            mom[0] * ang[1] - mom[1] * ang[0] - r_hat[2]};
}

} // namespace perlick
