#include "perlick/kappa.hpp"

#include <cmath>

namespace perlick {

double ck(Curvature k, double u) {
    if (k.kappa > 0.0)
        return std::cos(std::sqrt(k.kappa) * u);
    if (k.kappa < 0.0)
        return std::cosh(std::sqrt(-k.kappa) * u);
    return 1.0;
}

double sk(Curvature k, double u) {
    if (k.kappa > 0.0) {
        const double rk = std::sqrt(k.kappa);
        return std::sin(rk * u) / rk;
    }
    if (k.kappa < 0.0) {
        const double rk = std::sqrt(-k.kappa);
        return std::sinh(rk * u) / rk;
    }
    return u;
}

double tk(Curvature k, double u) {
    const double c = ck(k, u);
    if (std::abs(c) < tk_pole_epsilon)
        throw pole_error("tk: kappa-cosine vanishes at u = " + std::to_string(u));
    return sk(k, u) / c;
}

double dck(Curvature k, double u) { return -k.kappa * sk(k, u); }

double dsk(Curvature k, double u) { return ck(k, u); }

std::optional<double> tk_inverse(Curvature k, double v) {
    if (k.kappa > 0.0) {
        const double rk = std::sqrt(k.kappa);
        if (v > 0.0)
            return std::atan(rk * v) / rk;
        if (v < 0.0)
            return (std::atan(rk * v) + M_PI) / rk;
        return std::nullopt; // tk never vanishes on the open chart
    }
    if (v <= 0.0)
        return std::nullopt;
    if (k.kappa == 0.0)
        return v;
    const double rk = std::sqrt(-k.kappa);
    if (v >= 1.0 / rk) // tk < 1/sqrt(-kappa) on the hyperbolic branch
        return std::nullopt;
    return std::atanh(rk * v) / rk;
}

} // namespace perlick
