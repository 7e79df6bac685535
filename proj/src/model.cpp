#include "perlick/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace perlick {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_xi(const ModelParams& params, double xi) {
    if (!(xi >= xi_domain_guard))
        throw domain_error("xi = " + std::to_string(xi) + " below the chart guard");
    const double hi = xi_max(params);
    if (xi > hi - xi_domain_guard)
        throw domain_error("xi = " + std::to_string(xi) + " beyond the chart end");
}

void check_theta(const PhasePoint& p) {
    if (p.p_phi != 0.0 && !(p.theta > 0.0 && p.theta < M_PI))
        throw domain_error("theta outside (0, pi) with nonzero p_phi");
}

// Bisection of f on a bracketing cell to absolute width tol in xi, then a
// couple of safeguarded Newton polishes so the residual in f reaches
// machine precision too.
template <typename F, typename DF>
double bisect(F&& f, DF&& df, double lo, double hi, double f_lo, double tol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = f(mid);
        if (f_mid == 0.0)
            return mid;
        if ((f_lo > 0.0) == (f_mid > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
        const double slope = df(x);
        if (slope == 0.0)
            break;
        const double step = f(x) / slope;
        const double next = x - step;
        if (!(next > lo - tol && next < hi + tol))
            break;
        x = next;
    }
    return x;
}

// Scans a log-spaced grid for the single sign change of f and polishes it.
// f must be monotone-crossing on [lo, hi]; returns nullopt when no sign
// change is present.
template <typename F, typename DF>
std::optional<double> bracket_root(F&& f, DF&& df, double lo, double hi, int cells,
                                   double tol) {
    const double log_lo = std::log(lo);
    const double step = (std::log(hi) - log_lo) / cells;
    double a = lo;
    double f_a = f(a);
    if (f_a == 0.0)
        return a;
    for (int i = 1; i <= cells; ++i) {
        const double b = (i == cells) ? hi : std::exp(log_lo + i * step);
        const double f_b = f(b);
        if (f_b == 0.0)
            return b;
        if ((f_a > 0.0) != (f_b > 0.0))
            return bisect(f, df, a, b, f_a, tol);
        a = b;
        f_a = f_b;
    }
    return std::nullopt;
}

} // namespace

ModelParams ModelParams::make(double kappa, int m, int n, double G) {
    if (!std::isfinite(kappa))
        throw domain_error("kappa must be finite");
    if (m < 1 || n < 1)
        throw domain_error("beta = m/n requires m, n >= 1");
    const int g = std::gcd(m, n);
    ModelParams params;
    params.kappa = Curvature{kappa};
    params.m = m / g;
    params.n = n / g;
    params.G = G;
    return params;
}

double xi_max(const ModelParams& params) {
    if (params.kappa.kappa > 0.0)
        return M_PI / std::sqrt(params.kappa.kappa);
    return kInf;
}

double l_squared(const PhasePoint& p) {
    double value = p.p_theta * p.p_theta;
    if (p.p_phi != 0.0) {
        const double s = std::sin(p.theta);
        value += p.p_phi * p.p_phi / (s * s);
    }
    return value;
}

double hamiltonian_xi(const ModelParams& params, const PhasePoint& p) {
    check_xi(params, p.xi);
    check_theta(p);
    const double beta = params.beta();
    const double s = sk(params.kappa, p.xi);
    const double c = ck(params.kappa, p.xi);
    // 1/tk written as ck/sk: finite across the kappa > 0 equator.
    return 0.5 * beta * beta * p.p_xi * p.p_xi + 0.5 * l_squared(p) / (s * s) -
           c / s + params.G;
}

double hamiltonian_r(const ModelParams& params, const RPoint& p) {
    const double kappa = params.kappa.kappa;
    if (!(p.r > 0.0))
        throw domain_error("r must be positive");
    if (kappa > 0.0 && !(p.r < 1.0 / std::sqrt(kappa)))
        throw domain_error("r beyond 1/sqrt(kappa) on the spherical branch");
    const double one_plus_K_r2 = 1.0 - kappa * p.r * p.r; // K = -kappa
    if (one_plus_K_r2 < 0.0)
        throw domain_error("imaginary root: 1 + K r^2 < 0");
    if (p.p_phi != 0.0 && !(p.theta > 0.0 && p.theta < M_PI))
        throw domain_error("theta outside (0, pi) with nonzero p_phi");

    double l2 = p.p_theta * p.p_theta;
    if (p.p_phi != 0.0) {
        const double s = std::sin(p.theta);
        l2 += p.p_phi * p.p_phi / (s * s);
    }
    const double beta = params.beta();
    const double sign = (p.hemisphere == Hemisphere::north) ? -1.0 : 1.0;
    return 0.5 * beta * beta * one_plus_K_r2 * p.p_r * p.p_r +
           0.5 * l2 / (p.r * p.r) + params.G +
           sign * std::sqrt(one_plus_K_r2) / p.r;
}

RPoint to_r_coords(const ModelParams& params, const PhasePoint& p) {
    check_xi(params, p.xi);
    const double c = ck(params.kappa, p.xi);
    if (std::abs(c) < tk_pole_epsilon)
        throw pole_error("p_r undefined at the equator xi = pi/(2 sqrt(kappa))");
    RPoint out;
    out.r = sk(params.kappa, p.xi);
    out.p_r = p.p_xi / c;
    out.theta = p.theta;
    out.phi = p.phi;
    out.p_theta = p.p_theta;
    out.p_phi = p.p_phi;
    out.hemisphere = Hemisphere::north;
    if (params.kappa.kappa > 0.0 && p.xi > 0.5 * xi_max(params))
        out.hemisphere = Hemisphere::south;
    return out;
}

PhasePoint to_xi_coords(const ModelParams& params, const RPoint& p) {
    const double kappa = params.kappa.kappa;
    if (!(p.r > 0.0))
        throw domain_error("r must be positive");
    PhasePoint out;
    out.theta = p.theta;
    out.phi = p.phi;
    out.p_theta = p.p_theta;
    out.p_phi = p.p_phi;
    if (kappa > 0.0) {
        const double rk = std::sqrt(kappa);
        const double arg = rk * p.r;
        if (arg >= 1.0)
            throw pole_error("r at the equator radius 1/sqrt(kappa): xi branch ambiguous");
        const double xi_north = std::asin(arg) / rk;
        out.xi = (p.hemisphere == Hemisphere::north) ? xi_north
                                                     : M_PI / rk - xi_north;
    } else if (kappa < 0.0) {
        const double rk = std::sqrt(-kappa);
        out.xi = std::asinh(rk * p.r) / rk;
    } else {
        out.xi = p.r;
    }
    out.p_xi = p.p_r * ck(params.kappa, out.xi);
    return out;
}

double effective_potential(const ModelParams& params, double ell, double xi) {
    if (!(ell >= 0.0))
        throw domain_error("ell must be >= 0");
    check_xi(params, xi);
    const double s = sk(params.kappa, xi);
    const double c = ck(params.kappa, xi);
    return 0.5 * ell * ell / (s * s) - c / s;
}

std::optional<double> potential_minimizer(const ModelParams& params, double ell) {
    if (!(ell > 0.0))
        throw degenerate_error("potential_minimizer requires ell > 0");
    // In x = 1/tk(xi), V_eff = (l^2/2) x^2 - x + kappa l^2 / 2: vertex at
    // x = 1/l^2, i.e. tk(xi*) = l^2.
    return tk_inverse(params.kappa, ell * ell);
}

EnergyBounds energy_bounds(const ModelParams& params, double ell) {
    if (!(ell > 0.0))
        throw degenerate_error("energy_bounds requires ell > 0 (no centrifugal barrier)");
    const double kappa = params.kappa.kappa;
    EnergyBounds out;
    out.e_min = -0.5 * (1.0 / (ell * ell) - kappa * ell * ell);
    if (kappa < 0.0)
        out.e_escape = -std::sqrt(-kappa);
    else if (kappa == 0.0)
        out.e_escape = 0.0;
    return out;
}

TurningPoints turning_points(const ModelParams& params, double ell, double energy) {
    if (!(ell > 0.0))
        throw degenerate_error("turning_points requires ell > 0");
    const EnergyBounds bounds = energy_bounds(params, ell);
    const double scale = std::max(1.0, std::abs(energy));
    constexpr int cells = 64;
    constexpr double tol = 1e-12;

    const auto excess = [&](double xi) {
        return energy - effective_potential(params, ell, xi);
    };
    const auto excess_slope = [&](double xi) {
        const double s = sk(params.kappa, xi);
        const double c = ck(params.kappa, xi);
        return ell * ell * c / (s * s * s) - 1.0 / (s * s); // -dV/dxi
    };

    const std::optional<double> xi_star = potential_minimizer(params, ell);
    TurningPoints out;

    if (!xi_star) {
        // kappa < 0 with l^2 sqrt(-kappa) >= 1: V_eff is monotone decreasing
        // from +inf to the escape value, so at most one root exists.
        if (energy <= *bounds.e_escape)
            throw no_solution_error("E below the infimum of V_eff");
        double hi = 1.0;
        while (excess(hi) <= 0.0 && hi < 1e9)
            hi *= 2.0;
        const auto root = bracket_root(excess, excess_slope, xi_domain_guard, hi, cells, tol);
        if (root)
            out.roots.push_back(*root);
        return out;
    }

    const double v_min = effective_potential(params, ell, *xi_star);
    if (energy < v_min - 1e-12 * scale)
        throw no_solution_error("E = " + std::to_string(energy) +
                                " below the potential minimum " + std::to_string(v_min));
    if (std::abs(energy - v_min) <= 1e-12 * scale) {
        out.roots.push_back(*xi_star);
        out.degenerate = true;
        return out;
    }

    // Inner root: V_eff falls monotonically from +inf to v_min on (0, xi*].
    const auto inner =
        bracket_root(excess, excess_slope, xi_domain_guard, *xi_star, cells, tol);
    if (inner)
        out.roots.push_back(*inner);

    // Outer root: V_eff rises from v_min towards +inf (kappa > 0) or the
    // escape energy (kappa <= 0).
    if (params.kappa.kappa > 0.0) {
        const auto outer =
            bracket_root(excess, excess_slope, *xi_star,
                         xi_max(params) - xi_domain_guard, cells, tol);
        if (outer)
            out.roots.push_back(*outer);
    } else if (energy < *bounds.e_escape) {
        double hi = *xi_star + 1.0;
        while (excess(hi) > 0.0 && hi < 1e9)
            hi = *xi_star + 2.0 * (hi - *xi_star);
        const auto outer = bracket_root(excess, excess_slope, *xi_star, hi, cells, tol);
        if (outer)
            out.roots.push_back(*outer);
    }

    std::sort(out.roots.begin(), out.roots.end());
    return out;
}

} // namespace perlick
