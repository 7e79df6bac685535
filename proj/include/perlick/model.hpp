#ifndef PERLICK_MODEL_HPP
#define PERLICK_MODEL_HPP

#include <optional>
#include <vector>

#include "perlick/kappa.hpp"

namespace perlick {

// Potential-branch tag of the r-chart.  The unified xi-chart Hamiltonian
// matches the "-" branch on the north piece and the "+" branch on the south
// one (the two pieces only coexist for kappa > 0).
enum class Hemisphere { north, south };

struct ModelParams {
    Curvature kappa;
    int m = 1; // beta = m/n in lowest terms, m, n >= 1
    int n = 1;
    double G = 0.0; // potential offset; the symmetry algebra requires G = 0

    double beta() const { return static_cast<double>(m) / static_cast<double>(n); }

    // Validates and normalizes (m, n) to coprime positive integers.
    static ModelParams make(double kappa, int m, int n, double G = 0.0);
};

// Canonical state in the unified chart (xi, theta, phi; p_xi, p_theta, p_phi).
struct PhasePoint {
    double xi = 0.0;
    double theta = 0.0;
    double phi = 0.0;
    double p_xi = 0.0;
    double p_theta = 0.0;
    double p_phi = 0.0;
};

// Canonical state in the original spherical chart, r = sk(xi).
struct RPoint {
    double r = 0.0;
    double theta = 0.0;
    double phi = 0.0;
    double p_r = 0.0;
    double p_theta = 0.0;
    double p_phi = 0.0;
    Hemisphere hemisphere = Hemisphere::north;
};

struct EnergyBounds {
    double e_min = 0.0;                 // -1/2 (1/l^2 - kappa l^2)
    std::optional<double> e_escape;     // -sqrt(-kappa) | 0 | absent (kappa > 0)
};

struct TurningPoints {
    std::vector<double> roots; // ascending xi values with E = V_eff(xi)
    bool degenerate = false;   // one doubly-degenerate root at E = E_min
};

// Open-interval guard applied at every chart boundary.
inline constexpr double xi_domain_guard = 1e-9;

// Upper end of the xi chart: pi/sqrt(kappa) for kappa > 0, +inf otherwise.
double xi_max(const ModelParams& params);

// L^2 = p_theta^2 + p_phi^2 / sin^2(theta).
double l_squared(const PhasePoint& p);

// Unified Hamiltonian  beta^2 p_xi^2/2 + L^2/(2 sk^2) - 1/tk + G.
double hamiltonian_xi(const ModelParams& params, const PhasePoint& p);

// Branch Hamiltonian  beta^2 (1 + K r^2) p_r^2/2 + L^2/(2 r^2) + G
//                     -/+ (1/r) sqrt(1 + K r^2),  K = -kappa,
// sign taken from the hemisphere tag (north -> "-", south -> "+").
double hamiltonian_r(const ModelParams& params, const RPoint& p);

// Canonical chart change r = sk(xi), p_r = p_xi / ck(xi) and its inverse.
// For kappa > 0 the xi -> r map is 2-to-1; the hemisphere tag disambiguates.
RPoint to_r_coords(const ModelParams& params, const PhasePoint& p);
PhasePoint to_xi_coords(const ModelParams& params, const RPoint& p);

// V_eff(xi) = l^2 / (2 sk^2(xi)) - 1/tk(xi).
double effective_potential(const ModelParams& params, double ell, double xi);

// Location of the V_eff minimum (tk(xi*) = l^2), when it lies in the chart.
std::optional<double> potential_minimizer(const ModelParams& params, double ell);

EnergyBounds energy_bounds(const ModelParams& params, double ell);

// Roots of E = V_eff(xi): two for bounded motion, one for the unbounded
// kappa <= 0 branch, one degenerate root at E = E_min.
TurningPoints turning_points(const ModelParams& params, double ell, double energy);

} // namespace perlick

#endif
