#ifndef PERLICK_ORBITS_HPP
#define PERLICK_ORBITS_HPP

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "perlick/dynamics.hpp"
#include "perlick/model.hpp"

namespace perlick {

enum class OrbitClass { circular, bounded_closed, unbounded };

// Flat-case conic data plus the curvature-corrected cosine amplitude of the
// generalized conic relation.
struct ConicParams {
    double eccentricity = 0.0; // eps, eps^2 = 2 E lz^2 + 1
    double semi_latus = 0.0;   // alpha = lz^2
    double amplitude = 0.0;    // sqrt(2 E lz^2 + 1 - kappa lz^4)
    bool zero_amplitude = false;
    Curvature kappa;
};

// Planar orbit from the conserved Z constants:
//   cos((phi_z + m phi)/n) = (lz^2/tk(xi) - 1) / sqrt(2 E lz^2 + 1 - kappa lz^4)
// solved for xi in closed form per curvature branch.  nullopt marks a
// forbidden angle / unbounded direction.  Throws discriminant_error when
// 2 E lz^2 + 1 - kappa lz^4 < 0.
std::optional<double> planar_orbit_xi(const ModelParams& params, double energy,
                                      double lz, double phi_z, double phi);

// Conic data of the beta = 1 planar orbit (amplitude general in kappa).
ConicParams conic_parameters(Curvature kappa, double energy, double lz);

// theta(phi) on an l_y = 0 trajectory: cot(theta) = -(lx/lz) cos(phi).
// lx must equal sqrt(l^2 - lz^2); throws degenerate_error when l = lz.
double theta_of_phi(double l, double lz, double lx, double phi);

// circular (E = E_min), bounded_closed (inside the energy band; every
// E >= E_min for kappa > 0), unbounded otherwise.
OrbitClass classify_orbit(const ModelParams& params, double energy, double l);

struct OrbitSample {
    double phi = 0.0;
    double xi = 0.0;
    double x = 0.0; // xi cos(phi)
    double y = 0.0; // xi sin(phi)
};

// Samples the algebraic planar curve on a phi grid; forbidden angles are
// skipped, so gaps appear as jumps in the emitted phi sequence.
std::vector<OrbitSample> orbit_points(const ModelParams& params, double energy,
                                      double lz, double phi_z,
                                      std::span<const double> phi_grid);

// Chart picture of a state in R^3: (sk(xi) sin th cos phi, ..., sk(xi) cos th).
std::array<double, 3> embed_xyz(const ModelParams& params, const PhasePoint& p);

// Orbit CSV, planar flavor: header phi,xi,x,y.
void write_orbit_csv(std::ostream& os, std::span<const OrbitSample> samples);

// Orbit CSV, 3D flavor: header t,x,y,z over the trajectory samples.
void write_xyz_csv(std::ostream& os, const Trajectory& traj);

} // namespace perlick

#endif
