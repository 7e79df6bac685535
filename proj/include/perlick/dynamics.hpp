#ifndef PERLICK_DYNAMICS_HPP
#define PERLICK_DYNAMICS_HPP

#include <complex>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "perlick/model.hpp"

namespace perlick {

// Step collapse near a chart singularity; carries the last good state.
class integration_error : public numerical_error {
  public:
    integration_error(const std::string& msg, double t, const PhasePoint& state)
        : numerical_error(msg), t_last(t), last_state(state) {}

    double t_last;
    PhasePoint last_state;
};

class circular_orbit_error : public numerical_error {
  public:
    explicit circular_orbit_error(const std::string& msg) : numerical_error(msg) {}
};

class insufficient_periods_error : public numerical_error {
  public:
    explicit insufficient_periods_error(const std::string& msg)
        : numerical_error(msg) {}
};

// Conserved quantities evaluated at one sample.  On planar trajectories the
// x slot carries Z(+) (X is degenerate there) and y is identically zero.
struct DiagnosticSample {
    double energy = 0.0;
    double l2 = 0.0;
    double p_phi = 0.0;
    std::complex<double> x;
    std::complex<double> y;
};

struct Trajectory {
    ModelParams params;
    bool planar = false;
    std::vector<double> times;
    std::vector<PhasePoint> states;
    std::vector<PhasePoint> derivs; // flow field at each sample
    std::vector<DiagnosticSample> diagnostics;
    // Descending zero crossings of p_xi / p_theta, polished to 1e-10 in time
    // on the integrator's own step grid (the uniform samples above can be
    // too coarse for the fast perihelion passage).
    std::vector<double> radial_events;
    std::vector<double> theta_events;
};

struct IntegrateOptions {
    double tol = 1e-12;            // in [1e-14, 1e-6]
    std::size_t samples = 2048;    // uniform dense-output samples over [0, t_end]
    std::optional<double> fixed_step; // disables adaptivity (order studies)
};

// Canonical flow of the unified Hamiltonian:
//   xi'  = beta^2 p_xi             p_xi'  = L^2 ck/sk^3 - 1/sk^2
//   th'  = p_theta / sk^2          p_th'  = p_phi^2 cos/(sk^2 sin^3)
//   phi' = p_phi / (sk^2 sin^2)    p_phi' = 0
PhasePoint equations_of_motion(const ModelParams& params, const PhasePoint& p);

// Embedded RK 5(4) (Dormand-Prince) with PI step control and a singularity
// guard that halves rejected steps; throws integration_error below step
// 1e-13.  phi is integrated unwrapped.
Trajectory integrate(const ModelParams& params, const PhasePoint& initial,
                     double t_end, const IntegrateOptions& opt = {});

// Cubic-Hermite dense evaluation between trajectory samples.
PhasePoint dense_state(const Trajectory& traj, double t);

// Radial period from the spacing of descending p_xi zero crossings.
double radial_period(const ModelParams& params, const PhasePoint& initial,
                     double tol = 1e-12);

// Turning-point initial state for prescribed constants (E, l, lz):
// xi at the inner turning point, theta at its own turning point (pi/2 when
// l = lz), phi = 0, p_phi = lz.  This pins l_y = 0.
PhasePoint make_initial_state(const ModelParams& params, double energy, double l,
                              double lz);

struct FrequencyReport {
    double omega_xi = 0.0;
    std::optional<double> omega_theta; // absent for planar / flat-theta runs
    double omega_phi = 0.0;
    bool theta_amplitude_low = false;

    // |m w_theta - n w_xi| / (n w_xi) and |w_theta - w_phi| / w_phi.
    std::optional<double> radial_lock_residual;
    std::optional<double> angular_lock_residual;
    // Planar lock |m w_phi - n w_xi| / (n w_xi).
    std::optional<double> planar_lock_residual;
};

// Frequencies from Hermite-polished zero crossings (p_xi, p_theta) and the
// secular rate of phi measured over whole radial periods.  Needs at least
// three radial periods of data.
FrequencyReport estimate_frequencies(const Trajectory& traj);

struct ClosureResult {
    bool closed = false;
    std::optional<double> period;
    std::optional<std::pair<int, int>> winding; // (radial, azimuthal) cycles
};

// Smallest T = k * T_xi with full-state recurrence under a weighted max-norm
// (angles compared modulo 2 pi, momenta scaled by their trajectory spans).
// Not finding one within the horizon is a result, not an error.
ClosureResult detect_closure(const Trajectory& traj, double tol);

struct DriftSummary {
    double energy_rel = 0.0;
    double l2_rel = 0.0;
    double p_phi_abs = 0.0;
    double x_rel = 0.0; // |X(t) - X(0)| / |X(0)|  (Z on planar runs)
    double y_rel = 0.0;
};

DriftSummary drift_summary(const Trajectory& traj);

// Trajectory CSV: header + one row per sample, 17 significant digits,
// columns t, xi, theta, phi, p_xi, p_theta, p_phi, H, L2, pphi, reX, imX,
// reY, imY.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

} // namespace perlick

#endif
