#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "perlick/dynamics.hpp"
#include "perlick/orbits.hpp"
#include "perlick/poisson.hpp"
#include "perlick/symmetries.hpp"

using namespace perlick;

namespace {

// Figure family: kappa = -1, l = 0.25, lz = 0.1.
const double fig_l = 0.25;
const double fig_lz = 0.1;

ModelParams hyp(int m, int n) { return ModelParams::make(-1.0, m, n); }

} // namespace

TEST_CASE("flow field basics") {
    const ModelParams params = hyp(1, 1);
    for (const PhasePoint& p : sample_phase_points(params, {100, 82})) {
        const PhasePoint d = equations_of_motion(params, p);
        CHECK(d.p_phi == 0.0); // phi cyclic
        CHECK(d.xi == params.beta() * params.beta() * p.p_xi);
    }

    // Circular initial data is a radial equilibrium.
    const auto xi_star = potential_minimizer(params, fig_l);
    REQUIRE(xi_star.has_value());
    PhasePoint circ = make_initial_state(params, energy_bounds(params, fig_l).e_min,
                                         fig_l, fig_lz);
    CHECK(std::abs(circ.xi - *xi_star) < 1e-9);
    const PhasePoint d = equations_of_motion(params, circ);
    CHECK(std::abs(d.xi) < 1e-14);
    CHECK(std::abs(d.p_xi) < 1e-9);
}

TEST_CASE("flow field matches the finite-difference gradient of H") {
    const double h = 1e-6;
    for (double kappa : {-1.0, 0.0, 1.0}) {
        const ModelParams params = ModelParams::make(kappa, 2, 1);
        for (const PhasePoint& p : sample_phase_points(params, {170, 84})) {
            const PhasePoint d = equations_of_motion(params, p);
            const auto H_at = [&](double dxi, double dth, double dphi, double dpxi,
                                  double dpth, double dpphi) {
                PhasePoint q = p;
                q.xi += dxi;
                q.theta += dth;
                q.phi += dphi;
                q.p_xi += dpxi;
                q.p_theta += dpth;
                q.p_phi += dpphi;
                return hamiltonian_xi(params, q);
            };
            const double got[6] = {d.xi, d.theta, d.phi, d.p_xi, d.p_theta, d.p_phi};
            const double want[6] = {
                (H_at(0, 0, 0, h, 0, 0) - H_at(0, 0, 0, -h, 0, 0)) / (2 * h),
                (H_at(0, 0, 0, 0, h, 0) - H_at(0, 0, 0, 0, -h, 0)) / (2 * h),
                (H_at(0, 0, 0, 0, 0, h) - H_at(0, 0, 0, 0, 0, -h)) / (2 * h),
                -(H_at(h, 0, 0, 0, 0, 0) - H_at(-h, 0, 0, 0, 0, 0)) / (2 * h),
                -(H_at(0, h, 0, 0, 0, 0) - H_at(0, -h, 0, 0, 0, 0)) / (2 * h),
                -(H_at(0, 0, h, 0, 0, 0) - H_at(0, 0, -h, 0, 0, 0)) / (2 * h)};
            for (int i = 0; i < 6; ++i)
                CHECK(std::abs(got[i] - want[i]) <
                      1e-8 * std::max(1.0, std::abs(want[i])));
        }
    }
}

TEST_CASE("initial-state synthesis hits the requested constants") {
    const ModelParams params = hyp(1, 1);
    const PhasePoint p = make_initial_state(params, -6.0, fig_l, fig_lz);
    CHECK(std::abs(hamiltonian_xi(params, p) - (-6.0)) < 1e-12);
    CHECK(std::abs(ell(p) - fig_l) < 1e-12);
    CHECK(p.p_phi == fig_lz);
    const AngularMomentum am = angular_momentum(p);
    CHECK(std::abs(am.ly) < 1e-15);
    CHECK(am.lx > 0.0);
    CHECK_THROWS_AS(make_initial_state(params, -9.0, fig_l, fig_lz),
                    no_solution_error);
    CHECK_THROWS_AS(make_initial_state(params, -6.0, 0.1, 0.25), domain_error);
}

TEST_CASE("conservation along a figure trajectory") {
    const ModelParams params = hyp(1, 1);
    const PhasePoint initial = make_initial_state(params, -6.0, fig_l, fig_lz);
    const double T = radial_period(params, initial);
    IntegrateOptions opt;
    opt.tol = 1e-12;
    opt.samples = 3000;
    const Trajectory traj = integrate(params, initial, 10.0 * T, opt);
    CHECK(!traj.planar);
    const DriftSummary drift = drift_summary(traj);
    CHECK(drift.energy_rel < 1e-8);
    CHECK(drift.l2_rel < 1e-8);
    CHECK(drift.p_phi_abs == 0.0);
    CHECK(drift.x_rel < 1e-6);
    CHECK(drift.y_rel < 1e-6);
}

TEST_CASE("flat kepler radial period against the analytic value") {
    const ModelParams flat = ModelParams::make(0.0, 1, 1);
    const double E = -0.375;
    const PhasePoint initial = make_initial_state(flat, E, 0.5, 0.5);
    // T = 2 pi a^{3/2}, a = -1/(2E).
    const double a = -1.0 / (2.0 * E);
    CHECK(std::abs(radial_period(flat, initial) - 2.0 * M_PI * std::pow(a, 1.5)) <
          1e-6);

    // beta scales the radial clock: T(beta) = T(1) / beta.
    const ModelParams b2 = ModelParams::make(0.0, 2, 1);
    const PhasePoint initial2 = make_initial_state(b2, E, 0.5, 0.5);
    CHECK(std::abs(radial_period(b2, initial2) - M_PI * std::pow(a, 1.5)) < 1e-6);
}

TEST_CASE("fixed-step order check: error falls ~2^5 per halving") {
    // Mildly eccentric flat orbit: smooth everywhere, so the fixed grid is
    // never disturbed by the singularity guard.
    const ModelParams params = ModelParams::make(0.0, 1, 1);
    const double E = energy_bounds(params, 0.9).e_min + 0.05;
    const PhasePoint initial = make_initial_state(params, E, 0.9, 0.6);
    const double T = 4.0;
    IntegrateOptions ref_opt;
    ref_opt.tol = 1e-14;
    ref_opt.samples = 2;
    const PhasePoint ref = integrate(params, initial, T, ref_opt).states.back();

    const auto end_error = [&](double h) {
        IntegrateOptions opt;
        opt.fixed_step = h;
        opt.samples = 2;
        const PhasePoint got = integrate(params, initial, T, opt).states.back();
        double err = 0.0;
        err = std::max(err, std::abs(got.xi - ref.xi));
        err = std::max(err, std::abs(got.theta - ref.theta));
        err = std::max(err, std::abs(got.phi - ref.phi));
        err = std::max(err, std::abs(got.p_xi - ref.p_xi));
        err = std::max(err, std::abs(got.p_theta - ref.p_theta));
        return err;
    };
    const double e1 = end_error(T / 32);
    const double e2 = end_error(T / 64);
    const double e3 = end_error(T / 128);
    CHECK(e1 / e2 > 16.0);
    CHECK(e1 / e2 < 90.0);
    CHECK(e2 / e3 > 16.0);
    CHECK(e2 / e3 < 90.0);
}

namespace {

// Forward T, flip momenta, forward T again, flip back (H is even in the
// momenta, so this is the time-reversed flow); returns the worst component
// gap to the initial state.
double reversal_gap(const ModelParams& params, const PhasePoint& initial,
                    double T, double tol) {
    IntegrateOptions opt;
    opt.tol = tol;
    opt.samples = 16;
    const Trajectory fwd = integrate(params, initial, T, opt);
    PhasePoint back = fwd.states.back();
    back.p_xi = -back.p_xi;
    back.p_theta = -back.p_theta;
    back.p_phi = -back.p_phi;
    const Trajectory rev = integrate(params, back, T, opt);
    PhasePoint last = rev.states.back();
    last.p_xi = -last.p_xi;
    last.p_theta = -last.p_theta;
    last.p_phi = -last.p_phi;
    double gap = 0.0;
    gap = std::max(gap, std::abs(last.xi - initial.xi));
    gap = std::max(gap, std::abs(last.theta - initial.theta));
    gap = std::max(gap, std::abs(std::remainder(last.phi - initial.phi, 2 * M_PI)));
    gap = std::max(gap, std::abs(last.p_xi - initial.p_xi));
    gap = std::max(gap, std::abs(last.p_theta - initial.p_theta));
    return gap;
}

} // namespace

TEST_CASE("time reversal returns to the initial state") {
    for (double kappa : {-1.0, 0.0, 1.0}) {
        // 10x tolerance holds on spans of ~10 accepted steps; errors
        // accumulate roughly one tolerance per step beyond that.  A smooth
        // near-circular orbit keeps the step count in that regime.
        const ModelParams params = ModelParams::make(kappa, 2, 1);
        const double E = energy_bounds(params, 0.9).e_min + 0.05;
        const PhasePoint smooth_init = make_initial_state(params, E, 0.9, 0.6);
        CHECK(reversal_gap(params, smooth_init, 1.0, 1e-6) < 1e-5);

        // Tight-tolerance long span on an eccentric orbit: the global error
        // stays tiny in absolute terms (~n_steps * tol).
        const double E2 = energy_bounds(params, 0.4).e_min + 0.5;
        const PhasePoint ecc_init = make_initial_state(params, E2, 0.4, 0.2);
        CHECK(reversal_gap(params, ecc_init, 3.0, 1e-12) < 1e-8);
    }
}

TEST_CASE("frequency locking across beta") {
    struct Case {
        int m, n;
        double ratio; // expected omega_theta / omega_xi = n / m
    };
    const Case cases[] = {{1, 1, 1.0}, {2, 1, 0.5}, {1, 3, 3.0}};
    for (const Case& c : cases) {
        const ModelParams params = hyp(c.m, c.n);
        const PhasePoint initial = make_initial_state(params, -6.0, fig_l, fig_lz);
        const double T = radial_period(params, initial);
        IntegrateOptions opt;
        opt.samples = 6000;
        const Trajectory traj = integrate(params, initial, 8.0 * T, opt);
        const FrequencyReport report = estimate_frequencies(traj);
        REQUIRE(report.omega_theta.has_value());
        CHECK(std::abs(*report.omega_theta / report.omega_xi - c.ratio) <
              1e-3 * c.ratio);
        CHECK(std::abs(*report.omega_theta / report.omega_phi - 1.0) < 1e-3);
        REQUIRE(report.radial_lock_residual.has_value());
        CHECK(*report.radial_lock_residual < 1e-3);
    }
}

TEST_CASE("kepler frequencies coincide") {
    const ModelParams flat = ModelParams::make(0.0, 1, 1);
    const PhasePoint initial = make_initial_state(flat, -0.5, 0.5, 0.3);
    const double T = radial_period(flat, initial);
    IntegrateOptions opt;
    opt.samples = 4096;
    const Trajectory traj = integrate(flat, initial, 6.0 * T, opt);
    const FrequencyReport report = estimate_frequencies(traj);
    REQUIRE(report.omega_theta.has_value());
    CHECK(std::abs(*report.omega_theta / report.omega_xi - 1.0) < 1e-3);
    CHECK(std::abs(report.omega_phi / report.omega_xi - 1.0) < 1e-3);
}

TEST_CASE("insufficient span raises") {
    const ModelParams params = hyp(1, 1);
    const PhasePoint initial = make_initial_state(params, -6.0, fig_l, fig_lz);
    const double T = radial_period(params, initial);
    IntegrateOptions opt;
    opt.samples = 512;
    const Trajectory short_traj = integrate(params, initial, 1.5 * T, opt);
    CHECK_THROWS_AS(estimate_frequencies(short_traj), insufficient_periods_error);
}

TEST_CASE("closure detection") {
    // Flat Kepler ellipse: winding (1, 1).
    const ModelParams flat = ModelParams::make(0.0, 1, 1);
    const PhasePoint k_init = make_initial_state(flat, -0.5, 0.5, 0.3);
    const double Tk = radial_period(flat, k_init);
    IntegrateOptions opt;
    opt.samples = 6000;
    const Trajectory k_traj = integrate(flat, k_init, 6.0 * Tk, opt);
    const ClosureResult k_res = detect_closure(k_traj, 1e-4);
    REQUIRE(k_res.closed);
    REQUIRE(k_res.winding.has_value());
    CHECK(k_res.winding->first == 1);
    CHECK(k_res.winding->second == 1);

    // beta = 2 on the hyperboloid: radial and azimuthal counts lock 2:1.
    const ModelParams b2 = hyp(2, 1);
    const PhasePoint b_init = make_initial_state(b2, -6.0, fig_l, fig_lz);
    const double Tb = radial_period(b2, b_init);
    const Trajectory b_traj = integrate(b2, b_init, 10.0 * Tb, opt);
    const ClosureResult b_res = detect_closure(b_traj, 1e-4);
    REQUIRE(b_res.closed);
    REQUIRE(b_res.winding.has_value());
    CHECK(b_res.winding->first * 1 == b_res.winding->second * 2);

    // Marginal escape energy: single turning point, never recurs.
    const ModelParams b1 = hyp(1, 1);
    const PhasePoint u_init = make_initial_state(b1, 4.0, fig_l, fig_lz);
    CHECK(turning_points(b1, fig_l, 4.0).roots.size() == 1);
    const Trajectory u_traj = integrate(b1, u_init, 30.0, opt);
    CHECK(!detect_closure(u_traj, 1e-4).closed);
}

TEST_CASE("polar crossing collapses the step and reports the last state") {
    const ModelParams flat = ModelParams::make(0.0, 1, 1);
    PhasePoint p;
    p.xi = 1.0;
    p.theta = 0.4;
    p.p_theta = -0.5; // heading into the theta = 0 pole
    p.p_phi = 0.0;
    p.p_xi = 0.0;
    try {
        integrate(flat, p, 10.0, {});
        FAIL("expected integration_error");
    } catch (const integration_error& e) {
        CHECK(e.t_last > 0.0);
        CHECK(e.last_state.theta > 0.0);
        CHECK(e.last_state.theta < 0.4);
    }
}

TEST_CASE("planar runs carry Z diagnostics") {
    const ModelParams params = hyp(2, 1);
    const PhasePoint initial = make_initial_state(params, -6.0, 0.25, 0.25);
    CHECK(initial.theta == 0.5 * M_PI);
    const double T = radial_period(params, initial);
    IntegrateOptions opt;
    opt.samples = 2048;
    const Trajectory traj = integrate(params, initial, 5.0 * T, opt);
    CHECK(traj.planar);
    const DriftSummary drift = drift_summary(traj);
    CHECK(drift.x_rel < 1e-6); // Z drift on planar runs
    CHECK(std::abs(traj.diagnostics.front().y) == 0.0);
    const FrequencyReport report = estimate_frequencies(traj);
    CHECK(report.theta_amplitude_low);
    REQUIRE(report.planar_lock_residual.has_value());
    CHECK(*report.planar_lock_residual < 1e-3);
}

TEST_CASE("dense interpolation reproduces samples and conserves energy") {
    // The figure orbits bounce hard off the inner wall (the radial period
    // is ~0.15), so interior interpolation needs a dense sampling to stay
    // accurate through the bounce.
    const ModelParams params = hyp(1, 1);
    const PhasePoint initial = make_initial_state(params, -6.0, fig_l, fig_lz);
    IntegrateOptions opt;
    opt.samples = 16384;
    const Trajectory traj = integrate(params, initial, 5.0, opt);
    for (std::size_t i = 0; i < traj.times.size(); i += 371) {
        const PhasePoint p = dense_state(traj, traj.times[i]);
        CHECK(std::abs(p.xi - traj.states[i].xi) < 1e-12);
    }
    const double E0 = traj.diagnostics.front().energy;
    for (double t : {0.37, 1.234, 2.9, 4.41}) {
        const PhasePoint p = dense_state(traj, t);
        CHECK(std::abs(hamiltonian_xi(params, p) - E0) < 2e-5);
    }

    // On a smooth orbit the interior interpolation is essentially exact.
    const ModelParams flat = ModelParams::make(0.0, 1, 1);
    const double E = energy_bounds(flat, 0.9).e_min + 0.05;
    const Trajectory smooth_traj =
        integrate(flat, make_initial_state(flat, E, 0.9, 0.6), 5.0, opt);
    const double Es = smooth_traj.diagnostics.front().energy;
    for (double t : {0.37, 1.234, 2.9, 4.41}) {
        const PhasePoint p = dense_state(smooth_traj, t);
        CHECK(std::abs(hamiltonian_xi(flat, p) - Es) < 1e-9);
    }
}

TEST_CASE("trajectory csv format") {
    const ModelParams params = hyp(1, 1);
    const PhasePoint initial = make_initial_state(params, -6.0, fig_l, fig_lz);
    IntegrateOptions opt;
    opt.samples = 8;
    const Trajectory traj = integrate(params, initial, 1.0, opt);
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "t,xi,theta,phi,p_xi,p_theta,p_phi,H,L2,pphi,reX,imX,reY,imY");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(is, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 13);
    }
    CHECK(rows == 8);
}

TEST_CASE("phase locking of the shift/ladder arguments") {
    // Along any trajectory m*arg(A+) - n*arg(B+) and arg(C+) - arg(D+) stay
    // pinned at the conserved phases of X+ and Y+.
    const ModelParams params = hyp(2, 1);
    const PhasePoint initial = make_initial_state(params, -6.0, fig_l, fig_lz);
    const double T = radial_period(params, initial);
    IntegrateOptions opt;
    opt.samples = 4096;
    const Trajectory traj = integrate(params, initial, 5.0 * T, opt);

    const auto wrap = [](double a) { return std::remainder(a, 2.0 * M_PI); };
    const double alpha_x =
        params.m * std::arg(ladder_a(Sign::plus, initial)) -
        params.n * std::arg(shift_b(params, Sign::plus, initial));
    const double alpha_y = std::arg(shift_c(Sign::plus, initial)) -
                           std::arg(ladder_d(Sign::plus, initial));
    double worst_x = 0.0, worst_y = 0.0;
    for (const PhasePoint& p : traj.states) {
        const double a = std::arg(ladder_a(Sign::plus, p));
        const double b = std::arg(shift_b(params, Sign::plus, p));
        const double c = std::arg(shift_c(Sign::plus, p));
        const double d = std::arg(ladder_d(Sign::plus, p));
        worst_x = std::max(worst_x,
                           std::abs(wrap(params.m * a - params.n * b - alpha_x)));
        worst_y = std::max(worst_y, std::abs(wrap(c - d - alpha_y)));
    }
    CHECK(worst_x < 1e-6);
    CHECK(worst_y < 1e-6);
}

TEST_CASE("observed boundedness matches the energy-band classification") {
    struct Case {
        double kappa, energy;
    };
    const Case cases[] = {{-1.0, -3.0}, {-1.0, -0.5}, {-1.0, 4.0},
                          {0.0, -0.3},  {0.0, 0.2},   {1.0, 3.0}};
    for (const Case& c : cases) {
        const ModelParams params = ModelParams::make(c.kappa, 1, 1);
        const double l = 0.3;
        const PhasePoint init = make_initial_state(params, c.energy, l, 0.2);
        const OrbitClass analytic = classify_orbit(params, c.energy, l);
        IntegrateOptions opt;
        opt.samples = 2048;
        const Trajectory traj = integrate(params, init, 25.0, opt);
        double xi_hi = 0.0;
        for (const PhasePoint& p : traj.states)
            xi_hi = std::max(xi_hi, p.xi);
        const bool observed_bounded = traj.radial_events.size() >= 2 &&
                                      xi_hi < 0.9 * xi_max(params);
        CHECK(observed_bounded ==
              (analytic == OrbitClass::bounded_closed));
    }
}

TEST_CASE("integration tolerance is validated") {
    const ModelParams params = hyp(1, 1);
    const PhasePoint initial = make_initial_state(params, -6.0, fig_l, fig_lz);
    IntegrateOptions opt;
    opt.tol = 1e-3;
    CHECK_THROWS_AS(integrate(params, initial, 1.0, opt), domain_error);
}
