#include "perlick/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "perlick/symmetries.hpp"

namespace perlick {

namespace {

using State = std::array<double, 6>; // xi, theta, phi, p_xi, p_theta, p_phi

State to_state(const PhasePoint& p) {
    return {p.xi, p.theta, p.phi, p.p_xi, p.p_theta, p.p_phi};
}

PhasePoint to_point(const State& y) {
    return {y[0], y[1], y[2], y[3], y[4], y[5]};
}

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double min_step = 1e-13;

State rhs(const ModelParams& params, const State& y) {
    const PhasePoint d = equations_of_motion(params, to_point(y));
    return to_state(d);
}

State hermite(const State& y0, const State& f0, const State& y1, const State& f1,
              double h, double s) {
    const double s2 = s * s, s3 = s2 * s;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    // Increment form keeps exactly conserved components (p_phi) bitwise flat.
    State out;
    for (int i = 0; i < 6; ++i)
        out[i] = y0[i] + h01 * (y1[i] - y0[i]) + h * (h10 * f0[i] + h11 * f1[i]);
    return out;
}

struct Nodes {
    std::vector<double> t;
    std::vector<State> y;
    std::vector<State> f;
};

// Core adaptive loop; the predicate is probed after every accepted step and
// stops the integration early when it returns true.
template <typename StopFn>
Nodes propagate(const ModelParams& params, const PhasePoint& initial, double t_end,
                const IntegrateOptions& opt, StopFn&& stop) {
    if (!opt.fixed_step && !(opt.tol >= 1e-14 && opt.tol <= 1e-6))
        throw domain_error("integration tolerance must lie in [1e-14, 1e-6]");
    if (!(t_end > 0.0))
        throw domain_error("t_end must be positive");

    Nodes nodes;
    double t = 0.0;
    State y = to_state(initial);
    State f = rhs(params, y); // validates the initial state
    nodes.t.push_back(t);
    nodes.y.push_back(y);
    nodes.f.push_back(f);

    double fnorm = 0.0, ynorm = 0.0;
    for (int i = 0; i < 6; ++i) {
        fnorm = std::max(fnorm, std::abs(f[i]));
        ynorm = std::max(ynorm, std::abs(y[i]));
    }
    double h = opt.fixed_step
                   ? *opt.fixed_step
                   : std::min(1e-2 * (1.0 + ynorm) / (1.0 + fnorm), 0.1 * t_end);
    double err_prev = 1.0;

    while (t < t_end) {
        h = std::min(h, t_end - t);
        State k2, k3, k4, k5, k6, k7, y5;
        bool in_domain = true;
        double err = 0.0;
        try {
            State w;
            for (int i = 0; i < 6; ++i) w[i] = y[i] + h * a21 * f[i];
            k2 = rhs(params, w);
            for (int i = 0; i < 6; ++i)
                w[i] = y[i] + h * (a31 * f[i] + a32 * k2[i]);
            k3 = rhs(params, w);
            for (int i = 0; i < 6; ++i)
                w[i] = y[i] + h * (a41 * f[i] + a42 * k2[i] + a43 * k3[i]);
            k4 = rhs(params, w);
            for (int i = 0; i < 6; ++i)
                w[i] = y[i] + h * (a51 * f[i] + a52 * k2[i] + a53 * k3[i] +
                                   a54 * k4[i]);
            k5 = rhs(params, w);
            for (int i = 0; i < 6; ++i)
                w[i] = y[i] + h * (a61 * f[i] + a62 * k2[i] + a63 * k3[i] +
                                   a64 * k4[i] + a65 * k5[i]);
            k6 = rhs(params, w);
            for (int i = 0; i < 6; ++i)
                y5[i] = y[i] + h * (b1 * f[i] + b3 * k3[i] + b4 * k4[i] +
                                    b5 * k5[i] + b6 * k6[i]);
            k7 = rhs(params, y5); // FSAL stage, also validates y5

            double sum = 0.0;
            for (int i = 0; i < 6; ++i) {
                const double ei = h * (e1 * f[i] + e3 * k3[i] + e4 * k4[i] +
                                       e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double sc =
                    opt.tol + opt.tol * std::max(std::abs(y[i]), std::abs(y5[i]));
                sum += (ei / sc) * (ei / sc);
            }
            err = std::sqrt(sum / 6.0);
            if (!std::isfinite(err))
                in_domain = false; // overflow in a trial stage: halve and retry
        } catch (const domain_error&) {
            in_domain = false;
        } catch (const pole_error&) {
            in_domain = false;
        }

        if (!in_domain) {
            h *= 0.5;
            if (h < min_step)
                throw integration_error("step collapse near a chart singularity",
                                        t, to_point(y));
            continue;
        }

        if (opt.fixed_step || err <= 1.0) {
            t += h;
            y = y5;
            f = k7;
            nodes.t.push_back(t);
            nodes.y.push_back(y);
            nodes.f.push_back(f);
            if (stop(nodes))
                break;
            err_prev = std::max(err, 1e-4);
        }
        if (!opt.fixed_step) {
            const double fac =
                0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) *
                std::pow(err_prev, 0.4 / 5.0);
            h *= std::clamp(fac, 0.2, 5.0);
            if (h < min_step)
                throw integration_error("step collapse (error control)", t,
                                        to_point(y));
        }
    }
    return nodes;
}

State nodes_state_at(const Nodes& nodes, double t) {
    const auto it = std::upper_bound(nodes.t.begin(), nodes.t.end(), t);
    std::size_t i = (it == nodes.t.begin()) ? 0 : (it - nodes.t.begin() - 1);
    i = std::min(i, nodes.t.size() - 2);
    const double h = nodes.t[i + 1] - nodes.t[i];
    const double s = (t - nodes.t[i]) / h;
    return hermite(nodes.y[i], nodes.f[i], nodes.y[i + 1], nodes.f[i + 1], h, s);
}

// Descending zero crossings of one component over the step grid, polished
// on the per-step Hermite cubic.
std::vector<double> node_down_crossings(const Nodes& nodes, int component) {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < nodes.t.size(); ++i) {
        if (!(nodes.y[i][component] > 0.0 && nodes.y[i + 1][component] <= 0.0))
            continue;
        double lo = nodes.t[i], hi = nodes.t[i + 1];
        while (hi - lo > 1e-10) {
            const double mid = 0.5 * (lo + hi);
            if (nodes_state_at(nodes, mid)[component] > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        out.push_back(0.5 * (lo + hi));
    }
    return out;
}

bool planar_initial(const PhasePoint& p) {
    return std::abs(p.theta - 0.5 * M_PI) <= 1e-12 && std::abs(p.p_theta) <= 1e-12;
}

DiagnosticSample diagnose(const ModelParams& params, bool planar,
                          const PhasePoint& p) {
    DiagnosticSample d;
    d.energy = hamiltonian_xi(params, p);
    d.l2 = l_squared(p);
    d.p_phi = p.p_phi;
    if (planar) {
        d.x = z_pm(params, Sign::plus, p).value;
        d.y = {0.0, 0.0};
    } else {
        d.x = x_pm(params, Sign::plus, p).value;
        d.y = y_pm(Sign::plus, p).value;
    }
    return d;
}

std::vector<double> down_crossings(const Trajectory& traj, int component);

// Event times for a component: the integrate()-recorded channels when
// present, otherwise crossings re-detected from the uniform samples.
std::vector<double> event_times(const Trajectory& traj, int component) {
    if (component == 3 && !traj.radial_events.empty())
        return traj.radial_events;
    if (component == 4 && !traj.theta_events.empty())
        return traj.theta_events;
    return down_crossings(traj, component);
}

// Descending zero crossings t* (v > 0 -> v <= 0) of one state component,
// polished on the Hermite interpolant to 1e-10 in time.
std::vector<double> down_crossings(const Trajectory& traj, int component) {
    std::vector<double> out;
    const auto value = [&](std::size_t i) {
        const State y = to_state(traj.states[i]);
        return y[component];
    };
    for (std::size_t i = 0; i + 1 < traj.times.size(); ++i) {
        const double v0 = value(i);
        const double v1 = value(i + 1);
        if (!(v0 > 0.0 && v1 <= 0.0))
            continue;
        double lo = traj.times[i], hi = traj.times[i + 1];
        const auto eval = [&](double t) {
            const State y = to_state(dense_state(traj, t));
            return y[component];
        };
        while (hi - lo > 1e-10) {
            const double mid = 0.5 * (lo + hi);
            if (eval(mid) > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        out.push_back(0.5 * (lo + hi));
    }
    return out;
}

// Best rational a/b ~ x over denominators b <= max_den.
std::pair<int, int> rational_approx(double x, int max_den) {
    int best_a = 1, best_b = 1;
    double best_err = std::abs(x - 1.0);
    for (int b = 1; b <= max_den; ++b) {
        const int a = std::max(1, static_cast<int>(std::lround(x * b)));
        const double err = std::abs(x - static_cast<double>(a) / b);
        if (err < best_err - 1e-15) {
            best_err = err;
            best_a = a;
            best_b = b;
        }
    }
    const int g = std::gcd(best_a, best_b);
    return {best_a / g, best_b / g};
}

char* fmt17(char* buf, std::size_t size, double v) {
    std::snprintf(buf, size, "%.17g", v);
    return buf;
}

} // namespace

PhasePoint equations_of_motion(const ModelParams& params, const PhasePoint& p) {
    if (!(p.xi >= xi_domain_guard) || p.xi > xi_max(params) - xi_domain_guard)
        throw domain_error("equations_of_motion: xi outside the chart");
    if (!(p.theta > xi_domain_guard && p.theta < M_PI - xi_domain_guard))
        throw domain_error("equations_of_motion: theta at a polar singularity");

    const double beta = params.beta();
    const double s = sk(params.kappa, p.xi);
    const double c = ck(params.kappa, p.xi);
    const double s2 = s * s;
    const double l2 = l_squared(p);

    PhasePoint d;
    d.xi = beta * beta * p.p_xi;
    d.theta = p.p_theta / s2;
    d.p_xi = l2 * c / (s2 * s) - 1.0 / s2;
    d.p_phi = 0.0;
    if (p.p_phi != 0.0) {
        const double st = std::sin(p.theta);
        d.phi = p.p_phi / (s2 * st * st);
        d.p_theta = p.p_phi * p.p_phi * std::cos(p.theta) / (s2 * st * st * st);
    } else {
        d.phi = 0.0;
        d.p_theta = 0.0;
    }
    return d;
}

Trajectory integrate(const ModelParams& params, const PhasePoint& initial,
                     double t_end, const IntegrateOptions& opt) {
    const Nodes nodes =
        propagate(params, initial, t_end, opt, [](const Nodes&) { return false; });

    Trajectory traj;
    traj.params = params;
    traj.planar = planar_initial(initial);
    const std::size_t count = std::max<std::size_t>(2, opt.samples);
    traj.times.reserve(count);
    traj.states.reserve(count);
    traj.derivs.reserve(count);
    traj.diagnostics.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = t_end * static_cast<double>(i) / (count - 1);
        const State y = nodes_state_at(nodes, t);
        const PhasePoint p = to_point(y);
        traj.times.push_back(t);
        traj.states.push_back(p);
        traj.derivs.push_back(equations_of_motion(params, p));
        traj.diagnostics.push_back(diagnose(params, traj.planar, p));
    }
    traj.radial_events = node_down_crossings(nodes, 3);
    traj.theta_events = node_down_crossings(nodes, 4);
    return traj;
}

PhasePoint dense_state(const Trajectory& traj, double t) {
    if (traj.times.size() < 2)
        throw domain_error("dense_state: trajectory has fewer than two samples");
    const auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
    std::size_t i = (it == traj.times.begin()) ? 0 : (it - traj.times.begin() - 1);
    i = std::min(i, traj.times.size() - 2);
    const double h = traj.times[i + 1] - traj.times[i];
    const double s = (t - traj.times[i]) / h;
    return to_point(hermite(to_state(traj.states[i]), to_state(traj.derivs[i]),
                            to_state(traj.states[i + 1]),
                            to_state(traj.derivs[i + 1]), h, s));
}

double radial_period(const ModelParams& params, const PhasePoint& initial,
                     double tol) {
    IntegrateOptions opt;
    opt.tol = tol;
    double t_end = 20.0;
    for (int attempt = 0; attempt < 6; ++attempt) {
        int crossings = 0;
        double p_xi_amp = 0.0;
        const Nodes nodes = propagate(
            params, initial, t_end, opt, [&](const Nodes& n) {
                const std::size_t k = n.y.size() - 1;
                p_xi_amp = std::max(p_xi_amp, std::abs(n.y[k][3]));
                if (k > 0 && n.y[k - 1][3] > 0.0 && n.y[k][3] <= 0.0)
                    ++crossings;
                return crossings >= 3;
            });
        if (p_xi_amp < 1e-10)
            throw circular_orbit_error("radial_period: circular orbit");
        if (crossings >= 3) {
            // Polish the first and last descending crossings on the nodes.
            std::vector<double> t_cross;
            for (std::size_t i = 0; i + 1 < nodes.t.size(); ++i) {
                if (!(nodes.y[i][3] > 0.0 && nodes.y[i + 1][3] <= 0.0))
                    continue;
                double lo = nodes.t[i], hi = nodes.t[i + 1];
                while (hi - lo > 1e-12) {
                    const double mid = 0.5 * (lo + hi);
                    if (nodes_state_at(nodes, mid)[3] > 0.0)
                        lo = mid;
                    else
                        hi = mid;
                }
                t_cross.push_back(0.5 * (lo + hi));
            }
            if (t_cross.size() >= 2)
                return (t_cross.back() - t_cross.front()) /
                       static_cast<double>(t_cross.size() - 1);
        }
        t_end *= 4.0;
    }
    throw circular_orbit_error(
        "radial_period: no radial oscillation detected (circular or unbounded)");
}

PhasePoint make_initial_state(const ModelParams& params, double energy, double l,
                              double lz) {
    if (!(lz > 0.0) || !(l >= lz))
        throw domain_error("make_initial_state requires l >= lz > 0");
    const TurningPoints tp = turning_points(params, l, energy);
    if (tp.roots.empty())
        throw no_solution_error("no turning point for the requested energy");
    PhasePoint p;
    p.xi = tp.roots.front();
    p.p_xi = 0.0;
    p.phi = 0.0;
    p.p_phi = lz;
    p.p_theta = 0.0;
    p.theta = (l - lz < 1e-14) ? 0.5 * M_PI : M_PI - std::asin(lz / l);
    return p;
}

FrequencyReport estimate_frequencies(const Trajectory& traj) {
    double p_xi_amp = 0.0;
    for (const PhasePoint& p : traj.states)
        p_xi_amp = std::max(p_xi_amp, std::abs(p.p_xi));
    if (p_xi_amp < 1e-10)
        throw circular_orbit_error(
            "estimate_frequencies: circular orbit (no radial oscillation)");
    const std::vector<double> t_xi = event_times(traj, 3);
    if (t_xi.empty())
        throw circular_orbit_error("estimate_frequencies: no radial oscillation");
    if (t_xi.size() < 4)
        throw insufficient_periods_error(
            "estimate_frequencies needs at least three radial periods");
    const double T_xi =
        (t_xi.back() - t_xi.front()) / static_cast<double>(t_xi.size() - 1);

    FrequencyReport report;
    report.omega_xi = 2.0 * M_PI / T_xi;

    // The theta oscillation is clocked by 1/sk^2(xi(t)), so its crossings
    // bunch around the perihelion passage.  A naive mean spacing inherits
    // the endpoint phase jitter; pairing crossings separated by a whole
    // number of radial periods cancels the modulation.
    const auto aligned_rate = [&](const std::vector<double>& events) {
        std::size_t best_i = 0, best_j = events.size() - 1;
        double best_frac = 1e300;
        for (std::size_t i = 0; i < events.size(); ++i) {
            for (std::size_t j = events.size(); j-- > i + 1;) {
                if (j - i < (events.size() - 1) / 2)
                    break;
                const double periods = (events[j] - events[i]) / T_xi;
                const double frac = std::abs(periods - std::round(periods));
                if (frac < best_frac) {
                    best_frac = frac;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        return 2.0 * M_PI * static_cast<double>(best_j - best_i) /
               (events[best_j] - events[best_i]);
    };

    double p_theta_amp = 0.0;
    for (const PhasePoint& p : traj.states)
        p_theta_amp = std::max(p_theta_amp, std::abs(p.p_theta));
    double T_theta = 0.0;
    if (p_theta_amp < 1e-6) {
        report.theta_amplitude_low = true;
    } else {
        const std::vector<double> t_th = event_times(traj, 4);
        if (t_th.size() >= 3) {
            report.omega_theta = aligned_rate(t_th);
            T_theta = 2.0 * M_PI / *report.omega_theta;
        } else {
            report.theta_amplitude_low = true;
        }
    }

    // Secular phi rate over whole radial periods; pick the crossing count
    // closest to a whole number of theta periods so both periodic
    // modulations cancel.
    std::size_t k_best = t_xi.size() - 1;
    if (T_theta > 0.0) {
        double best = 1e300;
        for (std::size_t k = (t_xi.size() - 1) / 2; k < t_xi.size(); ++k) {
            const double cycles = k * T_xi / T_theta;
            const double frac = std::abs(cycles - std::round(cycles));
            if (frac < best) {
                best = frac;
                k_best = k;
            }
        }
    }
    const double t0 = t_xi.front();
    const double t1 = t_xi[k_best];
    const double phi0 = to_state(dense_state(traj, t0))[2];
    const double phi1 = to_state(dense_state(traj, t1))[2];
    report.omega_phi = (phi1 - phi0) / (t1 - t0);

    const double m = traj.params.m, n = traj.params.n;
    if (report.omega_theta) {
        report.radial_lock_residual =
            std::abs(m * *report.omega_theta - n * report.omega_xi) /
            (n * report.omega_xi);
        report.angular_lock_residual =
            std::abs(*report.omega_theta - report.omega_phi) / report.omega_phi;
    }
    if (traj.planar)
        report.planar_lock_residual =
            std::abs(m * report.omega_phi - n * report.omega_xi) /
            (n * report.omega_xi);
    return report;
}

ClosureResult detect_closure(const Trajectory& traj, double tol) {
    ClosureResult result;
    const std::vector<double> t_xi = event_times(traj, 3);
    if (t_xi.size() < 2)
        return result; // unbounded or circular: no recurrence base
    const double T_xi =
        (t_xi.back() - t_xi.front()) / static_cast<double>(t_xi.size() - 1);

    // Component scales for the weighted max-norm.
    std::array<double, 6> scale;
    scale.fill(1e-2);
    std::array<double, 6> lo, hi;
    lo.fill(1e300);
    hi.fill(-1e300);
    for (const PhasePoint& p : traj.states) {
        const State y = to_state(p);
        for (int i = 0; i < 6; ++i) {
            lo[i] = std::min(lo[i], y[i]);
            hi[i] = std::max(hi[i], y[i]);
        }
    }
    for (int i = 0; i < 6; ++i)
        scale[i] = std::max({scale[i], hi[i] - lo[i], std::abs(hi[i]) * 1e-3});
    scale[2] = 2.0 * M_PI;

    // Anchor the recurrence test at the outer turning point, where the
    // motion is slow and the dense interpolation is most accurate.
    const double t0 = t_xi.front();
    const State y0 = to_state(dense_state(traj, t0));
    const double t_last = traj.times.back();

    // Horizon: 4x the closure estimate (radial periods) from the measured
    // frequency ratio omega_xi / omega_theta ~ m/n (omega_phi when planar).
    int horizon = 32;
    try {
        const FrequencyReport freq = estimate_frequencies(traj);
        const double base =
            freq.omega_theta ? *freq.omega_theta : freq.omega_phi;
        const auto [a, b] = rational_approx(freq.omega_xi / base, 24);
        (void)b;
        horizon = 4 * a;
    } catch (const numerical_error&) {
    }

    for (int k = 1; k <= horizon; ++k) {
        const double T = k * T_xi;
        if (t0 + T > t_last)
            break;
        const State yT = to_state(dense_state(traj, t0 + T));
        double dist = 0.0;
        for (int i = 0; i < 6; ++i) {
            double d = yT[i] - y0[i];
            if (i == 2)
                d = std::remainder(d, 2.0 * M_PI);
            dist = std::max(dist, std::abs(d) / scale[i]);
        }
        if (dist < tol) {
            result.closed = true;
            result.period = T;
            const int turns =
                static_cast<int>(std::lround((yT[2] - y0[2]) / (2.0 * M_PI)));
            result.winding = std::make_pair(k, turns);
            break;
        }
    }
    return result;
}

DriftSummary drift_summary(const Trajectory& traj) {
    DriftSummary out;
    if (traj.diagnostics.empty())
        return out;
    const DiagnosticSample& first = traj.diagnostics.front();
    const double e_scale = std::max(1e-30, std::abs(first.energy));
    const double l_scale = std::max(1e-30, std::abs(first.l2));
    const double x_scale = std::max(1e-30, std::abs(first.x));
    const double y_scale = std::max(1e-30, std::abs(first.y));
    for (const DiagnosticSample& d : traj.diagnostics) {
        out.energy_rel =
            std::max(out.energy_rel, std::abs(d.energy - first.energy) / e_scale);
        out.l2_rel = std::max(out.l2_rel, std::abs(d.l2 - first.l2) / l_scale);
        out.p_phi_abs = std::max(out.p_phi_abs, std::abs(d.p_phi - first.p_phi));
        out.x_rel = std::max(out.x_rel, std::abs(d.x - first.x) / x_scale);
        out.y_rel = std::max(out.y_rel, std::abs(d.y - first.y) / y_scale);
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,xi,theta,phi,p_xi,p_theta,p_phi,H,L2,pphi,reX,imX,reY,imY\n";
    char buf[32];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const PhasePoint& p = traj.states[i];
        const DiagnosticSample& d = traj.diagnostics[i];
        const double row[14] = {traj.times[i], p.xi,      p.theta,    p.phi,
                                p.p_xi,        p.p_theta, p.p_phi,    d.energy,
                                d.l2,          d.p_phi,   d.x.real(), d.x.imag(),
                                d.y.real(),    d.y.imag()};
        for (int c = 0; c < 14; ++c) {
            if (c)
                os << ',';
            os << fmt17(buf, sizeof buf, row[c]);
        }
        os << '\n';
    }
}

} // namespace perlick
