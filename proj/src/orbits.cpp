#include "perlick/orbits.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace perlick {

namespace {

double discriminant(Curvature kappa, double energy, double lz) {
    return 2.0 * energy * lz * lz + 1.0 - kappa.kappa * lz * lz * lz * lz;
}

char* fmt17(char* buf, std::size_t size, double v) {
    std::snprintf(buf, size, "%.17g", v);
    return buf;
}

} // namespace

std::optional<double> planar_orbit_xi(const ModelParams& params, double energy,
                                      double lz, double phi_z, double phi) {
    if (!(lz > 0.0))
        throw domain_error("planar_orbit_xi requires lz > 0");
    const double disc = discriminant(params.kappa, energy, lz);
    if (disc < 0.0)
        throw discriminant_error("2 E lz^2 + 1 - kappa lz^4 < 0");
    const double m = params.m, n = params.n;
    const double denom =
        1.0 + std::sqrt(disc) * std::cos((phi_z + m * phi) / n);
    if (std::abs(denom) < 1e-14) {
        // tk -> +-inf: the equator for kappa > 0, escape to infinity below.
        if (params.kappa.kappa > 0.0)
            return 0.5 * xi_max(params);
        return std::nullopt;
    }
    return tk_inverse(params.kappa, lz * lz / denom);
}

ConicParams conic_parameters(Curvature kappa, double energy, double lz) {
    if (!(lz > 0.0))
        throw domain_error("conic_parameters requires lz > 0");
    ConicParams out;
    out.kappa = kappa;
    out.semi_latus = lz * lz;
    const double eps2 = 2.0 * energy * lz * lz + 1.0;
    out.eccentricity = std::sqrt(std::max(0.0, eps2));
    const double amp2 = discriminant(kappa, energy, lz);
    if (amp2 < 0.0) {
        out.zero_amplitude = true;
        out.amplitude = 0.0;
    } else {
        out.amplitude = std::sqrt(amp2);
    }
    return out;
}

double theta_of_phi(double l, double lz, double lx, double phi) {
    if (!(lz != 0.0))
        throw domain_error("theta_of_phi requires lz != 0");
    if (!(l > std::abs(lz)))
        throw degenerate_error("theta_of_phi: l = lz is the planar degenerate case");
    const double expected = std::sqrt(l * l - lz * lz);
    if (std::abs(lx - expected) > 1e-9 * std::max(1.0, expected))
        throw domain_error("theta_of_phi: lx inconsistent with sqrt(l^2 - lz^2)");
    const double cot = -(lx / lz) * std::cos(phi);
    return 0.5 * M_PI - std::atan(cot);
}

OrbitClass classify_orbit(const ModelParams& params, double energy, double l) {
    const EnergyBounds bounds = energy_bounds(params, l);
    const double scale = std::max(1.0, std::abs(energy));
    if (energy < bounds.e_min - 1e-12 * scale)
        throw no_solution_error("E below the minimum energy");
    if (std::abs(energy - bounds.e_min) <= 1e-12 * scale)
        return OrbitClass::circular;
    if (!bounds.e_escape || energy < *bounds.e_escape)
        return OrbitClass::bounded_closed;
    return OrbitClass::unbounded;
}

std::vector<OrbitSample> orbit_points(const ModelParams& params, double energy,
                                      double lz, double phi_z,
                                      std::span<const double> phi_grid) {
    std::vector<OrbitSample> out;
    out.reserve(phi_grid.size());
    for (double phi : phi_grid) {
        const std::optional<double> xi =
            planar_orbit_xi(params, energy, lz, phi_z, phi);
        if (!xi)
            continue;
        out.push_back({phi, *xi, *xi * std::cos(phi), *xi * std::sin(phi)});
    }
    return out;
}

std::array<double, 3> embed_xyz(const ModelParams& params, const PhasePoint& p) {
    const double r = sk(params.kappa, p.xi);
    const double st = std::sin(p.theta);
    return {r * st * std::cos(p.phi), r * st * std::sin(p.phi),
            r * std::cos(p.theta)};
}

void write_orbit_csv(std::ostream& os, std::span<const OrbitSample> samples) {
    os << "phi,xi,x,y\n";
    char buf[32];
    for (const OrbitSample& s : samples) {
        os << fmt17(buf, sizeof buf, s.phi) << ',';
        os << fmt17(buf, sizeof buf, s.xi) << ',';
        os << fmt17(buf, sizeof buf, s.x) << ',';
        os << fmt17(buf, sizeof buf, s.y) << '\n';
    }
}

void write_xyz_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,x,y,z\n";
    char buf[32];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const std::array<double, 3> v = embed_xyz(traj.params, traj.states[i]);
        os << fmt17(buf, sizeof buf, traj.times[i]) << ',';
        os << fmt17(buf, sizeof buf, v[0]) << ',';
        os << fmt17(buf, sizeof buf, v[1]) << ',';
        os << fmt17(buf, sizeof buf, v[2]) << '\n';
    }
}

} // namespace perlick
