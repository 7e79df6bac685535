#ifndef PERLICK_POISSON_HPP
#define PERLICK_POISSON_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "perlick/model.hpp"

namespace perlick {

// A named, evaluable scalar over phase space.  Real observables are carried
// with zero imaginary part.
struct PhaseFunction {
    std::string name;
    std::function<std::complex<double>(const PhasePoint&)> f;

    std::complex<double> operator()(const PhasePoint& p) const { return f(p); }
};

struct BracketOptions {
    // Per-coordinate step h_i = base_step * max(1, |x_i|).
    double base_step = 1e-4;
};

// Canonical Poisson bracket of f and g at p, all six partials taken with
// 4th-order central differences plus one Richardson extrapolation level
// (h and h/2).  Stencil evaluations that leave the chart propagate the
// underlying domain_error.
std::complex<double> bracket(const PhaseFunction& f, const PhaseFunction& g,
                             const PhasePoint& p, const BracketOptions& opt = {});

struct PointFailure {
    std::size_t index = 0;
    double abs_residual = 0.0;
    double rel_residual = 0.0;
};

struct BracketReport {
    std::string relation;
    std::size_t samples = 0;
    double max_abs = 0.0;
    double max_rel = 0.0;
    double rel_tol = 0.0;
    std::vector<PointFailure> failures;

    bool passed() const { return failures.empty() && samples > 0; }
};

// Residual statistics of {f, g} - rhs over a sample set.  The relative
// residual is scaled by max(1, |{f,g}|, |rhs|) so that zero-valued relations
// score on the absolute residual.
BracketReport verify_relation(std::string relation, const PhaseFunction& f,
                              const PhaseFunction& g, const PhaseFunction& rhs,
                              std::span<const PhasePoint> points, double rel_tol,
                              const BracketOptions& opt = {});

struct SamplerOptions {
    std::size_t count = 200;
    std::uint64_t seed = 0;
    bool planar = false; // theta = pi/2, p_theta = 0 exactly
};

// Seeded rejection sampler over a kappa-dependent box, keeping 1e-2 clear of
// the chart singularities (theta near 0/pi, xi near its ends, the kappa > 0
// equator) and, in the non-planar mode, of the l = lz degeneracy.  p_phi is
// sampled positive.
std::vector<PhasePoint> sample_phase_points(const ModelParams& params,
                                            const SamplerOptions& opt);

// Runs every bracket relation of the constants-of-motion algebra plus the
// shift/ladder building-block relations, at n_points seeded samples (plus a
// planar set for the Z relations).  Requires G = 0.  Never aborts on a
// failing relation; failures are recorded in the reports.
std::vector<BracketReport> verify_full_algebra(const ModelParams& params,
                                               std::size_t n_points,
                                               std::uint64_t seed,
                                               double rel_tol);

// JSON array of {relation, n, max_abs, max_rel, failures[]}.
void write_reports_json(std::ostream& os, std::span<const BracketReport> reports);

} // namespace perlick

#endif
