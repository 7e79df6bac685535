#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <sstream>

#include <json.hpp>

#include "perlick/poisson.hpp"
#include "perlick/symmetries.hpp"

using namespace perlick;

namespace {

using complexd = std::complex<double>;

PhaseFunction coordinate_fn(const char* name, int index) {
    return PhaseFunction{name, [index](const PhasePoint& p) {
                             const double v[6] = {p.xi,   p.theta,   p.phi,
                                                  p.p_xi, p.p_theta, p.p_phi};
                             return complexd(v[index], 0.0);
                         }};
}

// Smooth polynomial/trig test functions: 4th-order stencils differentiate
// them essentially exactly, which keeps nested-bracket noise at roundoff.
PhaseFunction smooth(const char* name, int variant) {
    return PhaseFunction{
        name, [variant](const PhasePoint& p) -> complexd {
            switch (variant) {
                case 0: return p.xi * p.xi * p.p_theta + std::sin(p.theta) * p.p_phi;
                case 1: return p.p_xi * p.p_phi + std::cos(p.phi) * p.xi;
                case 2: return p.theta * p.p_xi + 0.5 * p.p_theta * p.p_theta;
                default: return p.xi * p.theta + std::sin(p.phi) * p.p_theta;
            }
        }};
}

} // namespace

TEST_CASE("canonical pairs") {
    const ModelParams params = ModelParams::make(-1.0, 1, 1);
    const std::vector<PhasePoint> pts = sample_phase_points(params, {20, 7});
    const char* names[6] = {"xi", "theta", "phi", "p_xi", "p_theta", "p_phi"};
    for (const PhasePoint& p : pts) {
        for (int q = 0; q < 3; ++q) {
            for (int m = 0; m < 3; ++m) {
                const complexd val = bracket(coordinate_fn(names[q], q),
                                             coordinate_fn(names[m + 3], m + 3), p);
                CHECK(std::abs(val - complexd(q == m ? 1.0 : 0.0, 0.0)) < 1e-11);
            }
        }
        CHECK(std::abs(bracket(coordinate_fn("xi", 0), coordinate_fn("theta", 1), p)) <
              1e-12);
    }
}

TEST_CASE("bracket of a function with itself vanishes") {
    const ModelParams params = ModelParams::make(0.0, 1, 1);
    const PhaseFunction H = {"H", [params](const PhasePoint& p) {
                                 return complexd(hamiltonian_xi(params, p), 0.0);
                             }};
    for (const PhasePoint& p : sample_phase_points(params, {20, 8}))
        CHECK(std::abs(bracket(H, H, p)) < 1e-12);
}

TEST_CASE("antisymmetry and Leibniz on catalog functions") {
    const ModelParams params = ModelParams::make(-1.0, 2, 1);
    const PhaseFunction H = {"H", [params](const PhasePoint& p) {
                                 return complexd(hamiltonian_xi(params, p), 0.0);
                             }};
    const PhaseFunction A = {"A+", [](const PhasePoint& p) {
                                 return ladder_a(Sign::plus, p);
                             }};
    const PhaseFunction D = {"D-", [](const PhasePoint& p) {
                                 return ladder_d(Sign::minus, p);
                             }};
    const PhaseFunction AD = {"A+D-", [](const PhasePoint& p) {
                                  return ladder_a(Sign::plus, p) *
                                         ladder_d(Sign::minus, p);
                              }};
    for (const PhasePoint& p : sample_phase_points(params, {50, 9})) {
        const complexd fg = bracket(H, A, p);
        const complexd gf = bracket(A, H, p);
        CHECK(std::abs(fg + gf) < 1e-8 * std::max(1.0, std::abs(fg)));

        // {H, A D} = {H, A} D + A {H, D}
        const complexd lhs = bracket(H, AD, p);
        const complexd rhs = bracket(H, A, p) * D(p) + A(p) * bracket(H, D, p);
        CHECK(std::abs(lhs - rhs) < 1e-8 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("jacobi identity on smooth test functions") {
    // Step sizes: the default base_step 1e-4 at both bracket levels.  The
    // test functions are low-degree polynomials/trig, so the inner stencils
    // are exact up to roundoff and the nested residual stays below 1e-6.
    const ModelParams params = ModelParams::make(0.5, 1, 1);
    const PhaseFunction f = smooth("f", 0);
    const PhaseFunction g = smooth("g", 1);
    const PhaseFunction h = smooth("h", 2);
    const auto nest = [](const PhaseFunction& a, const PhaseFunction& b) {
        return PhaseFunction{"nested", [&a, &b](const PhasePoint& p) {
                                 return bracket(a, b, p);
                             }};
    };
    for (const PhasePoint& p : sample_phase_points(params, {30, 10})) {
        const complexd total = bracket(f, nest(g, h), p) +
                               bracket(g, nest(h, f), p) +
                               bracket(h, nest(f, g), p);
        CHECK(std::abs(total) < 1e-6);
    }
}

TEST_CASE("paper bracket spot check: {D-,D+} = 2i sqrt(Hphi)") {
    const ModelParams params = ModelParams::make(1.0, 1, 1);
    const PhaseFunction Dm = {"D-", [](const PhasePoint& p) {
                                  return ladder_d(Sign::minus, p);
                              }};
    const PhaseFunction Dp = {"D+", [](const PhasePoint& p) {
                                  return ladder_d(Sign::plus, p);
                              }};
    for (const PhasePoint& p : sample_phase_points(params, {100, 11})) {
        const complexd want = complexd(0.0, 2.0 * std::abs(p.p_phi));
        CHECK(std::abs(bracket(Dm, Dp, p) - want) < 1e-8);
    }
}

TEST_CASE("verify_relation reporting") {
    const ModelParams params = ModelParams::make(0.0, 1, 1);
    const std::vector<PhasePoint> pts = sample_phase_points(params, {25, 12});
    const PhaseFunction xi = coordinate_fn("xi", 0);
    const PhaseFunction p_xi = coordinate_fn("p_xi", 3);
    const PhaseFunction one = {"1", [](const PhasePoint&) {
                                   return complexd(1.0, 0.0);
                               }};
    const BracketReport good =
        verify_relation("{xi,p_xi}=1", xi, p_xi, one, pts, 1e-8);
    CHECK(good.passed());
    CHECK(good.samples == 25);
    CHECK(good.max_rel < 1e-10);

    const PhaseFunction two = {"2", [](const PhasePoint&) {
                                   return complexd(2.0, 0.0);
                               }};
    const BracketReport bad =
        verify_relation("{xi,p_xi}=2", xi, p_xi, two, pts, 1e-8);
    CHECK(!bad.passed());
    CHECK(bad.failures.size() == 25);

    CHECK_THROWS_AS(verify_relation("empty", xi, p_xi, one, {}, 1e-8),
                    domain_error);
}

TEST_CASE("stencil leaving the chart raises") {
    const ModelParams params = ModelParams::make(0.0, 1, 1);
    const PhaseFunction H = {"H", [params](const PhasePoint& p) {
                                 return complexd(hamiltonian_xi(params, p), 0.0);
                             }};
    PhasePoint p;
    p.xi = 1e-7; // xi - 2h is below the chart guard
    p.theta = 1.0;
    p.p_phi = 0.3;
    CHECK_THROWS_AS(bracket(H, H, p), domain_error);
}

TEST_CASE("full algebra: flat beta=1 panel") {
    const ModelParams params = ModelParams::make(0.0, 1, 1);
    const auto reports = verify_full_algebra(params, 60, 0, 1e-6);
    CHECK(reports.size() > 30);
    for (const BracketReport& r : reports) {
        INFO(r.relation, " max_rel=", r.max_rel);
        CHECK(r.passed());
    }
}

TEST_CASE("full algebra: beta=3 hyperbolic panel at 1e-5") {
    const ModelParams params = ModelParams::make(-1.0, 3, 1);
    const auto reports = verify_full_algebra(params, 60, 1, 1e-5);
    for (const BracketReport& r : reports) {
        INFO(r.relation, " max_rel=", r.max_rel);
        CHECK(r.passed());
    }
}

TEST_CASE("full algebra requires G = 0") {
    ModelParams params = ModelParams::make(0.0, 1, 1);
    params.G = 0.25;
    CHECK_THROWS_AS(verify_full_algebra(params, 10, 0, 1e-6), domain_error);
}

TEST_CASE("sampler determinism and constraints") {
    const ModelParams params = ModelParams::make(1.0, 2, 1);
    const auto a = sample_phase_points(params, {50, 123});
    const auto b = sample_phase_points(params, {50, 123});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i].xi == b[i].xi);
    for (const PhasePoint& p : a) {
        CHECK(p.p_phi > 0.0);
        CHECK(ell(p) - ell_z(p) >= 1e-2);
        CHECK(std::abs(p.xi - 0.5 * xi_max(params)) >= 1e-2);
    }
    for (const PhasePoint& p : sample_phase_points(params, {20, 5, true})) {
        CHECK(p.theta == 0.5 * M_PI);
        CHECK(p.p_theta == 0.0);
    }
}

TEST_CASE("report JSON schema") {
    const ModelParams params = ModelParams::make(0.0, 1, 1);
    const auto reports = verify_full_algebra(params, 10, 0, 1e-6);
    std::ostringstream os;
    write_reports_json(os, reports);
    const nlohmann::json parsed = nlohmann::json::parse(os.str());
    REQUIRE(parsed.is_array());
    REQUIRE(parsed.size() == reports.size());
    for (const auto& entry : parsed) {
        CHECK(entry.contains("relation"));
        CHECK(entry.contains("n"));
        CHECK(entry.contains("max_abs"));
        CHECK(entry.contains("max_rel"));
        CHECK(entry.contains("failures"));
    }
}
