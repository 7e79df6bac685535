#include "perlick/poisson.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <utility>

#include <json.hpp>

#include "perlick/symmetries.hpp"

namespace perlick {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

double& coord(PhasePoint& p, int c) {
    switch (c) {
        case 0: return p.xi;
        case 1: return p.theta;
        case 2: return p.phi;
        case 3: return p.p_xi;
        case 4: return p.p_theta;
        default: return p.p_phi;
    }
}

double coord_value(const PhasePoint& p, int c) {
    PhasePoint copy = p;
    return coord(copy, c);
}

// 4th-order central difference at step h.
std::complex<double> central4(const PhaseFunction& fn, const PhasePoint& p,
                              int c, double h) {
    PhasePoint q = p;
    double& x = coord(q, c);
    const double x0 = x;
    x = x0 + h;
    const std::complex<double> f1 = fn(q);
    x = x0 - h;
    const std::complex<double> f2 = fn(q);
    x = x0 + 2.0 * h;
    const std::complex<double> f3 = fn(q);
    x = x0 - 2.0 * h;
    const std::complex<double> f4 = fn(q);
    return (8.0 * (f1 - f2) - (f3 - f4)) / (12.0 * h);
}

std::array<std::complex<double>, 6> gradient(const PhaseFunction& fn,
                                             const PhasePoint& p,
                                             const BracketOptions& opt) {
    std::array<std::complex<double>, 6> out;
    for (int c = 0; c < 6; ++c) {
        const double h = opt.base_step * std::max(1.0, std::abs(coord_value(p, c)));
        const std::complex<double> coarse = central4(fn, p, c, h);
        const std::complex<double> fine = central4(fn, p, c, 0.5 * h);
        out[c] = (16.0 * fine - coarse) / 15.0;
    }
    return out;
}

// Uniform double in [0, 1) from the raw generator stream; kept explicit so
// seeded sample sets are identical across standard libraries.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

struct Relation {
    std::string name;
    PhaseFunction f, g, rhs;
    bool planar = false;
    std::function<bool(const PhasePoint&)> admit; // optional point filter
};

PhaseFunction make_real(std::string name, std::function<double(const PhasePoint&)> fn) {
    return PhaseFunction{std::move(name),
                         [fn = std::move(fn)](const PhasePoint& p) {
                             return std::complex<double>(fn(p), 0.0);
                         }};
}

} // namespace

std::complex<double> bracket(const PhaseFunction& f, const PhaseFunction& g,
                             const PhasePoint& p, const BracketOptions& opt) {
    const auto df = gradient(f, p, opt);
    const auto dg = gradient(g, p, opt);
    std::complex<double> sum{0.0, 0.0};
    for (int k = 0; k < 3; ++k)
        sum += df[k] * dg[k + 3] - df[k + 3] * dg[k];
    return sum;
}

BracketReport verify_relation(std::string relation, const PhaseFunction& f,
                              const PhaseFunction& g, const PhaseFunction& rhs,
                              std::span<const PhasePoint> points, double rel_tol,
                              const BracketOptions& opt) {
    if (points.empty())
        throw domain_error("verify_relation: empty sample set");
    BracketReport report;
    report.relation = std::move(relation);
    report.rel_tol = rel_tol;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::complex<double> lhs = bracket(f, g, points[i], opt);
        const std::complex<double> want = rhs(points[i]);
        const double abs_res = std::abs(lhs - want);
        const double rel_res =
            abs_res / std::max({1.0, std::abs(lhs), std::abs(want)});
        report.max_abs = std::max(report.max_abs, abs_res);
        report.max_rel = std::max(report.max_rel, rel_res);
        if (rel_res > rel_tol)
            report.failures.push_back({i, abs_res, rel_res});
        ++report.samples;
    }
    return report;
}

std::vector<PhasePoint> sample_phase_points(const ModelParams& params,
                                            const SamplerOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    const double kappa = params.kappa.kappa;
    double xi_lo = 0.3, xi_hi = 2.5;
    if (kappa > 0.0) {
        const double hi = xi_max(params);
        xi_lo = 0.12 * hi;
        xi_hi = 0.88 * hi;
    }
    std::vector<PhasePoint> points;
    points.reserve(opt.count);
    while (points.size() < opt.count) {
        PhasePoint p;
        p.xi = uniform(rng, xi_lo, xi_hi);
        p.phi = uniform(rng, -M_PI, M_PI);
        p.p_xi = uniform(rng, -1.0, 1.0);
        p.p_phi = uniform(rng, 0.15, 0.9);
        if (opt.planar) {
            p.theta = 0.5 * M_PI;
            p.p_theta = 0.0;
        } else {
            p.theta = uniform(rng, 0.35, M_PI - 0.35);
            p.p_theta = uniform(rng, -0.8, 0.8);
        }
        if (kappa > 0.0 && std::abs(p.xi - 0.5 * xi_max(params)) < 1e-2)
            continue; // equator clearance
        if (!opt.planar && ell(p) - ell_z(p) < 1e-2)
            continue; // keep clear of the planar degeneracy
        points.push_back(p);
    }
    return points;
}

std::vector<BracketReport> verify_full_algebra(const ModelParams& params,
                                               std::size_t n_points,
                                               std::uint64_t seed,
                                               double rel_tol) {
    if (params.G != 0.0)
        throw domain_error("verify_full_algebra requires G = 0");
    const double kappa = params.kappa.kappa;
    const double beta = params.beta();
    const double m = static_cast<double>(params.m);
    const double n = static_cast<double>(params.n);

    const PhaseFunction H = make_real(
        "H", [params](const PhasePoint& p) { return hamiltonian_xi(params, p); });
    const PhaseFunction Htp = make_real("Htp", l_squared);
    const PhaseFunction Hphi =
        make_real("Hphi", [](const PhasePoint& p) { return p.p_phi * p.p_phi; });

    const auto sqrt_htp = [](const PhasePoint& p) { return ell(p); };
    const auto sqrt_hphi = [](const PhasePoint& p) { return ell_z(p); };
    const auto sk2 = [params](const PhasePoint& p) {
        const double s = sk(params.kappa, p.xi);
        return s * s;
    };
    const auto sin2 = [](const PhasePoint& p) {
        const double s = std::sin(p.theta);
        return s * s;
    };

    const auto A = [](Sign s) {
        return PhaseFunction{s == Sign::plus ? "A+" : "A-",
                             [s](const PhasePoint& p) { return ladder_a(s, p); }};
    };
    const auto B = [params](Sign s) {
        return PhaseFunction{s == Sign::plus ? "B+" : "B-",
                             [params, s](const PhasePoint& p) {
                                 return shift_b(params, s, p);
                             }};
    };
    const auto C = [](Sign s) {
        return PhaseFunction{s == Sign::plus ? "C+" : "C-",
                             [s](const PhasePoint& p) { return shift_c(s, p); }};
    };
    const auto D = [](Sign s) {
        return PhaseFunction{s == Sign::plus ? "D+" : "D-",
                             [s](const PhasePoint& p) { return ladder_d(s, p); }};
    };
    const auto X = [params](Sign s) {
        return PhaseFunction{s == Sign::plus ? "X+" : "X-",
                             [params, s](const PhasePoint& p) {
                                 return x_pm(params, s, p).value;
                             }};
    };
    const auto Y = [](Sign s) {
        return PhaseFunction{s == Sign::plus ? "Y+" : "Y-",
                             [s](const PhasePoint& p) { return y_pm(s, p).value; }};
    };
    // Smooth 6D extension of the planar constants (no planarity gate), used
    // only for brackets evaluated at planar points.
    const auto Z = [params](Sign s) {
        return PhaseFunction{
            s == Sign::plus ? "Z+" : "Z-", [params, s](const PhasePoint& p) {
                const double lz = ell_z(p);
                const double c = ck(params.kappa, p.xi);
                const double sx = sk(params.kappa, p.xi);
                const Sign opp = (s == Sign::plus) ? Sign::minus : Sign::plus;
                const std::complex<double> b =
                    (1.0 / std::sqrt(2.0)) *
                    std::complex<double>(lz * c / sx - 1.0 / lz,
                                         -sign_value(opp) * params.beta() * p.p_xi);
                return ipow(ladder_d(s, p), params.m) * ipow(b, params.n);
            }};
    };

    const PhaseFunction zero = make_real("0", [](const PhasePoint&) { return 0.0; });

    std::vector<Relation> relations;
    const auto add = [&](std::string name, PhaseFunction f, PhaseFunction g,
                         PhaseFunction rhs, bool planar = false,
                         std::function<bool(const PhasePoint&)> admit = {}) {
        relations.push_back({std::move(name), std::move(f), std::move(g),
                             std::move(rhs), planar, std::move(admit)});
    };

    // {H, .} = 0 for every constant of the algebra.
    add("{H,Htp}", H, Htp, zero);
    add("{H,Hphi}", H, Hphi, zero);
    for (Sign s : {Sign::plus, Sign::minus}) {
        const double sv = sign_value(s);
        const std::string pm = (s == Sign::plus) ? "+" : "-";

        add("{H,X" + pm + "}", H, X(s), zero);
        add("{H,Y" + pm + "}", H, Y(s), zero);
        add("{Htp,Y" + pm + "}", Htp, Y(s), zero);
        add("{Hphi,X" + pm + "}", Hphi, X(s), zero);

        add("{Htp,X" + pm + "}", Htp, X(s),
            PhaseFunction{"2im sqrt(Htp) X" + pm,
                          [=](const PhasePoint& p) {
                              return sv * 2.0 * kI * m * sqrt_htp(p) *
                                     x_pm(params, s, p).value;
                          }});
        add("{Hphi,Y" + pm + "}", Hphi, Y(s),
            PhaseFunction{"-2i sqrt(Hphi) Y" + pm,
                          [=](const PhasePoint& p) {
                              return -sv * 2.0 * kI * sqrt_hphi(p) *
                                     y_pm(s, p).value;
                          }});

        // Building blocks.
        add("{H,B" + pm + "}", H, B(s),
            PhaseFunction{"i beta l/sk^2 B" + pm,
                          [=](const PhasePoint& p) {
                              return sv * kI * beta * sqrt_htp(p) / sk2(p) *
                                     shift_b(params, s, p);
                          }});
        add("{Htp,A" + pm + "}", Htp, A(s),
            PhaseFunction{"2i sqrt(Htp) A" + pm,
                          [=](const PhasePoint& p) {
                              return sv * 2.0 * kI * sqrt_htp(p) * ladder_a(s, p);
                          }});
        add("{Htp,C" + pm + "}", Htp, C(s),
            PhaseFunction{"2i sqrt(Hphi)/sin^2 C" + pm,
                          [=](const PhasePoint& p) {
                              return sv * 2.0 * kI * sqrt_hphi(p) / sin2(p) *
                                     shift_c(s, p);
                          }});
        add("{Hphi,D" + pm + "}", Hphi, D(s),
            PhaseFunction{"2i sqrt(Hphi) D" + pm,
                          [=](const PhasePoint& p) {
                              return sv * 2.0 * kI * sqrt_hphi(p) * ladder_d(s, p);
                          }});
        add("{Htp,D" + pm + "}", Htp, D(s),
            PhaseFunction{"2i sqrt(Hphi)/sin^2 D" + pm,
                          [=](const PhasePoint& p) {
                              return sv * 2.0 * kI * sqrt_hphi(p) / sin2(p) *
                                     ladder_d(s, p);
                          }});

        // Mixed X-Y brackets; the "opposite" pairing has a pole on l = lz,
        // points too close to it are excluded from its sample set.
        const Sign opp = (s == Sign::plus) ? Sign::minus : Sign::plus;
        add("{X" + pm + ",Y" + pm + "}", X(s), Y(s),
            PhaseFunction{"-im/(l+lz) X Y",
                          [=](const PhasePoint& p) {
                              return -sv * kI * m / (sqrt_htp(p) + sqrt_hphi(p)) *
                                     x_pm(params, s, p).value * y_pm(s, p).value;
                          }});
        add("{X" + pm + ",Y" + ((s == Sign::plus) ? "-" : "+") + "}", X(s), Y(opp),
            PhaseFunction{"-im/(l-lz) X Y",
                          [=](const PhasePoint& p) {
                              return -sv * kI * m / (sqrt_htp(p) - sqrt_hphi(p)) *
                                     x_pm(params, s, p).value * y_pm(opp, p).value;
                          }},
            false, [](const PhasePoint& p) { return ell(p) - ell_z(p) >= 1e-3; });

        add("{H,Z" + pm + "}", H, Z(s), zero, /*planar=*/true);
    }

    add("{B-,B+}", B(Sign::minus), B(Sign::plus),
        PhaseFunction{"i beta l/sk^2", [=](const PhasePoint& p) {
                          return kI * beta * sqrt_htp(p) / sk2(p);
                      }});
    add("{A-,A+}", A(Sign::minus), A(Sign::plus),
        PhaseFunction{"2i sqrt(Htp)", [=](const PhasePoint& p) {
                          return 2.0 * kI * sqrt_htp(p);
                      }});
    add("{C-,C+}", C(Sign::minus), C(Sign::plus),
        PhaseFunction{"2i sqrt(Hphi)/sin^2", [=](const PhasePoint& p) {
                          return 2.0 * kI * sqrt_hphi(p) / sin2(p);
                      }});
    add("{D-,D+}", D(Sign::minus), D(Sign::plus),
        PhaseFunction{"2i sqrt(Hphi)", [=](const PhasePoint& p) {
                          return 2.0 * kI * sqrt_hphi(p);
                      }});

    add("{Y+,Y-}", Y(Sign::plus), Y(Sign::minus),
        PhaseFunction{"2i sqrt(Hphi)(Htp-2Hphi)", [=](const PhasePoint& p) {
                          const double hphi = p.p_phi * p.p_phi;
                          return 2.0 * kI * sqrt_hphi(p) * (l_squared(p) - 2.0 * hphi);
                      }});

    // {X+,X-}: the radial factor is H + 1/2 (1/Htp - kappa Htp) evaluated as
    // a phase function (the effective radial Hamiltonian with l^2 -> Htp).
    add("{X+,X-}", X(Sign::plus), X(Sign::minus),
        PhaseFunction{
            "{X+,X-} closed form", [=, Hfn = H](const PhasePoint& p) {
                const double htp = l_squared(p);
                const double hphi = p.p_phi * p.p_phi;
                const double radial =
                    Hfn(p).real() + 0.5 * (1.0 / htp - kappa * htp);
                const double root = std::sqrt(htp);
                return kI * m * n * std::pow(htp - hphi, m) *
                           std::pow(radial, n - 1.0) *
                           (kappa * root + 1.0 / (htp * root)) -
                       2.0 * kI * m * m * std::pow(htp - hphi, m - 1.0) *
                           std::pow(radial, n) * root;
            }});

    const std::vector<PhasePoint> points =
        sample_phase_points(params, {n_points, seed, false});
    const std::vector<PhasePoint> planar_points =
        sample_phase_points(params, {n_points, seed + 1, true});

    std::vector<BracketReport> reports;
    reports.reserve(relations.size());
    std::vector<PhasePoint> admitted;
    for (const Relation& rel : relations) {
        const std::vector<PhasePoint>& base = rel.planar ? planar_points : points;
        std::span<const PhasePoint> used(base);
        if (rel.admit) {
            admitted.clear();
            for (const PhasePoint& p : base)
                if (rel.admit(p))
                    admitted.push_back(p);
            used = admitted;
        }
        reports.push_back(verify_relation(rel.name, rel.f, rel.g, rel.rhs, used,
                                          rel_tol));
    }
    return reports;
}

void write_reports_json(std::ostream& os, std::span<const BracketReport> reports) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const BracketReport& r : reports) {
        nlohmann::ordered_json failures = nlohmann::ordered_json::array();
        for (const PointFailure& f : r.failures)
            failures.push_back({{"index", f.index},
                                {"abs_residual", f.abs_residual},
                                {"rel_residual", f.rel_residual}});
        out.push_back({{"relation", r.relation},
                       {"n", r.samples},
                       {"max_abs", r.max_abs},
                       {"max_rel", r.max_rel},
                       {"rel_tol", r.rel_tol},
                       {"failures", std::move(failures)}});
    }
    os << out.dump(2) << '\n';
}

} // namespace perlick
