// Command-line front end: potential / bounds / simulate / orbit / verify /
// frequencies / sweep subcommands with seeded, byte-reproducible CSV and
// JSON outputs.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "perlick/dynamics.hpp"
#include "perlick/orbits.hpp"
#include "perlick/poisson.hpp"
#include "perlick/symmetries.hpp"

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("PERLICK_LOG");
    if (!env)
        return LogLevel::info;
    const std::string v(env);
    if (v == "quiet")
        return LogLevel::quiet;
    if (v == "debug")
        return LogLevel::debug;
    return LogLevel::info;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info)
        std::cerr << "perlick: " << msg << '\n';
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::debug)
        std::cerr << "perlick[debug]: " << msg << '\n';
}

// Exit codes: 0 ok, 1 verification failure, 2 numerical failure, 3 config.
constexpr int exit_verification = 1;
constexpr int exit_numerical = 2;
constexpr int exit_config = 3;

std::pair<int, int> parse_beta(const std::string& text) {
    int m = 0, n = 1;
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            m = std::stoi(text);
        } else {
            m = std::stoi(text.substr(0, slash));
            n = std::stoi(text.substr(slash + 1));
        }
    } catch (const std::exception&) {
        throw perlick::domain_error("beta must be given as m or m/n");
    }
    if (m < 1 || n < 1)
        throw perlick::domain_error("beta = m/n requires positive integers");
    return {m, n};
}

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw perlick::domain_error("cannot open output file " + path);
    os << contents;
}

json optional_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

json drift_json(const perlick::DriftSummary& d) {
    return json{{"energy_rel", d.energy_rel},
                {"l2_rel", d.l2_rel},
                {"p_phi_abs", d.p_phi_abs},
                {"x_rel", d.x_rel},
                {"y_rel", d.y_rel}};
}

json frequency_json(const perlick::FrequencyReport& f) {
    return json{{"omega_xi", f.omega_xi},
                {"omega_theta", optional_json(f.omega_theta)},
                {"omega_phi", f.omega_phi},
                {"theta_amplitude_low", f.theta_amplitude_low},
                {"radial_lock_residual", optional_json(f.radial_lock_residual)},
                {"angular_lock_residual", optional_json(f.angular_lock_residual)},
                {"planar_lock_residual", optional_json(f.planar_lock_residual)}};
}

json closure_json(const perlick::ClosureResult& c) {
    json out{{"closed", c.closed},
             {"period", optional_json(c.period)}};
    if (c.winding)
        out["winding"] = {c.winding->first, c.winding->second};
    else
        out["winding"] = nullptr;
    return out;
}

const char* class_name(perlick::OrbitClass c) {
    switch (c) {
        case perlick::OrbitClass::circular: return "circular";
        case perlick::OrbitClass::bounded_closed: return "bounded_closed";
        default: return "unbounded";
    }
}

std::string rows_to_csv(const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows) {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i)
            os << ',';
        os << header[i];
    }
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                os << ',';
            os << g17(row[i]);
        }
        os << '\n';
    }
    return os.str();
}

json rows_to_json(const std::vector<std::string>& header,
                  const std::vector<std::vector<double>>& rows) {
    json cols = json::array();
    for (const auto& h : header)
        cols.push_back(h);
    json data = json::array();
    for (const auto& row : rows) {
        json r = json::array();
        for (double v : row)
            r.push_back(v);
        data.push_back(std::move(r));
    }
    return json{{"columns", std::move(cols)}, {"rows", std::move(data)}};
}

std::string summary_path_for(const std::string& output) {
    fs::path p(output);
    p.replace_extension("");
    return p.string() + ".summary.json";
}

// Pre-parse merge of an optional key=value config file: every key that is
// not already given as a flag is appended, so flags always win.  Returns the
// argument list reversed, as CLI11's vector parse expects.
std::vector<std::string> merged_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config")
            path = args[i + 1];
    if (!path.empty()) {
        std::ifstream is(path);
        if (!is)
            throw perlick::domain_error("cannot read config file " + path);
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#')
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw perlick::domain_error("config line without '=': " + line);
            const std::string flag = "--" + line.substr(0, eq);
            if (std::find(args.begin(), args.end(), flag) == args.end()) {
                args.push_back(flag);
                args.push_back(line.substr(eq + 1));
            }
        }
    }
    std::reverse(args.begin(), args.end());
    return args;
}

// ---------------------------------------------------------------------------
// Shared option bundle; each subcommand registers the subset it needs.
struct Options {
    double kappa = 0.0;
    std::string beta = "1";
    double energy = 0.0;
    double l = 0.0;
    double lz = 0.0;
    double phi_z = 0.0;
    std::uint64_t seed = 0;
    double tol = 1e-12;
    double t_end = 0.0;
    double periods = 10.0;
    std::size_t samples = 4096;
    std::size_t grid = 512;
    std::size_t points = 200;
    double rel_tol = 1e-6;
    double xi_min = 0.02;
    double xi_max = 0.0; // 0: curvature-dependent default
    int turns = 0;       // 0: closure default (n azimuthal turns)
    unsigned jobs = 1;
    std::string output;
    std::string xyz_output;
    std::string summary_output;
    std::string format = "csv";
    std::string config_path;
    std::vector<double> kappa_list{-1.0, 0.0, 1.0};
    std::vector<std::string> beta_list{"1", "2", "3"};
    std::vector<double> energy_list{-6.0};
};

perlick::ModelParams params_from(const Options& opt) {
    const auto [m, n] = parse_beta(opt.beta);
    return perlick::ModelParams::make(opt.kappa, m, n);
}

// ---------------------------------------------------------------------------
int run_potential(const Options& opt) {
    const perlick::ModelParams params = perlick::ModelParams::make(opt.kappa, 1, 1);
    const perlick::EnergyBounds bounds = perlick::energy_bounds(params, opt.l);
    double hi = opt.xi_max;
    if (hi <= 0.0)
        hi = opt.kappa > 0.0 ? perlick::xi_max(params) - 1e-3 : 5.0;
    if (!(opt.xi_min > 0.0) || !(hi > opt.xi_min))
        throw perlick::domain_error("potential: need 0 < xi-min < xi-max");
    if (opt.grid < 2)
        throw perlick::domain_error("potential: grid must have at least 2 points");

    std::vector<std::vector<double>> rows;
    rows.reserve(opt.grid);
    for (std::size_t i = 0; i < opt.grid; ++i) {
        const double xi =
            opt.xi_min + (hi - opt.xi_min) * static_cast<double>(i) /
                             static_cast<double>(opt.grid - 1);
        rows.push_back({xi, perlick::effective_potential(params, opt.l, xi)});
    }

    const json meta{{"kappa", opt.kappa},
                    {"l", opt.l},
                    {"e_min", bounds.e_min},
                    {"e_escape", optional_json(bounds.e_escape)}};
    if (opt.format == "json") {
        json out = rows_to_json({"xi", "veff"}, rows);
        out["meta"] = meta;
        write_file(opt.output, out.dump(2) + "\n");
    } else {
        write_file(opt.output, rows_to_csv({"xi", "veff"}, rows));
        write_file(opt.output + ".meta.json", meta.dump(2) + "\n");
    }
    log_info("potential grid written to " + opt.output);
    return 0;
}

int run_bounds(const Options& opt) {
    const perlick::ModelParams params = perlick::ModelParams::make(opt.kappa, 1, 1);
    const perlick::EnergyBounds bounds = perlick::energy_bounds(params, opt.l);
    const json out{{"kappa", opt.kappa},
                   {"l", opt.l},
                   {"e_min", bounds.e_min},
                   {"e_escape", optional_json(bounds.e_escape)}};
    if (opt.output.empty())
        std::cout << out.dump(2) << '\n';
    else
        write_file(opt.output, out.dump(2) + "\n");
    return 0;
}

// Integration horizon for a run: explicit t_end wins; bounded orbits use
// measured radial periods; circular ones the azimuthal period; unbounded
// ones a fixed span.
double pick_t_end(const perlick::ModelParams& params, const Options& opt,
                  perlick::OrbitClass cls, const perlick::PhasePoint& initial) {
    if (opt.t_end > 0.0)
        return opt.t_end;
    switch (cls) {
        case perlick::OrbitClass::bounded_closed:
            return opt.periods *
                   perlick::radial_period(params, initial, opt.tol);
        case perlick::OrbitClass::circular: {
            const perlick::PhasePoint d =
                perlick::equations_of_motion(params, initial);
            return opt.periods * 2.0 * M_PI / std::abs(d.phi);
        }
        default:
            return 40.0;
    }
}

struct SimulationResult {
    perlick::Trajectory traj;
    perlick::OrbitClass cls;
    json summary;
};

SimulationResult simulate_once(const Options& opt) {
    const perlick::ModelParams params = params_from(opt);
    const perlick::OrbitClass cls =
        perlick::classify_orbit(params, opt.energy, opt.l);
    const perlick::PhasePoint initial =
        perlick::make_initial_state(params, opt.energy, opt.l, opt.lz);
    const double t_end = pick_t_end(params, opt, cls, initial);
    log_debug("integrating to t_end = " + g17(t_end));

    perlick::IntegrateOptions iopt;
    iopt.tol = opt.tol;
    iopt.samples = opt.samples;
    SimulationResult result{perlick::integrate(params, initial, t_end, iopt),
                            cls, json{}};

    const perlick::DriftSummary drift = perlick::drift_summary(result.traj);
    json freq = nullptr;
    json closure = nullptr;
    if (cls == perlick::OrbitClass::bounded_closed) {
        try {
            freq = frequency_json(perlick::estimate_frequencies(result.traj));
            closure = closure_json(perlick::detect_closure(result.traj, 1e-4));
        } catch (const perlick::numerical_error& e) {
            log_debug(std::string("frequency analysis skipped: ") + e.what());
        }
    }
    result.summary = json{{"kappa", opt.kappa},
                          {"m", params.m},
                          {"n", params.n},
                          {"E", opt.energy},
                          {"l", opt.l},
                          {"lz", opt.lz},
                          {"seed", opt.seed},
                          {"tol", opt.tol},
                          {"t_end", t_end},
                          {"samples", opt.samples},
                          {"classification", class_name(cls)},
                          {"planar", result.traj.planar},
                          {"drift", drift_json(drift)},
                          {"frequencies", std::move(freq)},
                          {"closure", std::move(closure)}};
    return result;
}

int run_simulate(const Options& opt) {
    SimulationResult result = simulate_once(opt);
    {
        std::ostringstream os;
        perlick::write_trajectory_csv(os, result.traj);
        write_file(opt.output, os.str());
    }
    if (!opt.xyz_output.empty()) {
        std::ostringstream os;
        perlick::write_xyz_csv(os, result.traj);
        write_file(opt.xyz_output, os.str());
    }
    const std::string summary_path = opt.summary_output.empty()
                                         ? summary_path_for(opt.output)
                                         : opt.summary_output;
    write_file(summary_path, result.summary.dump(2) + "\n");
    log_info("trajectory written to " + opt.output + ", summary to " +
             summary_path);
    return 0;
}

int run_frequencies(const Options& opt) {
    Options local = opt;
    if (local.l <= 0.0)
        local.l = local.lz;
    SimulationResult result = simulate_once(local);
    const perlick::FrequencyReport report =
        perlick::estimate_frequencies(result.traj);
    const json out = frequency_json(report);
    if (opt.output.empty())
        std::cout << out.dump(2) << '\n';
    else
        write_file(opt.output, out.dump(2) + "\n");
    return 0;
}

int run_orbit(const Options& opt) {
    const perlick::ModelParams params = params_from(opt);
    const int turns = opt.turns > 0 ? opt.turns : params.n;
    std::vector<double> grid(opt.samples);
    for (std::size_t i = 0; i < opt.samples; ++i)
        grid[i] = 2.0 * M_PI * turns * static_cast<double>(i) /
                  static_cast<double>(opt.samples);
    const std::vector<perlick::OrbitSample> samples =
        perlick::orbit_points(params, opt.energy, opt.lz, opt.phi_z, grid);
    if (opt.format == "json") {
        std::vector<std::vector<double>> rows;
        rows.reserve(samples.size());
        for (const auto& s : samples)
            rows.push_back({s.phi, s.xi, s.x, s.y});
        json out = rows_to_json({"phi", "xi", "x", "y"}, rows);
        out["meta"] = json{{"kappa", opt.kappa}, {"m", params.m}, {"n", params.n},
                           {"E", opt.energy},   {"lz", opt.lz},
                           {"phi_z", opt.phi_z}, {"turns", turns}};
        write_file(opt.output, out.dump(2) + "\n");
    } else {
        std::ostringstream os;
        perlick::write_orbit_csv(os, samples);
        write_file(opt.output, os.str());
    }
    log_info("orbit curve (" + std::to_string(samples.size()) +
             " points) written to " + opt.output);
    return 0;
}

int run_verify(const Options& opt) {
    const perlick::ModelParams params = params_from(opt);
    const std::vector<perlick::BracketReport> reports =
        perlick::verify_full_algebra(params, opt.points, opt.seed, opt.rel_tol);
    std::ostringstream os;
    perlick::write_reports_json(os, reports);
    if (opt.output.empty())
        std::cout << os.str();
    else
        write_file(opt.output, os.str());
    std::size_t failed = 0;
    for (const auto& r : reports)
        if (!r.passed())
            ++failed;
    log_info(std::to_string(reports.size() - failed) + "/" +
             std::to_string(reports.size()) + " bracket relations passed");
    return failed == 0 ? 0 : exit_verification;
}

int run_sweep(const Options& opt) {
    fs::create_directories(opt.output);
    struct Job {
        std::size_t index;
        double kappa;
        std::string beta;
        double energy;
    };
    std::vector<Job> jobs;
    for (double kappa : opt.kappa_list)
        for (const std::string& beta : opt.beta_list)
            for (double energy : opt.energy_list)
                jobs.push_back({jobs.size(), kappa, beta, energy});

    std::vector<json> entries(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    const auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size())
                return;
            const Job& job = jobs[i];
            Options local = opt;
            local.kappa = job.kappa;
            local.beta = job.beta;
            local.energy = job.energy;
            const auto [m, n] = parse_beta(job.beta);
            std::ostringstream name;
            name << "run" << job.index << "_k" << g17(job.kappa) << "_b" << m
                 << "-" << n << "_E" << g17(job.energy) << ".csv";
            const std::string file = name.str();
            json entry{{"kappa", job.kappa}, {"m", m},       {"n", n},
                       {"E", job.energy},    {"file", file}, {"status", "ok"}};
            try {
                local.output = (fs::path(opt.output) / file).string();
                local.summary_output =
                    (fs::path(opt.output) / (file + ".summary.json")).string();
                SimulationResult result = simulate_once(local);
                {
                    std::ostringstream os;
                    perlick::write_trajectory_csv(os, result.traj);
                    write_file(local.output, os.str());
                }
                write_file(local.summary_output, result.summary.dump(2) + "\n");
                entry["classification"] = class_name(result.cls);
                entry["drift"] = result.summary["drift"];
            } catch (const perlick::error& e) {
                entry["status"] = "failed";
                entry["error"] = e.what();
                std::lock_guard<std::mutex> lock(log_mutex);
                log_info("sweep entry " + file + " failed: " + e.what());
            }
            entries[job.index] = std::move(entry);
        }
    };

    const unsigned n_threads = std::max(1u, opt.jobs);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n_threads; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    json index = json::array();
    for (auto& e : entries)
        index.push_back(std::move(e));
    write_file((fs::path(opt.output) / "index.json").string(),
               index.dump(2) + "\n");
    log_info("sweep index written to " + opt.output + "/index.json");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Factorization constants, Poisson-algebra verification and "
                 "orbit tracing for the curved Kepler family"};
    app.require_subcommand(1);

    Options opt;

    const auto add_kappa = [&](CLI::App* cmd) {
        cmd->add_option("--kappa", opt.kappa, "curvature parameter")->required();
    };
    const auto add_beta = [&](CLI::App* cmd) {
        cmd->add_option("--beta", opt.beta, "rational beta as m/n (default 1)");
    };
    const auto add_output = [&](CLI::App* cmd) {
        cmd->add_option("--output,-o", opt.output, "output path");
    };
    const auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", opt.config_path,
                        "key=value file merged under the flags");
    };
    const auto add_format = [&](CLI::App* cmd) {
        cmd->add_option("--format", opt.format, "csv|json")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    CLI::App* potential = app.add_subcommand(
        "potential", "effective potential grid with energy-bound metadata");
    add_config(potential);
    add_kappa(potential);
    potential->add_option("--l", opt.l, "total angular momentum")->required();
    potential->add_option("--grid", opt.grid, "grid size (default 512)");
    potential->add_option("--xi-min", opt.xi_min, "grid start (default 0.02)");
    potential->add_option("--xi-max", opt.xi_max,
                          "grid end (default curvature-dependent)");
    add_output(potential);
    add_format(potential);

    CLI::App* bounds = app.add_subcommand("bounds", "energy bounds for (kappa, l)");
    add_config(bounds);
    add_kappa(bounds);
    bounds->add_option("--l", opt.l, "total angular momentum")->required();
    bounds->add_option("--output,-o", opt.output, "output path (default stdout)");

    CLI::App* simulate = app.add_subcommand(
        "simulate", "integrate Hamilton's equations with conservation checks");
    add_config(simulate);
    add_kappa(simulate);
    add_beta(simulate);
    simulate->add_option("--E", opt.energy, "energy")->required();
    simulate->add_option("--l", opt.l, "total angular momentum")->required();
    simulate->add_option("--lz", opt.lz, "azimuthal angular momentum")->required();
    simulate->add_option("--periods", opt.periods,
                         "radial periods to integrate (default 10)");
    simulate->add_option("--t-end", opt.t_end, "explicit horizon (overrides)");
    simulate->add_option("--tol", opt.tol, "integrator tolerance (default 1e-12)");
    simulate->add_option("--samples", opt.samples, "output samples (default 4096)");
    simulate->add_option("--seed", opt.seed, "seed recorded in the summary");
    simulate->add_option("--xyz", opt.xyz_output, "also write a t,x,y,z CSV");
    simulate->add_option("--summary", opt.summary_output,
                         "summary JSON path (default <output>.summary.json)");
    add_output(simulate);

    CLI::App* orbit = app.add_subcommand(
        "orbit", "algebraic planar orbit from the conserved constants");
    add_config(orbit);
    add_kappa(orbit);
    add_beta(orbit);
    orbit->add_option("--E", opt.energy, "energy")->required();
    orbit->add_option("--lz", opt.lz, "planar angular momentum")->required();
    orbit->add_option("--phi-z", opt.phi_z, "constant phase (default 0)");
    orbit->add_option("--turns", opt.turns,
                      "azimuthal turns (default: closure count n)");
    orbit->add_option("--samples", opt.samples, "grid points (default 4096)");
    add_output(orbit);
    add_format(orbit);

    CLI::App* verify = app.add_subcommand(
        "verify", "numerically verify the full Poisson-bracket algebra");
    add_config(verify);
    add_kappa(verify);
    add_beta(verify);
    verify->add_option("--points", opt.points, "sample points (default 200)");
    verify->add_option("--seed", opt.seed, "sampler seed (default 0)");
    verify->add_option("--rel-tol", opt.rel_tol,
                       "per-point relative tolerance (default 1e-6)");
    verify->add_option("--output,-o", opt.output, "report path (default stdout)");

    CLI::App* frequencies = app.add_subcommand(
        "frequencies", "measure the radial/angular frequencies and their locks");
    add_config(frequencies);
    add_kappa(frequencies);
    add_beta(frequencies);
    frequencies->add_option("--E", opt.energy, "energy")->required();
    frequencies->add_option("--l", opt.l, "total angular momentum")->required();
    frequencies->add_option("--lz", opt.lz, "azimuthal angular momentum")
        ->required();
    frequencies->add_option("--periods", opt.periods,
                            "radial periods to integrate (default 10)");
    frequencies->add_option("--tol", opt.tol, "integrator tolerance");
    frequencies->add_option("--samples", opt.samples, "dense samples");
    frequencies->add_option("--output,-o", opt.output,
                            "output path (default stdout)");

    CLI::App* sweep = app.add_subcommand(
        "sweep", "simulate + classify over a (kappa, beta, E) grid");
    add_config(sweep);
    sweep->add_option("--kappa", opt.kappa_list, "kappa values");
    sweep->add_option("--beta", opt.beta_list, "beta values (m/n)");
    sweep->add_option("--E", opt.energy_list, "energies");
    sweep->add_option("--l", opt.l, "total angular momentum")->required();
    sweep->add_option("--lz", opt.lz, "azimuthal angular momentum")->required();
    sweep->add_option("--periods", opt.periods, "radial periods per run");
    sweep->add_option("--tol", opt.tol, "integrator tolerance");
    sweep->add_option("--samples", opt.samples, "samples per run");
    sweep->add_option("--jobs", opt.jobs, "worker threads (default 1)");
    add_output(sweep);

    try {
        app.parse(merged_args(argc, argv));
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    } catch (const perlick::error& e) {
        std::cerr << "perlick: invalid configuration: " << e.what() << '\n';
        return exit_config;
    }

    const auto defaulted = [&](const char* def) {
        Options local = opt;
        if (local.output.empty())
            local.output = def;
        return local;
    };

    try {
        if (app.got_subcommand(potential))
            return run_potential(defaulted("potential.csv"));
        if (app.got_subcommand(bounds))
            return run_bounds(opt);
        if (app.got_subcommand(simulate))
            return run_simulate(defaulted("trajectory.csv"));
        if (app.got_subcommand(orbit))
            return run_orbit(defaulted("orbit.csv"));
        if (app.got_subcommand(verify))
            return run_verify(opt);
        if (app.got_subcommand(frequencies))
            return run_frequencies(opt);
        if (app.got_subcommand(sweep))
            return run_sweep(defaulted("sweep_out"));
    } catch (const perlick::numerical_error& e) {
        std::cerr << "perlick: numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const perlick::error& e) {
        std::cerr << "perlick: invalid configuration: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "perlick: " << e.what() << '\n';
        return exit_numerical;
    }
    return 0;
}
