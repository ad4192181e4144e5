// embedev command-line driver: batch constructions, simulation, analysis,
// and CSV/JSON export. Exit codes: 0 success / prediction met, 1 prediction
// missed or criteria failed, 2 validation error, 3 construction failure,
// 4 numeric failure.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "embedev/acceptance.hpp"
#include "embedev/analysis.hpp"
#include "embedev/constants.hpp"
#include "embedev/energy.hpp"
#include "embedev/errors.hpp"
#include "embedev/io.hpp"
#include "embedev/potentials.hpp"
#include "embedev/solver.hpp"
#include "embedev/util.hpp"

namespace fs = std::filesystem;
using namespace embedev;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
};

RunConfig base_config(const GlobalArgs& g, const std::string& command) {
    RunConfig cfg;
    if (!g.config_path.empty()) cfg.load_file(g.config_path);
    cfg.set("command", command);
    cfg.set("version", std::string(kVersion));
    cfg.set("seed", std::to_string(g.seed));
    cfg.set("output_dir", g.out_dir);
    return cfg;
}

std::ofstream open_artifact(const GlobalArgs& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    fs::path p = fs::path(g.out_dir) / name;
    std::ofstream out(p);
    if (!out) throw DomainError("cannot write artifact: " + p.string());
    return out;
}

int cmd_constants(const GlobalArgs& g, std::int64_t q_max, std::int64_t grid,
                  bool to_stdout) {
    RunConfig cfg = base_config(g, "constants");
    cfg.set("constants.q_max", std::to_string(q_max));
    cfg.set("constants.grid", std::to_string(grid));

    std::ostringstream body;
    write_csv_header(body, cfg, {"q", "A_q", "B_q", "A_brute", "B_brute", "phi_max", "phi_min"});
    body << "0," << format_double(sharp_A(0)) << ",,,,,\n";
    for (std::int64_t q = 2; q <= q_max; ++q) {
        PhaseExtremum mx = phase_extremum(q, ExtremumMode::Max, grid);
        body << q << "," << format_double(sharp_A(q)) << ",";
        if (q % 2 != 0) body << format_double(sharp_B(q));
        body << "," << format_double(mx.value) << ",";
        if (q % 2 != 0) {
            PhaseExtremum mn = phase_extremum(q, ExtremumMode::Min, grid);
            body << format_double(mn.value) << "," << format_double(mx.phi) << ","
                 << format_double(mn.phi) << "\n";
        } else {
            body << "," << format_double(mx.phi) << ",\n";
        }
    }
    if (to_stdout) {
        std::cout << body.str();
    } else {
        auto out = open_artifact(g, "constants.csv");
        out << body.str();
    }
    return 0;
}

int cmd_embed(const GlobalArgs& g, double E, double a, double theta0, std::int64_t n_max,
              std::int64_t n0_override) {
    RunConfig cfg = base_config(g, "embed");
    cfg.set("embed.energy", format_double(E));
    cfg.set("embed.coupling", format_double(a));
    cfg.set("embed.theta0", format_double(theta0));
    cfg.set("embed.n_max", std::to_string(n_max));

    Energy en = Energy::from_value(E, cfg.get_int("classify.q_max", kDefaultQMax),
                                   cfg.get_double("classify.tol", kDefaultClassifyTol));
    cfg.set("embed.k", format_double(en.k));
    cfg.set("embed.class", en.cls.describe());
    std::cerr << "E = " << E << ", k = " << en.k << " (" << en.cls.describe() << ")\n";

    double sk = std::sin(kPi * en.k);
    PotentialSpec spec;
    spec.seed = g.seed;
    Trajectory traj;
    std::vector<double> potential;
    std::string prediction = "gap";

    if (en.cls.even_q()) {
        double threshold = 1.0 / sharp_A(en.cls.q);
        prediction = a > threshold ? "ell2" : (a < threshold ? "not_ell2" : "gap");
        if (a <= threshold) {
            std::cerr << "warning: sub-critical coupling a = " << a
                      << " <= 1/A_q = " << threshold << "\n";
        }
        EvenQOptions eo;
        std::int64_t n0 = n0_override;
        EvenQBuild build;
        if (n0 > 0) {
            build = even_q_build(a, en.cls.p, en.cls.q, n0,
                                 (n_max - n0) / en.cls.q, BoundaryCondition{theta0}, eo);
        } else {
            std::int64_t n0d = std::max<std::int64_t>(
                100 * en.cls.q, static_cast<std::int64_t>(std::ceil(8.0 * a / sk)));
            build = even_q_build(a, en.cls.p, en.cls.q, 0, (n_max - n0d) / en.cls.q,
                                 BoundaryCondition{theta0}, eo);
        }
        traj = std::move(build.traj);
        potential = std::move(build.potential);
        spec.variant = PotentialSpec::Variant::EvenQ;
        spec.a = a;
        spec.p = en.cls.p;
        spec.q = en.cls.q;
        spec.n0 = n0_override;
        spec.theta0 = theta0;
        cfg.set("embed.n0", std::to_string(build.n0));
        cfg.set("embed.max_lock_err", format_double(build.max_lock_err));
        cfg.set("embed.envelope_C", format_double(build.envelope_C));
    } else {
        double constant = en.cls.odd_q() ? sharp_B(en.cls.q) : sharp_A(0);
        double threshold = 1.0 / constant;
        double lower = en.cls.odd_q() ? 1.0 / sharp_A(en.cls.q) : threshold;
        prediction = a > threshold ? "ell2" : (a < lower ? "not_ell2" : "gap");
        if (prediction != "ell2") {
            std::cerr << "warning: coupling a = " << a << " not above 1/"
                      << (en.cls.odd_q() ? "B_q" : "A_0") << " = " << threshold << "\n";
        }
        std::int64_t n_start =
            std::max<std::int64_t>(8, static_cast<std::int64_t>(std::ceil(2.0 * a / sk)) + 2);
        // free Pruefer evolution from the boundary fixes theta(n_start)
        PruferPoint start = prufer_from_solution(std::cos(theta0), std::sin(theta0), en.k);
        double theta_start = frac(start.theta_frac + static_cast<double>(n_start - 1) * en.k);
        SignTypeRun run = sign_type_run(a, en.k, theta_start, n_start, n_max - n_start);
        traj = std::move(run.traj);
        potential = std::move(run.potential);
        spec.variant = PotentialSpec::Variant::SignType;
        spec.a = a;
        spec.k = en.k;
        spec.theta_start = theta_start;
        spec.n_start = n_start;
        cfg.set("embed.n_start", std::to_string(n_start));
    }

    std::int64_t fit_min = std::max<std::int64_t>(1000, n_max / 1000);
    DecayReport rep = fit_decay(traj, fit_min, traj.n_last);

    {
        auto out = open_artifact(g, "potential.csv");
        write_potential_csv(out, cfg, potential);
    }
    {
        auto out = open_artifact(g, "trajectory.csv");
        write_trajectory_csv(out, cfg, traj);
    }
    {
        auto out = open_artifact(g, "spec.json");
        out << potential_spec_json(spec, cfg);
    }
    {
        auto out = open_artifact(g, "report.json");
        out << decay_report_json(rep, cfg);
    }
    std::cerr << "beta = " << rep.beta << " +- " << rep.stderr_beta << ", verdict "
              << to_string(rep.verdict) << ", predicted " << prediction << "\n";
    if (prediction == "gap") return 0;
    return to_string(rep.verdict) == prediction ? 0 : 1;
}

int cmd_multi_embed(const GlobalArgs& g, const std::string& targets_path,
                    const std::string& h_arg, std::int64_t n_max, double beta_target) {
    RunConfig cfg = base_config(g, "multi-embed");
    cfg.set("multi.targets", targets_path);
    cfg.set("multi.h", h_arg);
    cfg.set("multi.n_max", std::to_string(n_max));
    cfg.set("multi.beta_target", format_double(beta_target));

    std::ifstream in(targets_path);
    if (!in) throw DomainError("cannot open targets file: " + targets_path);
    std::vector<GlueTarget> targets;
    double E, th;
    while (in >> E >> th) targets.push_back({E, th});
    if (targets.empty()) throw DomainError("no targets in " + targets_path);

    HSpec h = HSpec::none();
    if (h_arg == "log") {
        h = HSpec::log_growth();
    } else if (h_arg.rfind("const:", 0) == 0) {
        h = HSpec::constant(std::stod(h_arg.substr(6)));
    } else if (h_arg != "none") {
        throw DomainError("unknown h spec: " + h_arg + " (use none, log, const:C)");
    }

    GlueOptions opt;
    opt.beta_target = beta_target;
    GlueResult res = glue_multi(targets, h, n_max, opt);

    {
        auto out = open_artifact(g, "schedule.json");
        out << glue_schedule_json(res, cfg);
    }
    {
        auto out = open_artifact(g, "potential.csv");
        write_potential_csv(out, cfg, res.potential);
    }
    bool all_ell2 = true;
    for (size_t j = 0; j < targets.size(); ++j) {
        DecayReport rep = fit_decay(res.trajectories[j], std::max<std::int64_t>(1000, res.n_start),
                                    n_max, FitChannel::LogRt2);
        {
            auto out = open_artifact(g, "trajectory_" + std::to_string(j) + ".csv");
            write_trajectory_csv(out, cfg, res.trajectories[j]);
        }
        {
            auto out = open_artifact(g, "report_" + std::to_string(j) + ".json");
            out << decay_report_json(rep, cfg);
        }
        std::cerr << "target " << j << " (E = " << targets[j].E << "): beta = " << rep.beta
                  << ", verdict " << to_string(rep.verdict) << "\n";
        if (rep.verdict != Verdict::Ell2) all_ell2 = false;
    }
    std::cerr << "envelope max |V|(1+n) = " << res.max_envelope << "\n";
    return all_ell2 ? 0 : 1;
}

int cmd_sweep(const GlobalArgs& g, double E, double a_min, double a_max, double a_step,
              std::int64_t n_max) {
    RunConfig cfg = base_config(g, "sweep");
    cfg.set("sweep.energy", format_double(E));
    cfg.set("sweep.a_min", format_double(a_min));
    cfg.set("sweep.a_max", format_double(a_max));
    cfg.set("sweep.a_step", format_double(a_step));
    cfg.set("sweep.n_max", std::to_string(n_max));

    Energy en = Energy::from_value(E);
    std::vector<double> couplings;
    for (double a = a_min; a <= a_max + 1e-12; a += a_step) couplings.push_back(a);

    struct Cell {
        double a = 0.0;
        double beta = std::numeric_limits<double>::quiet_NaN();
        std::string verdict = "error";
    };
    std::vector<Cell> cells(couplings.size());

    parallel_for(static_cast<std::int64_t>(couplings.size()), [&](std::int64_t i) {
        Cell& cell = cells[static_cast<size_t>(i)];
        cell.a = couplings[static_cast<size_t>(i)];
        try {
            EvenQOptions eo;
            eo.store_potential = false;
            std::int64_t n0 = std::max<std::int64_t>(
                64, static_cast<std::int64_t>(std::ceil(60.0 * cell.a * cell.a)));
            EvenQBuild build = even_q_build(cell.a, en.cls.p, en.cls.q, n0,
                                            (n_max - n0) / en.cls.q,
                                            BoundaryCondition{0.3}, eo);
            DecayReport rep = fit_decay(build.traj, std::max<std::int64_t>(1000, n_max / 1000),
                                        build.traj.n_last);
            cell.beta = rep.beta;
            cell.verdict = to_string(rep.verdict);
        } catch (const Error& e) {
            cell.verdict = "error";
            std::cerr << "cell a = " << cell.a << " failed: " << e.what() << "\n";
        }
    });

    auto out = open_artifact(g, "sweep.csv");
    write_csv_header(out, cfg, {"E", "a", "beta", "verdict"});
    for (const auto& c : cells) {
        out << format_double(E) << "," << format_double(c.a) << "," << format_double(c.beta)
            << "," << c.verdict << "\n";
    }
    return 0;
}

int cmd_analyze(const GlobalArgs& g, const std::string& traj_path, std::int64_t n_min,
                std::int64_t n_max, const std::string& channel) {
    RunConfig cfg = base_config(g, "analyze");
    cfg.set("analyze.trajectory", traj_path);
    Trajectory traj = read_trajectory_csv(traj_path);
    if (n_max <= 0) n_max = traj.n_last;
    if (n_min <= 0) n_min = std::max<std::int64_t>(1000, n_max / 1000);
    cfg.set("analyze.n_min", std::to_string(n_min));
    cfg.set("analyze.n_max", std::to_string(n_max));
    FitChannel ch = channel == "logRtilde2" ? FitChannel::LogRt2 : FitChannel::LogR2;
    DecayReport rep = fit_decay(traj, n_min, n_max, ch);
    std::cout << decay_report_json(rep, cfg);
    return 0;
}

int cmd_verify(int only, std::int64_t sweep_cap) {
    AcceptanceOptions opt;
    opt.only_criterion = only;
    if (sweep_cap > 0) opt.sweep_n_cap = sweep_cap;
    auto results = run_acceptance(opt, std::cout);
    int failures = 0;
    for (const auto& r : results) {
        if (!r.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"embedev: decaying potentials with embedded eigenvalues for discrete "
                 "half-line Schroedinger operators"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "flat key=value config file");
    app.add_option("--out", g.out_dir, "output directory for artifacts");
    app.add_option("--seed", g.seed, "seed echoed into artifacts");

    auto* c_const = app.add_subcommand("constants", "sharp-constant table with brute-force cross-check");
    std::int64_t q_max = 50, grid = 100000;
    bool to_stdout = false;
    c_const->add_option("--q-max", q_max, "largest denominator");
    c_const->add_option("--grid", grid, "phase grid points");
    c_const->add_flag("--stdout", to_stdout, "print the table instead of writing constants.csv");

    auto* c_embed = app.add_subcommand("embed", "construct a potential embedding one eigenvalue");
    double E = 0.0, a = 2.0, theta0 = 0.3;
    std::int64_t n_max = 1000000, n0_override = 0;
    c_embed->add_option("--energy", E, "target energy in (-2,2)")->required();
    c_embed->add_option("--coupling", a, "coupling a = limsup n|V(n)|")->required();
    c_embed->add_option("--theta0", theta0, "boundary angle in [0, pi)");
    c_embed->add_option("--n-max", n_max, "trajectory length");
    c_embed->add_option("--n0", n0_override, "construction start site (0 = auto)");

    auto* c_multi = app.add_subcommand("multi-embed", "glue segments for several eigenvalues");
    std::string targets_path, h_arg = "none";
    std::int64_t multi_n_max = 1000000;
    double beta_target = 4.0;
    c_multi->add_option("--targets", targets_path, "file of lines: E theta0")->required();
    c_multi->add_option("--envelope", h_arg, "growth envelope h: none, log, const:C");
    c_multi->add_option("--n-max", multi_n_max, "run length");
    c_multi->add_option("--beta-target", beta_target, "per-segment subordinate exponent");

    auto* c_sweep = app.add_subcommand("sweep", "coupling sweep at fixed energy");
    double sE = 0.0, a_min = 0.5, a_max = 2.0, a_step = 0.1;
    std::int64_t sweep_n_max = 10000000;
    c_sweep->add_option("--energy", sE, "energy (must classify rational even)");
    c_sweep->add_option("--a-min", a_min, "coupling range start");
    c_sweep->add_option("--a-max", a_max, "coupling range end");
    c_sweep->add_option("--a-step", a_step, "coupling step");
    c_sweep->add_option("--n-max", sweep_n_max, "per-cell trajectory length");

    auto* c_an = app.add_subcommand("analyze", "re-run analysis on a stored trajectory");
    std::string traj_path, channel = "logR2";
    std::int64_t an_min = 0, an_max = 0;
    c_an->add_option("--trajectory", traj_path, "trajectory CSV")->required();
    c_an->add_option("--n-min", an_min, "fit range start (0 = auto)");
    c_an->add_option("--n-max", an_max, "fit range end (0 = trajectory end)");
    c_an->add_option("--channel", channel, "logR2 or logRtilde2");

    auto* c_ver = app.add_subcommand("verify", "run the verification suite");
    int only = 0;
    std::int64_t sweep_cap = 0;
    c_ver->add_option("--criterion", only, "run a single criterion (1-10)");
    c_ver->add_option("--sweep-cap", sweep_cap, "cap the sweep extension ladder");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_const) return cmd_constants(g, q_max, grid, to_stdout);
        if (*c_embed) return cmd_embed(g, E, a, theta0, n_max, n0_override);
        if (*c_multi) return cmd_multi_embed(g, targets_path, h_arg, multi_n_max, beta_target);
        if (*c_sweep) return cmd_sweep(g, sE, a_min, a_max, a_step, sweep_n_max);
        if (*c_an) return cmd_analyze(g, traj_path, an_min, an_max, channel);
        if (*c_ver) return cmd_verify(only, sweep_cap);
    } catch (const DomainError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const NumericFailure& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "construction failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
