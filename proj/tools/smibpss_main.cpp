// Command-line front end: small-signal analysis, stabilizer tuning,
// time-domain simulation, and the full comparison study.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "smibpss/scenario.hpp"

namespace fs = std::filesystem;
using namespace smibpss;

namespace {

struct CommonOpts {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string method = "both";
    std::string format = "txt";
};

ScenarioFile load_config(const CommonOpts& o) {
    ScenarioFile file =
        o.config.empty() ? default_scenario_file() : load_scenario_file(o.config);
    if (o.seed) {
        file.seeds = {*o.seed};
    }
    validate_scenario_file(file);
    return file;
}

void add_common(CLI::App* cmd, CommonOpts& o, bool with_method) {
    cmd->add_option("--config", o.config,
                    "Study config file (omit for the built-in preset)");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--seed", o.seed,
                    "Random seed (replaces the config's seed list)");
    if (with_method) {
        cmd->add_option("--method", o.method, "Tuning method")
            ->check(CLI::IsMember({"ga", "pso", "both"}));
    }
    cmd->add_option("--format", o.format, "Stdout summary format")
        ->check(CLI::IsMember({"csv", "txt"}));
}

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void print_modes(const ModeSet& ms, const std::string& format,
                 const std::string& scenario_id, const std::string& method) {
    if (format == "csv") {
        for (const Mode& m : ms.modes) {
            std::cout << scenario_id << ',' << method << ',' << fmt4(m.sigma) << ','
                      << fmt4(m.omega) << ',' << fmt6(m.zeta) << ','
                      << (m.is_em ? "true" : "false") << '\n';
        }
        return;
    }
    for (const Mode& m : ms.modes) {
        std::cout << "    ";
        if (m.omega > 0.0) {
            std::cout << fmt4(m.sigma) << " ± j " << fmt4(m.omega);
        } else {
            std::cout << fmt4(m.sigma);
        }
        std::cout << "   zeta=" << fmt6(m.zeta) << (m.is_em ? "  [EM]" : "") << '\n';
    }
    if (ms.min_em_zeta) {
        std::cout << "    min EM damping ratio: " << fmt6(*ms.min_em_zeta) << '\n';
    } else {
        std::cout << "    no electromechanical mode found\n";
    }
}

int cmd_analyze(const CommonOpts& o) {
    const ScenarioFile file = load_config(o);
    if (o.format == "csv") {
        std::cout << "scenario,method,sigma,omega,zeta,is_em\n";
    }
    for (const Scenario& sc : file.scenarios) {
        const auto& sys = file.system;
        const StateSpaceModel open =
            build_open_loop(sys.machine, sys.line, sys.exciter, sys.governor, sc.op);
        const ModeSet ms = analyze_modes(open, file.zeta_threshold);
        if (o.format == "txt") {
            const HeffronConstants K =
                compute_heffron_constants(sys.machine, sys.line, sc.op);
            std::cout << "Scenario " << sc.id << " (open loop)\n";
            std::cout << "    K1=" << fmt4(K.K1) << " K2=" << fmt4(K.K2)
                      << " K3=" << fmt4(K.K3) << " K4=" << fmt4(K.K4)
                      << " K5=" << fmt4(K.K5) << " K6=" << fmt4(K.K6) << '\n';
        }
        print_modes(ms, o.format, sc.id, "open");
    }
    return 0;
}

int cmd_tune(const CommonOpts& o) {
    const ScenarioFile file = load_config(o);
    const bool run_ga = o.method != "pso";
    const bool run_pso = o.method != "ga";
    bool any_below = false;

    if (o.format == "csv") {
        std::cout << "scenario,method,k_s,t1,t2,objective,evaluations\n";
    }
    for (const Scenario& sc : file.scenarios) {
        const auto& sys = file.system;
        const FitnessFn fitness = pss_fitness(sys.machine, sys.line, sys.exciter,
                                              sys.governor, sc.op, sys.T_w);
        const auto report = [&](const std::string& name, const OptimizationResult& r) {
            any_below = any_below || r.best_fitness < file.zeta_threshold;
            if (o.format == "csv") {
                std::cout << sc.id << ',' << name << ',' << fmt4(r.best_x[0]) << ','
                          << fmt4(r.best_x[1]) << ',' << fmt4(r.best_x[2]) << ','
                          << fmt6(r.best_fitness) << ',' << r.evaluations << '\n';
            } else {
                std::cout << "Scenario " << sc.id << "  " << name
                          << ": K_s=" << fmt4(r.best_x[0]) << " T1=" << fmt4(r.best_x[1])
                          << " T2=" << fmt4(r.best_x[2])
                          << "  min EM zeta=" << fmt6(r.best_fitness) << "  ("
                          << r.evaluations << " evaluations, "
                          << (r.best_fitness >= file.zeta_threshold ? "PASS" : "FAIL")
                          << ")\n";
            }
        };
        if (run_ga) {
            GaConfig cfg = file.ga;
            cfg.seed = file.seeds.front();
            report("ga", ga_optimize(fitness, file.pss_bounds, cfg));
        }
        if (run_pso) {
            PsoConfig cfg = file.pso;
            cfg.seed = file.seeds.front();
            report("pso", pso_optimize(fitness, file.pss_bounds, cfg));
        }
    }
    return any_below ? 2 : 0;
}

int cmd_simulate(const CommonOpts& o, const std::optional<double>& ks,
                 const std::optional<double>& t1, const std::optional<double>& t2) {
    const int given = int(bool(ks)) + int(bool(t1)) + int(bool(t2));
    if (given != 0 && given != 3) {
        std::cerr << "error: provide all of --ks, --t1, --t2 or none\n";
        return 1;
    }
    const ScenarioFile file = load_config(o);
    const bool closed = given == 3;

    for (const Scenario& sc : file.scenarios) {
        const auto& sys = file.system;
        StateSpaceModel model;
        if (closed) {
            const PssParams p{*ks, *t1, *t2, sys.T_w};
            model = build_closed_loop(sys.machine, sys.line, sys.exciter, sys.governor,
                                      p, sc.op);
        } else {
            model =
                build_open_loop(sys.machine, sys.line, sys.exciter, sys.governor, sc.op);
        }
        SimConfig sim = file.sim;
        sim.disturbance = sc.op.delta_P_L;
        const Trajectory traj = simulate(model, sim);

        if (!o.out.empty()) {
            const fs::path dir = fs::path(o.out) / sc.id;
            fs::create_directories(dir);
            const fs::path p = dir / (closed ? "traj-custom.csv" : "traj-open.csv");
            std::ofstream f(p, std::ios::binary);
            write_trajectory_csv(traj, f);
        } else if (&sc == &file.scenarios.front()) {
            write_trajectory_csv(traj, std::cout);
        }

        const ResponseMetrics sm = response_metrics(traj, "dOmega");
        const ResponseMetrics am = response_metrics(traj, "dDelta");
        std::ostream& log = o.out.empty() ? std::cerr : std::cout;
        log << "Scenario " << sc.id << (closed ? " (stabilized)" : " (open loop)")
            << ": ISE(dOmega)=" << sm.ise_speed << "  peak|dDelta|=" << fmt6(am.peak_overshoot)
            << "  settle(dDelta)="
            << (am.settling_time ? fmt4(*am.settling_time) + " s" : std::string("not-settled"))
            << '\n';
    }
    return 0;
}

int cmd_study(const CommonOpts& o) {
    const ScenarioFile file = load_config(o);
    const fs::path out = o.out.empty() ? fs::path("out") : fs::path(o.out);
    StudyOptions opts;
    opts.run_ga = o.method != "pso";
    opts.run_pso = o.method != "ga";
    const StudyReport report = run_study(file, out, opts);

    if (o.format == "csv") {
        std::cout << "scenario,method,min_em_zeta,pass\n";
        for (const auto& sr : report.scenarios) {
            for (const auto& m : sr.methods) {
                std::cout << sr.scenario.id << ',' << m.method << ','
                          << fmt6(m.objective) << ',' << (m.pass ? "pass" : "fail")
                          << '\n';
            }
            if (!sr.error.empty()) {
                std::cout << sr.scenario.id << ",error,,fail\n";
            }
        }
    } else {
        for (const auto& sr : report.scenarios) {
            std::cout << "Scenario " << sr.scenario.id << ":";
            if (!sr.error.empty()) {
                std::cout << "  ERROR: " << sr.error << '\n';
                continue;
            }
            for (const auto& m : sr.methods) {
                std::cout << "  " << m.method << " zeta=" << fmt6(m.objective);
            }
            std::cout << '\n';
        }
        std::cout << "Report written to " << (out / "report.txt").string() << '\n';
    }
    return study_exit_code(report);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-machine power-system stabilizer design toolkit"};
    app.require_subcommand(1);

    CommonOpts o;
    std::optional<double> ks, t1, t2;

    CLI::App* analyze = app.add_subcommand("analyze", "Open-loop modal analysis");
    add_common(analyze, o, false);

    CLI::App* tune = app.add_subcommand("tune", "Tune stabilizer parameters");
    add_common(tune, o, true);

    CLI::App* simulate =
        app.add_subcommand("simulate", "Step-disturbance time response");
    add_common(simulate, o, false);
    simulate->add_option("--ks", ks, "Stabilizer gain");
    simulate->add_option("--t1", t1, "Stabilizer lead time constant");
    simulate->add_option("--t2", t2, "Stabilizer lag time constant");

    CLI::App* study =
        app.add_subcommand("study", "Full analysis / tuning / simulation study");
    add_common(study, o, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(o);
        if (app.got_subcommand(tune)) return cmd_tune(o);
        if (app.got_subcommand(simulate)) return cmd_simulate(o, ks, t1, t2);
        if (app.got_subcommand(study)) return cmd_study(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
