#include "smibpss/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace smibpss {

namespace fs = std::filesystem;

namespace {

std::string make_message(const std::string& source, int line, const std::string& msg) {
    if (line > 0) {
        return source + ":" + std::to_string(line) + ": " + msg;
    }
    return source + ": " + msg;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
    const auto pos = s.find_first_of("#;");
    return pos == std::string::npos ? s : s.substr(0, pos);
}

double parse_num(const std::string& v, const std::string& src, int line) {
    double out = 0.0;
    const char* begin = v.data();
    const char* end = v.data() + v.size();
    const auto res = std::from_chars(begin, end, out);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(out)) {
        throw ConfigError(src, line, "expected a number, got '" + v + "'");
    }
    return out;
}

int parse_int(const std::string& v, const std::string& src, int line) {
    int out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw ConfigError(src, line, "expected an integer, got '" + v + "'");
    }
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& v,
                                           const std::string& src, int line) {
    std::vector<std::uint64_t> seeds;
    std::istringstream is(v);
    std::string tok;
    while (is >> tok) {
        std::uint64_t s = 0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), s);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
            throw ConfigError(src, line, "expected a seed integer, got '" + tok + "'");
        }
        seeds.push_back(s);
    }
    if (seeds.empty()) {
        throw ConfigError(src, line, "seeds list is empty");
    }
    return seeds;
}

bool valid_id(const std::string& id) {
    if (id.empty()) return false;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_';
        if (!ok) return false;
    }
    return true;
}

// Shortest round-trip decimal form, locale-independent.
std::string fmt_g(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt_f(double v, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

// Display order: oscillatory modes from fastest down, then aperiodic modes.
std::vector<Mode> sorted_modes(const std::vector<Mode>& modes) {
    std::vector<Mode> out = modes;
    std::stable_sort(out.begin(), out.end(), [](const Mode& a, const Mode& b) {
        if (a.omega != b.omega) return a.omega > b.omega;
        return a.sigma < b.sigma;
    });
    return out;
}

std::string mode_display(const Mode& m) {
    if (m.omega > 0.0) {
        return fmt_f(m.sigma, 4) + " ± j " + fmt_f(m.omega, 4);
    }
    return fmt_f(m.sigma, 4);
}

std::string settle_display(const std::optional<double>& t) {
    return t ? fmt_g(*t) : std::string("not-settled");
}

MethodResult evaluate_variant(const std::string& name, const StateSpaceModel& model,
                              const ScenarioFile& file, const Scenario& scenario) {
    MethodResult r;
    r.method = name;
    r.modes = analyze_modes(model, file.zeta_threshold);
    r.objective = r.modes.min_em_zeta ? *r.modes.min_em_zeta : objective_j(model);
    SimConfig sim = file.sim;
    sim.disturbance = scenario.op.delta_P_L;
    r.trajectory = simulate(model, sim);
    r.speed_metrics = response_metrics(r.trajectory, "dOmega");
    r.angle_metrics = response_metrics(r.trajectory, "dDelta");
    r.pass = r.objective >= file.zeta_threshold;
    return r;
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(make_message(source, line, message)), line_(line) {}

ScenarioFile default_scenario_file() {
    ScenarioFile f;
    f.scenarios.clear();

    Scenario s1;
    s1.id = "cond-1";
    s1.op = {0.4, 0.008, 0.1, 1.0, 1.0};
    s1.cpss = PssParams{6.1692, 0.6707, 0.1, f.system.T_w};
    f.scenarios.push_back(s1);

    Scenario s2;
    s2.id = "cond-2";
    s2.op = {0.4, 0.06, 0.2, 1.0, 1.0};
    s2.cpss = PssParams{6.2986, 0.6487, 0.1, f.system.T_w};
    f.scenarios.push_back(s2);

    Scenario s3;
    s3.id = "cond-3";
    s3.op = {0.4, 0.06, 0.3, 1.1, 1.0};
    s3.cpss = PssParams{5.1944, 0.81, 0.1, f.system.T_w};
    f.scenarios.push_back(s3);

    // Amplifier-gain sensitivity case: same dispatch as cond-3 but with the
    // regulator gain raised 10% instead of the line reactance; no fixed
    // conventional stabilizer is defined for it.
    Scenario s4;
    s4.id = "cond-4-ka";
    s4.op = {0.4, 0.06, 0.3, 1.0, 1.1};
    f.scenarios.push_back(s4);

    return f;
}

ScenarioFile parse_scenario_text(const std::string& text,
                                 const std::string& source_name) {
    ScenarioFile f;
    f.scenarios.clear();

    struct PendingScenario {
        Scenario sc;
        std::optional<double> cpss_ks, cpss_t1, cpss_t2;
        int line = 0;
    };
    std::vector<PendingScenario> pending;
    std::string section;
    int lineno = 0;

    std::istringstream is(text);
    std::string raw;
    while (std::getline(is, raw)) {
        ++lineno;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError(source_name, lineno, "malformed section header '" + line + "'");
            }
            section = trim(line.substr(1, line.size() - 2));
            static const char* known[] = {"machine", "line", "exciter", "governor",
                                          "pss", "ga", "pso", "sim", "study", "scenario"};
            const bool ok = std::any_of(std::begin(known), std::end(known),
                                        [&](const char* k) { return section == k; });
            if (!ok) {
                throw ConfigError(source_name, lineno, "unknown section [" + section + "]");
            }
            if (section == "scenario") {
                PendingScenario p;
                p.line = lineno;
                p.sc.id = "scenario-" + std::to_string(pending.size() + 1);
                pending.push_back(p);
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source_name, lineno, "expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError(source_name, lineno, "empty key or value");
        }
        if (section.empty()) {
            throw ConfigError(source_name, lineno, "key '" + key + "' outside any section");
        }

        const auto num = [&] { return parse_num(value, source_name, lineno); };
        const auto integer = [&] { return parse_int(value, source_name, lineno); };
        bool handled = true;

        if (section == "machine") {
            auto& m = f.system.machine;
            if (key == "x_d") m.x_d = num();
            else if (key == "x_d_prime") m.x_d_prime = num();
            else if (key == "x_q") m.x_q = num();
            else if (key == "m") m.M = num();
            else if (key == "d") m.D = num();
            else if (key == "t_do_prime") m.T_do_prime = num();
            else if (key == "omega_0") m.omega_0 = num();
            else handled = false;
        } else if (section == "line") {
            auto& l = f.system.line;
            if (key == "r") l.R = num();
            else if (key == "x_e") l.X_e = num();
            else if (key == "g") l.G = num();
            else if (key == "b") l.B = num();
            else if (key == "v_t0") l.V_t0 = num();
            else handled = false;
        } else if (section == "exciter") {
            auto& e = f.system.exciter;
            if (key == "k_a") e.K_A = num();
            else if (key == "t_a") e.T_A = num();
            else if (key == "k_e") e.K_E = num();
            else if (key == "t_e") e.T_E = num();
            else if (key == "k_f") e.K_F = num();
            else if (key == "t_f") e.T_F = num();
            else if (key == "s_e") e.S_E = num();
            else handled = false;
        } else if (section == "governor") {
            auto& g = f.system.governor;
            if (key == "t_gs") g.T_GS = num();
            else if (key == "t_ts") g.T_TS = num();
            else if (key == "r_p") g.R_p = num();
            else if (key == "r_t") f.system.R_T = num();
            else if (key == "delta_t_ref") f.system.delta_T_ref = num();
            else handled = false;
        } else if (section == "pss") {
            if (key == "t_w") f.system.T_w = num();
            else if (key == "k_s_min") f.pss_bounds.lo[0] = num();
            else if (key == "k_s_max") f.pss_bounds.hi[0] = num();
            else if (key == "t1_min") f.pss_bounds.lo[1] = num();
            else if (key == "t1_max") f.pss_bounds.hi[1] = num();
            else if (key == "t2_min") f.pss_bounds.lo[2] = num();
            else if (key == "t2_max") f.pss_bounds.hi[2] = num();
            else handled = false;
        } else if (section == "ga") {
            auto& g = f.ga;
            if (key == "pop_size") g.pop_size = integer();
            else if (key == "generations") g.generations = integer();
            else if (key == "generation_gap") g.generation_gap = num();
            else if (key == "p_crossover") g.p_crossover = num();
            else if (key == "p_mutation") g.p_mutation = num();
            else handled = false;
        } else if (section == "pso") {
            auto& p = f.pso;
            if (key == "swarm_size") p.swarm_size = integer();
            else if (key == "generations") p.generations = integer();
            else if (key == "w_max") p.w_max = num();
            else if (key == "w_min") p.w_min = num();
            else if (key == "c1") p.c1 = num();
            else if (key == "c2") p.c2 = num();
            else if (key == "v_max_fraction") p.v_max_fraction = num();
            else handled = false;
        } else if (section == "sim") {
            if (key == "t_end") f.sim.t_end = num();
            else if (key == "dt") f.sim.dt = num();
            else handled = false;
        } else if (section == "study") {
            if (key == "seeds") f.seeds = parse_seed_list(value, source_name, lineno);
            else if (key == "zeta_threshold") f.zeta_threshold = num();
            else handled = false;
        } else if (section == "scenario") {
            if (pending.empty()) {
                throw ConfigError(source_name, lineno, "internal: scenario key without section");
            }
            auto& p = pending.back();
            if (key == "id") {
                if (!valid_id(value)) {
                    throw ConfigError(source_name, lineno,
                                      "scenario id must use only letters, digits, '-' or '_'");
                }
                p.sc.id = value;
            } else if (key == "p") p.sc.op.P = num();
            else if (key == "q") p.sc.op.Q = num();
            else if (key == "delta_p_l") p.sc.op.delta_P_L = num();
            else if (key == "x_e_scale") p.sc.op.x_e_scale = num();
            else if (key == "k_a_scale") p.sc.op.k_a_scale = num();
            else if (key == "cpss_k_s") p.cpss_ks = num();
            else if (key == "cpss_t1") p.cpss_t1 = num();
            else if (key == "cpss_t2") p.cpss_t2 = num();
            else handled = false;
        }

        if (!handled) {
            throw ConfigError(source_name, lineno,
                              "unknown key '" + key + "' in section [" + section + "]");
        }
    }

    for (auto& p : pending) {
        const int n_cpss = int(bool(p.cpss_ks)) + int(bool(p.cpss_t1)) + int(bool(p.cpss_t2));
        if (n_cpss != 0 && n_cpss != 3) {
            throw ConfigError(source_name, p.line,
                              "scenario '" + p.sc.id +
                                  "' must set all of cpss_k_s, cpss_t1, cpss_t2 or none");
        }
        if (n_cpss == 3) {
            p.sc.cpss = PssParams{*p.cpss_ks, *p.cpss_t1, *p.cpss_t2, f.system.T_w};
        }
        f.scenarios.push_back(p.sc);
    }
    validate_scenario_file(f);
    return f;
}

ScenarioFile load_scenario_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string(), 0, "cannot open config file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path.string());
}

void validate_scenario_file(const ScenarioFile& file) {
    if (file.scenarios.empty()) {
        throw ConfigError("config", 0, "at least one scenario is required");
    }
    if (file.seeds.empty()) {
        throw ConfigError("config", 0, "at least one seed is required");
    }
    if (!(file.zeta_threshold > -1.0) || !(file.zeta_threshold < 1.0)) {
        throw ConfigError("config", 0, "zeta_threshold must lie in (-1, 1)");
    }
    if (file.pss_bounds.lo.size() != 3 || file.pss_bounds.hi.size() != 3) {
        throw ConfigError("config", 0, "stabilizer bounds must have 3 dimensions");
    }
    for (int d = 0; d < 3; ++d) {
        if (!(file.pss_bounds.lo[d] < file.pss_bounds.hi[d])) {
            throw ConfigError("config", 0, "stabilizer bounds need lo < hi in every dimension");
        }
    }
    std::vector<std::string> ids;
    for (const auto& sc : file.scenarios) {
        if (!valid_id(sc.id)) {
            throw ConfigError("config", 0,
                              "scenario id '" + sc.id + "' must use only letters, digits, '-' or '_'");
        }
        ids.push_back(sc.id);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw ConfigError("config", 0, "scenario ids must be unique");
    }
}

StudyReport run_study(const ScenarioFile& file, const fs::path& out_dir,
                      const StudyOptions& options) {
    validate_scenario_file(file);
    StudyReport report;
    report.zeta_threshold = file.zeta_threshold;

    for (const Scenario& scenario : file.scenarios) {
        ScenarioReport sr;
        sr.scenario = scenario;
        try {
            const auto& sys = file.system;
            sr.steady_state = solve_steady_state(sys.machine, sys.line, scenario.op);
            sr.constants = compute_heffron_constants(sys.machine, sys.line, scenario.op);

            const StateSpaceModel open =
                build_open_loop(sys.machine, sys.line, sys.exciter, sys.governor, scenario.op);
            sr.methods.push_back(evaluate_variant("open", open, file, scenario));

            if (scenario.cpss) {
                PssParams p = *scenario.cpss;
                p.T_w = sys.T_w;
                const StateSpaceModel closed = build_closed_loop(
                    sys.machine, sys.line, sys.exciter, sys.governor, p, scenario.op);
                MethodResult r = evaluate_variant("cpss", closed, file, scenario);
                r.params = p;
                sr.methods.push_back(std::move(r));
            }

            const FitnessFn fitness = pss_fitness(sys.machine, sys.line, sys.exciter,
                                                  sys.governor, scenario.op, sys.T_w);
            const auto run_tuner = [&](const std::string& name, auto cfg) {
                cfg.seed = file.seeds.front();
                OptimizationResult opt;
                if constexpr (std::is_same_v<decltype(cfg), GaConfig>) {
                    opt = ga_optimize(fitness, file.pss_bounds, cfg);
                } else {
                    opt = pso_optimize(fitness, file.pss_bounds, cfg);
                }
                PssParams p{opt.best_x[0], opt.best_x[1], opt.best_x[2], sys.T_w};
                const StateSpaceModel closed = build_closed_loop(
                    sys.machine, sys.line, sys.exciter, sys.governor, p, scenario.op);
                MethodResult r = evaluate_variant(name, closed, file, scenario);
                r.params = p;
                r.optimization = std::move(opt);
                sr.methods.push_back(std::move(r));
            };
            if (options.run_ga) run_tuner("ga", file.ga);
            if (options.run_pso) run_tuner("pso", file.pso);
        } catch (const std::exception& e) {
            sr.error = e.what();
        }
        report.scenarios.push_back(std::move(sr));
    }

    emit_tables(report, out_dir);
    return report;
}

void emit_tables(const StudyReport& report, const fs::path& out_dir) {
    fs::create_directories(out_dir);

    for (const ScenarioReport& sr : report.scenarios) {
        const fs::path dir = out_dir / sr.scenario.id;
        fs::create_directories(dir);
        if (!sr.error.empty()) {
            std::ofstream err(dir / "error.txt", std::ios::binary);
            err << sr.error << '\n';
            continue;
        }

        std::ofstream eig(dir / "eigen.csv", std::ios::binary);
        eig << "method,sigma,omega,zeta,freq_hz,is_em\n";
        for (const auto& m : sr.methods) {
            for (const Mode& md : sorted_modes(m.modes.modes)) {
                eig << m.method << ',' << fmt_g(md.sigma) << ',' << fmt_g(md.omega)
                    << ',' << fmt_g(md.zeta) << ',' << fmt_g(md.freq_hz) << ','
                    << (md.is_em ? "true" : "false") << '\n';
            }
        }

        // One header row of method names and one row of minimum
        // electromechanical damping ratios, Table-style.
        std::ofstream damp(dir / "damping.csv", std::ios::binary);
        for (std::size_t i = 0; i < sr.methods.size(); ++i) {
            damp << (i ? "," : "") << sr.methods[i].method;
        }
        damp << '\n';
        for (std::size_t i = 0; i < sr.methods.size(); ++i) {
            damp << (i ? "," : "") << fmt_g(sr.methods[i].objective);
        }
        damp << '\n';

        std::ofstream par(dir / "params.csv", std::ios::binary);
        par << "method,k_s,t1,t2,objective\n";
        for (const auto& m : sr.methods) {
            if (!m.params) continue;
            par << m.method << ',' << fmt_g(m.params->K_s) << ',' << fmt_g(m.params->T1)
                << ',' << fmt_g(m.params->T2) << ',' << fmt_g(m.objective) << '\n';
        }

        std::ofstream met(dir / "metrics.csv", std::ios::binary);
        met << "method,ise_speed,ise_angle,peak_domega,settle_domega,"
               "peak_ddelta,settle_ddelta\n";
        for (const auto& m : sr.methods) {
            met << m.method << ',' << fmt_g(m.speed_metrics.ise_speed) << ','
                << fmt_g(m.speed_metrics.ise_angle) << ','
                << fmt_g(m.speed_metrics.peak_overshoot) << ','
                << settle_display(m.speed_metrics.settling_time) << ','
                << fmt_g(m.angle_metrics.peak_overshoot) << ','
                << settle_display(m.angle_metrics.settling_time) << '\n';
        }

        for (const auto& m : sr.methods) {
            std::ofstream traj(dir / ("traj-" + m.method + ".csv"), std::ios::binary);
            write_trajectory_csv(m.trajectory, traj);
        }
    }

    std::ofstream rep(out_dir / "report.txt", std::ios::binary);
    rep << "SMIB stabilizer study report\n";
    rep << "============================\n";
    for (const ScenarioReport& sr : report.scenarios) {
        const auto& op = sr.scenario.op;
        rep << "\nScenario " << sr.scenario.id << "  (P=" << fmt_f(op.P, 4)
            << ", Q=" << fmt_f(op.Q, 4) << ", dP_L=" << fmt_f(op.delta_P_L, 4)
            << ", x_e_scale=" << fmt_f(op.x_e_scale, 4)
            << ", k_a_scale=" << fmt_f(op.k_a_scale, 4) << ")\n";
        if (!sr.error.empty()) {
            rep << "  ERROR: " << sr.error << '\n';
            continue;
        }
        const auto& K = sr.constants;
        rep << "  Linearization constants: K1=" << fmt_f(K.K1, 4)
            << " K2=" << fmt_f(K.K2, 4) << " K3=" << fmt_f(K.K3, 4)
            << " K4=" << fmt_f(K.K4, 4) << " K5=" << fmt_f(K.K5, 4)
            << " K6=" << fmt_f(K.K6, 4) << '\n';
        rep << "  Operating point: delta0=" << fmt_f(sr.steady_state.delta0, 4)
            << " rad  E_qp0=" << fmt_f(sr.steady_state.E_qp0, 4)
            << "  V_inf=" << fmt_f(sr.steady_state.V_inf, 4) << '\n';

        rep << "\n  Eigenvalues:\n";
        for (const auto& m : sr.methods) {
            rep << "    " << m.method << ":";
            bool first = true;
            for (const Mode& md : sorted_modes(m.modes.modes)) {
                rep << (first ? " " : ", ") << mode_display(md);
                first = false;
            }
            rep << '\n';
        }

        rep << "\n  Minimum electromechanical damping ratio (threshold "
            << fmt_f(report.zeta_threshold, 4) << "):\n";
        for (const auto& m : sr.methods) {
            rep << "    " << m.method << ": " << fmt_f(m.objective, 6) << "  "
                << (m.pass ? "PASS" : "FAIL") << '\n';
        }

        bool any_params = false;
        for (const auto& m : sr.methods) any_params = any_params || bool(m.params);
        if (any_params) {
            rep << "\n  Stabilizer parameters (K_s, T1, T2 -> achieved damping):\n";
            for (const auto& m : sr.methods) {
                if (!m.params) continue;
                rep << "    " << m.method << ": " << fmt_f(m.params->K_s, 4) << ", "
                    << fmt_f(m.params->T1, 4) << ", " << fmt_f(m.params->T2, 4)
                    << " -> " << fmt_f(m.objective, 6) << '\n';
            }
        }

        rep << "\n  Step-response metrics (disturbance " << fmt_f(op.delta_P_L, 4)
            << " p.u.):\n";
        rep << "    method  ISE(dOmega)    ISE(dDelta)    peak|dOmega|  "
               "settle(dOmega)  peak|dDelta|  settle(dDelta)\n";
        for (const auto& m : sr.methods) {
            char line[256];
            std::snprintf(line, sizeof(line),
                          "    %-6s  %-13.6e  %-13.6e  %-12.6f  %-14s  %-12.6f  %s\n",
                          m.method.c_str(), m.speed_metrics.ise_speed,
                          m.speed_metrics.ise_angle, m.speed_metrics.peak_overshoot,
                          m.speed_metrics.settling_time
                              ? fmt_f(*m.speed_metrics.settling_time, 2).c_str()
                              : "not-settled",
                          m.angle_metrics.peak_overshoot,
                          m.angle_metrics.settling_time
                              ? fmt_f(*m.angle_metrics.settling_time, 2).c_str()
                              : "not-settled");
            rep << line;
        }
    }
}

int study_exit_code(const StudyReport& report) {
    for (const ScenarioReport& sr : report.scenarios) {
        if (!sr.error.empty()) return 2;
        for (const auto& m : sr.methods) {
            if ((m.method == "ga" || m.method == "pso") && !m.pass) return 2;
        }
    }
    return 0;
}

}  // namespace smibpss
