#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smibpss/modal.hpp"
#include "smibpss/optimize.hpp"
#include "smibpss/power_model.hpp"
#include "smibpss/time_sim.hpp"

namespace smibpss {

// Complete plant description. R_T and delta_T_ref are accepted so existing
// parameter sets can be carried in config files verbatim, but no implemented
// equation uses them.
struct SystemParams {
    MachineParams machine;
    LineLoadParams line;
    ExcitationParams exciter;
    GovernorTurbineParams governor;
    double T_w = 10.0;
    double R_T = 0.4;
    double delta_T_ref = 0.0;
};

// One study case: an operating condition plus an optional fixed
// conventionally-tuned stabilizer to compare against.
struct Scenario {
    std::string id;
    OperatingCondition op;
    std::optional<PssParams> cpss;
};

// Parsed study configuration.
struct ScenarioFile {
    SystemParams system;
    std::vector<Scenario> scenarios;
    Bounds pss_bounds = default_pss_bounds();
    GaConfig ga;
    PsoConfig pso;
    SimConfig sim;
    std::vector<std::uint64_t> seeds = {1};
    double zeta_threshold = 0.06;
};

// Config-file problem with the offending line number (0 when the problem is
// file-level, e.g. an unreadable path or a missing section).
class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& source, int line, const std::string& message);
    int line() const { return line_; }

  private:
    int line_ = 0;
};

// The built-in study preset: the three benchmark operating conditions with
// their fixed conventional-stabilizer parameters, plus a fourth
// amplifier-gain sensitivity case (k_a_scale = 1.1) with no fixture.
ScenarioFile default_scenario_file();

// Parse the sectioned key=value config format (see README). source_name is
// used in diagnostics. Throws ConfigError with a line number on any
// malformed line, unknown section, or unknown key.
ScenarioFile parse_scenario_text(const std::string& text,
                                 const std::string& source_name);

// Read and parse a config file. Throws ConfigError.
ScenarioFile load_scenario_file(const std::filesystem::path& path);

// Structural validation (non-empty scenario list, bound sanity, positive
// seeds list). Throws ConfigError on violation.
void validate_scenario_file(const ScenarioFile& file);

// Results for one model variant within a scenario.
struct MethodResult {
    std::string method;  // "open", "cpss", "ga" or "pso"
    ModeSet modes;
    double objective = 0.0;  // minimum electromechanical damping ratio
    std::optional<PssParams> params;
    std::optional<OptimizationResult> optimization;
    Trajectory trajectory;
    ResponseMetrics speed_metrics;
    ResponseMetrics angle_metrics;
    bool pass = false;  // objective >= zeta_threshold
};

struct ScenarioReport {
    Scenario scenario;
    HeffronConstants constants;
    SteadyState steady_state;
    std::vector<MethodResult> methods;
    std::string error;  // non-empty when the scenario could not be built
};

struct StudyReport {
    std::vector<ScenarioReport> scenarios;
    double zeta_threshold = 0.06;
};

// Which optimizers a study run executes.
struct StudyOptions {
    bool run_ga = true;
    bool run_pso = true;
};

// Run the full pipeline for every scenario — open-loop analysis, the fixed
// conventional stabilizer when present, optimizer tuning, and time-domain
// simulation of each variant — then write all tables, trajectories and the
// summary report under out_dir. A scenario whose model cannot be built is
// recorded with its error and the remaining scenarios still run.
StudyReport run_study(const ScenarioFile& file,
                      const std::filesystem::path& out_dir,
                      const StudyOptions& options = {});

// Write per-scenario eigen/damping/params/metrics tables and trajectories
// (comma-separated) plus the aligned-text summary <out_dir>/report.txt.
// Output is byte-deterministic for identical reports.
void emit_tables(const StudyReport& report, const std::filesystem::path& out_dir);

// 0 when every optimized variant reached the damping threshold; 2 when any
// optimized variant fell short or a scenario failed outright.
int study_exit_code(const StudyReport& report);

}  // namespace smibpss
