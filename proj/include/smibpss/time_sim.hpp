#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "smibpss/power_model.hpp"

namespace smibpss {

// Step-disturbance experiment settings.
struct SimConfig {
    double t_end = 10.0;        // horizon (s)
    double dt = 0.01;           // output sample step (s)
    double disturbance = 0.1;   // step magnitude applied at t = 0
};

// Sampled state history, one row per sample in model label order. overflow
// is set when integration was cut short by a non-finite or exploding state;
// times/states then end at the last finite sample.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::string> labels;
    bool overflow = false;
};

// Scalar summary of one response signal plus the two standard error
// integrals. settling_time is empty when the signal never stays inside the
// band through the end of the horizon.
struct ResponseMetrics {
    double ise_speed = 0.0;   // integral squared dOmega (0 when absent)
    double ise_angle = 0.0;   // integral squared dDelta (0 when absent)
    double peak_overshoot = 0.0;
    std::optional<double> settling_time;
};

// Integrate dx/dt = A x + b_dist * disturbance from rest and sample every
// cfg.dt. The internal step subdivides dt enough to resolve the fastest
// time constant, so sampled accuracy is integrator-limited, not stiffness-
// limited.
Trajectory simulate(const StateSpaceModel& model, const SimConfig& cfg);

// Trapezoidal integral of the squared signal over the whole trajectory.
// Throws std::invalid_argument for an unknown label.
double ise(const Trajectory& traj, const std::string& state_label);

// Peak |signal|, settling time into a band of settle_band * peak (absolute
// floor 1e-5), and the speed/angle error integrals when those states exist.
ResponseMetrics response_metrics(const Trajectory& traj,
                                 const std::string& state_label,
                                 double settle_band = 0.02);

// Comma-separated export: header "t" plus the state labels, one row per
// sample, shortest round-trip decimal formatting.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace smibpss
