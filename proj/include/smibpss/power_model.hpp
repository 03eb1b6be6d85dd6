#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace smibpss {

// Synchronous machine constants (per unit on machine base unless noted).
struct MachineParams {
    double x_d = 0.973;        // d-axis synchronous reactance
    double x_d_prime = 0.190;  // d-axis transient reactance
    double x_q = 0.550;        // q-axis reactance
    double M = 9.26;           // inertia constant, torque form (p.u.-s)
    double D = 0.0;            // rotor damping coefficient
    double T_do_prime = 7.76;  // field open-circuit time constant (s)
    double omega_0 = 2.0 * 3.14159265358979323846 * 60.0;  // synchronous speed (rad/s)
};

// Transmission line and local load seen from the generator terminals.
struct LineLoadParams {
    double R = 0.034;    // line resistance
    double X_e = 0.997;  // line reactance
    double G = 0.249;    // local load conductance
    double B = 0.262;    // local load susceptance
    double V_t0 = 1.05;  // terminal voltage magnitude at the operating point
};

// Voltage regulator / exciter constants (amplifier, exciter, rate feedback).
// T_A and K_F must be strictly positive so the regulator and rate-feedback
// states remain dynamic; see README for how the defaults were chosen.
struct ExcitationParams {
    double K_A = 190.0;   // amplifier gain
    double T_A = 0.05;    // amplifier time constant (s)
    double K_E = 1.0;     // exciter gain
    double T_E = 0.05;    // exciter time constant (s)
    double K_F = 0.025;   // rate-feedback gain
    double T_F = 1.0;     // rate-feedback time constant (s)
    double S_E = 0.0;     // saturation constant, held fixed
};

// Steam governor and non-reheat turbine constants.
struct GovernorTurbineParams {
    double T_GS = 0.2;  // governor time constant (s)
    double T_TS = 0.3;  // turbine time constant (s)
    double R_p = 0.05;  // steady-state speed droop
};

// One study operating point: dispatch, disturbance size, and parameter
// perturbation multipliers applied before linearization.
struct OperatingCondition {
    double P = 0.4;          // active power output
    double Q = 0.008;        // reactive power output
    double delta_P_L = 0.1;  // step load-change disturbance magnitude
    double x_e_scale = 1.0;  // multiplier on X_e
    double k_a_scale = 1.0;  // multiplier on K_A
};

// First-order linearization coefficients of torque, field and terminal
// voltage with respect to rotor angle and transient EMF.
struct HeffronConstants {
    double K1 = 0.0;
    double K2 = 0.0;
    double K3 = 0.0;
    double K4 = 0.0;
    double K5 = 0.0;
    double K6 = 0.0;
};

// Stabilizer gain and phase-compensation time constants; the tuning
// decision vector is (K_s, T1, T2) while T_w stays fixed.
struct PssParams {
    double K_s = 0.0;   // stabilizer gain
    double T1 = 0.1;    // lead time constant (s)
    double T2 = 0.1;    // lag time constant (s)
    double T_w = 10.0;  // washout time constant (s)
};

// Linear model dx/dt = A x + b_dist * dP_L with named states.
struct StateSpaceModel {
    Eigen::MatrixXd A;
    Eigen::VectorXd b_dist;
    std::vector<std::string> labels;
};

// Steady-state operating quantities produced by the power-flow solution.
struct SteadyState {
    double delta0 = 0.0;   // rotor angle relative to the infinite bus (rad)
    double E_qp0 = 0.0;    // transient EMF
    double V_inf = 0.0;    // infinite-bus voltage magnitude
    double i_d0 = 0.0;     // d-axis stator current
    double i_q0 = 0.0;     // q-axis stator current
    double v_d0 = 0.0;     // d-axis terminal voltage
    double v_q0 = 0.0;     // q-axis terminal voltage
};

// State names, in the fixed order used by every produced model.
const std::vector<std::string>& open_loop_labels();    // 8 states
const std::vector<std::string>& closed_loop_labels();  // 11 states

// Solve the steady-state operating point for (P, Q) at terminal voltage
// V_t0, with the line impedance already scaled by op.x_e_scale.
// Throws std::domain_error when no power-flow solution exists.
SteadyState solve_steady_state(const MachineParams& machine,
                               const LineLoadParams& line,
                               const OperatingCondition& op);

// Linearization constants K1..K6 about the solved operating point.
// Throws std::invalid_argument on parameter-invariant violations and
// std::domain_error when the operating point is infeasible.
HeffronConstants compute_heffron_constants(const MachineParams& machine,
                                           const LineLoadParams& line,
                                           const OperatingCondition& op);

// 8-state model: rotor speed/angle, field flux, exciter chain, governor
// and turbine. op.k_a_scale multiplies K_A and op.x_e_scale multiplies
// X_e before the constants are computed.
StateSpaceModel build_open_loop(const MachineParams& machine,
                                const LineLoadParams& line,
                                const ExcitationParams& exc,
                                const GovernorTurbineParams& gt,
                                const OperatingCondition& op);

// 11-state model: the open-loop dynamics plus washout and two lead-lag
// stabilizer states driven by rotor speed, with the stabilizer output
// added at the regulator summing point. Throws std::invalid_argument if
// T2 or T_w is zero (or negative).
StateSpaceModel build_closed_loop(const MachineParams& machine,
                                  const LineLoadParams& line,
                                  const ExcitationParams& exc,
                                  const GovernorTurbineParams& gt,
                                  const PssParams& pss,
                                  const OperatingCondition& op);

// Stabilizer transfer function K_s * [(1+sT1)/(1+sT2)]^2 * sT_w/(1+sT_w)
// evaluated at s = j*omega.
std::complex<double> pss_frequency_response(const PssParams& pss, double omega);

}  // namespace smibpss
