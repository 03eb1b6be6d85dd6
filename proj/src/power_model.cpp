#include "smibpss/power_model.hpp"

#include <cmath>

namespace smibpss {

namespace {

using cplx = std::complex<double>;

void check_finite_positive(double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) {
        throw std::invalid_argument(std::string(name) + " must be finite and > 0");
    }
}

void validate(const MachineParams& m) {
    check_finite_positive(m.x_d_prime, "x_d_prime");
    check_finite_positive(m.x_q, "x_q");
    check_finite_positive(m.M, "M");
    check_finite_positive(m.T_do_prime, "T_do_prime");
    check_finite_positive(m.omega_0, "omega_0");
    if (!(m.x_d > m.x_d_prime)) {
        throw std::invalid_argument("x_d must exceed x_d_prime");
    }
    if (!std::isfinite(m.D) || m.D < 0.0) {
        throw std::invalid_argument("D must be finite and >= 0");
    }
}

void validate(const LineLoadParams& l) {
    check_finite_positive(l.X_e, "X_e");
    check_finite_positive(l.V_t0, "V_t0");
    if (!std::isfinite(l.R) || !std::isfinite(l.G) || !std::isfinite(l.B)) {
        throw std::invalid_argument("R, G, B must be finite");
    }
}

void validate(const OperatingCondition& op) {
    check_finite_positive(op.P, "P");
    check_finite_positive(op.x_e_scale, "x_e_scale");
    check_finite_positive(op.k_a_scale, "k_a_scale");
    if (!std::isfinite(op.Q) || !std::isfinite(op.delta_P_L)) {
        throw std::invalid_argument("Q and delta_P_L must be finite");
    }
}

void validate(const ExcitationParams& e) {
    check_finite_positive(e.K_A, "K_A");
    check_finite_positive(e.T_A, "T_A");
    check_finite_positive(e.T_E, "T_E");
    check_finite_positive(e.T_F, "T_F");
    if (!std::isfinite(e.K_E) || !std::isfinite(e.S_E)) {
        throw std::invalid_argument("K_E and S_E must be finite");
    }
    if (!std::isfinite(e.K_F) || e.K_F < 0.0) {
        throw std::invalid_argument("K_F must be finite and >= 0");
    }
}

void validate(const GovernorTurbineParams& g) {
    check_finite_positive(g.T_GS, "T_GS");
    check_finite_positive(g.T_TS, "T_TS");
    check_finite_positive(g.R_p, "R_p");
}

// 2x2 network matrix relating (i_d, i_q) to the rotor state for a machine
// connected through R + jX_e to the infinite bus with a local shunt load
// G + jB folded in via C = 1 + (R + jX_e)(G + jB).
Eigen::Matrix2d network_matrix(const MachineParams& m, double R, double Xe,
                               double Cr, double Ci) {
    Eigen::Matrix2d N;
    N << Ci * m.x_d_prime - R, Cr * m.x_q + Xe,
         -(Cr * m.x_d_prime + Xe), Ci * m.x_q - R;
    return N;
}

}  // namespace

const std::vector<std::string>& open_loop_labels() {
    static const std::vector<std::string> labels = {
        "dOmega", "dDelta", "dEqp", "dEfd", "dVr", "dVe", "dPg", "dTm"};
    return labels;
}

const std::vector<std::string>& closed_loop_labels() {
    static const std::vector<std::string> labels = {
        "dOmega", "dDelta", "dEqp", "dEfd", "dVr", "dVe", "dPg", "dTm",
        "dP1", "dP2", "dUe"};
    return labels;
}

SteadyState solve_steady_state(const MachineParams& machine,
                               const LineLoadParams& line,
                               const OperatingCondition& op) {
    validate(machine);
    validate(line);
    validate(op);

    const double Xe = line.X_e * op.x_e_scale;
    const cplx Vt(line.V_t0, 0.0);
    const cplx It = cplx(op.P, -op.Q) / line.V_t0;
    const cplx EQ = Vt + cplx(0.0, machine.x_q) * It;
    if (std::abs(EQ) < 1e-12) {
        throw std::domain_error(
            "power flow infeasible: internal voltage behind x_q is zero");
    }
    const double alpha = std::arg(EQ);
    const cplx rot = std::polar(1.0, 3.14159265358979323846 / 2.0 - alpha);
    const cplx idq = It * rot;
    const cplx vdq = Vt * rot;

    SteadyState ss;
    ss.i_d0 = idq.real();
    ss.i_q0 = idq.imag();
    ss.v_d0 = vdq.real();
    ss.v_q0 = vdq.imag();
    ss.E_qp0 = ss.v_q0 + machine.x_d_prime * ss.i_d0;

    const cplx I_line = It - cplx(line.G, line.B) * Vt;
    const cplx V_inf = Vt - cplx(line.R, Xe) * I_line;
    ss.V_inf = std::abs(V_inf);
    if (ss.V_inf < 1e-12) {
        throw std::domain_error(
            "power flow infeasible: infinite-bus voltage collapses to zero");
    }
    ss.delta0 = alpha - std::arg(V_inf);
    return ss;
}

HeffronConstants compute_heffron_constants(const MachineParams& machine,
                                           const LineLoadParams& line,
                                           const OperatingCondition& op) {
    const SteadyState ss = solve_steady_state(machine, line, op);

    const double Xe = line.X_e * op.x_e_scale;
    const cplx C = 1.0 + cplx(line.R, Xe) * cplx(line.G, line.B);
    const double Cr = C.real();
    const double Ci = C.imag();

    const Eigen::Matrix2d N = network_matrix(machine, line.R, Xe, Cr, Ci);
    if (std::abs(N.determinant()) < 1e-12) {
        throw std::domain_error(
            "power flow infeasible: singular network current equations");
    }
    const Eigen::Matrix2d Ninv = N.inverse();

    // Sensitivities of (i_d, i_q) to rotor angle and to transient EMF.
    const Eigen::Vector2d dI_ddelta =
        Ninv * Eigen::Vector2d(ss.V_inf * std::cos(ss.delta0),
                               -ss.V_inf * std::sin(ss.delta0));
    const Eigen::Vector2d dI_dE = Ninv * Eigen::Vector2d(Ci, -Cr);
    const double Fd = dI_ddelta(0), Fq = dI_ddelta(1);
    const double Yd = dI_dE(0), Yq = dI_dE(1);

    const double dxq = machine.x_q - machine.x_d_prime;
    const double dxd = machine.x_d - machine.x_d_prime;

    HeffronConstants K;
    K.K1 = (ss.E_qp0 + dxq * ss.i_d0) * Fq + dxq * ss.i_q0 * Fd;
    K.K2 = ss.i_q0 + (ss.E_qp0 + dxq * ss.i_d0) * Yq + dxq * ss.i_q0 * Yd;
    K.K3 = 1.0 / (1.0 + dxd * Yd);
    K.K4 = dxd * Fd;
    K.K5 = (ss.v_d0 * machine.x_q * Fq - ss.v_q0 * machine.x_d_prime * Fd) /
           line.V_t0;
    K.K6 = (ss.v_d0 * machine.x_q * Yq +
            ss.v_q0 * (1.0 - machine.x_d_prime * Yd)) /
           line.V_t0;
    if (!(K.K3 > 0.0) || !std::isfinite(K.K3)) {
        throw std::domain_error(
            "power flow infeasible: field equation gain K3 is not positive");
    }
    return K;
}

StateSpaceModel build_open_loop(const MachineParams& machine,
                                const LineLoadParams& line,
                                const ExcitationParams& exc,
                                const GovernorTurbineParams& gt,
                                const OperatingCondition& op) {
    validate(exc);
    validate(gt);
    const HeffronConstants K = compute_heffron_constants(machine, line, op);

    const double KA = exc.K_A * op.k_a_scale;
    const double KE = exc.K_E + exc.S_E;
    const double M = machine.M;
    const double Tdo = machine.T_do_prime;

    StateSpaceModel m;
    m.labels = open_loop_labels();
    m.A = Eigen::MatrixXd::Zero(8, 8);
    m.b_dist = Eigen::VectorXd::Zero(8);

    // Swing equation: M dOmega' = dTm - K1 dDelta - K2 dEqp - D dOmega - dP_L.
    m.A(0, 0) = -machine.D / M;
    m.A(0, 1) = -K.K1 / M;
    m.A(0, 2) = -K.K2 / M;
    m.A(0, 7) = 1.0 / M;
    // Rotor angle.
    m.A(1, 0) = machine.omega_0;
    // Field winding: Tdo dEqp' = dEfd - dEqp/K3 - K4 dDelta.
    m.A(2, 1) = -K.K4 / Tdo;
    m.A(2, 2) = -1.0 / (K.K3 * Tdo);
    m.A(2, 3) = 1.0 / Tdo;
    // Exciter: T_E dEfd' = dVr - (K_E + S_E) dEfd.
    m.A(3, 3) = -KE / exc.T_E;
    m.A(3, 4) = 1.0 / exc.T_E;
    // Amplifier: T_A dVr' = -K_A (K5 dDelta + K6 dEqp) - K_A dVe - dVr.
    m.A(4, 1) = -KA * K.K5 / exc.T_A;
    m.A(4, 2) = -KA * K.K6 / exc.T_A;
    m.A(4, 4) = -1.0 / exc.T_A;
    m.A(4, 5) = -KA / exc.T_A;
    // Rate feedback: T_F dVe' = (K_F/T_E)(dVr - (K_E+S_E) dEfd) - dVe.
    m.A(5, 3) = -exc.K_F * KE / (exc.T_F * exc.T_E);
    m.A(5, 4) = exc.K_F / (exc.T_F * exc.T_E);
    m.A(5, 5) = -1.0 / exc.T_F;
    // Governor: T_GS dPg' = -dOmega/R_p - dPg.
    m.A(6, 0) = -1.0 / (gt.R_p * gt.T_GS);
    m.A(6, 6) = -1.0 / gt.T_GS;
    // Turbine: T_TS dTm' = dPg - dTm.
    m.A(7, 6) = 1.0 / gt.T_TS;
    m.A(7, 7) = -1.0 / gt.T_TS;

    m.b_dist(0) = -1.0 / M;
    return m;
}

StateSpaceModel build_closed_loop(const MachineParams& machine,
                                  const LineLoadParams& line,
                                  const ExcitationParams& exc,
                                  const GovernorTurbineParams& gt,
                                  const PssParams& pss,
                                  const OperatingCondition& op) {
    if (!std::isfinite(pss.T2) || pss.T2 <= 0.0) {
        throw std::invalid_argument("PSS T2 must be finite and > 0");
    }
    if (!std::isfinite(pss.T_w) || pss.T_w <= 0.0) {
        throw std::invalid_argument("PSS T_w must be finite and > 0");
    }
    if (!std::isfinite(pss.K_s) || !std::isfinite(pss.T1) || pss.T1 < 0.0) {
        throw std::invalid_argument("PSS K_s and T1 must be finite, T1 >= 0");
    }

    const StateSpaceModel open = build_open_loop(machine, line, exc, gt, op);
    const double KA = exc.K_A * op.k_a_scale;

    StateSpaceModel m;
    m.labels = closed_loop_labels();
    m.A = Eigen::MatrixXd::Zero(11, 11);
    m.b_dist = Eigen::VectorXd::Zero(11);
    m.A.topLeftCorner(8, 8) = open.A;
    m.b_dist.head(8) = open.b_dist;

    // Each stabilizer block's output is a state; the feedthrough of the
    // washout and lead-lag blocks is realized by substituting the upstream
    // state derivative into each block's own equation. a_w is the dOmega
    // derivative row, the input to the washout.
    const Eigen::RowVectorXd a_w = open.A.row(0);
    const double T1 = pss.T1, T2 = pss.T2, Tw = pss.T_w, Ks = pss.K_s;

    // Washout output: dP1' = Ks * dOmega' - dP1 / Tw.
    m.A.row(8).head(8) = Ks * a_w;
    m.A(8, 8) = -1.0 / Tw;
    // First lead-lag output: T2 dP2' = dP1 + T1 dP1' - dP2.
    m.A.row(9).head(8) = (T1 * Ks / T2) * a_w;
    m.A(9, 8) = (1.0 - T1 / Tw) / T2;
    m.A(9, 9) = -1.0 / T2;
    // Second lead-lag output: T2 dUe' = dP2 + T1 dP2' - dUe.
    m.A.row(10).head(8) = (T1 * T1 * Ks / (T2 * T2)) * a_w;
    m.A(10, 8) = (T1 / (T2 * T2)) * (1.0 - T1 / Tw);
    m.A(10, 9) = (1.0 - T1 / T2) / T2;
    m.A(10, 10) = -1.0 / T2;
    // Stabilizer output enters the regulator summing point.
    m.A(4, 10) = KA / exc.T_A;
    return m;
}

std::complex<double> pss_frequency_response(const PssParams& pss, double omega) {
    if (!(omega >= 0.0)) {
        throw std::invalid_argument("omega must be >= 0");
    }
    const cplx s(0.0, omega);
    const cplx leadlag = (1.0 + s * pss.T1) / (1.0 + s * pss.T2);
    const cplx washout = s * pss.T_w / (1.0 + s * pss.T_w);
    return pss.K_s * leadlag * leadlag * washout;
}

}  // namespace smibpss
