#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smibpss/power_model.hpp"

namespace smibpss {

// One oscillatory or aperiodic mode. Conjugate pairs are collapsed to the
// representative with omega >= 0; real modes carry omega = 0 and zeta = +/-1
// by the sign of sigma (0 for a zero eigenvalue).
struct Mode {
    double sigma = 0.0;    // real part (1/s)
    double omega = 0.0;    // imaginary part (rad/s), >= 0
    double zeta = 0.0;     // damping ratio
    double freq_hz = 0.0;  // omega / 2*pi
    bool is_em = false;    // electromechanical classification
};

// Modes of one model plus the tuning objective ingredients.
struct ModeSet {
    std::vector<Mode> modes;
    std::optional<double> min_em_zeta;  // empty when no mode is EM
    double zeta_threshold = 0.06;
    // True when rotor-participation screening was skipped because the
    // eigenvector basis was too ill-conditioned; classification then falls
    // back to the frequency band alone.
    bool participation_fallback = false;
};

// All eigenvalues (with multiplicity) of a dense real square matrix.
// Throws std::invalid_argument for a non-square/empty matrix and
// std::runtime_error if the iteration fails to converge.
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& A);

// -sigma / sqrt(sigma^2 + omega^2). Throws std::domain_error at (0, 0).
double damping_ratio(double sigma, double omega);

// Collapse an eigenvalue list into Modes (conjugate representatives with
// omega >= 0 plus real modes), is_em unset.
std::vector<Mode> make_modes(const std::vector<std::complex<double>>& eigs);

// Set is_em on each mode: complex, frequency in [0.1, 3.0] Hz, and the
// combined participation of the rotor states (dOmega, dDelta) either at
// least the sum of the two largest non-rotor participations or above 0.2.
// Returns true if the participation screen had to be skipped (fallback to
// the frequency band alone) due to an ill-conditioned eigenvector basis.
bool classify_em_modes(std::vector<Mode>& modes, const Eigen::MatrixXd& A,
                       const std::vector<std::string>& labels);

// Full modal picture of a model.
ModeSet analyze_modes(const StateSpaceModel& model, double zeta_threshold = 0.06);

// Tuning objective: minimum zeta over electromechanical modes; when no mode
// classifies as EM, the minimum zeta over all complex modes; when the
// spectrum is entirely real, the minimum zeta over all modes.
double objective_j(const StateSpaceModel& model);

}  // namespace smibpss
