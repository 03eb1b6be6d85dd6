#include "smibpss/modal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace smibpss {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Imaginary parts below this magnitude are treated as real eigenvalues.
constexpr double kImagTol = 1e-9;

// Indices of the rotor states. Falls back to the first two states when the
// labels are absent (models always carry them in slots 0 and 1).
std::pair<int, int> rotor_indices(const std::vector<std::string>& labels) {
    int i_omega = 0, i_delta = 1;
    for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
        if (labels[i] == "dOmega") i_omega = i;
        if (labels[i] == "dDelta") i_delta = i;
    }
    return {i_omega, i_delta};
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& A) {
    if (A.rows() == 0 || A.rows() != A.cols()) {
        throw std::invalid_argument("eigenvalues: matrix must be square and non-empty");
    }
    if (!A.allFinite()) {
        throw std::invalid_argument("eigenvalues: matrix entries must be finite");
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(A, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigenvalues: QR iteration did not converge");
    }
    const auto& vals = solver.eigenvalues();
    return {vals.data(), vals.data() + vals.size()};
}

double damping_ratio(double sigma, double omega) {
    if (sigma == 0.0 && omega == 0.0) {
        throw std::domain_error("damping_ratio undefined at (0, 0)");
    }
    return -sigma / std::sqrt(sigma * sigma + omega * omega);
}

std::vector<Mode> make_modes(const std::vector<std::complex<double>>& eigs) {
    std::vector<Mode> modes;
    modes.reserve(eigs.size());
    for (const auto& lambda : eigs) {
        if (lambda.imag() < -kImagTol) continue;  // conjugate of a kept mode
        Mode m;
        m.sigma = lambda.real();
        m.omega = (lambda.imag() > kImagTol) ? lambda.imag() : 0.0;
        m.freq_hz = m.omega / (2.0 * kPi);
        if (m.sigma == 0.0 && m.omega == 0.0) {
            m.zeta = 0.0;
        } else {
            m.zeta = damping_ratio(m.sigma, m.omega);
        }
        modes.push_back(m);
    }
    return modes;
}

bool classify_em_modes(std::vector<Mode>& modes, const Eigen::MatrixXd& A,
                       const std::vector<std::string>& labels) {
    const int n = static_cast<int>(A.rows());
    const auto [i_omega, i_delta] = rotor_indices(labels);

    Eigen::EigenSolver<Eigen::MatrixXd> solver(A, /*computeEigenvectors=*/true);
    bool fallback = (solver.info() != Eigen::Success);

    Eigen::MatrixXcd V, W;
    Eigen::VectorXcd vals;
    if (!fallback) {
        V = solver.eigenvectors();
        vals = solver.eigenvalues();
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(V);
        // A defective (or numerically rank-deficient) eigenvector basis makes
        // participation factors meaningless; classification then relies on the
        // frequency band alone.
        if (!lu.isInvertible()) {
            fallback = true;
        } else {
            W = lu.inverse();
        }
    }

    for (Mode& m : modes) {
        m.is_em = false;
        if (m.omega <= 0.0) continue;
        if (m.freq_hz < 0.1 || m.freq_hz > 3.0) continue;
        if (fallback) {
            m.is_em = true;
            continue;
        }
        // Locate this mode's eigenvalue column.
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (vals(i).imag() < 0.0) continue;
            const double dist = std::abs(vals(i) - std::complex<double>(m.sigma, m.omega));
            if (dist < best_dist) {
                best_dist = dist;
                best = i;
            }
        }
        if (best < 0) continue;
        // Normalized participation of each state in the mode.
        Eigen::VectorXd p(n);
        for (int k = 0; k < n; ++k) {
            p(k) = std::abs(V(k, best) * W(best, k));
        }
        const double total = p.sum();
        if (!(total > 0.0) || !std::isfinite(total)) continue;
        p /= total;
        const double rotor = p(i_omega) + p(i_delta);
        double top1 = 0.0, top2 = 0.0;
        for (int k = 0; k < n; ++k) {
            if (k == i_omega || k == i_delta) continue;
            if (p(k) > top1) {
                top2 = top1;
                top1 = p(k);
            } else if (p(k) > top2) {
                top2 = p(k);
            }
        }
        m.is_em = (rotor >= top1 + top2) || (rotor > 0.2);
    }
    return fallback;
}

ModeSet analyze_modes(const StateSpaceModel& model, double zeta_threshold) {
    ModeSet set;
    set.zeta_threshold = zeta_threshold;
    set.modes = make_modes(eigenvalues(model.A));
    set.participation_fallback = classify_em_modes(set.modes, model.A, model.labels);
    for (const Mode& m : set.modes) {
        if (!m.is_em) continue;
        if (!set.min_em_zeta || m.zeta < *set.min_em_zeta) {
            set.min_em_zeta = m.zeta;
        }
    }
    return set;
}

double objective_j(const StateSpaceModel& model) {
    const ModeSet set = analyze_modes(model);
    if (set.min_em_zeta) return *set.min_em_zeta;
    bool have_complex = false;
    double min_complex = std::numeric_limits<double>::infinity();
    double min_all = std::numeric_limits<double>::infinity();
    for (const Mode& m : set.modes) {
        min_all = std::min(min_all, m.zeta);
        if (m.omega > 0.0) {
            have_complex = true;
            min_complex = std::min(min_complex, m.zeta);
        }
    }
    return have_complex ? min_complex : min_all;
}

}  // namespace smibpss
