#include "smibpss/time_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace smibpss {

namespace {

constexpr double kOverflowLimit = 1e12;

int label_index(const std::vector<std::string>& labels, const std::string& label) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return static_cast<int>(i);
    }
    return -1;
}

void append_double(std::string& line, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    line.append(buf, res.ptr);
}

}  // namespace

Trajectory simulate(const StateSpaceModel& model, const SimConfig& cfg) {
    if (!(cfg.t_end > 0.0) || !(cfg.dt > 0.0) || !(cfg.dt < cfg.t_end)) {
        throw std::invalid_argument("sim config: need 0 < dt < t_end");
    }
    const auto n = model.A.rows();
    if (n == 0 || model.A.cols() != n || model.b_dist.size() != n) {
        throw std::invalid_argument("simulate: inconsistent model dimensions");
    }

    // Fastest-dynamics estimate: the Gershgorin row bound on |eigenvalue|.
    double gersh = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        gersh = std::max(gersh, model.A.row(i).cwiseAbs().sum());
    }
    double h = cfg.dt;
    if (gersh > 0.0) {
        h = std::min(cfg.dt, 1.0 / gersh / 10.0);
    }
    const int substeps = std::max(1, static_cast<int>(std::ceil(cfg.dt / h - 1e-12)));
    const double hs = cfg.dt / substeps;

    const Eigen::VectorXd bu = model.b_dist * cfg.disturbance;
    const auto deriv = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return model.A * x + bu;
    };

    const long n_samples = std::lround(cfg.t_end / cfg.dt);
    Trajectory traj;
    traj.labels = model.labels;
    traj.times.reserve(n_samples + 1);
    traj.states.reserve(n_samples + 1);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (long k = 0; k <= n_samples; ++k) {
        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kOverflowLimit) {
            traj.overflow = true;
            break;
        }
        traj.times.push_back(k * cfg.dt);
        traj.states.emplace_back(x.data(), x.data() + n);
        if (k == n_samples) break;
        for (int s = 0; s < substeps; ++s) {
            const Eigen::VectorXd k1 = deriv(x);
            const Eigen::VectorXd k2 = deriv(x + 0.5 * hs * k1);
            const Eigen::VectorXd k3 = deriv(x + 0.5 * hs * k2);
            const Eigen::VectorXd k4 = deriv(x + hs * k3);
            x += (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return traj;
}

double ise(const Trajectory& traj, const std::string& state_label) {
    const int idx = label_index(traj.labels, state_label);
    if (idx < 0) {
        throw std::invalid_argument("ise: unknown state label '" + state_label + "'");
    }
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
        const double e0 = traj.states[k][idx];
        const double e1 = traj.states[k + 1][idx];
        total += 0.5 * (e0 * e0 + e1 * e1) * (traj.times[k + 1] - traj.times[k]);
    }
    return total;
}

ResponseMetrics response_metrics(const Trajectory& traj,
                                 const std::string& state_label,
                                 double settle_band) {
    const int idx = label_index(traj.labels, state_label);
    if (idx < 0) {
        throw std::invalid_argument("response_metrics: unknown state label '" +
                                    state_label + "'");
    }
    if (!(settle_band > 0.0)) {
        throw std::invalid_argument("response_metrics: settle_band must be > 0");
    }
    ResponseMetrics m;
    if (label_index(traj.labels, "dOmega") >= 0) m.ise_speed = ise(traj, "dOmega");
    if (label_index(traj.labels, "dDelta") >= 0) m.ise_angle = ise(traj, "dDelta");

    double peak = 0.0;
    for (const auto& row : traj.states) {
        peak = std::max(peak, std::abs(row[idx]));
    }
    m.peak_overshoot = peak;

    if (traj.overflow) {
        return m;  // a truncated run never settles
    }
    const double band = std::max(settle_band * peak, 1e-5);
    long last_outside = -1;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        if (std::abs(traj.states[k][idx]) > band) {
            last_outside = static_cast<long>(k);
        }
    }
    if (last_outside < 0) {
        m.settling_time = 0.0;
    } else if (last_outside + 1 < static_cast<long>(traj.times.size())) {
        m.settling_time = traj.times[last_outside + 1];
    }
    return m;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    std::string line = "t";
    for (const auto& label : traj.labels) {
        line += ',';
        line += label;
    }
    line += '\n';
    out << line;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        line.clear();
        append_double(line, traj.times[k]);
        for (double v : traj.states[k]) {
            line += ',';
            append_double(line, v);
        }
        line += '\n';
        out << line;
    }
}

}  // namespace smibpss
