#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "smibpss/power_model.hpp"

namespace smibpss {

// Box constraints for the decision vector.
struct Bounds {
    std::vector<double> lo;
    std::vector<double> hi;
};

// Real-coded genetic algorithm settings.
struct GaConfig {
    int pop_size = 20;
    int generations = 10;
    double generation_gap = 0.9;  // fraction of the population replaced
    double p_crossover = 0.95;
    double p_mutation = 0.10;
    std::uint64_t seed = 1;
};

// Particle swarm settings. The inertia weight decays linearly from w_max to
// w_min over the run; v_max_fraction clamps each velocity component to that
// fraction of the corresponding bound range.
struct PsoConfig {
    int swarm_size = 20;
    int generations = 10;
    double w_max = 1.0;
    double w_min = 0.5;
    double c1 = 1.0;
    double c2 = 1.0;
    std::uint64_t seed = 1;
    double v_max_fraction = 0.2;
};

// Outcome of one optimizer run. history holds the best fitness seen up to
// and including each generation (never decreasing).
struct OptimizationResult {
    std::vector<double> best_x;
    double best_fitness = 0.0;
    std::vector<double> history;
    long evaluations = 0;
};

using FitnessFn = std::function<double(const std::vector<double>&)>;

// Linear inertia schedule: w_max - ((w_max - w_min)/iter_max) * iter.
// Throws std::domain_error when iter_max is zero.
double inertia_weight(double w_max, double w_min, int iter_max, int iter);

// Per-dimension velocity update
//   v' = w*v + c1*rand1*(pbest - x) + c2*rand2*(gbest - x)
// followed by clamping each component to [-v_max, v_max].
// Throws std::invalid_argument on dimension mismatch.
std::vector<double> pso_velocity_update(const std::vector<double>& v,
                                        const std::vector<double>& x,
                                        const std::vector<double>& pbest,
                                        const std::vector<double>& gbest,
                                        double w, double c1, double c2,
                                        const std::vector<double>& rand1,
                                        const std::vector<double>& rand2,
                                        const std::vector<double>& v_max);

// Position update x' = x + v. Components leaving the box are clipped to the
// violated bound and the corresponding velocity component is zeroed; the
// possibly modified velocity is returned alongside the new position.
std::pair<std::vector<double>, std::vector<double>> pso_position_update(
    const std::vector<double>& x, const std::vector<double>& v,
    const Bounds& bounds);

// Maximize fitness over the box. Deterministic given the seed.
OptimizationResult pso_optimize(const FitnessFn& fitness, const Bounds& bounds,
                                const PsoConfig& cfg);

// Per-individual selection probabilities for roulette-wheel selection over
// raw fitness: values are shifted by the magnitude of the minimum when it is
// negative, floored at a tiny positive mass, then normalized. Fitness {1, 3}
// gives {0.25, 0.75}. A population with no usable mass (all equal after
// flooring, or non-finite totals) falls back to the uniform distribution.
std::vector<double> roulette_probabilities(const std::vector<double>& fitness);

// Real-coded GA: roulette-wheel selection on fitness shifted to non-negative
// mass (a shift is applied only when the generation's minimum is negative;
// an all-equal population falls back to uniform selection), arithmetic
// blend crossover, uniform-reset mutation, elitism via the generation gap.
// Maximizes fitness; deterministic given the seed.
OptimizationResult ga_optimize(const FitnessFn& fitness, const Bounds& bounds,
                               const GaConfig& cfg);

// Fitness evaluator for stabilizer tuning: maps [K_s, T1, T2] to the minimum
// electromechanical damping ratio of the closed-loop model at the given
// operating condition. Any model-build failure yields -1 (worst damping).
FitnessFn pss_fitness(const MachineParams& machine, const LineLoadParams& line,
                      const ExcitationParams& exc,
                      const GovernorTurbineParams& gt,
                      const OperatingCondition& op, double T_w = 10.0);

// The tuning box: K_s in [5, 60], T1 in [0.1, 1], T2 in [0.1, 1].
Bounds default_pss_bounds();

}  // namespace smibpss
