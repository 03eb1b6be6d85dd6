#include "smibpss/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "smibpss/modal.hpp"

namespace smibpss {

namespace {

// Uniform double in [0, 1) built from the top 53 bits of the generator
// output, so draws are identical across standard library implementations.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

void check_bounds(const Bounds& b) {
    if (b.lo.empty() || b.lo.size() != b.hi.size()) {
        throw std::invalid_argument("bounds: lo and hi must be non-empty and equal length");
    }
    for (std::size_t i = 0; i < b.lo.size(); ++i) {
        if (!(b.lo[i] < b.hi[i]) || !std::isfinite(b.lo[i]) || !std::isfinite(b.hi[i])) {
            throw std::invalid_argument("bounds: need finite lo < hi in every dimension");
        }
    }
}

// Roulette-wheel index selection over non-negative masses; `spin` in [0, 1).
std::size_t spin_wheel(const std::vector<double>& mass, double total, double spin) {
    double acc = 0.0;
    const double target = spin * total;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        acc += mass[i];
        if (target < acc) return i;
    }
    return mass.size() - 1;
}

}  // namespace

double inertia_weight(double w_max, double w_min, int iter_max, int iter) {
    if (iter_max == 0) {
        throw std::domain_error("inertia_weight: iter_max must be nonzero");
    }
    if (iter == 0) return w_max;
    if (iter == iter_max) return w_min;
    return w_max - ((w_max - w_min) / iter_max) * iter;
}

std::vector<double> pso_velocity_update(const std::vector<double>& v,
                                        const std::vector<double>& x,
                                        const std::vector<double>& pbest,
                                        const std::vector<double>& gbest,
                                        double w, double c1, double c2,
                                        const std::vector<double>& rand1,
                                        const std::vector<double>& rand2,
                                        const std::vector<double>& v_max) {
    const std::size_t n = v.size();
    if (x.size() != n || pbest.size() != n || gbest.size() != n ||
        rand1.size() != n || rand2.size() != n || v_max.size() != n) {
        throw std::invalid_argument("pso_velocity_update: dimension mismatch");
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double nv = w * v[i] + c1 * rand1[i] * (pbest[i] - x[i]) +
                    c2 * rand2[i] * (gbest[i] - x[i]);
        nv = std::clamp(nv, -v_max[i], v_max[i]);
        out[i] = nv;
    }
    return out;
}

std::pair<std::vector<double>, std::vector<double>> pso_position_update(
    const std::vector<double>& x, const std::vector<double>& v,
    const Bounds& bounds) {
    const std::size_t n = x.size();
    if (v.size() != n || bounds.lo.size() != n || bounds.hi.size() != n) {
        throw std::invalid_argument("pso_position_update: dimension mismatch");
    }
    std::vector<double> nx(n), nv(v);
    for (std::size_t i = 0; i < n; ++i) {
        nx[i] = x[i] + v[i];
        if (nx[i] < bounds.lo[i]) {
            nx[i] = bounds.lo[i];
            nv[i] = 0.0;
        } else if (nx[i] > bounds.hi[i]) {
            nx[i] = bounds.hi[i];
            nv[i] = 0.0;
        }
    }
    return {std::move(nx), std::move(nv)};
}

OptimizationResult pso_optimize(const FitnessFn& fitness, const Bounds& bounds,
                                const PsoConfig& cfg) {
    check_bounds(bounds);
    if (cfg.swarm_size < 1 || cfg.generations < 1) {
        throw std::invalid_argument("pso config: swarm_size and generations must be >= 1");
    }
    if (!(cfg.w_max >= cfg.w_min) || !(cfg.w_min > 0.0) || cfg.c1 < 0.0 ||
        cfg.c2 < 0.0 || !(cfg.v_max_fraction > 0.0)) {
        throw std::invalid_argument("pso config: invalid coefficient settings");
    }
    const std::size_t dim = bounds.lo.size();
    const int n = cfg.swarm_size;
    std::mt19937_64 rng(cfg.seed);

    std::vector<double> v_max(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        v_max[d] = cfg.v_max_fraction * (bounds.hi[d] - bounds.lo[d]);
    }

    std::vector<std::vector<double>> x(n, std::vector<double>(dim));
    std::vector<std::vector<double>> v(n, std::vector<double>(dim));
    for (int i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
            x[i][d] = uniform_in(rng, bounds.lo[d], bounds.hi[d]);
        }
        for (std::size_t d = 0; d < dim; ++d) {
            v[i][d] = uniform_in(rng, -v_max[d], v_max[d]);
        }
    }

    OptimizationResult res;
    std::vector<std::vector<double>> pbest = x;
    std::vector<double> pbest_f(n);
    for (int i = 0; i < n; ++i) {
        pbest_f[i] = fitness(x[i]);
        ++res.evaluations;
    }
    int g_idx = 0;
    for (int i = 1; i < n; ++i) {
        if (pbest_f[i] > pbest_f[g_idx]) g_idx = i;
    }
    std::vector<double> gbest = pbest[g_idx];
    double gbest_f = pbest_f[g_idx];
    res.history.push_back(gbest_f);

    std::vector<double> r1(dim), r2(dim);
    for (int iter = 1; iter <= cfg.generations; ++iter) {
        const double w = inertia_weight(cfg.w_max, cfg.w_min, cfg.generations, iter);
        for (int i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < dim; ++d) {
                r1[d] = uniform01(rng);
                r2[d] = uniform01(rng);
            }
            v[i] = pso_velocity_update(v[i], x[i], pbest[i], gbest, w, cfg.c1,
                                       cfg.c2, r1, r2, v_max);
            auto [nx, nv] = pso_position_update(x[i], v[i], bounds);
            x[i] = std::move(nx);
            v[i] = std::move(nv);
            const double f = fitness(x[i]);
            ++res.evaluations;
            if (f > pbest_f[i]) {
                pbest_f[i] = f;
                pbest[i] = x[i];
            }
            if (f > gbest_f) {
                gbest_f = f;
                gbest = x[i];
            }
        }
        res.history.push_back(gbest_f);
    }
    res.best_x = gbest;
    res.best_fitness = gbest_f;
    return res;
}

std::vector<double> roulette_probabilities(const std::vector<double>& fitness) {
    if (fitness.empty()) {
        throw std::invalid_argument("roulette_probabilities: empty fitness list");
    }
    const std::size_t n = fitness.size();
    const double min_f = *std::min_element(fitness.begin(), fitness.end());
    const double shift = (std::isfinite(min_f) && min_f < 0.0) ? -min_f : 0.0;
    std::vector<double> p(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = fitness[i] + shift + 1e-12;
        total += p[i];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(n));
        return p;
    }
    for (double& v : p) v /= total;
    return p;
}

OptimizationResult ga_optimize(const FitnessFn& fitness, const Bounds& bounds,
                               const GaConfig& cfg) {
    check_bounds(bounds);
    if (cfg.pop_size < 2 || cfg.generations < 1) {
        throw std::invalid_argument("ga config: pop_size must be >= 2, generations >= 1");
    }
    if (!(cfg.generation_gap > 0.0) || cfg.generation_gap > 1.0 ||
        cfg.p_crossover < 0.0 || cfg.p_crossover > 1.0 || cfg.p_mutation < 0.0 ||
        cfg.p_mutation > 1.0) {
        throw std::invalid_argument("ga config: probabilities/gap out of range");
    }
    const std::size_t dim = bounds.lo.size();
    const int n = cfg.pop_size;
    // Offspring count from the generation gap; the remainder of the ranking
    // carries over unchanged, which always keeps at least the best one.
    int n_off = static_cast<int>(std::lround(cfg.generation_gap * n));
    n_off = std::clamp(n_off, 0, n - 1);
    const int n_elite = n - n_off;

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::vector<double>> pop(n, std::vector<double>(dim));
    for (int i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
            pop[i][d] = uniform_in(rng, bounds.lo[d], bounds.hi[d]);
        }
    }

    OptimizationResult res;
    std::vector<double> fit(n);
    for (int i = 0; i < n; ++i) {
        fit[i] = fitness(pop[i]);
        ++res.evaluations;
    }

    std::vector<int> order(n);
    std::vector<double> mass(n);
    int best_i = static_cast<int>(std::max_element(fit.begin(), fit.end()) - fit.begin());
    res.best_x = pop[best_i];
    res.best_fitness = fit[best_i];
    res.history.push_back(res.best_fitness);

    for (int gen = 0; gen < cfg.generations; ++gen) {
        // Rank: order[0] is the current best.
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return fit[a] > fit[b]; });

        mass = roulette_probabilities(fit);

        std::vector<std::vector<double>> next;
        next.reserve(n);
        std::vector<double> next_fit;
        next_fit.reserve(n);
        for (int e = 0; e < n_elite; ++e) {
            next.push_back(pop[order[e]]);
            next_fit.push_back(fit[order[e]]);
        }

        while (static_cast<int>(next.size()) < n) {
            const std::size_t ia = spin_wheel(mass, 1.0, uniform01(rng));
            const std::size_t ib = spin_wheel(mass, 1.0, uniform01(rng));
            std::vector<double> c1 = pop[ia];
            std::vector<double> c2 = pop[ib];
            if (uniform01(rng) < cfg.p_crossover) {
                const double alpha = uniform01(rng);
                for (std::size_t d = 0; d < dim; ++d) {
                    const double a = c1[d], b = c2[d];
                    c1[d] = alpha * a + (1.0 - alpha) * b;
                    c2[d] = (1.0 - alpha) * a + alpha * b;
                }
            }
            for (auto* child : {&c1, &c2}) {
                for (std::size_t d = 0; d < dim; ++d) {
                    if (uniform01(rng) < cfg.p_mutation) {
                        (*child)[d] = uniform_in(rng, bounds.lo[d], bounds.hi[d]);
                    }
                }
            }
            next.push_back(std::move(c1));
            if (static_cast<int>(next.size()) < n) {
                next.push_back(std::move(c2));
            }
        }

        for (int i = n_elite; i < n; ++i) {
            next_fit.push_back(fitness(next[i]));
            ++res.evaluations;
        }
        pop = std::move(next);
        fit = std::move(next_fit);

        best_i = static_cast<int>(std::max_element(fit.begin(), fit.end()) - fit.begin());
        if (fit[best_i] > res.best_fitness) {
            res.best_fitness = fit[best_i];
            res.best_x = pop[best_i];
        }
        res.history.push_back(res.best_fitness);
    }
    return res;
}

FitnessFn pss_fitness(const MachineParams& machine, const LineLoadParams& line,
                      const ExcitationParams& exc,
                      const GovernorTurbineParams& gt,
                      const OperatingCondition& op, double T_w) {
    return [=](const std::vector<double>& x) -> double {
        if (x.size() != 3) return -1.0;
        PssParams pss;
        pss.K_s = x[0];
        pss.T1 = x[1];
        pss.T2 = x[2];
        pss.T_w = T_w;
        try {
            const StateSpaceModel closed =
                build_closed_loop(machine, line, exc, gt, pss, op);
            return objective_j(closed);
        } catch (const std::exception&) {
            return -1.0;
        }
    };
}

Bounds default_pss_bounds() {
    Bounds b;
    b.lo = {5.0, 0.1, 0.1};
    b.hi = {60.0, 1.0, 1.0};
    return b;
}

}  // namespace smibpss
