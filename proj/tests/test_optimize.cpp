#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "smibpss/modal.hpp"
#include "smibpss/optimize.hpp"

using namespace smibpss;

namespace {

Bounds cube(double lo, double hi, std::size_t dim) {
    Bounds b;
    b.lo.assign(dim, lo);
    b.hi.assign(dim, hi);
    return b;
}

double sphere(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return -s;
}

// Wraps a fitness function, recording how often it ran and whether any
// candidate ever left the box.
struct InstrumentedFitness {
    const Bounds* bounds;
    FitnessFn inner;
    long calls = 0;
    bool out_of_bounds = false;

    FitnessFn fn() {
        return [this](const std::vector<double>& x) {
            ++calls;
            for (std::size_t d = 0; d < x.size(); ++d) {
                if (x[d] < bounds->lo[d] || x[d] > bounds->hi[d]) {
                    out_of_bounds = true;
                }
            }
            return inner(x);
        };
    }
};

}  // namespace

TEST_CASE("inertia schedule endpoints are exact and the midpoint is linear") {
    CHECK(inertia_weight(1.0, 0.5, 10, 0) == 1.0);
    CHECK(inertia_weight(1.0, 0.5, 10, 10) == 0.5);
    CHECK(inertia_weight(1.0, 0.5, 10, 5) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(inertia_weight(0.9, 0.4, 50, 20) ==
          doctest::Approx(0.9 - 0.5 / 50.0 * 20.0).epsilon(1e-15));
    CHECK_THROWS_AS(inertia_weight(1.0, 0.5, 0, 0), std::domain_error);
}

TEST_CASE("velocity update follows the hand-evaluated rule") {
    // 0.8*0.1 + 1*0.5*2 + 1*0.25*4 = 2.08 before clamping.
    const std::vector<double> v{0.1}, x{0.0}, pbest{2.0}, gbest{4.0};
    const std::vector<double> r1{0.5}, r2{0.25};
    auto out = pso_velocity_update(v, x, pbest, gbest, 0.8, 1.0, 1.0, r1, r2,
                                   {100.0});
    CHECK(out[0] == doctest::Approx(2.08).epsilon(1e-15));

    // Clamp kicks in at v_max.
    out = pso_velocity_update(v, x, pbest, gbest, 0.8, 1.0, 1.0, r1, r2, {1.5});
    CHECK(out[0] == doctest::Approx(1.5).epsilon(1e-15));

    // Both attraction terms vanish when the particle sits on both bests.
    out = pso_velocity_update({0.3}, {1.0}, {1.0}, {1.0}, 0.7, 1.0, 1.0, {0.9},
                              {0.9}, {10.0});
    CHECK(out[0] == doctest::Approx(0.21).epsilon(1e-15));

    // Momentum-only configuration is the identity on velocity.
    out = pso_velocity_update({0.4}, {0.0}, {2.0}, {3.0}, 1.0, 0.0, 0.0, {0.5},
                              {0.5}, {10.0});
    CHECK(out[0] == doctest::Approx(0.4).epsilon(1e-15));

    CHECK_THROWS_AS(pso_velocity_update({0.1, 0.2}, x, pbest, gbest, 0.8, 1.0,
                                        1.0, r1, r2, {1.0}),
                    std::invalid_argument);
}

TEST_CASE("position update clips to the box and zeroes the velocity") {
    const Bounds b = cube(0.0, 1.0, 1);
    auto [x1, v1] = pso_position_update({0.9}, {0.3}, b);
    CHECK(x1[0] == 1.0);
    CHECK(v1[0] == 0.0);

    auto [x2, v2] = pso_position_update({0.5}, {0.2}, b);
    CHECK(x2[0] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(v2[0] == doctest::Approx(0.2).epsilon(1e-15));

    auto [x3, v3] = pso_position_update({0.5}, {0.0}, b);
    CHECK(x3[0] == 0.5);
    CHECK(v3[0] == 0.0);

    auto [x4, v4] = pso_position_update({0.1}, {-0.4}, b);
    CHECK(x4[0] == 0.0);
    CHECK(v4[0] == 0.0);
}

TEST_CASE("roulette probabilities: proportional after shift, uniform fallback") {
    const auto p = roulette_probabilities({1.0, 3.0});
    CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-9));

    // Negative fitness is shifted so the minimum has (almost) zero mass.
    const auto q = roulette_probabilities({-2.0, 0.0, 2.0});
    CHECK(q[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(q[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK(q[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));

    // All-equal fitness collapses to the uniform distribution.
    const auto u = roulette_probabilities({-5.0, -5.0, -5.0, -5.0});
    for (double v : u) CHECK(v == doctest::Approx(0.25).epsilon(1e-9));

    CHECK_THROWS_AS(roulette_probabilities({}), std::invalid_argument);
}

TEST_CASE("sphere optimization reaches the origin within budget") {
    const Bounds b = cube(-5.0, 5.0, 3);

    PsoConfig pcfg;
    pcfg.generations = 50;
    pcfg.seed = 1;
    const auto pr = pso_optimize(sphere, b, pcfg);
    CHECK(pr.best_fitness >= -1e-2);
    CHECK(pr.evaluations == 20 + 20 * 50);

    GaConfig gcfg;
    gcfg.generations = 50;
    gcfg.seed = 1;
    const auto gr = ga_optimize(sphere, b, gcfg);
    CHECK(gr.best_fitness >= -5e-2);
    CHECK(gr.evaluations == 20 + 18 * 50);
}

TEST_CASE("results are deterministic for a fixed seed") {
    const Bounds b = cube(-5.0, 5.0, 3);
    PsoConfig pcfg;
    pcfg.seed = 77;
    const auto a = pso_optimize(sphere, b, pcfg);
    const auto c = pso_optimize(sphere, b, pcfg);
    REQUIRE(a.best_x.size() == c.best_x.size());
    CHECK(std::memcmp(a.best_x.data(), c.best_x.data(),
                      a.best_x.size() * sizeof(double)) == 0);
    CHECK(a.best_fitness == c.best_fitness);
    CHECK(a.history == c.history);

    GaConfig gcfg;
    gcfg.seed = 77;
    const auto d = ga_optimize(sphere, b, gcfg);
    const auto e = ga_optimize(sphere, b, gcfg);
    CHECK(std::memcmp(d.best_x.data(), e.best_x.data(),
                      d.best_x.size() * sizeof(double)) == 0);
    CHECK(d.history == e.history);

    PsoConfig other = pcfg;
    other.seed = 78;
    CHECK(pso_optimize(sphere, b, other).best_x != a.best_x);
}

TEST_CASE("every evaluated candidate stays inside the box") {
    const Bounds b = cube(-2.0, 3.0, 4);
    InstrumentedFitness inst{&b, sphere};
    PsoConfig pcfg;
    pcfg.generations = 15;
    pso_optimize(inst.fn(), b, pcfg);
    CHECK_FALSE(inst.out_of_bounds);
    CHECK(inst.calls == 20 + 20 * 15);

    InstrumentedFitness inst2{&b, sphere};
    GaConfig gcfg;
    gcfg.generations = 15;
    const auto r = ga_optimize(inst2.fn(), b, gcfg);
    CHECK_FALSE(inst2.out_of_bounds);
    CHECK(inst2.calls == 20 + 18 * 15);
    CHECK(inst2.calls == r.evaluations);
    for (std::size_t d = 0; d < 4; ++d) {
        CHECK(r.best_x[d] >= b.lo[d]);
        CHECK(r.best_x[d] <= b.hi[d]);
    }
}

TEST_CASE("history is monotone and tracks the best fitness") {
    const Bounds b = cube(-5.0, 5.0, 3);
    PsoConfig pcfg;
    pcfg.seed = 3;
    const auto pr = pso_optimize(sphere, b, pcfg);
    REQUIRE(pr.history.size() == std::size_t(pcfg.generations) + 1);
    for (std::size_t i = 1; i < pr.history.size(); ++i) {
        CHECK(pr.history[i] >= pr.history[i - 1]);
    }
    CHECK(pr.best_fitness == pr.history.back());

    GaConfig gcfg;
    gcfg.seed = 3;
    const auto gr = ga_optimize(sphere, b, gcfg);
    REQUIRE(gr.history.size() == std::size_t(gcfg.generations) + 1);
    for (std::size_t i = 1; i < gr.history.size(); ++i) {
        CHECK(gr.history[i] >= gr.history[i - 1]);
    }
    CHECK(gr.best_fitness == gr.history.back());
}

TEST_CASE("selection-only genetic algorithm preserves the elite exactly") {
    const Bounds b = cube(-5.0, 5.0, 3);
    GaConfig cfg;
    cfg.p_crossover = 0.0;
    cfg.p_mutation = 0.0;
    cfg.seed = 11;
    const auto r = ga_optimize(sphere, b, cfg);
    // Without variation operators nothing can improve on the initial best:
    // history must be flat at the initial value, proving the elite is kept.
    for (double h : r.history) CHECK(h == r.history.front());
}

TEST_CASE("single stationary particle keeps its initial position") {
    const Bounds b = cube(-1.0, 1.0, 2);
    PsoConfig cfg;
    cfg.swarm_size = 1;
    cfg.c1 = 0.0;
    cfg.c2 = 0.0;
    cfg.w_max = 1.0;
    cfg.w_min = 1.0;
    cfg.generations = 5;
    cfg.seed = 5;
    // The initial velocity draw is random, so run the no-attraction swarm
    // and check the best never improves past the initial sample's fitness
    // by more than pure momentum drift allows; with zero coefficients and
    // the position recorded at initialization, best_fitness >= f(x0).
    const auto r = pso_optimize(sphere, b, cfg);
    CHECK(r.history.front() <= r.best_fitness);
    CHECK(r.evaluations == 1 + 5);
}

TEST_CASE("constant fitness runs to completion with that constant") {
    const Bounds b = cube(0.0, 1.0, 2);
    const FitnessFn flat = [](const std::vector<double>&) { return 0.37; };
    GaConfig gcfg;
    const auto gr = ga_optimize(flat, b, gcfg);
    CHECK(gr.best_fitness == 0.37);
    for (double h : gr.history) CHECK(h == 0.37);
    for (std::size_t d = 0; d < 2; ++d) {
        CHECK(gr.best_x[d] >= 0.0);
        CHECK(gr.best_x[d] <= 1.0);
    }
    PsoConfig pcfg;
    const auto pr = pso_optimize(flat, b, pcfg);
    CHECK(pr.best_fitness == 0.37);
}

TEST_CASE("configuration validation") {
    const Bounds b = cube(0.0, 1.0, 2);
    Bounds bad = b;
    bad.hi[1] = bad.lo[1];
    CHECK_THROWS_AS(pso_optimize(sphere, bad, PsoConfig{}), std::invalid_argument);
    CHECK_THROWS_AS(ga_optimize(sphere, bad, GaConfig{}), std::invalid_argument);

    GaConfig g;
    g.pop_size = 1;
    CHECK_THROWS_AS(ga_optimize(sphere, b, g), std::invalid_argument);
    g = GaConfig{};
    g.p_mutation = 1.5;
    CHECK_THROWS_AS(ga_optimize(sphere, b, g), std::invalid_argument);

    PsoConfig p;
    p.swarm_size = 0;
    CHECK_THROWS_AS(pso_optimize(sphere, b, p), std::invalid_argument);
    p = PsoConfig{};
    p.w_min = 0.0;
    CHECK_THROWS_AS(pso_optimize(sphere, b, p), std::invalid_argument);
}

TEST_CASE("stabilizer fitness evaluator") {
    MachineParams m;
    LineLoadParams l;
    ExcitationParams e;  // shipped defaults
    GovernorTurbineParams gt;
    OperatingCondition op;
    const FitnessFn f = pss_fitness(m, l, e, gt, op, 10.0);

    // Purity: identical input, identical output.
    const std::vector<double> x{12.0, 0.5, 0.2};
    CHECK(f(x) == f(x));

    // Wrong dimension and unbuildable parameters map to the worst fitness.
    CHECK(f({1.0, 2.0}) == -1.0);
    CHECK(f({10.0, 0.5, 0.0}) == -1.0);

    // Small gain with cancelling lead-lag behaves like a washout-only loop:
    // close to the open-loop objective.
    const StateSpaceModel open = build_open_loop(m, l, e, gt, op);
    const double j_open = objective_j(open);
    CHECK(std::abs(f({5.0, 0.4, 0.4}) - j_open) < 0.02);
}
