#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <dynpr/errors.hpp>
#include <dynpr/graph.hpp>
#include <dynpr/integrate.hpp>
#include <dynpr/solvers.hpp>
#include <dynpr/synth.hpp>
#include <dynpr/teleportation.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dynpr;

namespace {

std::vector<double> uniform_vec(std::size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

// Dense derivative oracle: (1-a) v - (g I - a P) x with the mass correction
// g = (1-a) sum(v) + a sum(x).
std::vector<double> dense_derivative(const oracle::Mat& P, double alpha,
                                     const std::vector<double>& v,
                                     const std::vector<double>& x, bool correction) {
    double sv = 0.0, sx = 0.0;
    for (double e : v) sv += e;
    for (double e : x) sx += e;
    const double g = correction ? (1.0 - alpha) * sv + alpha * sx : 1.0;
    std::vector<double> px = oracle::matvec(P, x);
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        d[i] = (1.0 - alpha) * v[i] - g * x[i] + alpha * px[i];
    return d;
}

}  // namespace

TEST_CASE("derivative vanishes at the static fixed point") {
    const auto P = fixtures::four_node_operator();
    const std::vector<double> v = uniform_vec(4);
    const auto schedule = TeleportationSchedule::constant(v, 1.0);
    const double alpha = 0.85;
    const auto x = static_pagerank(P, SolveConfig{alpha, 1e-14, 100000}, v);

    std::vector<double> d = derivative(0.0, x, schedule, P, alpha, true);
    for (double e : d) CHECK(std::abs(e) < 1e-12);

    d = derivative(0.0, x, schedule, P, alpha, false);
    for (double e : d) CHECK(std::abs(e) < 1e-12);
}

TEST_CASE("correction term only reacts to mass drift") {
    const auto P = fixtures::four_node_operator();
    const auto dense = oracle::dense_transition(4, fixtures::four_node_edge_pairs());
    const std::vector<double> v{0.4, 0.3, 0.2, 0.1};
    const auto schedule = TeleportationSchedule::constant(v, 10.0);
    const double alpha = 0.85;

    SUBCASE("on a unit-mass state both forms agree") {
        const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
        const auto on = derivative(2.5, x, schedule, P, alpha, true);
        const auto off = derivative(2.5, x, schedule, P, alpha, false);
        for (std::size_t i = 0; i < 4; ++i) CHECK(on[i] == doctest::Approx(off[i]).epsilon(1e-14));
        const auto expect = dense_derivative(dense, alpha, v, x, false);
        for (std::size_t i = 0; i < 4; ++i) CHECK(on[i] == doctest::Approx(expect[i]).epsilon(1e-13));
    }

    SUBCASE("with correction the mass error decays at rate gamma") {
        std::vector<double> x{0.1, 0.2, 0.3, 0.4};
        for (double& e : x) e *= 1.3;
        const auto d = derivative(0.0, x, schedule, P, alpha, true);
        double total = 0.0;
        for (double e : d) total += e;
        // Column-stochastic P gives d/dt sum(x) = gamma (1 - sum(x)).
        const double gamma = (1.0 - alpha) + alpha * 1.3;
        CHECK(total == doctest::Approx(gamma * (1.0 - 1.3)).epsilon(1e-13));

        const auto expect = dense_derivative(dense, alpha, v, x, true);
        for (std::size_t i = 0; i < 4; ++i) CHECK(d[i] == doctest::Approx(expect[i]).epsilon(1e-13));

        // Without the correction the same inflated state leaks mass.
        const auto raw = derivative(0.0, x, schedule, P, alpha, false);
        total = 0.0;
        for (double e : raw) total += e;
        CHECK(std::abs(total) > 1e-3);
    }
}

TEST_CASE("initial state choices") {
    const auto P = fixtures::four_node_operator();
    const std::vector<double> a{1.0, 0.0, 0.0, 0.0};
    const std::vector<double> b{0.0, 0.0, 0.0, 1.0};
    const auto schedule = TeleportationSchedule::piecewise({a, b}, 1.0, 2.0);

    SUBCASE("uniform") {
        const auto x = initial_state(InitialStateKind::uniform, P, schedule, 0.85);
        for (double e : x) CHECK(e == doctest::Approx(0.25).epsilon(1e-15));
    }
    SUBCASE("teleport0 picks v(0)") {
        const auto x = initial_state(InitialStateKind::teleport0, P, schedule, 0.85);
        for (std::size_t i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(a[i]).epsilon(1e-15));
    }
    SUBCASE("static_pr with alpha 0 collapses to v(0)") {
        const auto x = initial_state(InitialStateKind::static_pr, P, schedule, 0.0);
        for (std::size_t i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(a[i]).epsilon(1e-12));
    }
    SUBCASE("static_pr solves against v(0)") {
        const auto x = initial_state(InitialStateKind::static_pr, P, schedule, 0.85);
        const auto dense = oracle::dense_transition(4, fixtures::four_node_edge_pairs());
        const auto expect = oracle::exact_pagerank(dense, 0.85, a);
        CHECK(oracle::linf_diff(x, expect) < 1e-9);
    }
}

TEST_CASE("unit Euler steps reproduce the power method") {
    // With h = 1 and the correction off, each Euler step is exactly
    // x <- a P x + (1-a) v, the classic power-method update.
    const auto P = fixtures::four_node_operator();
    const auto dense = oracle::dense_transition(4, fixtures::four_node_edge_pairs());
    const double alpha = 0.85;
    const std::vector<double> v{0.1, 0.2, 0.3, 0.4};
    const auto schedule = TeleportationSchedule::constant(v, 100.0);

    const std::size_t steps = 100;
    std::vector<double> grid(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) grid[i] = static_cast<double>(i);

    EvolutionConfig cfg;
    cfg.alpha = alpha;
    cfg.t_max = static_cast<double>(steps);
    cfg.method = EulerMethod{1.0};
    cfg.initial = InitialStateKind::teleport0;
    cfg.correction = false;
    cfg.output_grid = grid;

    const Trajectory traj = evolve(P, schedule, cfg);
    REQUIRE(traj.times.size() == steps + 1);

    std::vector<double> iterate = v;
    CHECK(oracle::linf_diff(traj.states[0], iterate) < 1e-15);
    for (std::size_t k = 1; k <= steps; ++k) {
        iterate = oracle::power_step(dense, alpha, v, iterate);
        CHECK(oracle::linf_diff(traj.states[k], iterate) < 1e-14);
    }

    const auto exact = oracle::exact_pagerank(dense, alpha, v);
    const double bound = 2.0 * std::pow(alpha, static_cast<double>(steps));
    CHECK(oracle::l1_diff(traj.states.back(), exact) < bound);
}

TEST_CASE("Euler step from the fixed point stays put") {
    const auto P = fixtures::four_node_operator();
    const std::vector<double> v = uniform_vec(4);
    const auto schedule = TeleportationSchedule::constant(v, 1.0);
    const auto x0 = static_pagerank(P, SolveConfig{0.85, 1e-14, 100000}, v);

    EvolutionConfig cfg;
    cfg.t_max = 1.0;
    cfg.method = EulerMethod{1.0};
    cfg.output_grid = {1.0};
    cfg.initial_override = x0;

    const Trajectory traj = evolve(P, schedule, cfg);
    CHECK(oracle::linf_diff(traj.states.back(), x0) < 1e-8);
}

TEST_CASE("Euler rejects steps at or beyond the stability bound") {
    const auto P = fixtures::four_node_operator();
    const auto schedule = TeleportationSchedule::constant(uniform_vec(4), 10.0);

    EvolutionConfig cfg;
    cfg.alpha = 0.85;
    cfg.t_max = 10.0;
    cfg.output_grid = {10.0};

    cfg.method = EulerMethod{2.0 / 1.85};
    CHECK_THROWS_AS(evolve(P, schedule, cfg), ConfigError);
    cfg.method = EulerMethod{1.2};
    CHECK_THROWS_AS(evolve(P, schedule, cfg), ConfigError);
    cfg.method = EulerMethod{0.0};
    CHECK_THROWS_AS(evolve(P, schedule, cfg), ConfigError);
    cfg.method = EulerMethod{1.0};
    CHECK_NOTHROW(evolve(P, schedule, cfg));
}

TEST_CASE("piecewise epochs converge to per-epoch static solutions") {
    // Long epochs (s = 100) with h = 1 give the solution time to settle on
    // the static PageRank of whichever column is active.
    const auto P = fixtures::four_node_operator();
    const auto dense = oracle::dense_transition(4, fixtures::four_node_edge_pairs());
    const double alpha = 0.85;
    const std::vector<double> a{0.7, 0.1, 0.1, 0.1};
    const std::vector<double> b{0.05, 0.05, 0.45, 0.45};
    const auto schedule = TeleportationSchedule::piecewise({a, b}, 100.0, 200.0);

    EvolutionConfig cfg;
    cfg.alpha = alpha;
    cfg.t_max = 200.0;
    cfg.method = EulerMethod{1.0};
    cfg.initial = InitialStateKind::teleport0;
    cfg.output_grid = {100.0, 200.0};

    const Trajectory traj = evolve(P, schedule, cfg);
    const double bound = 2.0 * std::pow(alpha, 100.0) + 1e-10;
    CHECK(oracle::l1_diff(traj.states[0], oracle::exact_pagerank(dense, alpha, a)) < bound);
    CHECK(oracle::l1_diff(traj.states[1], oracle::exact_pagerank(dense, alpha, b)) < bound);
}

TEST_CASE("rk45 relaxes a constant-teleportation system to static PageRank") {
    const auto graph = synth_graph(40, 160, 7);
    const auto P = build_transition(graph);
    const auto dense = oracle::dense_transition(40, graph.edges);
    const std::vector<double> v = uniform_vec(40);
    const auto schedule = TeleportationSchedule::constant(v, 50.0);
    const auto exact = oracle::exact_pagerank(dense, 0.85, v);

    EvolutionConfig cfg;
    cfg.t_max = 50.0;
    cfg.method = Rk45Method{1e-9, 1e-12};
    cfg.initial = InitialStateKind::uniform;
    cfg.output_grid = {5.0, 50.0};

    const Trajectory traj = evolve(P, schedule, cfg);
    const double gap_early = oracle::l1_diff(traj.states[0], exact);
    const double gap_late = oracle::l1_diff(traj.states[1], exact);
    CHECK(gap_late < 1e-6);
    CHECK(gap_late < gap_early);
}

TEST_CASE("starting at the static solution keeps the trajectory flat") {
    const auto P = fixtures::four_node_operator();
    const std::vector<double> v{0.4, 0.3, 0.2, 0.1};
    const auto schedule = TeleportationSchedule::constant(v, 30.0);
    const auto x0 = static_pagerank(P, SolveConfig{0.85, 1e-13, 100000}, v);

    EvolutionConfig cfg;
    cfg.t_max = 30.0;
    cfg.initial = InitialStateKind::static_pr;
    cfg.output_grid = uniform_grid(30.0, 60);

    const Trajectory traj = evolve(P, schedule, cfg);
    for (const auto& x : traj.states) CHECK(oracle::linf_diff(x, x0) < 1e-6);
}

TEST_CASE("Euler and rk45 agree on an oscillatory run") {
    const auto P = fixtures::four_node_operator();
    const auto schedule = TeleportationSchedule::oscillatory(fixtures::unit_columns(4), 20.0);
    const auto grid = uniform_grid(20.0, 40);

    EvolutionConfig euler_cfg;
    euler_cfg.t_max = 20.0;
    euler_cfg.method = EulerMethod{1e-3};
    euler_cfg.initial = InitialStateKind::static_pr;
    euler_cfg.output_grid = grid;

    EvolutionConfig rk_cfg = euler_cfg;
    rk_cfg.method = Rk45Method{1e-10, 1e-13};

    const Trajectory coarse = evolve(P, schedule, euler_cfg);
    const Trajectory fine = evolve(P, schedule, rk_cfg);
    REQUIRE(coarse.times.size() == fine.times.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        CHECK(oracle::linf_diff(coarse.states[k], fine.states[k]) < 1e-4);
    CHECK(fine.stats.rejected_steps < fine.stats.steps);
}

TEST_CASE("fast smoothing tracks the unsmoothed trajectory") {
    const auto P = fixtures::four_node_operator();
    auto plain = TeleportationSchedule::oscillatory(fixtures::unit_columns(4), 20.0);
    auto smoothed = TeleportationSchedule::oscillatory(fixtures::unit_columns(4), 20.0);
    smoothed.set_smoothing(10.0);
    const auto grid = uniform_grid(20.0, 100);

    EvolutionConfig cfg;
    cfg.t_max = 20.0;
    cfg.initial = InitialStateKind::static_pr;
    cfg.output_grid = grid;

    const Trajectory base = evolve(P, plain, cfg);
    const Trajectory lag = evolve(P, smoothed, cfg);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid[k] < 4.0) continue;
        CHECK(oracle::linf_diff(base.states[k], lag.states[k]) < 5e-3);
    }
}

TEST_CASE("Euler smoothing update blends old and new teleportation") {
    // One directed edge 0 -> 1 plus a dangling node 1; columns switch from
    // e0 to e1 after one unit of time. With theta = 1 and h = 1 the closed
    // update gives vbar = (e0 + e1) / 2 after the first step, so the second
    // step sees the blend rather than the raw post-jump column.
    const auto P = build_transition(make_adjacency({{0, 1}}, 2));
    const std::vector<double> a{1.0, 0.0};
    const std::vector<double> b{0.0, 1.0};
    auto schedule = TeleportationSchedule::piecewise({a, b}, 1.0, 2.0);
    schedule.set_smoothing(1.0);

    EvolutionConfig cfg;
    cfg.alpha = 0.5;
    cfg.t_max = 2.0;
    cfg.method = EulerMethod{1.0};
    cfg.initial = InitialStateKind::teleport0;
    cfg.correction = false;
    cfg.output_grid = {1.0, 2.0};

    const Trajectory traj = evolve(P, schedule, cfg);

    // Step 1: x = e0, P x = e1, d = 0.5 a - x + 0.5 P x = (-0.5, 0.5).
    CHECK(traj.states[0][0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(traj.states[0][1] == doctest::Approx(0.5).epsilon(1e-15));

    // Step 2 with vbar = (0.5, 0.5): d = (-0.125, 0.125) so x = (0.375, 0.625).
    // An unsmoothed run would see v = e1 and land at (0.125, 0.875) instead.
    CHECK(traj.states[1][0] == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(traj.states[1][1] == doctest::Approx(0.625).epsilon(1e-12));
}

TEST_CASE("trajectories conserve probability mass") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const auto graph = synth_graph(30, 120, seed);
        const auto P = build_transition(graph);

        std::vector<std::vector<double>> cols;
        SplitMix64 rng(seed * 97 + 1);
        for (int j = 0; j < 3; ++j) {
            std::vector<double> c(30);
            double total = 0.0;
            for (double& e : c) {
                e = rng.next_double();
                total += e;
            }
            for (double& e : c) e /= total;
            cols.push_back(std::move(c));
        }

        const std::vector<TeleportationSchedule> schedules{
            TeleportationSchedule::constant(cols[0], 12.0),
            TeleportationSchedule::piecewise(cols, 4.0, 12.0),
            TeleportationSchedule::oscillatory(cols, 12.0),
        };
        for (const auto& schedule : schedules) {
            for (int use_euler = 0; use_euler < 2; ++use_euler) {
                EvolutionConfig cfg;
                cfg.t_max = 12.0;
                if (use_euler)
                    cfg.method = EulerMethod{0.3};
                else
                    cfg.method = Rk45Method{1e-8, 1e-11};
                cfg.output_grid = uniform_grid(12.0, 24);

                const Trajectory traj = evolve(P, schedule, cfg);
                for (double drift : traj.sum_drift) CHECK(drift < 1e-8);
                for (const auto& x : traj.states) {
                    double total = 0.0, low = 0.0;
                    for (double e : x) {
                        total += e;
                        low = std::min(low, e);
                    }
                    CHECK(std::abs(total - 1.0) < 1e-8);
                    CHECK(low > -1e-9);
                }
            }
        }
    }
}

TEST_CASE("uniform grids and explicit overrides") {
    SUBCASE("uniform_grid spans [0, t_max] inclusively") {
        const auto grid = uniform_grid(10.0, 4);
        REQUIRE(grid.size() == 5);
        CHECK(grid.front() == 0.0);
        CHECK(grid[2] == doctest::Approx(5.0).epsilon(1e-15));
        CHECK(grid.back() == 10.0);
    }
    SUBCASE("initial_override is used verbatim") {
        const auto P = fixtures::four_node_operator();
        const auto schedule = TeleportationSchedule::constant(uniform_vec(4), 1.0);
        EvolutionConfig cfg;
        cfg.t_max = 1.0;
        cfg.output_grid = {0.0, 1.0};
        cfg.initial_override = std::vector<double>{0.7, 0.1, 0.1, 0.1};
        const Trajectory traj = evolve(P, schedule, cfg);
        CHECK(traj.states[0][0] == doctest::Approx(0.7).epsilon(1e-15));
        CHECK(traj.states[0][3] == doctest::Approx(0.1).epsilon(1e-15));
    }
    SUBCASE("grids outside the domain are rejected") {
        const auto P = fixtures::four_node_operator();
        const auto schedule = TeleportationSchedule::constant(uniform_vec(4), 5.0);
        EvolutionConfig cfg;
        cfg.t_max = 5.0;
        cfg.output_grid = {2.0, 6.0};
        CHECK_THROWS_AS(evolve(P, schedule, cfg), ConfigError);
        cfg.output_grid = {3.0, 2.0};
        CHECK_THROWS_AS(evolve(P, schedule, cfg), ConfigError);
        cfg.output_grid = {-1.0, 2.0};
        CHECK_THROWS_AS(evolve(P, schedule, cfg), ConfigError);
    }
}
