#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "dynpr/graph.hpp"
#include "dynpr/solvers.hpp"
#include "dynpr/teleportation.hpp"

namespace dynpr {

struct EulerMethod {
    double h = 0.1; // must satisfy 0 < h < 2 / (1 + alpha)
};

struct Rk45Method {
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
};

enum class InitialStateKind { uniform, teleport0, static_pr };

struct EvolutionConfig {
    double alpha = 0.85;
    double t_max = 0.0;
    std::variant<EulerMethod, Rk45Method> method = Rk45Method{};
    InitialStateKind initial = InitialStateKind::teleport0;
    bool correction = true;
    std::vector<double> output_grid; // strictly increasing, within [0, t_max]

    // Explicit x(0), overriding `initial` when set (state carry across runs).
    std::optional<std::vector<double>> initial_override;
};

struct Trajectory {
    std::size_t n = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> states;  // one length-n vector per time
    std::vector<double> sum_drift;            // |1 - sum(x)| per sample

    struct Stats {
        std::size_t steps = 0;
        std::size_t rejected_steps = 0;
        std::size_t derivative_evals = 0;
    } stats;
};

/// Right side (1-alpha) v(t) - (gamma I - alpha P) x with
/// gamma = (1-alpha) e^T v(t) + alpha e^T x when correction is on, gamma = 1
/// when off. Both forms agree when sums are exactly 1; the corrected form
/// keeps e^T x' = 0 even when they are not.
std::vector<double> derivative(double t, const std::vector<double>& x,
                               const TeleportationSchedule& schedule,
                               const TransitionOperator& P, double alpha, bool correction);

/// x(0) per the configured choice: uniform e/n, v(0), or the static PageRank
/// solution for v(0) (solved with solve_cfg).
std::vector<double> initial_state(InitialStateKind choice, const TransitionOperator& P,
                                  const TeleportationSchedule& schedule, double alpha,
                                  const SolveConfig& solve_cfg = {});

/// Fixed-step forward Euler x(t+h) = x(t) + h x'(t). With h = 1, correction
/// off and constant v this reproduces the Richardson iterates exactly. When
/// the schedule carries smoothing, vbar advances by the closed implicit step
/// vbar <- (vbar + h theta v(t+h)) / (1 + h theta) after each state update.
/// Grid samples between step knots are linearly interpolated.
Trajectory evolve_euler(const TransitionOperator& P, const TeleportationSchedule& schedule,
                        const EvolutionConfig& cfg);

/// Adaptive Dormand-Prince 5(4) with FSAL, 4th-order dense output onto the
/// requested grid, and segment restarts at every teleportation jump so no
/// step straddles a discontinuity of v(t). Smoothing augments the state with
/// vbar and evolves both jointly.
Trajectory evolve_rk(const TransitionOperator& P, const TeleportationSchedule& schedule,
                     const EvolutionConfig& cfg);

/// Dispatch on cfg.method.
Trajectory evolve(const TransitionOperator& P, const TeleportationSchedule& schedule,
                  const EvolutionConfig& cfg);

/// Uniform grid of count+1 points covering [0, t_max].
std::vector<double> uniform_grid(double t_max, std::size_t count);

} // namespace dynpr
