#include "dynpr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_set>

#include "dynpr/errors.hpp"
#include "dynpr/integrate.hpp"

namespace dynpr {

std::uint64_t SplitMix64::next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SplitMix64::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t SplitMix64::next_below(std::uint64_t bound) {
    if (bound == 0) throw ConfigError("next_below needs a positive bound");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
    std::uint64_t draw;
    do {
        draw = next_u64();
    } while (draw > limit);
    return draw % bound;
}

double SplitMix64::next_normal() {
    // Box-Muller; both uniforms are consumed even though only one variate is
    // returned, keeping the stream position independent of the caller.
    double u1 = next_double();
    const double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

AdjacencyStructure synth_graph(std::size_t node_count, std::size_t edge_count,
                               std::uint64_t seed) {
    if (node_count == 0) throw ConfigError("graph needs at least one node");
    const std::size_t max_edges = node_count * (node_count - 1);
    if (edge_count > max_edges)
        throw ConfigError("cannot place " + std::to_string(edge_count) +
                          " distinct non-loop edges on " + std::to_string(node_count) + " nodes");

    SplitMix64 rng(seed);
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    edges.reserve(edge_count);
    while (edges.size() < edge_count) {
        const auto src = static_cast<std::uint32_t>(rng.next_below(node_count));
        const auto dst = static_cast<std::uint32_t>(rng.next_below(node_count));
        if (src == dst) continue;
        const std::uint64_t key = (static_cast<std::uint64_t>(src) << 32) | dst;
        if (!seen.insert(key).second) continue;
        edges.emplace_back(src, dst);
    }
    return make_adjacency(std::move(edges), node_count);
}

ActivityMatrix synth_activity(std::size_t node_count, std::size_t epoch_count,
                              std::uint64_t seed) {
    if (node_count == 0 || epoch_count == 0)
        throw ConfigError("activity needs positive node and epoch counts");

    SplitMix64 rng(seed);
    ActivityMatrix activity;
    activity.n = node_count;
    activity.k = epoch_count;
    activity.columns.assign(epoch_count, std::vector<double>(node_count, 0.0));
    for (std::size_t j = 0; j < epoch_count; ++j)
        for (std::size_t i = 0; i < node_count; ++i) {
            const double u = rng.next_double();
            activity.columns[j][i] = std::round(100.0 * u * u);
        }
    return activity;
}

DiffusionFixture synth_diffusion(const TransitionOperator& P, std::size_t epoch_count,
                                 double alpha, double time_scale, double noise_sigma,
                                 double scale, std::uint64_t seed) {
    if (epoch_count < 2) throw ConfigError("diffusion fixture needs at least two epochs");
    if (!(time_scale > 0.0)) throw ConfigError("time-scale must be positive");
    if (noise_sigma < 0.0) throw ConfigError("noise sigma must be nonnegative");
    if (!(scale > 0.0)) throw ConfigError("scale must be positive");

    const std::size_t n = P.size();
    SplitMix64 rng(seed);

    DiffusionFixture fixture;
    fixture.activity.n = n;
    fixture.activity.k = epoch_count;
    fixture.activity.columns.assign(epoch_count, std::vector<double>(n, 0.0));
    fixture.scores.assign(epoch_count, std::vector<double>(n, 0.0));

    auto& p1 = fixture.activity.columns[0];
    for (std::size_t i = 0; i < n; ++i)
        p1[i] = std::round(1000.0 * (0.5 + 1.5 * rng.next_double()));

    // Evolve one epoch at a time, carrying the state, so epoch j+1's activity
    // can read x(j s): activity follows the transient scores by construction,
    // which is the Granger-style causal direction the prediction harness must
    // detect. Each epoch sees a constant teleportation (its own column), so a
    // per-epoch run with the carried state equals one continuous evolution.
    std::optional<std::vector<double>> carried;
    for (std::size_t j = 0; j < epoch_count; ++j) {
        ActivityMatrix single;
        single.n = n;
        single.k = 1;
        single.columns = {fixture.activity.columns[j]};
        auto schedule =
            TeleportationSchedule::constant(normalize_activity(single).front(), time_scale);

        EvolutionConfig cfg;
        cfg.alpha = alpha;
        cfg.t_max = time_scale;
        cfg.method = Rk45Method{1e-8, 1e-11};
        cfg.initial = InitialStateKind::static_pr;
        cfg.initial_override = carried;
        cfg.output_grid = {0.0, time_scale};
        Trajectory traj = evolve_rk(P, schedule, cfg);
        carried = traj.states.back();
        fixture.scores[j] = *carried;

        if (j + 1 < epoch_count) {
            auto& next = fixture.activity.columns[j + 1];
            for (std::size_t i = 0; i < n; ++i) {
                const double noisy = scale * static_cast<double>(n) * (*carried)[i] *
                                     (1.0 + noise_sigma * rng.next_normal());
                next[i] = std::max(1.0, std::round(noisy));
            }
        }
    }
    return fixture;
}

} // namespace dynpr
