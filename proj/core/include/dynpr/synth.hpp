#pragma once

#include <cstdint>
#include <vector>

#include "dynpr/graph.hpp"
#include "dynpr/teleportation.hpp"

namespace dynpr {

/// Deterministic cross-platform RNG (splitmix64 core). std:: distributions are
/// not reproducible across standard library implementations, so fixtures roll
/// their own uniforms and normals on top of this stream.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 random bits.
    double next_double();

    /// Uniform in {0, 1, ..., bound-1} via rejection (unbiased). bound > 0.
    std::uint64_t next_below(std::uint64_t bound);

    /// Standard normal via Box-Muller (one value per call, no caching).
    double next_normal();

private:
    std::uint64_t state_;
};

/// Uniform random simple digraph: edge_count distinct non-loop edges over
/// node_count nodes. Throws ConfigError when more edges are requested than
/// exist.
AdjacencyStructure synth_graph(std::size_t node_count, std::size_t edge_count,
                               std::uint64_t seed);

/// Random activity counts: each (node, epoch) gets round(base * u^2 * 100)
/// with u uniform, so columns are nonnegative with a heavy-ish tail.
ActivityMatrix synth_activity(std::size_t node_count, std::size_t epoch_count,
                              std::uint64_t seed);

/// Activity generated so that transient scores precede it: epoch 1 is random
/// positive, then p_{j+1}(i) = max(1, round(scale * n * x_i(j s) * (1 + noise)))
/// where x is the trajectory driven by the normalized activity itself. The
/// score series x(j s) is returned alongside so callers can verify alignment.
struct DiffusionFixture {
    ActivityMatrix activity;
    std::vector<std::vector<double>> scores; // k columns: x at each epoch end
};

DiffusionFixture synth_diffusion(const TransitionOperator& P, std::size_t epoch_count,
                                 double alpha, double time_scale, double noise_sigma,
                                 double scale, std::uint64_t seed);

} // namespace dynpr
