#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dynpr/integrate.hpp"

namespace dynpr {

/// x(t) by linear interpolation between bracketing grid samples.
/// Throws ConfigError when t lies outside [times.front(), times.back()].
std::vector<double> transient(const Trajectory& traj, double t);

/// Composite trapezoid of x(t) over the whole grid. Needs >= 2 samples.
std::vector<double> cumulative(const Trajectory& traj);

/// Trapezoid of (x(t) - c / T)^2 where c is the cumulative vector and T the
/// grid span; the per-entry time-mean is subtracted before squaring.
std::vector<double> variance(const Trajectory& traj);

/// Per-entry max - min over grid samples with time inside [w_lo, w_hi].
/// Throws ConfigError when the window misses the grid entirely or is inverted.
std::vector<double> difference(const Trajectory& traj, double w_lo, double w_hi);

/// Window skipping the initial convergence region: [0.2 t_last, t_last].
std::pair<double, double> default_difference_window(const Trajectory& traj);

/// Intersection similarity profile isim_1..isim_k: isim_m is the mean over
/// j <= m of |top_j(x) symdiff top_j(y)| / (2j). 0 means identical prefixes,
/// 1 means disjoint at every level. Ties order by ascending node index.
/// Throws ConfigError when k > n or sizes differ.
std::vector<double> isim(const std::vector<double>& x, const std::vector<double>& y,
                         std::size_t k);

/// Node ids sorted by descending score, ties by ascending id, first k kept.
std::vector<std::uint32_t> top_k(const std::vector<double>& scores, std::size_t k);

} // namespace dynpr
