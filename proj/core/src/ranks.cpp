#include "dynpr/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_set>

#include "dynpr/errors.hpp"

namespace dynpr {

namespace {

void require_samples(const Trajectory& traj, std::size_t min_count, const char* what) {
    if (traj.times.size() < min_count)
        throw ConfigError(std::string(what) + " needs at least " + std::to_string(min_count) +
                          " trajectory samples, got " + std::to_string(traj.times.size()));
    if (traj.states.size() != traj.times.size())
        throw ConfigError("trajectory times/states misaligned");
}

} // namespace

std::vector<double> transient(const Trajectory& traj, double t) {
    require_samples(traj, 1, "transient rank");
    const auto& times = traj.times;
    if (t < times.front() || t > times.back())
        throw ConfigError("transient time " + std::to_string(t) + " outside the sampled range [" +
                          std::to_string(times.front()) + ", " + std::to_string(times.back()) +
                          "]");

    const auto upper = std::lower_bound(times.begin(), times.end(), t);
    if (upper == times.begin()) return traj.states.front();
    const std::size_t hi = static_cast<std::size_t>(upper - times.begin());
    if (hi == times.size()) return traj.states.back();
    if (times[hi] == t) return traj.states[hi];

    const std::size_t lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    std::vector<double> out(traj.n);
    for (std::size_t i = 0; i < traj.n; ++i)
        out[i] = traj.states[lo][i] + w * (traj.states[hi][i] - traj.states[lo][i]);
    return out;
}

std::vector<double> cumulative(const Trajectory& traj) {
    require_samples(traj, 2, "cumulative rank");
    std::vector<double> acc(traj.n, 0.0);
    for (std::size_t s = 1; s < traj.times.size(); ++s) {
        const double half_dt = 0.5 * (traj.times[s] - traj.times[s - 1]);
        const auto& a = traj.states[s - 1];
        const auto& b = traj.states[s];
        for (std::size_t i = 0; i < traj.n; ++i) acc[i] += half_dt * (a[i] + b[i]);
    }
    return acc;
}

std::vector<double> variance(const Trajectory& traj) {
    require_samples(traj, 2, "variance rank");
    const double span = traj.times.back() - traj.times.front();
    if (!(span > 0.0)) throw ConfigError("variance rank needs a positive time span");

    std::vector<double> mean = cumulative(traj);
    for (double& m : mean) m /= span;

    std::vector<double> acc(traj.n, 0.0);
    for (std::size_t s = 1; s < traj.times.size(); ++s) {
        const double half_dt = 0.5 * (traj.times[s] - traj.times[s - 1]);
        const auto& a = traj.states[s - 1];
        const auto& b = traj.states[s];
        for (std::size_t i = 0; i < traj.n; ++i) {
            const double da = a[i] - mean[i];
            const double db = b[i] - mean[i];
            acc[i] += half_dt * (da * da + db * db);
        }
    }
    return acc;
}

std::vector<double> difference(const Trajectory& traj, double w_lo, double w_hi) {
    require_samples(traj, 1, "difference rank");
    if (!(w_lo <= w_hi)) throw ConfigError("difference window is inverted");
    if (w_lo < traj.times.front() - 1e-12 || w_hi > traj.times.back() + 1e-12)
        throw ConfigError("difference window [" + std::to_string(w_lo) + ", " +
                          std::to_string(w_hi) + "] leaves the sampled range");

    std::vector<double> lo(traj.n, std::numeric_limits<double>::infinity());
    std::vector<double> hi(traj.n, -std::numeric_limits<double>::infinity());
    std::size_t inside = 0;
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        const double t = traj.times[s];
        if (t < w_lo || t > w_hi) continue;
        ++inside;
        const auto& x = traj.states[s];
        for (std::size_t i = 0; i < traj.n; ++i) {
            lo[i] = std::min(lo[i], x[i]);
            hi[i] = std::max(hi[i], x[i]);
        }
    }
    if (inside == 0) throw ConfigError("difference window contains no grid samples");

    std::vector<double> out(traj.n);
    for (std::size_t i = 0; i < traj.n; ++i) out[i] = hi[i] - lo[i];
    return out;
}

std::pair<double, double> default_difference_window(const Trajectory& traj) {
    require_samples(traj, 1, "difference window");
    return {0.2 * traj.times.back(), traj.times.back()};
}

std::vector<std::uint32_t> top_k(const std::vector<double>& scores, std::size_t k) {
    if (k > scores.size())
        throw ConfigError("top-k of " + std::to_string(k) + " exceeds " +
                          std::to_string(scores.size()) + " nodes");

    std::vector<std::uint32_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    order.resize(k);
    return order;
}

std::vector<double> isim(const std::vector<double>& x, const std::vector<double>& y,
                         std::size_t k) {
    if (x.size() != y.size()) throw ConfigError("isim inputs differ in length");
    if (k > x.size())
        throw ConfigError("isim depth " + std::to_string(k) + " exceeds " +
                          std::to_string(x.size()) + " nodes");

    const auto order_x = top_k(x, k);
    const auto order_y = top_k(y, k);

    // Grow both top-j sets one rank at a time; the symmetric-difference size
    // changes only through elements present in exactly one set so far.
    std::unordered_set<std::uint32_t> only_x, only_y;
    std::vector<double> profile(k);
    double level_sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const std::uint32_t a = order_x[j];
        if (only_y.erase(a) == 0) only_x.insert(a);
        const std::uint32_t b = order_y[j];
        if (only_x.erase(b) == 0) only_y.insert(b);

        const double sym_diff = static_cast<double>(only_x.size() + only_y.size());
        level_sum += sym_diff / (2.0 * static_cast<double>(j + 1));
        profile[j] = level_sum / static_cast<double>(j + 1);
    }
    return profile;
}

} // namespace dynpr
