#pragma once

#include <istream>
#include <optional>
#include <vector>

namespace dynpr {

/// Raw per-epoch activity counts; column j holds the counts p_{j+1}.
struct ActivityMatrix {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::vector<double>> columns; // k columns of length n, entries >= 0
};

/// Parse "node,epoch,count" CSV (header required, epochs zero-based, missing
/// pairs are zero). n is max(n_min, 1 + max node id). Throws ParseError with
/// a line number on malformed rows or negative counts.
ActivityMatrix load_activity_csv(std::istream& in, std::size_t n_min = 0);

/// Scale each column to sum 1; all-zero columns become uniform.
std::vector<std::vector<double>> normalize_activity(const ActivityMatrix& raw);

/// Time-dependent teleportation v(t) on [0, t_max]:
///   constant     v(t) = v
///   piecewise    v(t) = column floor(t/s), clamped to the last column
///   oscillatory  v(t) = (1/k) sum_j v_j (cos(t + (j-1) 2pi/k) + 1), k >= 2
/// Optionally carries a smoothing rate theta > 0; smoothing itself lives in
/// the integrator state, not here.
class TeleportationSchedule {
public:
    enum class Kind { constant, piecewise, oscillatory };

    static TeleportationSchedule constant(std::vector<double> v, double t_max);
    static TeleportationSchedule piecewise(std::vector<std::vector<double>> columns,
                                           double time_scale, double t_max);
    static TeleportationSchedule oscillatory(std::vector<std::vector<double>> columns,
                                             double t_max);

    Kind kind() const noexcept { return kind_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t epochs() const noexcept { return columns_.size(); }
    double t_max() const noexcept { return t_max_; }
    double time_scale() const noexcept { return time_scale_; }
    const std::vector<std::vector<double>>& columns() const noexcept { return columns_; }

    /// Throws ConfigError unless theta > 0.
    void set_smoothing(double theta);
    std::optional<double> smoothing() const noexcept { return theta_; }

    /// v(t). Throws ConfigError outside [0, t_max].
    std::vector<double> eval(double t) const;
    void eval(double t, std::vector<double>& out) const;

    /// Jump times j*s inside (0, t_max), ascending; empty unless piecewise.
    std::vector<double> breakpoints() const;

private:
    TeleportationSchedule() = default;

    Kind kind_ = Kind::constant;
    std::size_t n_ = 0;
    double t_max_ = 0.0;
    double time_scale_ = 1.0;
    std::optional<double> theta_;
    std::vector<std::vector<double>> columns_;
    std::vector<double> phases_; // (j-1) 2pi/k for the oscillatory kind
};

/// Standalone oscillatory evaluation used by the schedule and tests.
/// Throws ConfigError if k < 2 or columns are not distributions.
std::vector<double> eval_oscillatory(const std::vector<std::vector<double>>& columns, double t);

/// theta (v(t) - vbar): right side of the smoothing ODE.
/// Throws ConfigError if the schedule has no smoothing set.
std::vector<double> smoothed_derivative(const std::vector<double>& vbar, double t,
                                        const TeleportationSchedule& schedule);

} // namespace dynpr
