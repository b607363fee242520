#include "dynpr/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dynpr/errors.hpp"

namespace dynpr {

namespace {

double sum_of(const std::vector<double>& v, std::size_t count) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += v[i];
    return s;
}

bool all_finite(const std::vector<double>& v) {
    for (double e : v)
        if (!std::isfinite(e)) return false;
    return true;
}

/// Right side of the (possibly vbar-augmented) system. When a segment of a
/// piecewise or constant schedule is integrated, v(t) is constant on it, so
/// the caller pins one evaluated column instead of re-evaluating per stage.
class OdeSystem {
public:
    OdeSystem(const TransitionOperator& P, const TeleportationSchedule& schedule, double alpha,
              bool correction)
        : P_(P), schedule_(schedule), alpha_(alpha), correction_(correction),
          smoothing_(schedule.smoothing().has_value()),
          theta_(schedule.smoothing().value_or(0.0)), n_(P.size()) {}

    std::size_t n() const { return n_; }
    std::size_t dim() const { return smoothing_ ? 2 * n_ : n_; }
    bool smoothing() const { return smoothing_; }
    std::size_t evals() const { return evals_; }

    void pin_segment_column(const std::vector<double>* column) { pinned_v_ = column; }

    void operator()(double t, const std::vector<double>& z, std::vector<double>& dz) {
        ++evals_;
        dz.resize(dim());

        const std::vector<double>* v = pinned_v_;
        if (v == nullptr) {
            schedule_.eval(t, v_buf_);
            v = &v_buf_;
        }

        // The teleportation actually driving x' is vbar when smoothing is on.
        const double* vtel;
        if (smoothing_) {
            vtel = z.data() + n_;
            for (std::size_t i = 0; i < n_; ++i)
                dz[n_ + i] = theta_ * ((*v)[i] - z[n_ + i]);
        } else {
            vtel = v->data();
        }

        x_buf_.assign(z.begin(), z.begin() + n_);
        P_.apply(x_buf_, px_buf_);

        double gamma = 1.0;
        if (correction_) {
            double vsum = 0.0, xsum = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                vsum += vtel[i];
                xsum += z[i];
            }
            gamma = (1.0 - alpha_) * vsum + alpha_ * xsum;
        }
        for (std::size_t i = 0; i < n_; ++i)
            dz[i] = (1.0 - alpha_) * vtel[i] - gamma * z[i] + alpha_ * px_buf_[i];
    }

private:
    const TransitionOperator& P_;
    const TeleportationSchedule& schedule_;
    double alpha_;
    bool correction_;
    bool smoothing_;
    double theta_;
    std::size_t n_;
    std::size_t evals_ = 0;
    const std::vector<double>* pinned_v_ = nullptr;
    std::vector<double> v_buf_, x_buf_, px_buf_;
};

void validate_grid(const std::vector<double>& grid, double t_max) {
    if (grid.empty()) throw ConfigError("output grid is empty");
    if (grid.front() < 0.0 || grid.back() > t_max + 1e-12 * std::max(1.0, t_max))
        throw ConfigError("output grid leaves [0, t_max]");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw ConfigError("output grid must be strictly increasing");
}

std::vector<double> effective_grid(const EvolutionConfig& cfg) {
    std::vector<double> grid =
        cfg.output_grid.empty() ? uniform_grid(cfg.t_max, 200) : cfg.output_grid;
    validate_grid(grid, cfg.t_max);
    return grid;
}

void validate_common(const EvolutionConfig& cfg) {
    if (!(cfg.alpha >= 0.0 && cfg.alpha < 1.0))
        throw ConfigError("alpha must lie in [0, 1), got " + std::to_string(cfg.alpha));
    if (!(cfg.t_max >= 0.0)) throw ConfigError("t_max must be nonnegative");
}

std::vector<double> starting_state(const TransitionOperator& P,
                                   const TeleportationSchedule& schedule,
                                   const EvolutionConfig& cfg) {
    if (cfg.initial_override) {
        if (cfg.initial_override->size() != P.size())
            throw ConfigError("explicit initial state length mismatch");
        return *cfg.initial_override;
    }
    return initial_state(cfg.initial, P, schedule, cfg.alpha);
}

void emit_sample(Trajectory& traj, double t, const std::vector<double>& z, std::size_t n) {
    traj.times.push_back(t);
    traj.states.emplace_back(z.begin(), z.begin() + n);
    traj.sum_drift.push_back(std::abs(1.0 - sum_of(z, n)));
}

// Dormand-Prince 5(4) tableau with Shampine's 4th-order interpolant.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

class Dopri5 {
public:
    Dopri5(OdeSystem& f, double rel_tol, double abs_tol)
        : f_(f), rtol_(rel_tol), atol_(abs_tol), dim_(f.dim()) {
        for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_, &y0_})
            v->resize(dim_);
        for (auto* v : {&cont1_, &cont2_, &cont3_, &cont4_, &cont5_}) v->resize(dim_);
    }

    /// Integrate z across [t0, t1] (f smooth inside). After every accepted
    /// step on_step(t_prev, t_now) runs with z already holding the new state;
    /// interpolate() is valid for query times inside that step.
    template <typename OnStep>
    void integrate_segment(double t0, double t1, std::vector<double>& z, Trajectory::Stats& stats,
                           double t_scale, OnStep&& on_step) {
        if (t1 <= t0) return;
        double t = t0;
        f_(t, z, k1_);
        double h = initial_step(t, z, t1 - t0);
        bool just_rejected = false;

        while (t < t1) {
            h = std::min(h, t1 - t);
            if (h < 1e-12 * t_scale)
                throw NumericError("step size underflow (stiffness) at t = " + std::to_string(t),
                                   t);

            const double err = try_step(t, h, z);
            if (!std::isfinite(err) || !all_finite(ynew_)) {
                if (h < 16.0 * std::numeric_limits<double>::epsilon() * (std::abs(t) + 1.0))
                    throw NumericError("non-finite state at t = " + std::to_string(t), t);
                h *= 0.5;
                ++stats.rejected_steps;
                just_rejected = true;
                continue;
            }

            if (err <= 1.0) {
                const double t_prev = t;
                t += h;
                h_last_ = h;
                cont_fresh_ = false;
                y0_.swap(ynew_); // keep the pre-step state for interpolation
                y0_.swap(z);     // and publish the accepted state in z
                ++stats.steps;
                on_step(t_prev, t);
                k1_.swap(k7_); // FSAL: last stage is the next first stage
                const double facmax = just_rejected ? 1.0 : 10.0;
                const double fac =
                    err == 0.0 ? facmax
                               : std::min(facmax, std::max(0.2, 0.9 * std::pow(err, -0.2)));
                h *= fac;
                just_rejected = false;
            } else {
                h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
                ++stats.rejected_steps;
                just_rejected = true;
            }
        }
    }

    /// Dense evaluation at tq inside the last accepted step (t_prev, t_now];
    /// only valid from within the on_step callback.
    void interpolate(double t_prev, double tq, const std::vector<double>& y1,
                     std::vector<double>& out) {
        if (!cont_fresh_) build_interpolant(y1);
        const double theta = (tq - t_prev) / h_last_;
        const double omt = 1.0 - theta;
        out.resize(dim_);
        for (std::size_t i = 0; i < dim_; ++i)
            out[i] = cont1_[i] +
                     theta * (cont2_[i] +
                              omt * (cont3_[i] + theta * (cont4_[i] + omt * cont5_[i])));
    }

private:
    double initial_step(double t, const std::vector<double>& y, double seg_len) {
        // HINIT: guess from |y| and |y'|, refine with one Euler probe of the
        // second derivative. k1_ must already hold f(t, y).
        double d0 = 0.0, d1n = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double sc = atol_ + rtol_ * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1n += (k1_[i] / sc) * (k1_[i] / sc);
        }
        d0 = std::sqrt(d0 / static_cast<double>(dim_));
        d1n = std::sqrt(d1n / static_cast<double>(dim_));

        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * (d0 / d1n);
        h0 = std::min(h0, seg_len);

        for (std::size_t i = 0; i < dim_; ++i) ytmp_[i] = y[i] + h0 * k1_[i];
        f_(t + h0, ytmp_, k2_);
        double d2 = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double sc = atol_ + rtol_ * std::abs(y[i]);
            const double diff = (k2_[i] - k1_[i]) / sc;
            d2 += diff * diff;
        }
        d2 = std::sqrt(d2 / static_cast<double>(dim_)) / h0;

        const double dmax = std::max(d1n, d2);
        const double h1 =
            dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
        return std::min({100.0 * h0, h1, seg_len});
    }

    /// One trial step of size h from (t, y): fills k2_..k7_ and ynew_, returns
    /// the scaled RMS error. k1_ must hold f(t, y). y is left untouched.
    double try_step(double t, double h, const std::vector<double>& y) {
        auto stage = [&](std::vector<double>& k, double c, auto&&... acc) {
            for (std::size_t i = 0; i < dim_; ++i) {
                double s = 0.0;
                ((s += acc.first * (*acc.second)[i]), ...);
                ytmp_[i] = y[i] + h * s;
            }
            f_(t + c * h, ytmp_, k);
        };
        using W = std::pair<double, const std::vector<double>*>;
        stage(k2_, c2, W{a21, &k1_});
        stage(k3_, c3, W{a31, &k1_}, W{a32, &k2_});
        stage(k4_, c4, W{a41, &k1_}, W{a42, &k2_}, W{a43, &k3_});
        stage(k5_, c5, W{a51, &k1_}, W{a52, &k2_}, W{a53, &k3_}, W{a54, &k4_});
        stage(k6_, 1.0, W{a61, &k1_}, W{a62, &k2_}, W{a63, &k3_}, W{a64, &k4_}, W{a65, &k5_});

        for (std::size_t i = 0; i < dim_; ++i)
            ynew_[i] = y[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] +
                                   b6 * k6_[i]);
        f_(t + h, ynew_, k7_);

        double err = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double ei = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                                   e6 * k6_[i] + e7 * k7_[i]);
            const double sc = atol_ + rtol_ * std::max(std::abs(y[i]), std::abs(ynew_[i]));
            err += (ei / sc) * (ei / sc);
        }
        return std::sqrt(err / static_cast<double>(dim_));
    }

    /// Assemble the quartic interpolant of the just-accepted step. y0_ holds
    /// the pre-step state and k1_..k7_ are still that step's stages (this runs
    /// inside on_step, before the FSAL swap).
    void build_interpolant(const std::vector<double>& y1) {
        for (std::size_t i = 0; i < dim_; ++i) {
            const double ydiff = y1[i] - y0_[i];
            const double bspl = h_last_ * k1_[i] - ydiff;
            cont1_[i] = y0_[i];
            cont2_[i] = ydiff;
            cont3_[i] = bspl;
            cont4_[i] = ydiff - h_last_ * k7_[i] - bspl;
            cont5_[i] = h_last_ * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] +
                                   d6 * k6_[i] + d7 * k7_[i]);
        }
        cont_fresh_ = true;
    }

    OdeSystem& f_;
    double rtol_, atol_;
    std::size_t dim_;
    double h_last_ = 0.0;
    bool cont_fresh_ = false;
    std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, y0_;
    std::vector<double> cont1_, cont2_, cont3_, cont4_, cont5_;
};

} // namespace

std::vector<double> uniform_grid(double t_max, std::size_t count) {
    if (count == 0 || t_max <= 0.0) return {0.0};
    std::vector<double> grid(count + 1);
    for (std::size_t i = 0; i <= count; ++i)
        grid[i] = t_max * static_cast<double>(i) / static_cast<double>(count);
    grid.back() = t_max;
    return grid;
}

std::vector<double> derivative(double t, const std::vector<double>& x,
                               const TeleportationSchedule& schedule,
                               const TransitionOperator& P, double alpha, bool correction) {
    if (x.size() != P.size()) throw ConfigError("state length mismatch");

    std::vector<double> v = schedule.eval(t);
    std::vector<double> px = P.apply(x);

    double gamma = 1.0;
    if (correction) {
        double vsum = 0.0, xsum = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            vsum += v[i];
            xsum += x[i];
        }
        gamma = (1.0 - alpha) * vsum + alpha * xsum;
    }
    std::vector<double> dx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        dx[i] = (1.0 - alpha) * v[i] - gamma * x[i] + alpha * px[i];
    return dx;
}

std::vector<double> initial_state(InitialStateKind choice, const TransitionOperator& P,
                                  const TeleportationSchedule& schedule, double alpha,
                                  const SolveConfig& solve_cfg) {
    switch (choice) {
    case InitialStateKind::uniform:
        return std::vector<double>(P.size(), 1.0 / static_cast<double>(P.size()));
    case InitialStateKind::teleport0:
        return schedule.eval(0.0);
    case InitialStateKind::static_pr: {
        SolveConfig cfg = solve_cfg;
        cfg.alpha = alpha;
        return static_pagerank(P, cfg, schedule.eval(0.0));
    }
    }
    throw ConfigError("unknown initial state choice");
}

Trajectory evolve_euler(const TransitionOperator& P, const TeleportationSchedule& schedule,
                        const EvolutionConfig& cfg) {
    validate_common(cfg);
    const auto* euler = std::get_if<EulerMethod>(&cfg.method);
    if (!euler) throw ConfigError("evolve_euler called with a non-Euler method config");
    const double h = euler->h;
    const double h_bound = 2.0 / (1.0 + cfg.alpha);
    if (!(h > 0.0) || h >= h_bound)
        throw ConfigError("Euler step size h = " + std::to_string(h) +
                          " violates the stability bound h < 2/(1+alpha) = " +
                          std::to_string(h_bound));
    if (schedule.n() != P.size()) throw ConfigError("schedule node count mismatch");

    const std::vector<double> grid = effective_grid(cfg);
    const std::size_t n = P.size();
    const bool smoothing = schedule.smoothing().has_value();
    const double theta = schedule.smoothing().value_or(0.0);

    Trajectory traj;
    traj.n = n;

    std::vector<double> x = starting_state(P, schedule, cfg);
    std::vector<double> vbar = smoothing ? schedule.eval(0.0) : std::vector<double>{};
    std::vector<double> x_prev, px, v;

    std::size_t g = 0;
    if (grid[g] == 0.0) {
        emit_sample(traj, 0.0, x, n);
        ++g;
    }

    double t = 0.0;
    const double t_end = cfg.t_max;
    while (t < t_end && g < grid.size()) {
        const double step = std::min(h, t_end - t);
        const double t_next = (t_end - t <= h) ? t_end : t + step;

        // Forward Euler with the left-endpoint teleportation, mirroring the
        // Richardson structure; smoothing substitutes vbar for v(t).
        const std::vector<double>* vtel;
        if (smoothing) {
            vtel = &vbar;
        } else {
            schedule.eval(t, v);
            vtel = &v;
        }
        P.apply(x, px);
        double gamma = 1.0;
        if (cfg.correction) {
            double vsum = 0.0, xsum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                vsum += (*vtel)[i];
                xsum += x[i];
            }
            gamma = (1.0 - cfg.alpha) * vsum + cfg.alpha * xsum;
        }
        x_prev = x;
        for (std::size_t i = 0; i < n; ++i)
            x[i] += step * ((1.0 - cfg.alpha) * (*vtel)[i] - gamma * x[i] + cfg.alpha * px[i]);
        ++traj.stats.steps;
        ++traj.stats.derivative_evals;

        if (!all_finite(x))
            throw NumericError("non-finite state at t = " + std::to_string(t_next), t_next);

        if (smoothing) {
            // Closed implicit-Euler update keeps vbar a convex blend of
            // distributions for any step size.
            schedule.eval(t_next, v);
            const double denom = 1.0 + step * theta;
            for (std::size_t i = 0; i < n; ++i) vbar[i] = (vbar[i] + step * theta * v[i]) / denom;
        }

        while (g < grid.size() && grid[g] <= t_next + 1e-12 * std::max(1.0, t_end)) {
            const double tq = grid[g];
            if (tq >= t_next) {
                emit_sample(traj, tq, x, n);
            } else {
                const double w = (tq - t) / step;
                std::vector<double> xi(n);
                for (std::size_t i = 0; i < n; ++i) xi[i] = x_prev[i] + w * (x[i] - x_prev[i]);
                emit_sample(traj, tq, xi, n);
            }
            ++g;
        }
        t = t_next;
    }
    return traj;
}

Trajectory evolve_rk(const TransitionOperator& P, const TeleportationSchedule& schedule,
                     const EvolutionConfig& cfg) {
    validate_common(cfg);
    const auto* rk = std::get_if<Rk45Method>(&cfg.method);
    if (!rk) throw ConfigError("evolve_rk called with a non-RK method config");
    if (!(rk->rel_tol > 0.0) || !(rk->abs_tol > 0.0))
        throw ConfigError("rk45 tolerances must be positive");
    if (schedule.n() != P.size()) throw ConfigError("schedule node count mismatch");

    const std::vector<double> grid = effective_grid(cfg);
    const std::size_t n = P.size();

    OdeSystem system(P, schedule, cfg.alpha, cfg.correction);

    std::vector<double> z = starting_state(P, schedule, cfg);
    if (system.smoothing()) {
        const std::vector<double> vbar0 = schedule.eval(0.0);
        z.insert(z.end(), vbar0.begin(), vbar0.end());
    }

    Trajectory traj;
    traj.n = n;

    std::size_t g = 0;
    if (grid[g] == 0.0) {
        emit_sample(traj, 0.0, z, n);
        ++g;
    }

    // Segment boundaries: teleportation jumps plus the domain ends. x(t) is
    // continuous across jumps, but v(t) is not, so each segment restarts the
    // stepper (no FSAL carry, fresh initial step size).
    std::vector<double> bounds{0.0};
    for (double b : schedule.breakpoints()) bounds.push_back(b);
    bounds.push_back(cfg.t_max);

    Dopri5 stepper(system, rk->rel_tol, rk->abs_tol);
    const double t_scale = std::max(cfg.t_max, 1.0);
    std::vector<double> pinned, interp;

    for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
        const double t0 = bounds[seg], t1 = bounds[seg + 1];
        if (t1 <= t0) continue;

        if (schedule.kind() != TeleportationSchedule::Kind::oscillatory) {
            // v is constant inside the segment; the left edge picks the active
            // epoch (floor semantics make t0 inclusive), and pinning it keeps
            // the c=1 stages at the right boundary from seeing the next epoch.
            schedule.eval(t0, pinned);
            system.pin_segment_column(&pinned);
        } else {
            system.pin_segment_column(nullptr);
        }

        stepper.integrate_segment(t0, t1, z, traj.stats, t_scale, [&](double t_prev, double t) {
            while (g < grid.size() && grid[g] <= t + 1e-12 * t_scale) {
                const double tq = grid[g];
                if (tq <= t_prev + 1e-15 * t_scale) {
                    ++g; // grid point at the step start was already emitted
                    continue;
                }
                if (tq >= t) {
                    emit_sample(traj, tq, z, n);
                } else {
                    stepper.interpolate(t_prev, tq, z, interp);
                    emit_sample(traj, tq, interp, n);
                }
                ++g;
            }
        });
    }

    // Trailing grid points within rounding of t_max.
    while (g < grid.size()) {
        emit_sample(traj, grid[g], z, n);
        ++g;
    }
    traj.stats.derivative_evals = system.evals();
    return traj;
}

Trajectory evolve(const TransitionOperator& P, const TeleportationSchedule& schedule,
                  const EvolutionConfig& cfg) {
    if (std::holds_alternative<EulerMethod>(cfg.method)) return evolve_euler(P, schedule, cfg);
    return evolve_rk(P, schedule, cfg);
}

} // namespace dynpr
