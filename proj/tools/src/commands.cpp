#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dynpr/errors.hpp"
#include "dynpr/graph.hpp"
#include "dynpr/integrate.hpp"
#include "dynpr/io.hpp"
#include "dynpr/predict.hpp"
#include "dynpr/ranks.hpp"
#include "dynpr/solvers.hpp"
#include "dynpr/synth.hpp"
#include "dynpr/teleportation.hpp"

namespace dynpr::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kManifestVersion = "1";

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string bracketed(const std::vector<double>& v, std::size_t limit = 16) {
    std::string s = "[";
    const std::size_t count = std::min(limit, v.size());
    for (std::size_t i = 0; i < count; ++i) {
        if (i) s += ", ";
        s += fmt4(v[i]);
    }
    if (count < v.size()) s += ", ...";
    return s + "]";
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open input file '" + path + "'");
    return in;
}

TransitionOperator load_graph(const std::string& path) {
    auto in = open_input(path);
    return build_transition(load_edge_list(in));
}

ActivityMatrix load_activity(const std::string& path, std::size_t n_min) {
    auto in = open_input(path);
    ActivityMatrix activity = load_activity_csv(in, n_min);
    if (n_min > 0 && activity.n > n_min)
        throw ParseError("activity file '" + path + "' references node " +
                         std::to_string(activity.n - 1) + " beyond the graph's " +
                         std::to_string(n_min) + " nodes");
    return activity;
}

fs::path prepare_out(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out + "': " + ec.message());
    return dir;
}

template <typename Fn>
void write_text(const fs::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary); // LF endings on every platform
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    fn(out);
    out.flush();
    if (!out) throw ConfigError("failed while writing '" + path.string() + "'");
}

/// Make stored invocations replayable from any working directory: input path
/// values are replaced with absolute paths; everything else stays verbatim.
std::vector<std::string> absolutized_invocation(std::vector<std::string> args) {
    static const std::vector<std::string> path_flags = {
        "--graph", "--activity", "--trajectory", "--scores-a", "--scores-b", "--manifest"};
    for (std::size_t i = 0; i < args.size(); ++i) {
        for (const auto& flag : path_flags) {
            if (args[i] == flag && i + 1 < args.size()) {
                args[i + 1] = fs::absolute(args[i + 1]).lexically_normal().string();
            } else if (args[i].rfind(flag + "=", 0) == 0) {
                args[i] = flag + "=" +
                          fs::absolute(args[i].substr(flag.size() + 1)).lexically_normal().string();
            }
        }
    }
    return args;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const std::vector<std::string>& invocation, json inputs, json parameters) {
    json m;
    m["format_version"] = kManifestVersion;
    m["command"] = command;
    m["invocation"] = absolutized_invocation(invocation);
    m["inputs"] = std::move(inputs);
    m["parameters"] = std::move(parameters);
    m["out"] = fs::absolute(dir).lexically_normal().string();
    write_text(dir / "manifest.json", [&](std::ostream& out) { out << m.dump(2) << '\n'; });
}

std::vector<double> parse_grid_spec(const std::string& spec, double t_max) {
    if (spec.empty()) return uniform_grid(t_max, 200);

    if (spec.find(',') != std::string::npos) {
        std::vector<double> grid;
        std::size_t pos = 0;
        while (pos <= spec.size()) {
            auto comma = spec.find(',', pos);
            const std::string token =
                spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
            try {
                grid.push_back(std::stod(token));
            } catch (const std::exception&) {
                throw ConfigError("bad grid time '" + token + "'");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return grid;
    }

    std::size_t count = 0;
    auto [ptr, ec] = std::from_chars(spec.data(), spec.data() + spec.size(), count);
    if (ec != std::errc() || ptr != spec.data() + spec.size() || count == 0)
        throw ConfigError("--grid wants a positive interval count or a comma-separated time "
                          "list, got '" +
                          spec + "'");
    return uniform_grid(t_max, count);
}

std::pair<double, double> parse_window(const std::string& spec) {
    auto comma = spec.find(',');
    if (comma == std::string::npos)
        throw ConfigError("--window wants 'lo,hi', got '" + spec + "'");
    try {
        return {std::stod(spec.substr(0, comma)), std::stod(spec.substr(comma + 1))};
    } catch (const std::exception&) {
        throw ConfigError("--window wants 'lo,hi', got '" + spec + "'");
    }
}

std::vector<std::optional<double>> parse_theta_sweep(const std::string& spec) {
    std::vector<std::optional<double>> sweep;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        auto comma = spec.find(',', pos);
        const std::string token =
            spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (token == "none") {
            sweep.emplace_back(std::nullopt);
        } else {
            double theta;
            try {
                theta = std::stod(token);
            } catch (const std::exception&) {
                throw ConfigError("bad theta '" + token + "' (want 'none' or a positive number)");
            }
            if (!(theta > 0)) throw ConfigError("theta must be > 0, got " + token);
            sweep.emplace_back(theta);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (sweep.empty()) throw ConfigError("empty theta list");
    return sweep;
}

InitialStateKind parse_initial(const std::string& name) {
    if (name == "uniform") return InitialStateKind::uniform;
    if (name == "teleport0") return InitialStateKind::teleport0;
    if (name == "staticpr") return InitialStateKind::static_pr;
    throw ConfigError("unknown initial state '" + name + "'");
}

std::vector<double> mean_teleportation(const ActivityMatrix& activity) {
    const auto columns = normalize_activity(activity);
    std::vector<double> mean(activity.n, 0.0);
    for (const auto& col : columns)
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += col[i];
    for (double& e : mean) e /= static_cast<double>(columns.size());
    return mean;
}

json stats_json(const Trajectory& traj) {
    double max_drift = 0.0;
    double min_entry = 0.0;
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        max_drift = std::max(max_drift, traj.sum_drift[s]);
        for (double e : traj.states[s]) min_entry = std::min(min_entry, e);
    }
    return json{{"samples", traj.times.size()},
                {"steps", traj.stats.steps},
                {"rejected_steps", traj.stats.rejected_steps},
                {"derivative_evals", traj.stats.derivative_evals},
                {"max_sum_drift", max_drift},
                {"min_entry", min_entry}};
}

// ---------------------------------------------------------------------------
// static

struct StaticArgs {
    std::string graph, activity, out;
    double alpha = 0.85;
    double tol = 1e-10;
    std::size_t max_iter = 10000;
};

int cmd_static(const StaticArgs& a, const std::vector<std::string>& invocation,
               std::ostream& out) {
    TransitionOperator P = load_graph(a.graph);

    std::vector<double> v;
    if (a.activity.empty()) {
        v.assign(P.size(), 1.0 / static_cast<double>(P.size()));
    } else {
        v = mean_teleportation(load_activity(a.activity, P.size()));
    }

    SolveConfig cfg{a.alpha, a.tol, a.max_iter};
    const std::vector<double> x = static_pagerank(P, cfg, v);

    const fs::path dir = prepare_out(a.out);
    write_text(dir / "scores.csv", [&](std::ostream& o) { write_scores_csv(o, x); });
    write_manifest(dir, "static", invocation,
                   json{{"graph", fs::absolute(a.graph).string()},
                        {"activity", a.activity.empty()
                                         ? json(nullptr)
                                         : json(fs::absolute(a.activity).string())}},
                   json{{"alpha", a.alpha},
                        {"tol", a.tol},
                        {"max_iter", a.max_iter},
                        {"teleportation", a.activity.empty() ? "uniform" : "activity-mean"}});

    out << "static pagerank over " << P.size() << " nodes -> " << (dir / "scores.csv").string()
        << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// evolve

struct EvolveArgs {
    std::string graph, activity, out;
    double alpha = 0.85;
    double timescale = 1.0;
    std::string theta; // empty = no smoothing
    std::string method = "rk45";
    double step = 0.1;
    double rtol = 1e-6;
    double atol = 1e-9;
    double tmax = -1.0; // <0 = derive from the activity span
    std::string grid;
    std::string initial = "teleport0";
    bool correction = true;
};

Trajectory run_evolution(const TransitionOperator& P, const EvolveArgs& a, double& t_max_out,
                         std::size_t* epochs_out = nullptr) {
    TeleportationSchedule schedule = [&] {
        if (a.activity.empty()) {
            if (a.tmax < 0)
                throw ConfigError("--tmax is required when no activity file is given");
            std::vector<double> uniform(P.size(), 1.0 / static_cast<double>(P.size()));
            return TeleportationSchedule::constant(std::move(uniform), a.tmax);
        }
        ActivityMatrix activity = load_activity(a.activity, P.size());
        if (epochs_out) *epochs_out = activity.k;
        const double t_max =
            a.tmax < 0 ? static_cast<double>(activity.k) * a.timescale : a.tmax;
        return TeleportationSchedule::piecewise(normalize_activity(activity), a.timescale,
                                                t_max);
    }();
    if (!a.theta.empty()) {
        double theta;
        try {
            theta = std::stod(a.theta);
        } catch (const std::exception&) {
            throw ConfigError("bad theta '" + a.theta + "'");
        }
        schedule.set_smoothing(theta);
    }

    EvolutionConfig cfg;
    cfg.alpha = a.alpha;
    cfg.t_max = schedule.t_max();
    cfg.initial = parse_initial(a.initial);
    cfg.correction = a.correction;
    cfg.output_grid = parse_grid_spec(a.grid, cfg.t_max);
    if (a.method == "euler") {
        cfg.method = EulerMethod{a.step};
    } else {
        cfg.method = Rk45Method{a.rtol, a.atol};
    }
    t_max_out = cfg.t_max;
    return evolve(P, schedule, cfg);
}

int cmd_evolve(const EvolveArgs& a, const std::vector<std::string>& invocation,
               std::ostream& out) {
    TransitionOperator P = load_graph(a.graph);
    double t_max = 0.0;
    std::size_t epochs = 0;
    Trajectory traj = run_evolution(P, a, t_max, &epochs);

    const fs::path dir = prepare_out(a.out);
    write_text(dir / "trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, traj); });
    const json stats = stats_json(traj);
    write_text(dir / "summary.json", [&](std::ostream& o) { o << stats.dump(2) << '\n'; });

    json params{{"alpha", a.alpha},      {"timescale", a.timescale},
                {"method", a.method},    {"tmax", t_max},
                {"grid", a.grid},        {"initial", a.initial},
                {"correction", a.correction}};
    params["theta"] = a.theta.empty() ? json(nullptr) : json(std::stod(a.theta));
    if (a.method == "euler")
        params["step"] = a.step;
    else {
        params["rtol"] = a.rtol;
        params["atol"] = a.atol;
    }
    if (epochs) params["epochs"] = epochs;
    write_manifest(dir, "evolve", invocation,
                   json{{"graph", fs::absolute(a.graph).string()},
                        {"activity", a.activity.empty()
                                         ? json(nullptr)
                                         : json(fs::absolute(a.activity).string())}},
                   std::move(params));

    out << "evolved " << traj.times.size() << " samples to t=" << fmt4(t_max) << " (steps "
        << traj.stats.steps << ", rejected " << traj.stats.rejected_steps << ", max sum drift "
        << fmt4(stats["max_sum_drift"].get<double>()) << ") -> "
        << (dir / "trajectory.csv").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// ranks

struct RanksArgs {
    std::string trajectory, out, window;
    std::size_t topk = 10;
};

int cmd_ranks(const RanksArgs& a, const std::vector<std::string>& invocation,
              std::ostream& out) {
    auto in = open_input(a.trajectory);
    Trajectory traj = read_trajectory_csv(in);

    const auto [w_lo, w_hi] =
        a.window.empty() ? default_difference_window(traj) : parse_window(a.window);

    std::vector<double> tr = transient(traj, traj.times.back());
    std::vector<double> cu = cumulative(traj);
    std::vector<double> va = variance(traj);
    std::vector<double> di = difference(traj, w_lo, w_hi);
    // Interpolation may dip slightly negative; exports are sanitized, the
    // trajectory itself never is.
    for (auto* vec : {&tr, &cu, &va, &di})
        for (double& e : *vec) e = std::max(0.0, e);

    const fs::path dir = prepare_out(a.out);
    write_text(dir / "ranks.csv", [&](std::ostream& o) {
        o << "node,transient,cumulative,variance,difference\n";
        for (std::size_t i = 0; i < traj.n; ++i)
            o << i << ',' << format_double(tr[i]) << ',' << format_double(cu[i]) << ','
              << format_double(va[i]) << ',' << format_double(di[i]) << '\n';
    });

    const std::size_t k = std::min(a.topk, traj.n);
    write_text(dir / "topk.csv", [&](std::ostream& o) {
        o << "measure,rank,node,score\n";
        const std::pair<const char*, const std::vector<double>*> measures[] = {
            {"transient", &tr}, {"cumulative", &cu}, {"variance", &va}, {"difference", &di}};
        for (const auto& [name, scores] : measures) {
            const auto order = top_k(*scores, k);
            for (std::size_t r = 0; r < order.size(); ++r)
                o << name << ',' << (r + 1) << ',' << order[r] << ','
                  << format_double((*scores)[order[r]]) << '\n';
        }
    });

    write_manifest(dir, "ranks", invocation,
                   json{{"trajectory", fs::absolute(a.trajectory).string()}},
                   json{{"window", json::array({w_lo, w_hi})},
                        {"topk", k},
                        {"transient_time", traj.times.back()}});

    out << "ranks over window [" << fmt4(w_lo) << ", " << fmt4(w_hi) << "] -> "
        << (dir / "ranks.csv").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// isim

struct IsimArgs {
    std::string scores_a, scores_b, out;
    std::size_t topk = 0; // 0 = full depth
};

int cmd_isim(const IsimArgs& a, const std::vector<std::string>& invocation, std::ostream& out) {
    auto in_a = open_input(a.scores_a);
    auto in_b = open_input(a.scores_b);
    const std::vector<double> x = read_scores_csv(in_a);
    const std::vector<double> y = read_scores_csv(in_b);
    if (x.size() != y.size())
        throw ConfigError("score files cover different node counts (" + std::to_string(x.size()) +
                          " vs " + std::to_string(y.size()) + ")");

    const std::size_t k = a.topk == 0 ? x.size() : a.topk;
    const std::vector<double> profile = isim(x, y, k);

    const fs::path dir = prepare_out(a.out);
    write_text(dir / "isim.csv", [&](std::ostream& o) { write_profile_csv(o, profile); });
    write_manifest(dir, "isim", invocation,
                   json{{"scores_a", fs::absolute(a.scores_a).string()},
                        {"scores_b", fs::absolute(a.scores_b).string()}},
                   json{{"topk", k}});

    out << "isim depth " << k << ": " << bracketed(profile, 8) << " -> "
        << (dir / "isim.csv").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// oscillate

struct OscillateArgs {
    std::string graph, activity, out;
    double alpha = 0.85;
    std::size_t k = 0; // 0 = take V from the activity file
    double tmax = 20.0;
    double rtol = 1e-8;
    double atol = 1e-11;
    std::string grid;
    std::string initial = "staticpr";
    double tol = 1e-10;
};

int cmd_oscillate(const OscillateArgs& a, const std::vector<std::string>& invocation,
                  std::ostream& out) {
    TransitionOperator P = load_graph(a.graph);

    std::vector<std::vector<double>> V;
    if (a.k > 0 && !a.activity.empty())
        throw ConfigError("give either --k or --activity, not both");
    if (a.k > 0) {
        if (a.k < 2) throw ConfigError("the oscillatory family needs k >= 2");
        if (a.k > P.size())
            throw ConfigError("k = " + std::to_string(a.k) + " exceeds the node count " +
                              std::to_string(P.size()));
        V.assign(a.k, std::vector<double>(P.size(), 0.0));
        for (std::size_t j = 0; j < a.k; ++j) V[j][j] = 1.0; // unit-vector columns
    } else if (!a.activity.empty()) {
        ActivityMatrix activity = load_activity(a.activity, P.size());
        if (activity.k < 2) throw ConfigError("the oscillatory family needs k >= 2 epochs");
        V = normalize_activity(activity);
    } else {
        throw ConfigError("one of --k or --activity is required");
    }

    SolveConfig solve_cfg;
    solve_cfg.alpha = a.alpha;
    solve_cfg.tol = a.tol;
    const OscillatorySteadyState steady = oscillatory_steady_state(P, a.alpha, V, solve_cfg);

    TeleportationSchedule schedule = TeleportationSchedule::oscillatory(V, a.tmax);
    EvolutionConfig cfg;
    cfg.alpha = a.alpha;
    cfg.t_max = a.tmax;
    cfg.method = Rk45Method{a.rtol, a.atol};
    cfg.initial = parse_initial(a.initial);
    cfg.output_grid = a.grid.empty()
                          ? uniform_grid(a.tmax, std::max<std::size_t>(
                                                     1, static_cast<std::size_t>(
                                                            std::llround(a.tmax * 10.0))))
                          : parse_grid_spec(a.grid, a.tmax);
    Trajectory traj = evolve_rk(P, schedule, cfg);

    const double burn_in = 4.0;
    double max_gap = 0.0;
    bool gap_defined = false;
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        if (traj.times[s] < burn_in) continue;
        gap_defined = true;
        const std::vector<double> ref = eval_steady(steady.x, steady.s.s, traj.times[s]);
        for (std::size_t i = 0; i < traj.n; ++i)
            max_gap = std::max(max_gap, std::abs(traj.states[s][i] - ref[i]));
    }

    const fs::path dir = prepare_out(a.out);
    write_text(dir / "trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, traj); });
    write_text(dir / "steady.csv", [&](std::ostream& o) {
        o << "t,node,score\n";
        for (double t : traj.times) {
            const std::vector<double> ref = eval_steady(steady.x, steady.s.s, t);
            const std::string ts = format_double(t);
            for (std::size_t i = 0; i < ref.size(); ++i)
                o << ts << ',' << i << ',' << format_double(ref[i]) << '\n';
        }
    });

    std::vector<double> s_real(traj.n), s_imag(traj.n);
    for (std::size_t i = 0; i < traj.n; ++i) {
        s_real[i] = steady.s.s[i].real();
        s_imag[i] = steady.s.s[i].imag();
    }
    json report{{"alpha", a.alpha},
                {"k", V.size()},
                {"x", steady.x},
                {"s_real", s_real},
                {"s_imag", s_imag},
                {"s_magnitude", steady.s.magnitude},
                {"complex_residual", steady.s.residual},
                {"complex_iterations", steady.s.iterations},
                {"burn_in", burn_in},
                {"max_gap_after_burn_in", gap_defined ? json(max_gap) : json(nullptr)},
                {"stats", stats_json(traj)}};
    write_text(dir / "report.json", [&](std::ostream& o) { o << report.dump(2) << '\n'; });

    write_manifest(dir, "oscillate", invocation,
                   json{{"graph", fs::absolute(a.graph).string()},
                        {"activity", a.activity.empty()
                                         ? json(nullptr)
                                         : json(fs::absolute(a.activity).string())}},
                   json{{"alpha", a.alpha},
                        {"k", V.size()},
                        {"tmax", a.tmax},
                        {"rtol", a.rtol},
                        {"atol", a.atol},
                        {"grid", a.grid},
                        {"initial", a.initial},
                        {"tol", a.tol}});

    out << "x = " << bracketed(steady.x) << "\n";
    out << "|s| = " << bracketed(steady.s.magnitude) << "\n";
    if (gap_defined)
        out << "max |x(t) - steady(t)| for t in [" << fmt4(burn_in) << ", " << fmt4(a.tmax)
            << "] = " << fmt4(max_gap) << "\n";
    else
        out << "no grid samples past the burn-in time " << fmt4(burn_in) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
    std::string graph, activity, out;
    double alpha = 0.85;
    double timescale = 1.0;
    std::string theta = "none";
    std::size_t window = 2;
    std::size_t cohort = 0; // 0 = n/10, at least 1
    double rtol = 1e-6;
    double atol = 1e-9;
};

int cmd_predict(const PredictArgs& a, const std::vector<std::string>& invocation,
                std::ostream& out) {
    TransitionOperator P = load_graph(a.graph);
    ActivityMatrix activity = load_activity(a.activity, P.size());
    const std::size_t k = activity.k;
    const std::size_t n = activity.n;
    auto sweep = parse_theta_sweep(a.theta);

    const std::size_t cohort =
        a.cohort > 0 ? a.cohort : std::max<std::size_t>(1, n / 10);

    const double t_max = static_cast<double>(k) * a.timescale;
    // Epoch-boundary samples feed the feature blocks; quarter-epoch samples
    // keep the difference rank honest between jumps.
    std::vector<double> grid;
    for (std::size_t j = 0; j < k; ++j) {
        const double base = static_cast<double>(j) * a.timescale;
        for (int q = 0; q < 4; ++q)
            grid.push_back(base + static_cast<double>(q) * a.timescale / 4.0);
    }
    grid.push_back(t_max);

    const auto columns = normalize_activity(activity);

    json sweep_json = json::array();
    std::string console;
    for (const auto& theta : sweep) {
        TeleportationSchedule schedule =
            TeleportationSchedule::piecewise(columns, a.timescale, t_max);
        if (theta) schedule.set_smoothing(*theta);

        EvolutionConfig cfg;
        cfg.alpha = a.alpha;
        cfg.t_max = t_max;
        cfg.method = Rk45Method{a.rtol, a.atol};
        cfg.initial = InitialStateKind::static_pr;
        cfg.output_grid = grid;
        Trajectory traj = evolve_rk(P, schedule, cfg);

        std::vector<std::vector<double>> scores(k);
        for (std::size_t j = 1; j <= k; ++j)
            scores[j - 1] = transient(traj, static_cast<double>(j) * a.timescale);

        const auto [w_lo, w_hi] = default_difference_window(traj);
        const std::vector<double> diff = difference(traj, w_lo, w_hi);

        const PredictionReport report =
            evaluate_prediction(activity.columns, scores, a.window, cohort, diff);

        json cohorts = json::array();
        std::string cohort_line;
        for (const auto& c : report.cohorts) {
            cohorts.push_back(json{{"label", c.label},
                                   {"nodes", c.nodes},
                                   {"mean_smape_base", c.mean_smape_base},
                                   {"mean_smape_augmented", c.mean_smape_augmented},
                                   {"defined", c.ratio_defined},
                                   {"error_ratio",
                                    c.ratio_defined ? json(c.error_ratio) : json(nullptr)}});
            cohort_line += ", " + c.label + " " +
                           (c.ratio_defined ? fmt4(c.error_ratio) : std::string("undefined"));
        }
        sweep_json.push_back(
            json{{"theta", theta ? json(*theta) : json(nullptr)},
                 {"overall",
                  json{{"mean_smape_base", report.mean_smape_base},
                       {"mean_smape_augmented", report.mean_smape_augmented},
                       {"defined", report.overall_ratio_defined},
                       {"error_ratio", report.overall_ratio_defined
                                           ? json(report.overall_error_ratio)
                                           : json(nullptr)}}},
                 {"cohorts", cohorts},
                 {"first_predicted", report.first_predicted},
                 {"last_predicted", report.last_predicted}});

        console += "theta=" + (theta ? fmt4(*theta) : std::string("none")) + ": overall ratio " +
                   (report.overall_ratio_defined ? fmt4(report.overall_error_ratio)
                                                 : std::string("undefined")) +
                   cohort_line + "\n";
    }

    json result{{"epochs", k},           {"nodes", n},
                {"w", a.window},         {"cohort_size", cohort},
                {"timescale", a.timescale}, {"alpha", a.alpha},
                {"sweep", sweep_json}};

    const fs::path dir = prepare_out(a.out);
    write_text(dir / "predictions.json", [&](std::ostream& o) { o << result.dump(2) << '\n'; });
    write_manifest(dir, "predict", invocation,
                   json{{"graph", fs::absolute(a.graph).string()},
                        {"activity", fs::absolute(a.activity).string()}},
                   json{{"alpha", a.alpha},
                        {"timescale", a.timescale},
                        {"theta", a.theta},
                        {"window", a.window},
                        {"cohort", cohort},
                        {"rtol", a.rtol},
                        {"atol", a.atol}});

    out << console << "-> " << (dir / "predictions.json").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthGraphArgs {
    std::size_t nodes = 0, edges = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_synth_graph(const SynthGraphArgs& a, const std::vector<std::string>& invocation,
                    std::ostream& out) {
    const AdjacencyStructure adj = synth_graph(a.nodes, a.edges, a.seed);
    const fs::path dir = prepare_out(a.out);
    write_text(dir / "graph.txt", [&](std::ostream& o) { write_edge_list(o, adj); });
    write_manifest(dir, "synth graph", invocation, json::object(),
                   json{{"nodes", a.nodes}, {"edges", a.edges}, {"seed", a.seed}});
    out << "wrote " << adj.edges.size() << " edges over " << adj.n << " nodes -> "
        << (dir / "graph.txt").string() << "\n";
    return 0;
}

struct SynthActivityArgs {
    std::size_t nodes = 0, epochs = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_synth_activity(const SynthActivityArgs& a, const std::vector<std::string>& invocation,
                       std::ostream& out) {
    const ActivityMatrix activity = synth_activity(a.nodes, a.epochs, a.seed);
    const fs::path dir = prepare_out(a.out);
    write_text(dir / "activity.csv", [&](std::ostream& o) { write_activity_csv(o, activity); });
    write_manifest(dir, "synth activity", invocation, json::object(),
                   json{{"nodes", a.nodes}, {"epochs", a.epochs}, {"seed", a.seed}});
    out << "wrote activity for " << a.nodes << " nodes over " << a.epochs << " epochs -> "
        << (dir / "activity.csv").string() << "\n";
    return 0;
}

struct SynthDiffusionArgs {
    std::string graph, out;
    std::size_t epochs = 0;
    double alpha = 0.85;
    double timescale = 1.0;
    double noise = 0.03;
    double scale = 1000.0;
    std::uint64_t seed = 0;
};

int cmd_synth_diffusion(const SynthDiffusionArgs& a, const std::vector<std::string>& invocation,
                        std::ostream& out) {
    TransitionOperator P = load_graph(a.graph);
    const DiffusionFixture fixture =
        synth_diffusion(P, a.epochs, a.alpha, a.timescale, a.noise, a.scale, a.seed);
    const fs::path dir = prepare_out(a.out);
    write_text(dir / "activity.csv",
               [&](std::ostream& o) { write_activity_csv(o, fixture.activity); });
    write_manifest(dir, "synth diffusion", invocation,
                   json{{"graph", fs::absolute(a.graph).string()}},
                   json{{"epochs", a.epochs},
                        {"alpha", a.alpha},
                        {"timescale", a.timescale},
                        {"noise", a.noise},
                        {"scale", a.scale},
                        {"seed", a.seed}});
    out << "wrote diffusion-driven activity for " << P.size() << " nodes over " << a.epochs
        << " epochs -> " << (dir / "activity.csv").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// rerun

struct RerunArgs {
    std::string manifest, out;
};

int cmd_rerun(const RerunArgs& a, std::ostream& out, std::ostream& err) {
    auto in = open_input(a.manifest);
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("manifest '" + a.manifest + "' is not valid JSON: " + e.what());
    }
    if (!m.contains("invocation") || !m["invocation"].is_array())
        throw ParseError("manifest '" + a.manifest + "' lacks an invocation array");
    if (m.value("format_version", "") != kManifestVersion)
        throw ParseError("manifest '" + a.manifest + "' has unsupported format_version '" +
                         m.value("format_version", "") + "'");

    std::vector<std::string> args;
    const auto& inv = m["invocation"];
    for (std::size_t i = 0; i < inv.size(); ++i) {
        const std::string arg = inv[i].get<std::string>();
        if (arg == "--out") {
            ++i; // drop the recorded output directory
            continue;
        }
        if (arg.rfind("--out=", 0) == 0) continue;
        args.push_back(arg);
    }
    args.push_back("--out");
    args.push_back(a.out);
    return run(std::move(args), out, err);
}

} // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"dynamic PageRank with time-dependent teleportation"};
    app.require_subcommand(1);

    StaticArgs st;
    auto* c_static = app.add_subcommand("static", "solve the static PageRank system");
    c_static->add_option("--graph", st.graph, "edge-list file")->required();
    c_static->add_option("--activity", st.activity,
                         "activity CSV; teleportation = normalized epoch mean (default uniform)");
    c_static->add_option("--alpha", st.alpha, "damping parameter");
    c_static->add_option("--tol", st.tol, "residual 1-norm tolerance");
    c_static->add_option("--max-iter", st.max_iter, "iteration cap");
    c_static->add_option("--out", st.out, "output directory")->required();

    EvolveArgs ev;
    auto* c_evolve = app.add_subcommand("evolve", "integrate the dynamic PageRank system");
    c_evolve->add_option("--graph", ev.graph, "edge-list file")->required();
    c_evolve->add_option("--activity", ev.activity,
                         "activity CSV defining the piecewise teleportation schedule");
    c_evolve->add_option("--alpha", ev.alpha, "damping parameter");
    c_evolve->add_option("--timescale", ev.timescale, "epoch duration s");
    c_evolve->add_option("--theta", ev.theta, "smoothing rate (omit for raw jumps)");
    c_evolve->add_option("--method", ev.method, "integration method")
        ->check(CLI::IsMember({"euler", "rk45"}));
    c_evolve->add_option("--step", ev.step, "Euler step size h");
    c_evolve->add_option("--rtol", ev.rtol, "rk45 relative tolerance");
    c_evolve->add_option("--atol", ev.atol, "rk45 absolute tolerance");
    c_evolve->add_option("--tmax", ev.tmax, "end time (default: epochs * timescale)");
    c_evolve->add_option("--grid", ev.grid, "interval count or comma-separated output times");
    c_evolve->add_option("--initial", ev.initial, "initial state")
        ->check(CLI::IsMember({"uniform", "teleport0", "staticpr"}));
    c_evolve->add_flag("--correction,!--no-correction", ev.correction,
                       "probability-sum correction term");
    c_evolve->add_option("--out", ev.out, "output directory")->required();

    RanksArgs rk;
    auto* c_ranks = app.add_subcommand("ranks", "reduce a trajectory to rank vectors");
    c_ranks->add_option("--trajectory", rk.trajectory, "trajectory CSV from evolve")->required();
    c_ranks->add_option("--window", rk.window,
                        "difference window 'lo,hi' (default [0.2 tmax, tmax])");
    c_ranks->add_option("--topk", rk.topk, "listing depth");
    c_ranks->add_option("--out", rk.out, "output directory")->required();

    IsimArgs is;
    auto* c_isim = app.add_subcommand("isim", "intersection similarity of two score files");
    c_isim->add_option("--scores-a", is.scores_a, "first score CSV")->required();
    c_isim->add_option("--scores-b", is.scores_b, "second score CSV")->required();
    c_isim->add_option("--topk", is.topk, "profile depth (default: all nodes)");
    c_isim->add_option("--out", is.out, "output directory")->required();

    OscillateArgs os;
    auto* c_osc = app.add_subcommand(
        "oscillate", "analytic vs numeric steady state under cosine teleportation");
    c_osc->add_option("--graph", os.graph, "edge-list file")->required();
    c_osc->add_option("--k", os.k, "use unit-vector teleportation columns e_1..e_k");
    c_osc->add_option("--activity", os.activity, "activity CSV supplying the columns instead");
    c_osc->add_option("--alpha", os.alpha, "damping parameter");
    c_osc->add_option("--tmax", os.tmax, "end time");
    c_osc->add_option("--rtol", os.rtol, "rk45 relative tolerance");
    c_osc->add_option("--atol", os.atol, "rk45 absolute tolerance");
    c_osc->add_option("--grid", os.grid, "interval count or comma-separated output times");
    c_osc->add_option("--initial", os.initial, "initial state")
        ->check(CLI::IsMember({"uniform", "teleport0", "staticpr"}));
    c_osc->add_option("--tol", os.tol, "linear solver tolerance");
    c_osc->add_option("--out", os.out, "output directory")->required();

    PredictArgs pr;
    auto* c_pred = app.add_subcommand("predict", "lagged one-step-ahead activity prediction");
    c_pred->add_option("--graph", pr.graph, "edge-list file")->required();
    c_pred->add_option("--activity", pr.activity, "activity CSV")->required();
    c_pred->add_option("--alpha", pr.alpha, "damping parameter");
    c_pred->add_option("--timescale", pr.timescale, "epoch duration s");
    c_pred->add_option("--theta", pr.theta, "comma list of smoothing rates; 'none' = raw jumps");
    c_pred->add_option("--window", pr.window, "lag count w");
    c_pred->add_option("--cohort", pr.cohort, "cohort size m (default: n/10)");
    c_pred->add_option("--rtol", pr.rtol, "rk45 relative tolerance");
    c_pred->add_option("--atol", pr.atol, "rk45 absolute tolerance");
    c_pred->add_option("--out", pr.out, "output directory")->required();

    auto* c_synth = app.add_subcommand("synth", "seeded synthetic fixtures");
    c_synth->require_subcommand(1);

    SynthGraphArgs sg;
    auto* c_sg = c_synth->add_subcommand("graph", "uniform random simple digraph");
    c_sg->add_option("--nodes", sg.nodes, "node count")->required();
    c_sg->add_option("--edges", sg.edges, "edge count")->required();
    c_sg->add_option("--seed", sg.seed, "RNG seed")->required();
    c_sg->add_option("--out", sg.out, "output directory")->required();

    SynthActivityArgs sa;
    auto* c_sa = c_synth->add_subcommand("activity", "random activity counts");
    c_sa->add_option("--nodes", sa.nodes, "node count")->required();
    c_sa->add_option("--epochs", sa.epochs, "epoch count")->required();
    c_sa->add_option("--seed", sa.seed, "RNG seed")->required();
    c_sa->add_option("--out", sa.out, "output directory")->required();

    SynthDiffusionArgs sd;
    auto* c_sd = c_synth->add_subcommand(
        "diffusion", "activity whose next epoch follows the current transient scores");
    c_sd->add_option("--graph", sd.graph, "edge-list file")->required();
    c_sd->add_option("--epochs", sd.epochs, "epoch count")->required();
    c_sd->add_option("--alpha", sd.alpha, "damping parameter");
    c_sd->add_option("--timescale", sd.timescale, "epoch duration s");
    c_sd->add_option("--noise", sd.noise, "multiplicative noise sigma");
    c_sd->add_option("--scale", sd.scale, "count scale");
    c_sd->add_option("--seed", sd.seed, "RNG seed")->required();
    c_sd->add_option("--out", sd.out, "output directory")->required();

    RerunArgs rr;
    auto* c_rerun = app.add_subcommand("rerun", "replay a recorded run into a new directory");
    c_rerun->add_option("--manifest", rr.manifest, "manifest.json of a previous run")->required();
    c_rerun->add_option("--out", rr.out, "output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }

    try {
        if (c_static->parsed()) return cmd_static(st, args, out);
        if (c_evolve->parsed()) return cmd_evolve(ev, args, out);
        if (c_ranks->parsed()) return cmd_ranks(rk, args, out);
        if (c_isim->parsed()) return cmd_isim(is, args, out);
        if (c_osc->parsed()) return cmd_oscillate(os, args, out);
        if (c_pred->parsed()) return cmd_predict(pr, args, out);
        if (c_synth->parsed()) {
            if (c_sg->parsed()) return cmd_synth_graph(sg, args, out);
            if (c_sa->parsed()) return cmd_synth_activity(sa, args, out);
            if (c_sd->parsed()) return cmd_synth_diffusion(sd, args, out);
        }
        if (c_rerun->parsed()) return cmd_rerun(rr, out, err);
        err << "error: no command selected\n";
        return 1;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace dynpr::cli
