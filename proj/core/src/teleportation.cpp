#include "dynpr/teleportation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "dynpr/errors.hpp"

namespace dynpr {

namespace {

constexpr double kSumTolerance = 1e-12;

void require_distribution(const std::vector<double>& v, const char* what) {
    double sum = 0.0;
    for (double e : v) {
        if (e < 0.0) throw ConfigError(std::string(what) + ": negative entry");
        sum += e;
    }
    if (std::abs(sum - 1.0) > kSumTolerance * std::max<double>(1, v.size()))
        throw ConfigError(std::string(what) + ": entries sum to " + std::to_string(sum) +
                          ", expected 1");
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        auto comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
    auto begin = token.find_first_not_of(" \t");
    if (begin == std::string_view::npos) return false;
    auto end = token.find_last_not_of(" \t");
    token = token.substr(begin, end - begin + 1);
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc() && ptr == token.data() + token.size();
}

} // namespace

ActivityMatrix load_activity_csv(std::istream& in, std::size_t n_min) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError("activity CSV is empty");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "node,epoch,count")
        throw ParseError("expected header 'node,epoch,count', got '" + line + "'", line_no);

    struct Row {
        std::size_t node, epoch;
        double count;
    };
    std::vector<Row> rows;
    std::size_t max_node = 0, max_epoch = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        auto fields = split_csv(line);
        std::size_t node, epoch;
        double count;
        if (fields.size() != 3 || !parse_number(fields[0], node) ||
            !parse_number(fields[1], epoch) || !parse_number(fields[2], count))
            throw ParseError("malformed activity row: '" + line + "'", line_no);
        if (count < 0.0)
            throw ParseError("negative count in activity row: '" + line + "'", line_no);

        rows.push_back({node, epoch, count});
        max_node = std::max(max_node, node);
        max_epoch = std::max(max_epoch, epoch);
    }
    if (rows.empty()) throw ParseError("activity CSV has no data rows");

    ActivityMatrix activity;
    activity.n = std::max(n_min, max_node + 1);
    activity.k = max_epoch + 1;
    activity.columns.assign(activity.k, std::vector<double>(activity.n, 0.0));
    for (const Row& r : rows) activity.columns[r.epoch][r.node] += r.count;
    return activity;
}

std::vector<std::vector<double>> normalize_activity(const ActivityMatrix& raw) {
    std::vector<std::vector<double>> out(raw.k);
    for (std::size_t j = 0; j < raw.k; ++j) {
        const auto& col = raw.columns[j];
        const double sum = std::accumulate(col.begin(), col.end(), 0.0);
        out[j].resize(raw.n);
        if (sum > 0.0) {
            for (std::size_t i = 0; i < raw.n; ++i) out[j][i] = col[i] / sum;
        } else {
            std::fill(out[j].begin(), out[j].end(), 1.0 / static_cast<double>(raw.n));
        }
    }
    return out;
}

TeleportationSchedule TeleportationSchedule::constant(std::vector<double> v, double t_max) {
    require_distribution(v, "constant teleportation");
    if (t_max < 0) throw ConfigError("t_max must be nonnegative");

    TeleportationSchedule s;
    s.kind_ = Kind::constant;
    s.n_ = v.size();
    s.t_max_ = t_max;
    s.columns_.push_back(std::move(v));
    return s;
}

TeleportationSchedule TeleportationSchedule::piecewise(std::vector<std::vector<double>> columns,
                                                       double time_scale, double t_max) {
    if (columns.empty()) throw ConfigError("piecewise schedule needs at least one epoch");
    if (time_scale <= 0) throw ConfigError("time-scale must be positive");
    if (t_max < 0) throw ConfigError("t_max must be nonnegative");
    for (const auto& c : columns) {
        require_distribution(c, "piecewise teleportation column");
        if (c.size() != columns.front().size())
            throw ConfigError("piecewise columns differ in length");
    }

    TeleportationSchedule s;
    s.kind_ = Kind::piecewise;
    s.n_ = columns.front().size();
    s.t_max_ = t_max;
    s.time_scale_ = time_scale;
    s.columns_ = std::move(columns);
    return s;
}

TeleportationSchedule TeleportationSchedule::oscillatory(std::vector<std::vector<double>> columns,
                                                         double t_max) {
    if (columns.size() < 2)
        throw ConfigError("oscillatory teleportation needs k >= 2 (got " +
                          std::to_string(columns.size()) + ")");
    if (t_max < 0) throw ConfigError("t_max must be nonnegative");
    for (const auto& c : columns) {
        require_distribution(c, "oscillatory teleportation column");
        if (c.size() != columns.front().size())
            throw ConfigError("oscillatory columns differ in length");
    }

    TeleportationSchedule s;
    s.kind_ = Kind::oscillatory;
    s.n_ = columns.front().size();
    s.t_max_ = t_max;
    const std::size_t k = columns.size();
    s.phases_.resize(k);
    for (std::size_t j = 0; j < k; ++j)
        s.phases_[j] = static_cast<double>(j) * 2.0 * std::numbers::pi / static_cast<double>(k);
    s.columns_ = std::move(columns);
    return s;
}

void TeleportationSchedule::set_smoothing(double theta) {
    if (!(theta > 0)) throw ConfigError("smoothing theta must be > 0");
    theta_ = theta;
}

std::vector<double> TeleportationSchedule::eval(double t) const {
    std::vector<double> out;
    eval(t, out);
    return out;
}

void TeleportationSchedule::eval(double t, std::vector<double>& out) const {
    if (t < 0.0 || t > t_max_)
        throw ConfigError("teleportation evaluated at t = " + std::to_string(t) +
                          " outside [0, " + std::to_string(t_max_) + "]");

    switch (kind_) {
    case Kind::constant:
        out = columns_.front();
        return;
    case Kind::piecewise: {
        auto idx = static_cast<std::size_t>(std::floor(t / time_scale_));
        idx = std::min(idx, columns_.size() - 1);
        out = columns_[idx];
        return;
    }
    case Kind::oscillatory: {
        const std::size_t k = columns_.size();
        out.assign(n_, 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            const double w = (std::cos(t + phases_[j]) + 1.0) / static_cast<double>(k);
            const auto& col = columns_[j];
            for (std::size_t i = 0; i < n_; ++i) out[i] += w * col[i];
        }
        return;
    }
    }
}

std::vector<double> TeleportationSchedule::breakpoints() const {
    if (kind_ != Kind::piecewise) return {};
    std::vector<double> jumps;
    for (std::size_t j = 1; j < columns_.size(); ++j) {
        const double t = static_cast<double>(j) * time_scale_;
        if (t >= t_max_) break;
        jumps.push_back(t);
    }
    return jumps;
}

std::vector<double> eval_oscillatory(const std::vector<std::vector<double>>& columns, double t) {
    auto schedule = TeleportationSchedule::oscillatory(columns, std::max(t, 0.0));
    return schedule.eval(t);
}

std::vector<double> smoothed_derivative(const std::vector<double>& vbar, double t,
                                        const TeleportationSchedule& schedule) {
    if (!schedule.smoothing()) throw ConfigError("schedule has no smoothing parameter set");
    const double theta = *schedule.smoothing();

    std::vector<double> v;
    schedule.eval(t, v);
    if (v.size() != vbar.size()) throw ConfigError("smoothed state length mismatch");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = theta * (v[i] - vbar[i]);
    return v;
}

} // namespace dynpr
