#include "dynpr/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "dynpr/errors.hpp"

namespace dynpr {

namespace {

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

double parse_double_or_throw(std::string_view token, std::size_t line_no) {
    double out;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw ParseError("expected a number, got '" + std::string(token) + "'", line_no);
    return out;
}

std::size_t parse_index_or_throw(std::string_view token, std::size_t line_no) {
    std::size_t out;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw ParseError("expected an index, got '" + std::string(token) + "'", line_no);
    return out;
}

bool read_line(std::istream& in, std::string& line, std::size_t& line_no) {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

} // namespace

std::string format_double(double value) {
    char buf[40];
    const int len = std::snprintf(buf, sizeof(buf), "%.17g", value);
    return std::string(buf, static_cast<std::size_t>(len));
}

void write_scores_csv(std::ostream& out, const std::vector<double>& scores) {
    out << "node,score\n";
    for (std::size_t i = 0; i < scores.size(); ++i)
        out << i << ',' << format_double(scores[i]) << '\n';
}

std::vector<double> read_scores_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!read_line(in, line, line_no)) throw ParseError("score CSV is empty");
    if (line != "node,score")
        throw ParseError("expected header 'node,score', got '" + line + "'", line_no);

    std::map<std::size_t, double> rows;
    while (read_line(in, line, line_no)) {
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != 2) throw ParseError("malformed score row: '" + line + "'", line_no);
        const std::size_t node = parse_index_or_throw(fields[0], line_no);
        if (!rows.emplace(node, parse_double_or_throw(fields[1], line_no)).second)
            throw ParseError("duplicate node " + std::to_string(node), line_no);
    }
    if (rows.empty()) throw ParseError("score CSV has no data rows");

    std::vector<double> scores(rows.rbegin()->first + 1, 0.0);
    for (const auto& [node, score] : rows) scores[node] = score;
    return scores;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "t,node,score\n";
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        const std::string t = format_double(traj.times[s]);
        for (std::size_t i = 0; i < traj.n; ++i)
            out << t << ',' << i << ',' << format_double(traj.states[s][i]) << '\n';
    }
}

Trajectory read_trajectory_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!read_line(in, line, line_no)) throw ParseError("trajectory CSV is empty");
    if (line != "t,node,score")
        throw ParseError("expected header 't,node,score', got '" + line + "'", line_no);

    std::map<double, std::map<std::size_t, double>> samples;
    std::size_t max_node = 0;
    while (read_line(in, line, line_no)) {
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != 3)
            throw ParseError("malformed trajectory row: '" + line + "'", line_no);
        const double t = parse_double_or_throw(fields[0], line_no);
        const std::size_t node = parse_index_or_throw(fields[1], line_no);
        const double score = parse_double_or_throw(fields[2], line_no);
        samples[t][node] = score;
        max_node = std::max(max_node, node);
    }
    if (samples.empty()) throw ParseError("trajectory CSV has no data rows");

    Trajectory traj;
    traj.n = max_node + 1;
    for (const auto& [t, row] : samples) {
        traj.times.push_back(t);
        std::vector<double> state(traj.n, 0.0);
        double sum = 0.0;
        for (const auto& [node, score] : row) {
            state[node] = score;
            sum += score;
        }
        traj.states.push_back(std::move(state));
        traj.sum_drift.push_back(std::abs(1.0 - sum));
    }
    return traj;
}

void write_profile_csv(std::ostream& out, const std::vector<double>& profile) {
    out << "k,isim\n";
    for (std::size_t j = 0; j < profile.size(); ++j)
        out << (j + 1) << ',' << format_double(profile[j]) << '\n';
}

void write_activity_csv(std::ostream& out, const ActivityMatrix& activity) {
    out << "node,epoch,count\n";
    for (std::size_t j = 0; j < activity.k; ++j)
        for (std::size_t i = 0; i < activity.n; ++i) {
            const double count = activity.columns[j][i];
            if (count == 0.0) continue;
            out << i << ',' << j << ',' << format_double(count) << '\n';
        }
}

void write_edge_list(std::ostream& out, const AdjacencyStructure& adj) {
    for (const auto& [src, dst] : adj.edges) out << src << ' ' << dst << '\n';
}

} // namespace dynpr
