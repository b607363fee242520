#include "dynpr/graph.hpp"

#include <algorithm>
#include <charconv>
#include <string>

#include "dynpr/errors.hpp"

namespace dynpr {

namespace {

bool parse_u32(std::string_view token, std::uint32_t& out) {
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc() && ptr == token.data() + token.size();
}

} // namespace

AdjacencyStructure load_edge_list(std::istream& in) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::string line;
    std::size_t line_no = 0;
    std::size_t max_id = 0;
    bool any_node = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();

        std::string_view view(line);
        auto first_non_ws = view.find_first_not_of(" \t");
        if (first_non_ws == std::string_view::npos) continue;
        if (view[first_non_ws] == '#') continue;

        std::uint32_t ids[2];
        std::size_t field = 0;
        std::size_t pos = first_non_ws;
        while (pos < view.size()) {
            auto end = view.find_first_of(" \t", pos);
            if (end == std::string_view::npos) end = view.size();
            std::string_view token = view.substr(pos, end - pos);
            if (field >= 2 || !parse_u32(token, ids[field]))
                throw ParseError("malformed edge line: '" + line + "'", line_no);
            ++field;
            pos = view.find_first_not_of(" \t", end);
            if (pos == std::string_view::npos) break;
        }
        if (field != 2)
            throw ParseError("expected two node ids, got '" + line + "'", line_no);

        edges.emplace_back(ids[0], ids[1]);
        max_id = std::max({max_id, std::size_t(ids[0]), std::size_t(ids[1])});
        any_node = true;
    }

    if (!any_node) throw ParseError("edge list contains no edges");
    return make_adjacency(std::move(edges), max_id + 1);
}

AdjacencyStructure make_adjacency(std::vector<std::pair<std::uint32_t, std::uint32_t>> edges,
                                  std::size_t n_min) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::size_t n = n_min;
    for (const auto& [src, dst] : edges)
        n = std::max({n, std::size_t(src) + 1, std::size_t(dst) + 1});

    return AdjacencyStructure{n, std::move(edges)};
}

TransitionOperator build_transition(const AdjacencyStructure& adj) {
    if (adj.n == 0) throw ConfigError("cannot build a transition operator over zero nodes");

    TransitionOperator op;
    op.n_ = adj.n;

    std::vector<std::size_t> out_degree(adj.n, 0);
    for (const auto& [src, dst] : adj.edges) {
        (void)dst;
        ++out_degree[src];
    }

    op.col_ptr_.assign(adj.n + 1, 0);
    for (std::size_t i = 0; i < adj.n; ++i) op.col_ptr_[i + 1] = op.col_ptr_[i] + out_degree[i];

    op.row_idx_.resize(adj.edges.size());
    std::vector<std::size_t> cursor(op.col_ptr_.begin(), op.col_ptr_.end() - 1);
    for (const auto& [src, dst] : adj.edges) op.row_idx_[cursor[src]++] = dst;

    op.col_weight_.resize(adj.n);
    for (std::size_t i = 0; i < adj.n; ++i) {
        if (out_degree[i] == 0) {
            op.col_weight_[i] = 0.0;
            op.dangling_.push_back(static_cast<std::uint32_t>(i));
        } else {
            op.col_weight_[i] = 1.0 / static_cast<double>(out_degree[i]);
        }
    }
    return op;
}

void TransitionOperator::apply(const std::vector<double>& x, std::vector<double>& y) const {
    if (x.size() != n_)
        throw ConfigError("apply: vector length " + std::to_string(x.size()) +
                          " does not match node count " + std::to_string(n_));

    y.assign(n_, 0.0);
    for (std::size_t c = 0; c < n_; ++c) {
        const double w = col_weight_[c] * x[c];
        if (w == 0.0) continue;
        for (std::size_t k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) y[row_idx_[k]] += w;
    }

    if (!dangling_.empty()) {
        double mass = 0.0;
        for (std::uint32_t d : dangling_) mass += x[d];
        const double share = mass / static_cast<double>(n_);
        if (share != 0.0)
            for (double& yi : y) yi += share;
    }
}

std::vector<double> TransitionOperator::apply(const std::vector<double>& x) const {
    std::vector<double> y;
    apply(x, y);
    return y;
}

std::vector<std::pair<std::uint32_t, double>> TransitionOperator::column(std::uint32_t c) const {
    if (c >= n_) throw ConfigError("column index out of range");

    std::vector<std::pair<std::uint32_t, double>> entries;
    if (col_weight_[c] == 0.0) {
        const double u = 1.0 / static_cast<double>(n_);
        for (std::uint32_t r = 0; r < n_; ++r) entries.emplace_back(r, u);
        return entries;
    }
    for (std::size_t k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k)
        entries.emplace_back(row_idx_[k], col_weight_[c]);
    return entries;
}

std::size_t TransitionOperator::out_degree(std::uint32_t node) const {
    if (node >= n_) throw ConfigError("node index out of range");
    return col_ptr_[node + 1] - col_ptr_[node];
}

} // namespace dynpr
