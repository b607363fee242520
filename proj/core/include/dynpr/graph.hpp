#pragma once

#include <cstdint>
#include <istream>
#include <utility>
#include <vector>

namespace dynpr {

/// Directed graph as a deduplicated edge set over zero-based contiguous ids.
/// Node count is 1 + max id seen, so ids mentioned only once still create
/// (isolated, dangling) nodes.
struct AdjacencyStructure {
    std::size_t n = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges; // sorted, unique
};

/// Parse a whitespace-separated "src dst" edge list. Lines starting with '#'
/// are comments; blank lines are skipped; CRLF is accepted. Throws ParseError
/// with the offending line number on malformed input or if no edges remain.
AdjacencyStructure load_edge_list(std::istream& in);

/// Build an AdjacencyStructure from raw edge pairs (deduplicated, n inferred).
AdjacencyStructure make_adjacency(std::vector<std::pair<std::uint32_t, std::uint32_t>> edges,
                                  std::size_t n_min = 0);

/// Column-stochastic transition operator P = A^T D^{-1} with uniform dangling
/// repair. Columns of non-dangling nodes hold 1/out_degree on their out-
/// neighbours; dangling columns are implicitly the uniform vector, realised in
/// apply() as y += (sum of x over dangling nodes) / n.
class TransitionOperator {
public:
    std::size_t size() const noexcept { return n_; }
    const std::vector<std::uint32_t>& dangling() const noexcept { return dangling_; }

    /// y = P x. Throws ConfigError on length mismatch.
    void apply(const std::vector<double>& x, std::vector<double>& y) const;
    std::vector<double> apply(const std::vector<double>& x) const;

    /// Entries of column c as (row, value) pairs, dangling repair included.
    /// Intended for tests and small-scale inspection, not hot paths.
    std::vector<std::pair<std::uint32_t, double>> column(std::uint32_t c) const;

    std::size_t out_degree(std::uint32_t node) const;

private:
    friend TransitionOperator build_transition(const AdjacencyStructure&);

    std::size_t n_ = 0;
    std::vector<std::size_t> col_ptr_;       // size n+1, CSC over columns
    std::vector<std::uint32_t> row_idx_;     // out-neighbours, ascending per column
    std::vector<double> col_weight_;         // 1/out_degree per column (0 for dangling)
    std::vector<std::uint32_t> dangling_;    // ascending node ids with out-degree 0
};

/// Throws ConfigError if adj.n == 0.
TransitionOperator build_transition(const AdjacencyStructure& adj);

} // namespace dynpr
