#pragma once

// Shared fixtures: the 4-node worked example and small helpers for tests.

#include <cstdint>
#include <sstream>
#include <utility>
#include <vector>

#include "dynpr/graph.hpp"

namespace fixtures {

// 0->2, 1->2, 2->1, 2->3, 3->0, 3->1. Columns of P: e3, e3, (e2+e4)/2, (e1+e2)/2.
inline const char* four_node_edges() { return "0 2\n1 2\n2 1\n2 3\n3 0\n3 1\n"; }

inline std::vector<std::pair<std::uint32_t, std::uint32_t>> four_node_edge_pairs() {
    return {{0, 2}, {1, 2}, {2, 1}, {2, 3}, {3, 0}, {3, 1}};
}

inline dynpr::TransitionOperator four_node_operator() {
    std::istringstream in(four_node_edges());
    return dynpr::build_transition(dynpr::load_edge_list(in));
}

inline std::vector<std::vector<double>> unit_columns(std::size_t n) {
    std::vector<std::vector<double>> V(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) V[j][j] = 1.0;
    return V;
}

} // namespace fixtures
