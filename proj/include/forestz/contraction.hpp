#pragma once

#include <vector>

namespace forestz {

// A pairwise factor f(s_u, s_v) stored row-major by s_u.
struct Factor {
    int u = 0;
    int v = 0;
    std::vector<double> table;  // size_u * size_v
};

// Sum over all configurations of the product of the given factors. Nodes
// without factors contribute their state count. Acyclic factor graphs are
// contracted by leaf elimination; cycles are handled by clamping one vertex
// per independent cycle and recursing, so cost is exponential only in the
// cyclomatic number of the factor graph.
double sum_product(const std::vector<int>& state_sizes,
                   const std::vector<Factor>& factors);

// Same, with some nodes clamped to fixed states (pairs of node, state).
double sum_product(const std::vector<int>& state_sizes,
                   const std::vector<Factor>& factors,
                   const std::vector<std::pair<int, int>>& clamps);

}  // namespace forestz
