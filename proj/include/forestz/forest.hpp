#pragma once

#include <iosfwd>
#include <map>
#include <vector>

#include "forestz/graph.hpp"
#include "forestz/model.hpp"

namespace forestz {

inline constexpr int kDefaultForestEdgeCap = 24;

// Explicit enumeration of the acyclic edge subsets of a graph, including
// the empty forest, in canonical subset order.
struct ForestFamily {
    const InteractionGraph* graph = nullptr;
    std::vector<EdgeSet> forests;
};

ForestFamily enumerate_forests(const InteractionGraph& g,
                               int edge_cap = kDefaultForestEdgeCap);

// Enumeration restricted to a subset of usable edges.
ForestFamily enumerate_forests(const InteractionGraph& g, const EdgeSet& allowed,
                               int edge_cap = kDefaultForestEdgeCap);

// Z_F = sum over forests of sum over configurations of prod x_ij, with
// x_ij = exp(beta H_ij) - 1. Per-forest configuration sums are evaluated by
// tree contraction; the empty forest contributes the total state count.
double forest_partition(const PairwiseModel& m, const ForestFamily& family);

// Brute-force cross-check of the same sum (state count capped at 2^14).
double forest_partition_brute(const PairwiseModel& m, const ForestFamily& family);

// P_sub(x) = prod over subgraph edges of (1 + x_ij) at a fixed configuration.
double graph_polynomial(const PairwiseModel& m, const EdgeSet& subgraph,
                        const std::vector<int>& state);

// Partition of F(G) into the tree part F(T) and one part per nonempty
// cotree-edge subset, each holding exactly the forests whose cotree
// intersection is that subset.
struct RootedDecomposition {
    std::vector<EdgeSet> tree_part;
    std::map<EdgeSet, std::vector<EdgeSet>> parts;
};

RootedDecomposition orthogonalize(const ForestFamily& family, const TreeCotree& tc);

// Text dump: '#' header with counts, one line of sorted edge indices per
// forest (the empty forest is a blank line).
void dump_family(const ForestFamily& family, std::ostream& out);

}  // namespace forestz
