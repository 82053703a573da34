#include "forestz/forest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <set>

#include "forestz/contraction.hpp"

namespace forestz {

ForestFamily enumerate_forests(const InteractionGraph& g, int edge_cap) {
    EdgeSet all(g.n_edges());
    for (int e = 0; e < g.n_edges(); ++e) all[e] = e;
    return enumerate_forests(g, all, edge_cap);
}

ForestFamily enumerate_forests(const InteractionGraph& g, const EdgeSet& allowed,
                               int edge_cap) {
    if (static_cast<int>(allowed.size()) > edge_cap)
        throw CapExceeded("forest enumeration over " +
                          std::to_string(allowed.size()) +
                          " edges exceeds edge cap " + std::to_string(edge_cap));
    ForestFamily family;
    family.graph = &g;
    EdgeSet current;
    // Depth-first subset growth; branches that would close a cycle are
    // pruned by the union-find check.
    auto grow = [&](auto&& self, size_t start, detail::DisjointSets dsu) -> void {
        family.forests.push_back(current);
        for (size_t i = start; i < allowed.size(); ++i) {
            int e = allowed[i];
            detail::DisjointSets next = dsu;
            if (!next.unite(g.edge(e).u, g.edge(e).v)) continue;
            current.push_back(e);
            self(self, i + 1, std::move(next));
            current.pop_back();
        }
    };
    grow(grow, 0, detail::DisjointSets(g.n_nodes()));
    return family;
}

namespace {

Factor edge_factor_table(const PairwiseModel& m, int e) {
    const Edge& edge = m.graph.edge(e);
    Factor f;
    f.u = edge.u;
    f.v = edge.v;
    f.table.resize(static_cast<size_t>(m.state_sizes[edge.u]) *
                   m.state_sizes[edge.v]);
    for (int su = 0; su < m.state_sizes[edge.u]; ++su)
        for (int sv = 0; sv < m.state_sizes[edge.v]; ++sv)
            f.table[su * m.state_sizes[edge.v] + sv] = edge_factor(m, e, su, sv);
    return f;
}

}  // namespace

double forest_partition(const PairwiseModel& m, const ForestFamily& family) {
    m.validate();
    std::vector<Factor> tables(m.graph.n_edges());
    for (int e = 0; e < m.graph.n_edges(); ++e) tables[e] = edge_factor_table(m, e);
    double total = 0.0;
    std::vector<Factor> factors;
    for (const EdgeSet& forest : family.forests) {
        factors.clear();
        for (int e : forest) factors.push_back(tables[e]);
        total += sum_product(m.state_sizes, factors);
    }
    return total;
}

double forest_partition_brute(const PairwiseModel& m, const ForestFamily& family) {
    double count = 1.0;
    for (int k : m.state_sizes) count *= k;
    if (count > 16384.0)
        throw CapExceeded("brute-force forest partition limited to 2^14 states");
    int n = m.graph.n_nodes();
    std::vector<int> state(n, 0);
    double total = 0.0;
    while (true) {
        for (const EdgeSet& forest : family.forests) {
            double prod = 1.0;
            for (int e : forest) {
                const Edge& edge = m.graph.edge(e);
                prod *= edge_factor(m, e, state[edge.u], state[edge.v]);
            }
            total += prod;
        }
        int k = 0;
        while (k < n && state[k] + 1 == m.state_sizes[k]) state[k++] = 0;
        if (k == n) break;
        ++state[k];
    }
    return total;
}

double graph_polynomial(const PairwiseModel& m, const EdgeSet& subgraph,
                        const std::vector<int>& state) {
    double prod = 1.0;
    for (int e : subgraph) {
        const Edge& edge = m.graph.edge(e);
        prod *= 1.0 + edge_factor(m, e, state[edge.u], state[edge.v]);
    }
    return prod;
}

RootedDecomposition orthogonalize(const ForestFamily& family, const TreeCotree& tc) {
    if (family.graph != tc.graph)
        throw std::invalid_argument("family and tree-cotree graphs differ");
    int k = static_cast<int>(tc.cotree_edges.size());
    if (k > 20) throw CapExceeded("orthogonalize limited to 20 cotree edges");

    // Downward recursion over cotree subsets, largest first: each part takes
    // the rooted forests not already claimed by a strict superset.
    std::vector<unsigned> masks;
    for (unsigned mask = 1; mask < (1u << k); ++mask) masks.push_back(mask);
    std::sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
        int pa = std::popcount(a), pb = std::popcount(b);
        return pa != pb ? pa > pb : a < b;
    });

    RootedDecomposition decomposition;
    std::set<EdgeSet> assigned;
    for (unsigned mask : masks) {
        EdgeSet subset;
        for (int i = 0; i < k; ++i)
            if (mask & (1u << i)) subset.push_back(tc.cotree_edges[i]);
        std::vector<EdgeSet> part;
        for (const EdgeSet& forest : family.forests) {
            if (!std::includes(forest.begin(), forest.end(), subset.begin(),
                               subset.end()))
                continue;
            if (assigned.count(forest)) continue;
            part.push_back(forest);
        }
        for (const EdgeSet& forest : part) assigned.insert(forest);
        if (!part.empty()) decomposition.parts[subset] = std::move(part);
    }
    for (const EdgeSet& forest : family.forests)
        if (!assigned.count(forest)) decomposition.tree_part.push_back(forest);
    return decomposition;
}

void dump_family(const ForestFamily& family, std::ostream& out) {
    out << "# forests=" << family.forests.size()
        << " edges=" << (family.graph ? family.graph->n_edges() : 0) << "\n";
    for (const EdgeSet& forest : family.forests) {
        for (size_t i = 0; i < forest.size(); ++i) {
            if (i) out << ' ';
            out << forest[i];
        }
        out << "\n";
    }
}

}  // namespace forestz
