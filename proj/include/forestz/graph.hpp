#pragma once

#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace forestz {

// Undirected edge with canonical orientation u < v.
struct Edge {
    int u = 0;
    int v = 0;
    double weight = 1.0;
};

// Sorted list of edge indices into an InteractionGraph.
using EdgeSet = std::vector<int>;

inline constexpr int kInfiniteGirth = std::numeric_limits<int>::max();

// Thrown when a configured enumeration cap would be exceeded.
struct CapExceeded : std::runtime_error {
    explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Undirected weighted graph over a fixed node set. Edges are stored in
// canonical order (min endpoint, then max endpoint) and all iteration
// downstream respects that order. Immutable after construction.
class InteractionGraph {
  public:
    InteractionGraph() = default;
    InteractionGraph(int n_nodes, std::vector<Edge> edges);

    int n_nodes() const { return n_nodes_; }
    int n_edges() const { return static_cast<int>(edges_.size()); }
    const Edge& edge(int idx) const { return edges_[idx]; }
    const std::vector<Edge>& edges() const { return edges_; }

    // (edge index, other endpoint) pairs for a node, in edge index order.
    const std::vector<std::pair<int, int>>& incident(int node) const {
        return adjacency_[node];
    }

    // Edge index for an unordered pair, or -1 when absent.
    int find_edge(int a, int b) const;

  private:
    int n_nodes_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, int>>> adjacency_;
};

struct Cycle {
    EdgeSet edges;  // sorted edge indices
    int length() const { return static_cast<int>(edges.size()); }
};

// Spanning tree/forest of a graph plus the cotree edge list and the
// fundamental cycle closed by each cotree edge.
struct TreeCotree {
    const InteractionGraph* graph = nullptr;
    EdgeSet tree_edges;
    EdgeSet cotree_edges;
    std::vector<Cycle> fundamental_cycles;  // aligned with cotree_edges
};

struct DensityReport {
    bool has_cycles = false;
    int k_max_dual_degree = 0;
    int girth = kInfiniteGirth;
    double ratio = 0.0;
    bool sparse = true;
};

// Minimum cycle length, or kInfiniteGirth for acyclic graphs.
int girth(const InteractionGraph& g);

// Maximum-weight spanning forest via Kruskal. Ties are broken by canonical
// edge order, so the result is deterministic. Fundamental cycles are filled
// in for every cotree edge.
TreeCotree max_spanning_tree(const InteractionGraph& g);

// One cycle per cotree edge: the edge plus the unique tree path between its
// endpoints.
std::vector<Cycle> fundamental_cycles(const TreeCotree& tc);

enum class CycleOp { Union, Intersection, SymDiff };

EdgeSet cycle_algebra(const Cycle& a, const Cycle& b, CycleOp op);

// Dual-graph density classification: vertices are the fundamental cycles of
// a max spanning tree split, joined when two cycles share a graph edge.
// K is the maximum dual degree; label sparse iff K/girth < threshold.
DensityReport classify_density(const InteractionGraph& g, double threshold = 0.5);

// Edge-list text format: first line N, then lines "i j [weight]", comments
// starting with '#'. Parse errors carry line numbers.
InteractionGraph parse_graph(std::istream& in);
InteractionGraph load_graph(const std::string& path);

namespace detail {

// Union-find over node indices.
class DisjointSets {
  public:
    explicit DisjointSets(int n) : parent_(n), rank_(n, 0) {
        for (int i = 0; i < n; ++i) parent_[i] = i;
    }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return true;
    }

  private:
    std::vector<int> parent_;
    std::vector<int> rank_;
};

}  // namespace detail

}  // namespace forestz
