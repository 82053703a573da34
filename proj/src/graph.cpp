#include "forestz/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

namespace forestz {

InteractionGraph::InteractionGraph(int n_nodes, std::vector<Edge> edges)
    : n_nodes_(n_nodes), edges_(std::move(edges)) {
    if (n_nodes_ < 0) throw std::invalid_argument("negative node count");
    for (auto& e : edges_) {
        if (e.u > e.v) std::swap(e.u, e.v);
        if (e.u < 0 || e.v >= n_nodes_)
            throw std::invalid_argument("edge endpoint out of range");
        if (e.u == e.v) throw std::invalid_argument("self-loop not allowed");
        if (e.weight < 0.0 || !std::isfinite(e.weight))
            throw std::invalid_argument("edge weight must be finite and >= 0");
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
        return std::pair(a.u, a.v) < std::pair(b.u, b.v);
    });
    for (size_t i = 1; i < edges_.size(); ++i) {
        if (edges_[i - 1].u == edges_[i].u && edges_[i - 1].v == edges_[i].v)
            throw std::invalid_argument("duplicate undirected edge");
    }
    adjacency_.assign(n_nodes_, {});
    for (int idx = 0; idx < n_edges(); ++idx) {
        adjacency_[edges_[idx].u].emplace_back(idx, edges_[idx].v);
        adjacency_[edges_[idx].v].emplace_back(idx, edges_[idx].u);
    }
}

int InteractionGraph::find_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    Edge probe{a, b, 0.0};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), probe,
                               [](const Edge& x, const Edge& y) {
                                   return std::pair(x.u, x.v) < std::pair(y.u, y.v);
                               });
    if (it != edges_.end() && it->u == a && it->v == b)
        return static_cast<int>(it - edges_.begin());
    return -1;
}

int girth(const InteractionGraph& g) {
    int best = kInfiniteGirth;
    std::vector<int> dist(g.n_nodes());
    std::vector<int> via_edge(g.n_nodes());
    for (int root = 0; root < g.n_nodes(); ++root) {
        std::fill(dist.begin(), dist.end(), -1);
        std::fill(via_edge.begin(), via_edge.end(), -1);
        std::deque<int> queue{root};
        dist[root] = 0;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            if (2 * dist[u] + 1 >= best) continue;
            for (auto [eidx, w] : g.incident(u)) {
                if (eidx == via_edge[u]) continue;
                if (dist[w] < 0) {
                    dist[w] = dist[u] + 1;
                    via_edge[w] = eidx;
                    queue.push_back(w);
                } else {
                    best = std::min(best, dist[u] + dist[w] + 1);
                }
            }
        }
    }
    return best;
}

namespace {

// Tree path between a and b restricted to the given tree edges.
EdgeSet tree_path(const InteractionGraph& g, const EdgeSet& tree, int a, int b) {
    std::vector<char> in_tree(g.n_edges(), 0);
    for (int e : tree) in_tree[e] = 1;
    std::vector<int> parent(g.n_nodes(), -1), parent_edge(g.n_nodes(), -1);
    std::deque<int> queue{a};
    std::vector<char> seen(g.n_nodes(), 0);
    seen[a] = 1;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        if (u == b) break;
        for (auto [eidx, w] : g.incident(u)) {
            if (!in_tree[eidx] || seen[w]) continue;
            seen[w] = 1;
            parent[w] = u;
            parent_edge[w] = eidx;
            queue.push_back(w);
        }
    }
    EdgeSet path;
    for (int cur = b; cur != a; cur = parent[cur]) {
        if (parent_edge[cur] < 0)
            throw std::logic_error("endpoints not connected within tree");
        path.push_back(parent_edge[cur]);
    }
    std::sort(path.begin(), path.end());
    return path;
}

}  // namespace

TreeCotree max_spanning_tree(const InteractionGraph& g) {
    std::vector<int> order(g.n_edges());
    for (int i = 0; i < g.n_edges(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return g.edge(a).weight > g.edge(b).weight;
    });
    detail::DisjointSets dsu(g.n_nodes());
    TreeCotree tc;
    tc.graph = &g;
    for (int e : order) {
        if (dsu.unite(g.edge(e).u, g.edge(e).v))
            tc.tree_edges.push_back(e);
        else
            tc.cotree_edges.push_back(e);
    }
    std::sort(tc.tree_edges.begin(), tc.tree_edges.end());
    std::sort(tc.cotree_edges.begin(), tc.cotree_edges.end());
    tc.fundamental_cycles = fundamental_cycles(tc);
    return tc;
}

std::vector<Cycle> fundamental_cycles(const TreeCotree& tc) {
    const InteractionGraph& g = *tc.graph;
    std::vector<Cycle> cycles;
    cycles.reserve(tc.cotree_edges.size());
    for (int e : tc.cotree_edges) {
        EdgeSet path = tree_path(g, tc.tree_edges, g.edge(e).u, g.edge(e).v);
        path.push_back(e);
        std::sort(path.begin(), path.end());
        cycles.push_back(Cycle{std::move(path)});
    }
    return cycles;
}

EdgeSet cycle_algebra(const Cycle& a, const Cycle& b, CycleOp op) {
    EdgeSet out;
    switch (op) {
        case CycleOp::Union:
            std::set_union(a.edges.begin(), a.edges.end(), b.edges.begin(),
                           b.edges.end(), std::back_inserter(out));
            break;
        case CycleOp::Intersection:
            std::set_intersection(a.edges.begin(), a.edges.end(), b.edges.begin(),
                                  b.edges.end(), std::back_inserter(out));
            break;
        case CycleOp::SymDiff:
            std::set_symmetric_difference(a.edges.begin(), a.edges.end(),
                                          b.edges.begin(), b.edges.end(),
                                          std::back_inserter(out));
            break;
    }
    return out;
}

DensityReport classify_density(const InteractionGraph& g, double threshold) {
    DensityReport report;
    TreeCotree tc = max_spanning_tree(g);
    const auto& cycles = tc.fundamental_cycles;
    if (cycles.empty()) {
        report.has_cycles = false;
        return report;
    }
    report.has_cycles = true;
    report.girth = girth(g);
    int n = static_cast<int>(cycles.size());
    report.k_max_dual_degree = 0;
    for (int i = 0; i < n; ++i) {
        int degree = 0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (!cycle_algebra(cycles[i], cycles[j], CycleOp::Intersection).empty())
                ++degree;
        }
        report.k_max_dual_degree = std::max(report.k_max_dual_degree, degree);
    }
    report.ratio = static_cast<double>(report.k_max_dual_degree) / report.girth;
    report.sparse = report.ratio < threshold;
    return report;
}

InteractionGraph parse_graph(std::istream& in) {
    std::string line;
    int line_no = 0;
    int n_nodes = -1;
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream fields(line);
        if (n_nodes < 0) {
            if (!(fields >> n_nodes)) {
                if (fields.eof()) { n_nodes = -1; continue; }  // blank line
                throw std::invalid_argument("line " + std::to_string(line_no) +
                                            ": expected node count");
            }
            continue;
        }
        int i, j;
        if (!(fields >> i)) continue;  // blank line
        if (!(fields >> j))
            throw std::invalid_argument("line " + std::to_string(line_no) +
                                        ": expected 'i j [weight]'");
        double w = 1.0;
        fields >> w;
        edges.push_back(Edge{i, j, w});
    }
    if (n_nodes < 0) throw std::invalid_argument("missing node count line");
    try {
        return InteractionGraph(n_nodes, std::move(edges));
    } catch (const std::invalid_argument& err) {
        throw std::invalid_argument(std::string("invalid graph: ") + err.what());
    }
}

InteractionGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file: " + path);
    return parse_graph(in);
}

}  // namespace forestz
