#include "forestz/bp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "forestz/rng.hpp"

namespace forestz {

namespace {

bool is_acyclic(const InteractionGraph& g) {
    detail::DisjointSets dsu(g.n_nodes());
    for (const Edge& e : g.edges())
        if (!dsu.unite(e.u, e.v)) return false;
    return true;
}

struct Messages {
    // Directed message 2*e+0 flows edge(e).u -> edge(e).v, indexed by the
    // target's states; 2*e+1 is the reverse.
    std::vector<std::vector<double>> values;

    static int incoming(const InteractionGraph& g, int e, int target) {
        return g.edge(e).v == target ? 2 * e : 2 * e + 1;
    }
    static int outgoing(const InteractionGraph& g, int e, int source) {
        return g.edge(e).u == source ? 2 * e : 2 * e + 1;
    }
};

// psi(s_source, s_target) for a directed edge.
double psi(const PairwiseModel& m, int e, int source, int s_source,
           int s_target) {
    const Edge& edge = m.graph.edge(e);
    return (edge.u == source)
               ? std::exp(m.beta * m.coupling(e, s_source, s_target))
               : std::exp(m.beta * m.coupling(e, s_target, s_source));
}

std::vector<double> compute_message(const PairwiseModel& m,
                                    const Messages& msgs, int e, int source) {
    const InteractionGraph& g = m.graph;
    int target = (g.edge(e).u == source) ? g.edge(e).v : g.edge(e).u;
    std::vector<double> out(m.state_sizes[target], 0.0);
    for (int ss = 0; ss < m.state_sizes[source]; ++ss) {
        double in_prod = 1.0;
        for (auto [f, w] : g.incident(source)) {
            if (f == e) continue;
            in_prod *= msgs.values[Messages::incoming(g, f, source)][ss];
        }
        for (int st = 0; st < m.state_sizes[target]; ++st)
            out[st] += psi(m, e, source, ss, st) * in_prod;
    }
    double sum = 0.0;
    for (double x : out) sum += x;
    if (sum > 0.0)
        for (double& x : out) x /= sum;
    return out;
}

std::vector<std::vector<double>> beliefs_from(const PairwiseModel& m,
                                              const Messages& msgs) {
    const InteractionGraph& g = m.graph;
    std::vector<std::vector<double>> beliefs(g.n_nodes());
    for (int i = 0; i < g.n_nodes(); ++i) {
        beliefs[i].assign(m.state_sizes[i], 1.0);
        for (auto [f, w] : g.incident(i)) {
            const auto& msg = msgs.values[Messages::incoming(g, f, i)];
            for (int s = 0; s < m.state_sizes[i]; ++s) beliefs[i][s] *= msg[s];
        }
        double sum = 0.0;
        for (double x : beliefs[i]) sum += x;
        for (double& x : beliefs[i]) x /= sum;
    }
    return beliefs;
}

Messages uniform_messages(const PairwiseModel& m) {
    Messages msgs;
    msgs.values.resize(2 * m.graph.n_edges());
    for (int e = 0; e < m.graph.n_edges(); ++e) {
        const Edge& edge = m.graph.edge(e);
        msgs.values[2 * e].assign(m.state_sizes[edge.v],
                                  1.0 / m.state_sizes[edge.v]);
        msgs.values[2 * e + 1].assign(m.state_sizes[edge.u],
                                      1.0 / m.state_sizes[edge.u]);
    }
    return msgs;
}

Beliefs run_tree_two_pass(const PairwiseModel& m) {
    const InteractionGraph& g = m.graph;
    if (!is_acyclic(g))
        throw std::invalid_argument("tree_two_pass requires an acyclic graph");
    Messages msgs = uniform_messages(m);

    // BFS orders per component.
    std::vector<int> order, parent_edge(g.n_nodes(), -1);
    std::vector<char> seen(g.n_nodes(), 0);
    for (int root = 0; root < g.n_nodes(); ++root) {
        if (seen[root]) continue;
        seen[root] = 1;
        std::deque<int> queue{root};
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            order.push_back(u);
            for (auto [e, w] : g.incident(u)) {
                if (seen[w]) continue;
                seen[w] = 1;
                parent_edge[w] = e;
                queue.push_back(w);
            }
        }
    }
    // Upward pass: child -> parent, leaves first.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int u = *it;
        if (parent_edge[u] < 0) continue;
        msgs.values[Messages::outgoing(g, parent_edge[u], u)] =
            compute_message(m, msgs, parent_edge[u], u);
    }
    // Downward pass: parent -> child.
    for (int u : order) {
        if (parent_edge[u] < 0) continue;
        const Edge& e = g.edge(parent_edge[u]);
        int parent = (e.u == u) ? e.v : e.u;
        msgs.values[Messages::outgoing(g, parent_edge[u], parent)] =
            compute_message(m, msgs, parent_edge[u], parent);
    }

    Beliefs beliefs;
    beliefs.marginals = beliefs_from(m, msgs);
    beliefs.converged = true;
    beliefs.iterations = 2;
    beliefs.max_residual = 0.0;
    beliefs.log_z = log_partition_tree(m);
    return beliefs;
}

Beliefs run_damped(const PairwiseModel& m, const BpOptions& options) {
    const InteractionGraph& g = m.graph;
    Messages msgs = uniform_messages(m);
    if (options.random_init) {
        SplitMix64 rng(options.init_seed);
        for (auto& msg : msgs.values) {
            double sum = 0.0;
            for (double& x : msg) {
                x = 0.25 + 0.75 * rng.uniform();
                sum += x;
            }
            for (double& x : msg) x /= sum;
        }
    }
    Beliefs beliefs;
    Messages next = msgs;
    double lambda = options.damping;
    for (int iter = 1; iter <= options.max_iters; ++iter) {
        double residual = 0.0;
        for (int e = 0; e < g.n_edges(); ++e) {
            const Edge& edge = g.edge(e);
            for (int source : {edge.u, edge.v}) {
                int id = Messages::outgoing(g, e, source);
                std::vector<double> update = compute_message(m, msgs, e, source);
                for (size_t s = 0; s < update.size(); ++s) {
                    double damped =
                        (1.0 - lambda) * update[s] + lambda * msgs.values[id][s];
                    residual = std::max(residual,
                                        std::abs(damped - msgs.values[id][s]));
                    next.values[id][s] = damped;
                }
            }
        }
        std::swap(msgs.values, next.values);
        beliefs.iterations = iter;
        beliefs.max_residual = residual;
        if (residual < options.tol) {
            beliefs.converged = true;
            break;
        }
    }
    beliefs.marginals = beliefs_from(m, msgs);
    return beliefs;
}

}  // namespace

Beliefs run_bp(const PairwiseModel& m, const BpOptions& options) {
    m.validate();
    if (options.schedule == BpSchedule::TreeTwoPass) return run_tree_two_pass(m);
    if (options.damping < 0.0 || options.damping >= 1.0)
        throw std::invalid_argument("damping must lie in [0, 1)");
    return run_damped(m, options);
}

double log_partition_tree(const PairwiseModel& m) {
    m.validate();
    const InteractionGraph& g = m.graph;
    if (!is_acyclic(g))
        throw std::invalid_argument("log_partition_tree requires an acyclic graph");

    std::vector<int> degree(g.n_nodes());
    std::vector<char> done(g.n_nodes(), 0);
    std::vector<char> edge_done(g.n_edges(), 0);
    std::vector<std::vector<double>> unary(g.n_nodes());
    for (int i = 0; i < g.n_nodes(); ++i) {
        degree[i] = static_cast<int>(g.incident(i).size());
        unary[i].assign(m.state_sizes[i], 1.0);
    }
    double log_acc = 0.0;
    std::deque<int> queue;
    for (int i = 0; i < g.n_nodes(); ++i)
        if (degree[i] <= 1) queue.push_back(i);
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        if (done[u]) continue;
        done[u] = 1;
        if (degree[u] == 0) {
            double sum = 0.0;
            for (double x : unary[u]) sum += x;
            log_acc += std::log(sum);
            continue;
        }
        int e = -1, v = -1;
        for (auto [f, w] : g.incident(u))
            if (!edge_done[f]) { e = f; v = w; break; }
        edge_done[e] = 1;
        std::vector<double> msg(m.state_sizes[v], 0.0);
        for (int su = 0; su < m.state_sizes[u]; ++su)
            for (int sv = 0; sv < m.state_sizes[v]; ++sv)
                msg[sv] += psi(m, e, u, su, sv) * unary[u][su];
        double scale = *std::max_element(msg.begin(), msg.end());
        log_acc += std::log(scale);
        for (int sv = 0; sv < m.state_sizes[v]; ++sv)
            unary[v][sv] *= msg[sv] / scale;
        if (--degree[v] <= 1 && !done[v]) queue.push_back(v);
    }
    return log_acc;
}

double kl_divergence(const Beliefs& p, const Beliefs& q) {
    if (p.marginals.size() != q.marginals.size())
        throw std::invalid_argument("belief node count mismatch");
    double total = 0.0;
    for (size_t i = 0; i < p.marginals.size(); ++i) {
        if (p.marginals[i].size() != q.marginals[i].size())
            throw std::invalid_argument("belief state size mismatch");
        for (size_t s = 0; s < p.marginals[i].size(); ++s) {
            double pi = p.marginals[i][s], qi = q.marginals[i][s];
            if (pi == 0.0) continue;
            if (qi == 0.0) return std::numeric_limits<double>::infinity();
            total += pi * std::log(pi / qi);
        }
    }
    return total / static_cast<double>(p.marginals.size());
}

}  // namespace forestz
