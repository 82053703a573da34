#include "forestz/contraction.hpp"

#include <map>
#include <set>
#include <stdexcept>

namespace forestz {

namespace {

using Unary = std::map<int, std::vector<double>>;

void multiply_unary(Unary& unary, int node, const std::vector<double>& msg) {
    auto it = unary.find(node);
    if (it == unary.end()) {
        unary[node] = msg;
    } else {
        if (it->second.size() != msg.size())
            throw std::logic_error("unary size mismatch");
        for (size_t s = 0; s < msg.size(); ++s) it->second[s] *= msg[s];
    }
}

// Sum over the configurations of every node touched by `factors` or `unary`.
double eliminate(const std::vector<int>& sizes, std::vector<Factor> factors,
                 Unary unary) {
    std::vector<char> active(factors.size(), 1);
    size_t remaining = factors.size();
    std::map<int, std::set<size_t>> at_node;
    for (size_t f = 0; f < factors.size(); ++f) {
        at_node[factors[f].u].insert(f);
        at_node[factors[f].v].insert(f);
    }
    bool progress = true;
    while (remaining > 0 && progress) {
        progress = false;
        for (auto& [u, fset] : at_node) {
            if (fset.size() != 1) continue;
            size_t fid = *fset.begin();
            const Factor& f = factors[fid];
            int v = (f.u == u) ? f.v : f.u;
            if (v == u) throw std::logic_error("self factor");
            std::vector<double> vec_u = unary.count(u)
                                            ? unary[u]
                                            : std::vector<double>(sizes[u], 1.0);
            std::vector<double> msg(sizes[v], 0.0);
            for (int su = 0; su < sizes[u]; ++su)
                for (int sv = 0; sv < sizes[v]; ++sv) {
                    double val = (f.u == u) ? f.table[su * sizes[v] + sv]
                                            : f.table[sv * sizes[u] + su];
                    msg[sv] += vec_u[su] * val;
                }
            multiply_unary(unary, v, msg);
            unary.erase(u);
            active[fid] = 0;
            --remaining;
            at_node[v].erase(fid);
            fset.clear();
            progress = true;
            break;
        }
    }
    if (remaining == 0) {
        double result = 1.0;
        for (const auto& [node, vec] : unary) {
            double s = 0.0;
            for (double x : vec) s += x;
            result *= s;
        }
        return result;
    }
    // Cycles remain: branch over the states of the lowest remaining node.
    int w = -1;
    for (const auto& [node, fset] : at_node)
        if (!fset.empty()) { w = node; break; }
    std::vector<double> vec_w =
        unary.count(w) ? unary[w] : std::vector<double>(sizes[w], 1.0);
    Unary base_unary = unary;
    base_unary.erase(w);
    std::vector<Factor> base_factors;
    std::vector<size_t> sliced;
    for (size_t f = 0; f < factors.size(); ++f) {
        if (!active[f]) continue;
        if (factors[f].u == w || factors[f].v == w)
            sliced.push_back(f);
        else
            base_factors.push_back(factors[f]);
    }
    double total = 0.0;
    for (int sw = 0; sw < sizes[w]; ++sw) {
        if (vec_w[sw] == 0.0) continue;
        Unary branch_unary = base_unary;
        for (size_t fid : sliced) {
            const Factor& f = factors[fid];
            int other = (f.u == w) ? f.v : f.u;
            std::vector<double> slice(sizes[other]);
            for (int so = 0; so < sizes[other]; ++so)
                slice[so] = (f.u == w) ? f.table[sw * sizes[other] + so]
                                       : f.table[so * sizes[w] + sw];
            multiply_unary(branch_unary, other, slice);
        }
        total += vec_w[sw] * eliminate(sizes, base_factors, branch_unary);
    }
    return total;
}

}  // namespace

double sum_product(const std::vector<int>& state_sizes,
                   const std::vector<Factor>& factors) {
    return sum_product(state_sizes, factors, {});
}

double sum_product(const std::vector<int>& state_sizes,
                   const std::vector<Factor>& factors,
                   const std::vector<std::pair<int, int>>& clamps) {
    std::map<int, int> clamp;
    for (auto [node, state] : clamps) clamp[node] = state;
    double scalar = 1.0;
    Unary unary;
    std::vector<Factor> reduced;
    std::set<int> touched;
    for (const Factor& f : factors) {
        bool cu = clamp.count(f.u), cv = clamp.count(f.v);
        int size_v = state_sizes[f.v];
        if (cu && cv) {
            scalar *= f.table[clamp[f.u] * size_v + clamp[f.v]];
        } else if (cu) {
            std::vector<double> slice(size_v);
            for (int sv = 0; sv < size_v; ++sv)
                slice[sv] = f.table[clamp[f.u] * size_v + sv];
            multiply_unary(unary, f.v, slice);
            touched.insert(f.v);
        } else if (cv) {
            std::vector<double> slice(state_sizes[f.u]);
            for (int su = 0; su < state_sizes[f.u]; ++su)
                slice[su] = f.table[su * size_v + clamp[f.v]];
            multiply_unary(unary, f.u, slice);
            touched.insert(f.u);
        } else {
            reduced.push_back(f);
            touched.insert(f.u);
            touched.insert(f.v);
        }
    }
    double result = scalar * eliminate(state_sizes, std::move(reduced), std::move(unary));
    for (int node = 0; node < static_cast<int>(state_sizes.size()); ++node)
        if (!touched.count(node) && !clamp.count(node))
            result *= state_sizes[node];
    return result;
}

}  // namespace forestz
