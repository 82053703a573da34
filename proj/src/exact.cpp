#include "forestz/exact.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace forestz {

namespace {

// Mixed-radix odometer sweep with incremental energy updates. Calls
// visit(exponent) once per configuration; the per-node states live in
// `states` for callers that need them.
void sweep(const PairwiseModel& m, std::vector<int>& states,
           const std::function<void(double)>& visit) {
    const auto& g = m.graph;
    int n = g.n_nodes();
    states.assign(n, 0);
    double energy = 0.0;
    for (int e = 0; e < g.n_edges(); ++e) energy += m.coupling(e, 0, 0);

    auto set_state = [&](int node, int value) {
        int old = states[node];
        for (auto [eidx, other] : g.incident(node)) {
            const Edge& edge = g.edge(eidx);
            if (edge.u == node) {
                energy -= m.coupling(eidx, old, states[other]);
                energy += m.coupling(eidx, value, states[other]);
            } else {
                energy -= m.coupling(eidx, states[other], old);
                energy += m.coupling(eidx, states[other], value);
            }
        }
        states[node] = value;
    };

    while (true) {
        visit(m.beta * energy);
        int k = 0;
        while (k < n && states[k] + 1 == m.state_sizes[k]) {
            set_state(k, 0);
            ++k;
        }
        if (k == n) break;
        set_state(k, states[k] + 1);
    }
}

void check_cap(const PairwiseModel& m, double cap) {
    double count = 1.0;
    for (int k : m.state_sizes) count *= k;
    if (count > cap)
        throw CapExceeded("state count " + std::to_string(count) +
                          " exceeds cap " + std::to_string(cap) +
                          "; rerun with state_cap >= " + std::to_string(count));
}

ExactResult compute(const PairwiseModel& m, double cap, bool with_marginals) {
    m.validate();
    check_cap(m, cap);
    std::vector<int> states;

    // Pass 1: streaming log-sum-exp.
    double max_x = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    sweep(m, states, [&](double x) {
        if (x <= max_x) {
            sum += std::exp(x - max_x);
        } else {
            sum = sum * std::exp(max_x - x) + 1.0;
            max_x = x;
        }
    });
    ExactResult result;
    result.log_z = max_x + std::log(sum);
    result.z = std::exp(result.log_z);

    if (with_marginals) {
        result.marginals.resize(m.graph.n_nodes());
        for (int i = 0; i < m.graph.n_nodes(); ++i)
            result.marginals[i].assign(m.state_sizes[i], 0.0);
        double log_z = result.log_z;
        sweep(m, states, [&](double x) {
            double w = std::exp(x - log_z);
            for (size_t i = 0; i < states.size(); ++i)
                result.marginals[i][states[i]] += w;
        });
    }
    return result;
}

}  // namespace

ExactResult exact_partition(const PairwiseModel& m, double state_cap) {
    return compute(m, state_cap, /*with_marginals=*/true);
}

std::vector<std::vector<double>> exact_marginals(const PairwiseModel& m,
                                                 double state_cap) {
    return compute(m, state_cap, /*with_marginals=*/true).marginals;
}

}  // namespace forestz
