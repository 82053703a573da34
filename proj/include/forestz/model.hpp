#pragma once

#include <string>
#include <vector>

#include "forestz/graph.hpp"

namespace forestz {

// Pairwise Hamiltonian over finite per-node state spaces. The partition
// function weight is exp(beta * sum_edges H_ij(s_i, s_j)). Immutable after
// construction.
struct PairwiseModel {
    InteractionGraph graph;
    std::vector<int> state_sizes;            // per node, >= 2
    std::vector<std::vector<double>> couplings;  // per edge, row-major (s_u * size_v + s_v)
    double beta = 1.0;

    double coupling(int edge, int su, int sv) const {
        return couplings[edge][su * state_sizes[graph.edge(edge).v] + sv];
    }
    // sup over edges and state pairs of |H_ij|.
    double sup_h() const;
    // log of the total configuration count.
    double log_state_count() const;

    void validate() const;
};

struct TemperatureReport {
    double sup_h = 0.0;
    double beta_c = 0.0;  // infinity for a free model
    double q = 0.0;
    bool below_critical = true;
    bool free_model = false;
};

// Ising specialization: states {+1,-1}, H_ij(s,s') = J s s', halved when
// half_factor is set.
PairwiseModel ising_model(const InteractionGraph& g, double j, bool half_factor,
                          double beta);

// Principal branch Lambert W for x >= 0, residual |W e^W - x| < 1e-12.
double lambert_w(double x);

// beta_c = kappa * W(1) / sup|H|, q evaluated at the model's beta.
TemperatureReport critical_beta(const PairwiseModel& m, double kappa = 1.0);

// x_ij = exp(beta H_ij(s_i, s_j)) - 1.
double edge_factor(const PairwiseModel& m, int edge, int su, int sv);

// sup over state pairs of |exp(beta H_ij) - 1|; the Kruskal weight.
double edge_weight_for_mst(const PairwiseModel& m, int edge);

// The model's graph reweighted by edge_weight_for_mst.
InteractionGraph mst_weighted_graph(const PairwiseModel& m);

// Max spanning tree of the reweighted graph (the reference tree choice).
TreeCotree optimal_tree(const PairwiseModel& m);

// Model config file: flat key-value text with keys model=ising|table,
// J, half_factor, beta, graph, states, table.
PairwiseModel load_model(const std::string& config_path);

}  // namespace forestz
