#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "forestz/model.hpp"

namespace forestz {

struct Beliefs {
    std::vector<std::vector<double>> marginals;  // per node, sums to 1
    bool converged = false;
    int iterations = 0;
    double max_residual = 0.0;
    std::optional<double> log_z;  // trees only
};

enum class BpSchedule { TreeTwoPass, DampedParallel };

struct BpOptions {
    BpSchedule schedule = BpSchedule::DampedParallel;
    double tol = 1e-10;
    int max_iters = 10000;
    double damping = 0.5;       // new = (1-damping)*update + damping*old
    bool random_init = false;   // damped schedule only; seeded below
    std::uint64_t init_seed = 0;
};

// Sum-product belief propagation. The tree schedule requires an acyclic
// graph, terminates in exactly two passes and is exact; the damped schedule
// iterates synchronously until the max L-inf message change drops below tol.
// Non-convergence is reported via the converged flag, not an error.
Beliefs run_bp(const PairwiseModel& m, const BpOptions& options = {});

// log Z of an acyclic model by leaf-elimination contraction with per-step
// normalization.
double log_partition_tree(const PairwiseModel& m);

// Mean over nodes of KL(p_i || q_i); p=0 terms contribute 0, q=0 with p>0
// yields +infinity.
double kl_divergence(const Beliefs& p, const Beliefs& q);

}  // namespace forestz
