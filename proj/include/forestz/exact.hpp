#pragma once

#include <vector>

#include "forestz/model.hpp"

namespace forestz {

inline constexpr double kDefaultStateCap = 4194304.0;  // 2^22

struct ExactResult {
    double log_z = 0.0;
    double z = 0.0;  // exp(log_z) when representable, +inf otherwise
    std::vector<std::vector<double>> marginals;
};

// Brute-force partition function by exhaustive configuration enumeration,
// accumulated in log space. Refuses models above the state cap.
ExactResult exact_partition(const PairwiseModel& m, double state_cap = kDefaultStateCap);

// Per-node distributions p_i(s) from the same sweep.
std::vector<std::vector<double>> exact_marginals(const PairwiseModel& m,
                                                 double state_cap = kDefaultStateCap);

}  // namespace forestz
