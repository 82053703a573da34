#pragma once

#include <utility>
#include <vector>

#include "forestz/forest.hpp"
#include "forestz/graph.hpp"
#include "forestz/model.hpp"

namespace forestz {

// S_L(A) = L * int_0^1 (1-t)^(L-1) e^(At) dt, three routes.
struct SIntegralResult {
    double closed_form = 0.0;
    double series_3term = 0.0;
    double quadrature = 0.0;
};

// Closed form via the regularized lower incomplete gamma (series branch for
// A <= 0 and tiny |A|); quadrature by adaptive Simpson.
SIntegralResult s_integral(int l, double a);

// Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0.
double lower_regularized_gamma(double a, double x);

struct MultiCycleBound {
    double product = 1.0;  // prod_k (1 + 2k b / L_k)^(1/(2k))
    double loose = 1.0;    // 1 + K b / min(L)
};

MultiCycleBound multi_cycle_bound(int k, const std::vector<int>& lengths,
                                  double beta_hbar);

struct BoundReport {
    double q = 0.0;
    int l_star = 0;
    bool sparse = true;
    double bound = 0.0;
    bool regime_warning = false;  // q >= 1: bound no longer decays
};

// Piecewise cycle-correction bound: q^(L*-1)/L* in the sparse regime,
// q^(L*-1) e^(rho beta sup|H|) in the dense regime.
BoundReport error_bound(const PairwiseModel& m, const DensityReport& report,
                        double rho);

// Both sides of the single-cycle forest identity
// F(e o T) = F(T) + e o (F(T) - F(T_e) o C~_e), returned for equality checks.
std::pair<ForestFamily, ForestFamily> single_cycle_identity(const TreeCotree& tc,
                                                            int cotree_edge);

// Subtraction families for the second- and third-order cycle corrections:
// the reduced-cycle edge sets of Q(e1,e2) or Q(e1,e2,e3), with the square
// terms gated out when the union and symmetric-difference cycles coincide.
std::vector<EdgeSet> q_correction_sets(const TreeCotree& tc,
                                       const std::vector<int>& cotree_edges);

// First-order high-temperature approximation
// Z1 = sum_s (1 + beta sum_cotree H_e) e^(beta sum_T H)
//    - sum_cotree beta^|C_e| (prod_{C_e} H) e^(beta sum_{T_e} H),
// with every inner sum evaluated by tree contraction.
double first_order_partition(const PairwiseModel& m, const TreeCotree& tc);

// Closed cycle observable: prod over cycle edges of beta H_e(state).
double cycle_observable(const PairwiseModel& m, const Cycle& c,
                        const std::vector<int>& state);

}  // namespace forestz
