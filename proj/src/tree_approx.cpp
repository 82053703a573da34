#include "forestz/tree_approx.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "forestz/contraction.hpp"

namespace forestz {

namespace {

// Lower incomplete gamma by series (x < a + 1).
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper incomplete gamma by continued fraction (x >= a + 1).
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// S_L(A) as the everywhere-convergent series sum_n A^n Gamma(L+1)/Gamma(L+n+1).
double s_series_full(int l, double a) {
    double term = 1.0;
    double sum = 1.0;
    for (int n = 0; n < 1000; ++n) {
        term *= a / (l + n + 1);
        sum += term;
        if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
    }
    return sum;
}

double adaptive_simpson(const std::function<double(double)>& f, double lo,
                        double hi, double flo, double fmid, double fhi,
                        double whole, double tol, int depth) {
    double mid = 0.5 * (lo + hi);
    double lmid = 0.5 * (lo + mid), rmid = 0.5 * (mid + hi);
    double flm = f(lmid), frm = f(rmid);
    double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, lo, mid, flo, flm, fmid, left, tol / 2.0,
                            depth - 1) +
           adaptive_simpson(f, mid, hi, fmid, frm, fhi, right, tol / 2.0,
                            depth - 1);
}

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tol) {
    double mid = 0.5 * (lo + hi);
    double flo = f(lo), fmid = f(mid), fhi = f(hi);
    double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    return adaptive_simpson(f, lo, hi, flo, fmid, fhi, whole, tol, 40);
}

}  // namespace

double lower_regularized_gamma(double a, double x) {
    if (a <= 0.0 || x < 0.0)
        throw std::invalid_argument("lower_regularized_gamma requires a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

SIntegralResult s_integral(int l, double a) {
    if (l < 1) throw std::invalid_argument("s_integral requires l >= 1");
    SIntegralResult result;
    result.series_3term =
        1.0 + a / (l + 1.0) + a * a / ((l + 2.0) * (l + 1.0));
    // The closed form L e^A A^(-L) (Gamma(L) - Gamma(L,A)) has a removable
    // singularity at A = 0 and needs the series route for A < 0.
    if (std::abs(a) < 1e-6 || a < 0.0) {
        result.closed_form = s_series_full(l, a);
    } else {
        double log_gamma_part =
            std::log(static_cast<double>(l)) + a - l * std::log(a) +
            std::lgamma(static_cast<double>(l)) +
            std::log(lower_regularized_gamma(static_cast<double>(l), a));
        result.closed_form = std::exp(log_gamma_part);
    }
    auto f = [l, a](double t) {
        return l * std::pow(1.0 - t, l - 1) * std::exp(a * t);
    };
    result.quadrature = integrate(f, 0.0, 1.0, 1e-13);
    return result;
}

MultiCycleBound multi_cycle_bound(int k, const std::vector<int>& lengths,
                                  double beta_hbar) {
    if (k < 0) throw std::invalid_argument("cycle count must be >= 0");
    if (static_cast<int>(lengths.size()) != k)
        throw std::invalid_argument("lengths size must equal cycle count");
    MultiCycleBound bound;
    if (k == 0) return bound;
    int min_l = *std::min_element(lengths.begin(), lengths.end());
    if (min_l < 3) throw std::invalid_argument("cycle lengths must be >= 3");
    for (int j = 1; j <= k; ++j) {
        double base = 1.0 + 2.0 * j * beta_hbar / lengths[j - 1];
        bound.product *= std::pow(base, 1.0 / (2.0 * j));
    }
    bound.loose = 1.0 + static_cast<double>(k) * beta_hbar / min_l;
    return bound;
}

BoundReport error_bound(const PairwiseModel& m, const DensityReport& report,
                        double rho) {
    if (!report.has_cycles || report.girth == kInfiniteGirth)
        throw std::invalid_argument("error_bound requires a graph with cycles");
    BoundReport out;
    TemperatureReport temp = critical_beta(m);
    out.q = temp.q;
    out.l_star = report.girth;
    out.sparse = report.sparse;
    out.regime_warning = out.q >= 1.0;
    double decay = std::pow(out.q, out.l_star - 1);
    if (out.sparse)
        out.bound = decay / out.l_star;
    else
        out.bound = decay * std::exp(rho * m.beta * m.sup_h());
    return out;
}

namespace {

EdgeSet set_minus(const EdgeSet& a, const EdgeSet& b) {
    EdgeSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
    return out;
}

EdgeSet set_plus(const EdgeSet& a, const EdgeSet& b) {
    EdgeSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                   std::back_inserter(out));
    return out;
}

const Cycle& cycle_of(const TreeCotree& tc, int cotree_edge) {
    for (size_t i = 0; i < tc.cotree_edges.size(); ++i)
        if (tc.cotree_edges[i] == cotree_edge) return tc.fundamental_cycles[i];
    throw std::invalid_argument("edge is not a cotree edge of this split");
}

}  // namespace

std::pair<ForestFamily, ForestFamily> single_cycle_identity(const TreeCotree& tc,
                                                            int cotree_edge) {
    const InteractionGraph& g = *tc.graph;
    const Cycle& cycle = cycle_of(tc, cotree_edge);
    EdgeSet reduced_cycle = set_minus(cycle.edges, EdgeSet{cotree_edge});
    EdgeSet tree_e = set_minus(tc.tree_edges, reduced_cycle);

    ForestFamily left =
        enumerate_forests(g, set_plus(tc.tree_edges, EdgeSet{cotree_edge}));

    ForestFamily tree_family = enumerate_forests(g, tc.tree_edges);
    // F(T_e) o C~_e: exactly the members of F(T) that contain C~_e.
    std::set<EdgeSet> with_reduced_cycle;
    for (const EdgeSet& f : enumerate_forests(g, tree_e).forests)
        with_reduced_cycle.insert(set_plus(f, reduced_cycle));

    ForestFamily right;
    right.graph = &g;
    right.forests = tree_family.forests;
    for (const EdgeSet& f : tree_family.forests) {
        if (with_reduced_cycle.count(f)) continue;
        right.forests.push_back(set_plus(f, EdgeSet{cotree_edge}));
    }
    std::sort(right.forests.begin(), right.forests.end());
    return {std::move(left), std::move(right)};
}

std::vector<EdgeSet> q_correction_sets(const TreeCotree& tc,
                                       const std::vector<int>& cotree_edges) {
    size_t k = cotree_edges.size();
    if (k != 2 && k != 3)
        throw std::invalid_argument("q_correction_sets takes 2 or 3 cotree edges");
    std::vector<Cycle> cycles;
    EdgeSet roots;
    for (int e : cotree_edges) {
        cycles.push_back(cycle_of(tc, e));
        roots.push_back(e);
    }
    std::sort(roots.begin(), roots.end());
    if (std::adjacent_find(roots.begin(), roots.end()) != roots.end())
        throw std::invalid_argument("cotree edges must be distinct");

    auto tilde = [&](const EdgeSet& s) { return set_minus(s, roots); };
    std::vector<EdgeSet> families;
    if (k == 2) {
        EdgeSet cup = cycle_algebra(cycles[0], cycles[1], CycleOp::Union);
        EdgeSet sym = cycle_algebra(cycles[0], cycles[1], CycleOp::SymDiff);
        families.push_back(tilde(cup));
        families.push_back(tilde(cycles[0].edges));
        families.push_back(tilde(cycles[1].edges));
        if (cup != sym) families.push_back(tilde(sym));
        return families;
    }
    EdgeSet cup123 = set_plus(set_plus(cycles[0].edges, cycles[1].edges),
                              cycles[2].edges);
    families.push_back(tilde(cup123));
    const std::pair<int, int> pairs[] = {{0, 1}, {0, 2}, {1, 2}};
    for (auto [i, j] : pairs)
        families.push_back(
            tilde(cycle_algebra(cycles[i], cycles[j], CycleOp::Union)));
    for (auto [i, j] : pairs) {
        EdgeSet cup = cycle_algebra(cycles[i], cycles[j], CycleOp::Union);
        EdgeSet sym = cycle_algebra(cycles[i], cycles[j], CycleOp::SymDiff);
        if (cup != sym) families.push_back(tilde(sym));
    }
    EdgeSet sym123 = cycle_algebra(
        Cycle{cycle_algebra(cycles[0], cycles[1], CycleOp::SymDiff)}, cycles[2],
        CycleOp::SymDiff);
    if (cup123 != sym123) families.push_back(sym123);
    return families;
}

namespace {

Factor boltzmann_table(const PairwiseModel& m, int e) {
    const Edge& edge = m.graph.edge(e);
    Factor f{edge.u, edge.v, {}};
    int nu = m.state_sizes[edge.u], nv = m.state_sizes[edge.v];
    f.table.resize(static_cast<size_t>(nu) * nv);
    for (int su = 0; su < nu; ++su)
        for (int sv = 0; sv < nv; ++sv)
            f.table[su * nv + sv] = std::exp(m.beta * m.coupling(e, su, sv));
    return f;
}

Factor coupling_table(const PairwiseModel& m, int e) {
    const Edge& edge = m.graph.edge(e);
    Factor f{edge.u, edge.v, m.couplings[e]};
    return f;
}

}  // namespace

double first_order_partition(const PairwiseModel& m, const TreeCotree& tc) {
    m.validate();
    std::vector<Factor> tree_factors;
    for (int e : tc.tree_edges) tree_factors.push_back(boltzmann_table(m, e));

    double z1 = sum_product(m.state_sizes, tree_factors);
    for (int e : tc.cotree_edges) {
        std::vector<Factor> factors = tree_factors;
        factors.push_back(coupling_table(m, e));
        z1 += m.beta * sum_product(m.state_sizes, factors);
    }
    for (size_t i = 0; i < tc.cotree_edges.size(); ++i) {
        const Cycle& cycle = tc.fundamental_cycles[i];
        EdgeSet reduced =
            set_minus(cycle.edges, EdgeSet{tc.cotree_edges[i]});
        EdgeSet tree_e = set_minus(tc.tree_edges, reduced);
        std::vector<Factor> factors;
        for (int e : cycle.edges) factors.push_back(coupling_table(m, e));
        for (int e : tree_e) factors.push_back(boltzmann_table(m, e));
        z1 -= std::pow(m.beta, cycle.length()) *
              sum_product(m.state_sizes, factors);
    }
    return z1;
}

double cycle_observable(const PairwiseModel& m, const Cycle& c,
                        const std::vector<int>& state) {
    double prod = 1.0;
    for (int e : c.edges) {
        const Edge& edge = m.graph.edge(e);
        prod *= m.beta * m.coupling(e, state[edge.u], state[edge.v]);
    }
    return prod;
}

}  // namespace forestz
