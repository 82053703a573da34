#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "forestz/exact.hpp"
#include "forestz/rng.hpp"

using namespace forestz;

namespace {

PairwiseModel random_model(SplitMix64& rng, int n, const std::vector<Edge>& edges,
                           double beta) {
    PairwiseModel m;
    m.graph = InteractionGraph(n, edges);
    m.state_sizes.assign(n, 2);
    m.beta = beta;
    for (int e = 0; e < m.graph.n_edges(); ++e) {
        double h = 2.0 * rng.uniform() - 1.0;
        m.couplings.push_back({h, -h, -h, h});
    }
    return m;
}

}  // namespace

TEST_CASE("no edges: Z equals the state count") {
    PairwiseModel m;
    m.graph = InteractionGraph(2, {});
    m.state_sizes = {2, 2};
    m.beta = 3.0;
    ExactResult r = exact_partition(m);
    CHECK(r.z == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("single ising edge: Z = 4 cosh(beta J)") {
    PairwiseModel m = ising_model(InteractionGraph(2, {{0, 1, 1.0}}), 1.0, false, 1.0);
    ExactResult r = exact_partition(m);
    CHECK(r.z == doctest::Approx(4.0 * std::cosh(1.0)).epsilon(1e-14));
    CHECK(r.z == doctest::Approx(6.1723225).epsilon(1e-6));
}

TEST_CASE("ising triangle: Z = 2 e^{3K} + 6 e^{-K}") {
    InteractionGraph g(3, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}});
    for (double k : {0.1, 0.5, 1.3}) {
        PairwiseModel m = ising_model(g, 1.0, false, k);
        ExactResult r = exact_partition(m);
        CHECK(r.z == doctest::Approx(2.0 * std::exp(3.0 * k) +
                                     6.0 * std::exp(-k)).epsilon(1e-13));
    }
}

TEST_CASE("marginals: zero-field symmetry") {
    SplitMix64 rng(7);
    InteractionGraph g(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {0, 3, 1}});
    PairwiseModel m = random_model(rng, 4, g.edges(), 0.8);
    auto marg = exact_marginals(m);
    for (const auto& p : marg) {
        CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-12));
    }

    // Strong single edge: joint concentrates but marginals stay uniform.
    PairwiseModel strong = ising_model(InteractionGraph(2, {{0, 1, 1.0}}),
                                       1.0, false, 20.0);
    auto sm = exact_marginals(strong);
    CHECK(sm[0][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sm[1][1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("isolated node multiplies Z by its state count") {
    SplitMix64 rng(21);
    PairwiseModel m = random_model(rng, 3,
                                   {{0, 1, 1.0}, {1, 2, 1.0}}, 0.6);
    double z3 = exact_partition(m).z;
    PairwiseModel bigger = m;
    bigger.graph = InteractionGraph(4, {{0, 1, 1.0}, {1, 2, 1.0}});
    bigger.state_sizes.push_back(3);
    double z4 = exact_partition(bigger).z;
    CHECK(z4 == doctest::Approx(3.0 * z3).epsilon(1e-12));
}

TEST_CASE("Z invariant under node relabeling") {
    SplitMix64 rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 5;
        std::vector<Edge> edges = {{0, 1, 1}, {1, 2, 1}, {2, 3, 1},
                                   {3, 4, 1}, {0, 4, 1}, {1, 3, 1}};
        PairwiseModel m = random_model(rng, n, edges, 0.7);
        double z = exact_partition(m).log_z;

        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = n - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.uniform_below(i + 1)]);
        std::vector<Edge> relabeled;
        PairwiseModel pm;
        for (int e = 0; e < m.graph.n_edges(); ++e) {
            const Edge& old = m.graph.edge(e);
            relabeled.push_back({perm[old.u], perm[old.v], old.weight});
        }
        pm.graph = InteractionGraph(n, relabeled);
        pm.state_sizes.assign(n, 2);
        pm.beta = m.beta;
        pm.couplings.resize(pm.graph.n_edges());
        for (int e = 0; e < m.graph.n_edges(); ++e) {
            const Edge& old = m.graph.edge(e);
            int a = perm[old.u], b = perm[old.v];
            int ne = pm.graph.find_edge(a, b);
            // The Ising table is symmetric, so endpoint swap is harmless.
            pm.couplings[ne] = m.couplings[e];
        }
        CHECK(exact_partition(pm).log_z == doctest::Approx(z).epsilon(1e-12));
    }
}

TEST_CASE("log-space accumulation matches direct product form") {
    SplitMix64 rng(8);
    PairwiseModel m = random_model(rng, 4,
                                   {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}}, 0.4);
    ExactResult r = exact_partition(m);
    // Direct sum, feasible at this size.
    double direct = 0.0;
    for (int mask = 0; mask < 16; ++mask) {
        std::vector<int> s(4);
        for (int i = 0; i < 4; ++i) s[i] = (mask >> i) & 1;
        double energy = 0.0;
        for (int e = 0; e < m.graph.n_edges(); ++e)
            energy += m.coupling(e, s[m.graph.edge(e).u], s[m.graph.edge(e).v]);
        direct += std::exp(m.beta * energy);
    }
    CHECK(r.z == doctest::Approx(direct).epsilon(1e-10));
    CHECK(r.log_z == doctest::Approx(std::log(direct)).epsilon(1e-10));
}

TEST_CASE("large beta does not overflow log_z") {
    PairwiseModel m = ising_model(InteractionGraph(2, {{0, 1, 1.0}}),
                                  1.0, false, 1000.0);
    ExactResult r = exact_partition(m);
    CHECK(std::isfinite(r.log_z));
    CHECK(r.log_z == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("state cap refusal names the requirement") {
    PairwiseModel m;
    m.graph = InteractionGraph(30, {});
    m.state_sizes.assign(30, 2);
    m.beta = 1.0;
    try {
        exact_partition(m);  // 2^30 states > default 2^22 cap
        FAIL("expected cap refusal");
    } catch (const CapExceeded& err) {
        CHECK(std::string(err.what()).find("cap") != std::string::npos);
    }
    // An explicit higher cap admits moderately larger models.
    PairwiseModel small;
    small.graph = InteractionGraph(3, {});
    small.state_sizes.assign(3, 2);
    small.beta = 1.0;
    CHECK_THROWS_AS(exact_partition(small, 4.0), CapExceeded);
    CHECK(exact_partition(small, 8.0).z == doctest::Approx(8.0));
}

TEST_CASE("marginals normalize within tolerance") {
    SplitMix64 rng(77);
    PairwiseModel m = random_model(
        rng, 6, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}, {4, 5, 1}, {0, 5, 1}},
        1.2);
    ExactResult r = exact_partition(m);
    for (const auto& p : r.marginals) {
        double sum = 0.0;
        for (double x : p) sum += x;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}
