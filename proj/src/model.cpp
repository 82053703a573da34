#include "forestz/model.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "forestz/config.hpp"

namespace forestz {

double PairwiseModel::sup_h() const {
    double sup = 0.0;
    for (const auto& table : couplings)
        for (double h : table) sup = std::max(sup, std::abs(h));
    return sup;
}

double PairwiseModel::log_state_count() const {
    double acc = 0.0;
    for (int k : state_sizes) acc += std::log(static_cast<double>(k));
    return acc;
}

void PairwiseModel::validate() const {
    if (static_cast<int>(state_sizes.size()) != graph.n_nodes())
        throw std::invalid_argument("state_sizes size mismatch");
    for (int k : state_sizes)
        if (k < 2) throw std::invalid_argument("state sizes must be >= 2");
    if (static_cast<int>(couplings.size()) != graph.n_edges())
        throw std::invalid_argument("couplings size mismatch");
    for (int e = 0; e < graph.n_edges(); ++e) {
        const Edge& edge = graph.edge(e);
        size_t expected = static_cast<size_t>(state_sizes[edge.u]) * state_sizes[edge.v];
        if (couplings[e].size() != expected)
            throw std::invalid_argument("coupling table dimension mismatch on edge " +
                                        std::to_string(e));
        for (double h : couplings[e])
            if (!std::isfinite(h))
                throw std::invalid_argument("coupling entries must be finite");
    }
    if (beta < 0.0 || !std::isfinite(beta))
        throw std::invalid_argument("beta must be finite and >= 0");
}

PairwiseModel ising_model(const InteractionGraph& g, double j, bool half_factor,
                          double beta) {
    PairwiseModel m;
    m.graph = g;
    m.state_sizes.assign(g.n_nodes(), 2);
    double jeff = half_factor ? j / 2.0 : j;
    // spin(0) = +1, spin(1) = -1
    std::vector<double> table = {jeff, -jeff, -jeff, jeff};
    m.couplings.assign(g.n_edges(), table);
    m.beta = beta;
    m.validate();
    return m;
}

double lambert_w(double x) {
    if (x < 0.0 || !std::isfinite(x))
        throw std::invalid_argument("lambert_w requires x >= 0");
    if (x == 0.0) return 0.0;
    double w = std::log1p(x);
    for (int iter = 0; iter < 100; ++iter) {
        double ew = std::exp(w);
        double f = w * ew - x;
        if (std::abs(f) < 1e-14 * std::max(1.0, x)) break;
        // Halley step
        double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        w -= f / denom;
    }
    return w;
}

TemperatureReport critical_beta(const PairwiseModel& m, double kappa) {
    TemperatureReport report;
    report.sup_h = m.sup_h();
    if (report.sup_h == 0.0) {
        report.free_model = true;
        report.beta_c = std::numeric_limits<double>::infinity();
        report.q = 0.0;
        report.below_critical = true;
        return report;
    }
    report.beta_c = kappa * lambert_w(1.0) / report.sup_h;
    double x = m.beta * report.sup_h;
    report.q = x * std::exp(x);
    report.below_critical = report.q < 1.0;
    return report;
}

double edge_factor(const PairwiseModel& m, int edge, int su, int sv) {
    return std::expm1(m.beta * m.coupling(edge, su, sv));
}

double edge_weight_for_mst(const PairwiseModel& m, int edge) {
    const Edge& e = m.graph.edge(edge);
    double w = 0.0;
    for (int su = 0; su < m.state_sizes[e.u]; ++su)
        for (int sv = 0; sv < m.state_sizes[e.v]; ++sv)
            w = std::max(w, std::abs(edge_factor(m, edge, su, sv)));
    return w;
}

InteractionGraph mst_weighted_graph(const PairwiseModel& m) {
    std::vector<Edge> edges = m.graph.edges();
    for (int e = 0; e < m.graph.n_edges(); ++e)
        edges[e].weight = edge_weight_for_mst(m, e);
    return InteractionGraph(m.graph.n_nodes(), std::move(edges));
}

TreeCotree optimal_tree(const PairwiseModel& m) {
    return max_spanning_tree(mst_weighted_graph(m));
}

namespace {

PairwiseModel load_table_model(const InteractionGraph& g, int states,
                               const std::string& table_path, double beta) {
    PairwiseModel m;
    m.graph = g;
    m.state_sizes.assign(g.n_nodes(), states);
    m.couplings.assign(g.n_edges(), std::vector<double>(states * states, 0.0));
    std::ifstream in(table_path);
    if (!in) throw std::runtime_error("cannot open table file: " + table_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream fields(line);
        int i, j;
        if (!(fields >> i)) continue;
        if (!(fields >> j))
            throw std::invalid_argument("table line " + std::to_string(line_no) +
                                        ": expected 'i j v...'");
        int e = g.find_edge(i, j);
        if (e < 0)
            throw std::invalid_argument("table line " + std::to_string(line_no) +
                                        ": edge not in graph");
        std::vector<double> values;
        double v;
        while (fields >> v) values.push_back(v);
        if (static_cast<int>(values.size()) != states * states)
            throw std::invalid_argument("table line " + std::to_string(line_no) +
                                        ": expected " + std::to_string(states * states) +
                                        " values");
        // Values are given in (s_i, s_j) order; transpose when the canonical
        // orientation is reversed.
        if (g.edge(e).u == std::min(i, j) && i > j) {
            for (int a = 0; a < states; ++a)
                for (int b = 0; b < states; ++b)
                    m.couplings[e][b * states + a] = values[a * states + b];
        } else {
            m.couplings[e] = values;
        }
    }
    m.beta = beta;
    m.validate();
    return m;
}

}  // namespace

PairwiseModel load_model(const std::string& config_path) {
    auto kv = load_key_values(config_path);
    auto dir = std::filesystem::path(config_path).parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path.string() : (dir / path).string();
    };
    auto require = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw std::invalid_argument("model config missing key '" + key + "'");
        return it->second;
    };
    InteractionGraph g = load_graph(resolve(require("graph")));
    double beta = kv.count("beta") ? std::stod(kv.at("beta")) : 1.0;
    const std::string& kind = require("model");
    if (kind == "ising") {
        double j = kv.count("J") ? std::stod(kv.at("J")) : 1.0;
        bool half = kv.count("half_factor") && parse_bool(kv.at("half_factor"));
        return ising_model(g, j, half, beta);
    }
    if (kind == "table") {
        int states = kv.count("states") ? std::stoi(kv.at("states")) : 2;
        return load_table_model(g, states, resolve(require("table")), beta);
    }
    throw std::invalid_argument("unknown model kind '" + kind + "'");
}

}  // namespace forestz
