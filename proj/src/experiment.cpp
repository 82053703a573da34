#include "forestz/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "forestz/bp.hpp"
#include "forestz/config.hpp"
#include "forestz/exact.hpp"
#include "forestz/forest.hpp"
#include "forestz/model.hpp"
#include "forestz/rng.hpp"
#include "forestz/tree_approx.hpp"

namespace forestz {

namespace {

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::string fmt_exact(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    return out;
}

std::string join_int_list(const std::vector<int>& xs) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(xs[i]);
    }
    return out;
}

}  // namespace

std::vector<double> TempGrid::values() const {
    std::vector<double> out;
    if (count == 1) return {min};
    for (int i = 0; i < count; ++i) {
        double t = static_cast<double>(i) / (count - 1);
        if (log_spacing)
            out.push_back(min * std::pow(max / min, t));
        else
            out.push_back(min + (max - min) * t);
    }
    return out;
}

std::string TempGrid::spec() const {
    return fmt_exact(min) + ":" + fmt_exact(max) + ":" + std::to_string(count) +
           ":" + (log_spacing ? "log" : "lin");
}

TempGrid parse_grid(const std::string& spec) {
    std::stringstream ss(spec);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 4)
        throw std::invalid_argument("grid spec must be min:max:count:log|lin, got '" +
                                    spec + "'");
    TempGrid grid;
    grid.min = std::stod(parts[0]);
    grid.max = std::stod(parts[1]);
    grid.count = std::stoi(parts[2]);
    if (parts[3] == "log")
        grid.log_spacing = true;
    else if (parts[3] == "lin")
        grid.log_spacing = false;
    else
        throw std::invalid_argument("grid spacing must be 'log' or 'lin'");
    return grid;
}

void ExperimentConfig::validate() const {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    if (sizes.empty()) throw std::invalid_argument("sizes must be nonempty");
    for (int n : sizes)
        if (n < 1) throw std::invalid_argument("sizes entries must be >= 1");
    if (temps.count < 1 || betas.count < 1)
        throw std::invalid_argument("grid count must be >= 1");
    if (temps.count > 1 && !(temps.min < temps.max))
        throw std::invalid_argument("temps min must be < max");
    if (temps.min <= 0.0)
        throw std::invalid_argument("temperatures must be positive");
    if (bp_damping < 0.0 || bp_damping >= 1.0)
        throw std::invalid_argument("damping must lie in [0, 1)");
    if (bp_max_iters < 1) throw std::invalid_argument("max iters must be >= 1");
}

void ExperimentConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << "seed = " << seed << "\n";
    out << "sizes = " << join_int_list(sizes) << "\n";
    out << "samples = " << samples << "\n";
    out << "J = " << fmt_exact(j) << "\n";
    out << "half_factor = " << (half_factor ? "true" : "false") << "\n";
    out << "temps = " << temps.spec() << "\n";
    out << "betas = " << betas.spec() << "\n";
    out << "out = " << out_path << "\n";
    out << "threshold = " << fmt_exact(threshold) << "\n";
    out << "rho = " << fmt_exact(rho) << "\n";
    out << "bp_tol = " << fmt_exact(bp_tol) << "\n";
    out << "bp_max_iters = " << bp_max_iters << "\n";
    out << "bp_damping = " << fmt_exact(bp_damping) << "\n";
    out << "threads = " << threads << "\n";
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    auto kv = load_key_values(path);
    ExperimentConfig cfg;
    if (kv.count("seed")) cfg.seed = std::stoull(kv.at("seed"));
    if (kv.count("sizes")) cfg.sizes = parse_int_list(kv.at("sizes"));
    if (kv.count("samples")) cfg.samples = std::stoi(kv.at("samples"));
    if (kv.count("J")) cfg.j = std::stod(kv.at("J"));
    if (kv.count("half_factor")) cfg.half_factor = parse_bool(kv.at("half_factor"));
    if (kv.count("temps")) cfg.temps = parse_grid(kv.at("temps"));
    if (kv.count("betas")) cfg.betas = parse_grid(kv.at("betas"));
    if (kv.count("out")) cfg.out_path = kv.at("out");
    if (kv.count("threshold")) cfg.threshold = std::stod(kv.at("threshold"));
    if (kv.count("rho")) cfg.rho = std::stod(kv.at("rho"));
    if (kv.count("bp_tol")) cfg.bp_tol = std::stod(kv.at("bp_tol"));
    if (kv.count("bp_max_iters")) cfg.bp_max_iters = std::stoi(kv.at("bp_max_iters"));
    if (kv.count("bp_damping")) cfg.bp_damping = std::stod(kv.at("bp_damping"));
    if (kv.count("threads")) cfg.threads = std::stoi(kv.at("threads"));
    return cfg;
}

namespace {

struct KlCell {
    double kl = 0.0;
    bool tree_converged = false;
    bool loopy_converged = false;
};

// One sample: random weights on the complete graph, Kruskal tree, one
// random loop-closing edge, BP on both across the temperature grid.
std::vector<KlCell> kl_sample(const ExperimentConfig& cfg, int n,
                              std::uint64_t sample_index) {
    std::uint64_t seed =
        stream_seed(cfg.seed, (static_cast<std::uint64_t>(n) << 32) | sample_index);
    SplitMix64 rng(seed);

    std::vector<Edge> complete;
    complete.reserve(n * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            complete.push_back(Edge{i, j, rng.uniform()});
    InteractionGraph weighted(n, std::move(complete));
    TreeCotree tc = max_spanning_tree(weighted);

    std::vector<Edge> tree_edges;
    std::vector<char> in_tree(weighted.n_edges(), 0);
    for (int e : tc.tree_edges) {
        in_tree[e] = 1;
        tree_edges.push_back(Edge{weighted.edge(e).u, weighted.edge(e).v, 1.0});
    }
    // Loop edge drawn uniformly among non-tree pairs.
    std::vector<int> non_tree;
    for (int e = 0; e < weighted.n_edges(); ++e)
        if (!in_tree[e]) non_tree.push_back(e);
    if (non_tree.empty())
        throw std::invalid_argument("kl experiment needs sizes >= 3");
    int chord = non_tree[rng.uniform_below(non_tree.size())];
    std::vector<Edge> loopy_edges = tree_edges;
    loopy_edges.push_back(Edge{weighted.edge(chord).u, weighted.edge(chord).v, 1.0});

    InteractionGraph tree_graph(n, std::move(tree_edges));
    InteractionGraph loopy_graph(n, std::move(loopy_edges));
    std::uint64_t init_base = rng.next();

    std::vector<double> temps = cfg.temps.values();
    std::vector<KlCell> cells(temps.size());
    for (size_t t = 0; t < temps.size(); ++t) {
        double beta = 1.0 / temps[t];
        PairwiseModel tree_model =
            ising_model(tree_graph, cfg.j, cfg.half_factor, beta);
        PairwiseModel loopy_model =
            ising_model(loopy_graph, cfg.j, cfg.half_factor, beta);
        Beliefs tree_beliefs =
            run_bp(tree_model, BpOptions{.schedule = BpSchedule::TreeTwoPass});
        BpOptions damped;
        damped.schedule = BpSchedule::DampedParallel;
        damped.tol = cfg.bp_tol;
        damped.max_iters = cfg.bp_max_iters;
        damped.damping = cfg.bp_damping;
        damped.random_init = true;
        damped.init_seed = stream_seed(init_base, t);
        Beliefs loopy_beliefs = run_bp(loopy_model, damped);
        cells[t].kl = kl_divergence(tree_beliefs, loopy_beliefs);
        cells[t].tree_converged = tree_beliefs.converged;
        cells[t].loopy_converged = loopy_beliefs.converged;
    }
    return cells;
}

// Deterministic parallel map over sample indices.
template <typename Work>
void parallel_for(int count, int threads, Work&& work) {
    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        if (threads <= 0) threads = 1;
    }
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) work(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> cursor{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            while (true) {
                int i = cursor.fetch_add(1);
                if (i >= count) return;
                work(i);
            }
        });
    for (auto& th : pool) th.join();
}

}  // namespace

int cmd_kl_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<int> sizes = cfg.sizes;
    std::sort(sizes.begin(), sizes.end());
    std::vector<double> temps = cfg.temps.values();

    std::ostringstream body;
    body << "size,sample,temperature,kl,tree_converged,loopy_converged\n";
    for (int n : sizes) {
        std::vector<std::vector<KlCell>> per_sample(cfg.samples);
        std::exception_ptr error;
        std::mutex error_mutex;
        parallel_for(cfg.samples, cfg.threads, [&](int s) {
            try {
                per_sample[s] = kl_sample(cfg, n, s);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
        if (error) std::rethrow_exception(error);

        // Averaged rows first (sample key "avg"), then per-sample rows.
        for (size_t t = 0; t < temps.size(); ++t) {
            double sum = 0.0;
            int tree_ok = 0, loopy_ok = 0;
            for (int s = 0; s < cfg.samples; ++s) {
                sum += per_sample[s][t].kl;
                tree_ok += per_sample[s][t].tree_converged;
                loopy_ok += per_sample[s][t].loopy_converged;
            }
            body << n << ",avg," << fmt(temps[t]) << ','
                 << fmt(sum / cfg.samples) << ',' << tree_ok << ',' << loopy_ok
                 << "\n";
        }
        for (int s = 0; s < cfg.samples; ++s)
            for (size_t t = 0; t < temps.size(); ++t) {
                const KlCell& cell = per_sample[s][t];
                body << n << ',' << s << ',' << fmt(temps[t]) << ','
                     << fmt(cell.kl) << ',' << (cell.tree_converged ? 1 : 0)
                     << ',' << (cell.loopy_converged ? 1 : 0) << "\n";
            }
    }
    std::ofstream out(cfg.out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + cfg.out_path);
    out << body.str();
    return kExitOk;
}

namespace {

InteractionGraph family_graph(const std::string& family, int l) {
    std::vector<Edge> edges;
    if (family == "ring") {
        if (l < 3) throw std::invalid_argument("ring needs L >= 3");
        for (int i = 0; i < l; ++i) edges.push_back(Edge{i, (i + 1) % l, 1.0});
        return InteractionGraph(l, std::move(edges));
    }
    if (family == "one_chord") {
        // Path plus a chord closing a cycle of length L-1; one pendant node.
        if (l < 4) throw std::invalid_argument("one_chord needs L >= 4");
        for (int i = 0; i + 1 < l; ++i) edges.push_back(Edge{i, i + 1, 1.0});
        edges.push_back(Edge{0, l - 2, 1.0});
        return InteractionGraph(l, std::move(edges));
    }
    if (family == "book") {
        // L triangular pages sharing the edge (0,1).
        if (l < 1) throw std::invalid_argument("book needs L >= 1");
        edges.push_back(Edge{0, 1, 1.0});
        for (int p = 0; p < l; ++p) {
            edges.push_back(Edge{0, p + 2, 1.0});
            edges.push_back(Edge{1, p + 2, 1.0});
        }
        return InteractionGraph(l + 2, std::move(edges));
    }
    throw std::invalid_argument("unknown family '" + family +
                                "' (expected ring|one_chord|book)");
}

PairwiseModel submodel(const PairwiseModel& m, const EdgeSet& keep) {
    PairwiseModel sub;
    std::vector<Edge> edges;
    for (int e : keep) edges.push_back(m.graph.edge(e));
    sub.graph = InteractionGraph(m.graph.n_nodes(), std::move(edges));
    sub.state_sizes = m.state_sizes;
    sub.beta = m.beta;
    sub.couplings.resize(sub.graph.n_edges());
    for (int e = 0; e < sub.graph.n_edges(); ++e) {
        int orig = m.graph.find_edge(sub.graph.edge(e).u, sub.graph.edge(e).v);
        sub.couplings[e] = m.couplings[orig];
    }
    return sub;
}

}  // namespace

int cmd_forest_sweep(const ExperimentConfig& cfg, const std::string& family) {
    cfg.validate();
    if (family != "ring" && family != "one_chord" && family != "book")
        throw std::invalid_argument("unknown family '" + family +
                                    "' (expected ring|one_chord|book)");
    std::vector<int> sizes = cfg.sizes;
    std::sort(sizes.begin(), sizes.end());
    std::vector<double> betas = cfg.betas.values();

    std::ostringstream body;
    body << "family,L,beta,z_exact,z_forest,z_tree,z_first_order,"
            "gap_forest,gap_tree,gap_first,bound,status\n";
    double nan = std::numeric_limits<double>::quiet_NaN();
    for (int l : sizes) {
        for (double beta : betas) {
            std::string status = "ok";
            double z_exact = nan, z_forest = nan, z_tree = nan, z_first = nan;
            double bound = nan;
            try {
                InteractionGraph g = family_graph(family, l);
                PairwiseModel m = ising_model(g, cfg.j, cfg.half_factor, beta);
                z_exact = exact_partition(m).z;
                ForestFamily forests = enumerate_forests(g);
                z_forest = forest_partition(m, forests);
                TreeCotree tc = optimal_tree(m);
                z_tree = std::exp(log_partition_tree(submodel(m, tc.tree_edges)));
                z_first = first_order_partition(m, tc);
                DensityReport density = classify_density(g, cfg.threshold);
                if (density.has_cycles)
                    bound = error_bound(m, density, cfg.rho).bound;
            } catch (const CapExceeded& err) {
                status = std::string("cap_exceeded:") + err.what();
            } catch (const std::invalid_argument& err) {
                status = std::string("skip:") + err.what();
            }
            std::replace(status.begin(), status.end(), ',', ';');
            auto gap = [&](double z) {
                return std::isnan(z) ? nan : std::abs(z_exact - z) / z_exact;
            };
            body << family << ',' << l << ',' << fmt(beta) << ','
                 << fmt(z_exact) << ',' << fmt(z_forest) << ',' << fmt(z_tree)
                 << ',' << fmt(z_first) << ',' << fmt(gap(z_forest)) << ','
                 << fmt(gap(z_tree)) << ',' << fmt(gap(z_first)) << ','
                 << fmt(bound) << ',' << status << "\n";
        }
    }
    std::ofstream out(cfg.out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + cfg.out_path);
    out << body.str();
    return kExitOk;
}

int cmd_report(const std::string& graph_path, const std::string& model_config,
               double threshold, std::ostream& out) {
    InteractionGraph g = load_graph(graph_path);
    PairwiseModel m = load_model(model_config);
    if (m.graph.n_nodes() != g.n_nodes())
        throw std::invalid_argument("graph and model config disagree on node count");
    int gi = girth(g);
    DensityReport density = classify_density(g, threshold);
    TemperatureReport temp = critical_beta(m);
    out << "nodes: " << g.n_nodes() << "\n";
    out << "edges: " << g.n_edges() << "\n";
    out << "girth: " << (gi == kInfiniteGirth ? "inf" : std::to_string(gi)) << "\n";
    if (!density.has_cycles) {
        out << "dual_max_degree: -\n";
        out << "density: no cycles\n";
    } else {
        out << "dual_max_degree: " << density.k_max_dual_degree << "\n";
        out << "density: " << (density.sparse ? "sparse" : "dense")
            << " (ratio " << fmt(density.ratio) << ", threshold "
            << fmt(threshold) << ")\n";
    }
    out << "sup_h: " << fmt(temp.sup_h) << "\n";
    out << "beta_c: " << fmt(temp.beta_c) << "\n";
    out << "beta: " << fmt(m.beta) << "\n";
    out << "q: " << fmt(temp.q) << "\n";
    out << "regime: "
        << (temp.below_critical ? "below_critical" : "at_or_above_critical")
        << "\n";
    return kExitOk;
}

int run_cli(const std::vector<std::string>& args) {
    // Pre-scan for an experiment config file so flags can override it.
    ExperimentConfig cfg;
    bool is_report = !args.empty() && args[0] == "report";
    try {
        for (size_t i = 0; i + 1 < args.size(); ++i)
            if (args[i] == "--config" && !is_report)
                cfg = ExperimentConfig::load(args[i + 1]);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitIo;
    }

    CLI::App app{"Forest expansions, tree approximations and BP for pairwise models"};
    app.require_subcommand(1);

    std::string graph_path, model_config, experiment_config, family = "ring";
    std::string temps_spec, betas_spec, sizes_spec;

    auto* report = app.add_subcommand("report", "graph/model summary");
    report->add_option("--graph", graph_path, "edge-list graph file")->required();
    report->add_option("--config", model_config, "model config file")->required();
    report->add_option("--threshold", cfg.threshold, "density threshold");

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", experiment_config, "experiment config file");
        cmd->add_option("--seed", cfg.seed, "RNG seed");
        cmd->add_option("--out", cfg.out_path, "output CSV path");
        cmd->add_option("--sizes", sizes_spec, "comma-separated sizes");
        cmd->add_option("--j", cfg.j, "Ising coupling J");
        cmd->add_flag("--half-factor,!--no-half-factor", cfg.half_factor,
                      "use H = -(J/2) sum A s s'");
        cmd->add_option("--threads", cfg.threads, "worker threads (0 = auto)");
    };
    auto* kl = app.add_subcommand("kl", "tree vs loopy-tree KL experiment");
    add_common(kl);
    kl->add_option("--samples", cfg.samples, "number of random samples");
    kl->add_option("--temps", temps_spec, "temperature grid min:max:count:log|lin");
    kl->add_option("--tol", cfg.bp_tol, "BP convergence tolerance");
    kl->add_option("--max-iters", cfg.bp_max_iters, "BP iteration cap");
    kl->add_option("--damping", cfg.bp_damping, "BP damping in [0,1)");

    auto* sweep = app.add_subcommand("sweep", "partition-function sweep");
    add_common(sweep);
    sweep->add_option("--family", family, "graph family ring|one_chord|book");
    sweep->add_option("--betas", betas_spec, "beta grid min:max:count:log|lin");
    sweep->add_option("--threshold", cfg.threshold, "density threshold");
    sweep->add_option("--rho", cfg.rho, "dense-regime rho");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (!sizes_spec.empty()) cfg.sizes = parse_int_list(sizes_spec);
        if (!temps_spec.empty()) cfg.temps = parse_grid(temps_spec);
        if (!betas_spec.empty()) cfg.betas = parse_grid(betas_spec);
        if (report->parsed()) {
            // Malformed input files are io failures, not usage errors.
            try {
                return cmd_report(graph_path, model_config, cfg.threshold,
                                  std::cout);
            } catch (const CapExceeded&) {
                throw;
            } catch (const std::invalid_argument& err) {
                throw std::runtime_error(err.what());
            }
        }
        if (kl->parsed()) return cmd_kl_experiment(cfg);
        return cmd_forest_sweep(cfg, family);
    } catch (const CapExceeded& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitCap;
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitIo;
    }
}

}  // namespace forestz
