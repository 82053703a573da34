#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "forestz/graph.hpp"

namespace forestz {

// Exit codes shared by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitCap = 3;

struct TempGrid {
    double min = 0.1;
    double max = 100.0;
    int count = 40;
    bool log_spacing = true;

    std::vector<double> values() const;
    std::string spec() const;  // "min:max:count:log|lin"
    bool operator==(const TempGrid&) const = default;
};

TempGrid parse_grid(const std::string& spec);

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::vector<int> sizes = {50};
    int samples = 100;
    double j = 10.0;
    bool half_factor = true;
    TempGrid temps;
    TempGrid betas{0.0, 1.0, 6, false};  // forest sweeps run over beta directly
    std::string out_path = "out.csv";
    double threshold = 0.5;
    double rho = 0.0;
    double bp_tol = 1e-10;
    int bp_max_iters = 2000;
    double bp_damping = 0.5;
    int threads = 0;  // 0 = hardware concurrency

    void validate() const;
    // Lossless round-trip through the flat key-value file format.
    void save(const std::string& path) const;
    static ExperimentConfig load(const std::string& path);
    bool operator==(const ExperimentConfig&) const = default;
};

// Tree vs loopy-tree KL study: per sample draw a random weight matrix,
// Kruskal a spanning tree, close one random loop, run BP on both across the
// temperature grid, and emit per-sample plus averaged rows. Deterministic
// for a fixed seed regardless of thread count.
int cmd_kl_experiment(const ExperimentConfig& cfg);

// Partition-function sweep over a graph family: exact, forest, tree and
// first-order columns with relative gaps and the piecewise error bound.
int cmd_forest_sweep(const ExperimentConfig& cfg, const std::string& family);

// Text report: graph stats, density label, critical temperature, regime.
int cmd_report(const std::string& graph_path, const std::string& model_config,
               double threshold, std::ostream& out);

// Full CLI: forestz report|kl|sweep. Returns a process exit code.
int run_cli(const std::vector<std::string>& args);

}  // namespace forestz
