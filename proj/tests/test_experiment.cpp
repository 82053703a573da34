#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "forestz/experiment.hpp"

using namespace forestz;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(name) {
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

}  // namespace

TEST_CASE("temperature grid values") {
    TempGrid lin{1.0, 5.0, 5, false};
    auto v = lin.values();
    REQUIRE(v.size() == 5);
    CHECK(v.front() == doctest::Approx(1.0));
    CHECK(v[2] == doctest::Approx(3.0));
    CHECK(v.back() == doctest::Approx(5.0));

    TempGrid log{0.1, 100.0, 4, true};
    auto w = log.values();
    REQUIRE(w.size() == 4);
    CHECK(w.front() == doctest::Approx(0.1));
    CHECK(w[1] == doctest::Approx(1.0));
    CHECK(w[2] == doctest::Approx(10.0));
    CHECK(w.back() == doctest::Approx(100.0));

    TempGrid single{2.0, 9.0, 1, true};
    CHECK(single.values() == std::vector<double>{2.0});
}

TEST_CASE("grid spec parsing round-trips") {
    TempGrid g = parse_grid("0.1:100:40:log");
    CHECK(g.min == 0.1);
    CHECK(g.max == 100.0);
    CHECK(g.count == 40);
    CHECK(g.log_spacing);
    CHECK(parse_grid(g.spec()) == g);

    TempGrid lin = parse_grid("0:1:6:lin");
    CHECK_FALSE(lin.log_spacing);
    CHECK(parse_grid(lin.spec()) == lin);

    CHECK_THROWS_AS(parse_grid("1:2:3"), std::invalid_argument);
    CHECK_THROWS_AS(parse_grid("1:2:3:cubic"), std::invalid_argument);
}

TEST_CASE("experiment config validation") {
    ExperimentConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    ExperimentConfig bad = cfg;
    bad.samples = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.sizes.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.temps.min = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.bp_damping = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("experiment config file round-trip is lossless") {
    TempDir dir("experiment_cfg_test");
    ExperimentConfig cfg;
    cfg.seed = 987654321098765ULL;
    cfg.sizes = {10, 50};
    cfg.samples = 17;
    cfg.j = 10.0 / 3.0;  // not exactly representable in decimal
    cfg.half_factor = false;
    cfg.temps = TempGrid{0.1, 100.0, 13, true};
    cfg.betas = TempGrid{0.01, 0.3, 4, false};
    cfg.out_path = "results.csv";
    cfg.threshold = 0.35;
    cfg.rho = 1.25;
    cfg.bp_tol = 3e-9;
    cfg.bp_max_iters = 555;
    cfg.bp_damping = 0.625;
    cfg.threads = 2;
    cfg.save(dir.file("cfg.txt"));
    ExperimentConfig loaded = ExperimentConfig::load(dir.file("cfg.txt"));
    CHECK(loaded == cfg);
}

TEST_CASE("kl experiment output shape and determinism") {
    TempDir dir("kl_cli_test");
    ExperimentConfig cfg;
    cfg.sizes = {8};
    cfg.samples = 3;
    cfg.temps = TempGrid{0.5, 50.0, 4, true};
    cfg.out_path = dir.file("a.csv");
    CHECK(cmd_kl_experiment(cfg) == kExitOk);
    std::string a = read_file(cfg.out_path);
    cfg.out_path = dir.file("b.csv");
    cfg.threads = 3;
    CHECK(cmd_kl_experiment(cfg) == kExitOk);
    CHECK(a == read_file(cfg.out_path));  // thread count cannot change bytes

    auto lines = split_lines(a);
    REQUIRE(lines.size() == 1 + 4 + 3 * 4);  // header, averages, samples
    CHECK(lines[0] == "size,sample,temperature,kl,tree_converged,loopy_converged");
    auto avg = split_csv(lines[1]);
    REQUIRE(avg.size() == 6);
    CHECK(avg[0] == "8");
    CHECK(avg[1] == "avg");
    // High temperature tail: KL is tiny because both beliefs are uniform.
    auto last_avg = split_csv(lines[4]);
    CHECK(std::abs(std::stod(last_avg[3])) < 1e-6);

    // Different seed changes the bytes.
    cfg.seed = 2;
    cfg.out_path = dir.file("c.csv");
    CHECK(cmd_kl_experiment(cfg) == kExitOk);
    CHECK(read_file(cfg.out_path) != a);
}

TEST_CASE("kl experiment golden file") {
    // Schema freeze: a tiny fixed-seed run, byte-for-byte.
    TempDir dir("kl_golden_test");
    ExperimentConfig cfg;
    cfg.seed = 7;
    cfg.sizes = {4};
    cfg.samples = 1;
    cfg.temps = TempGrid{1.0, 10.0, 2, true};
    cfg.out_path = dir.file("out.csv");
    CHECK(cmd_kl_experiment(cfg) == kExitOk);
    std::string got = read_file(cfg.out_path);
    std::string want = read_file(std::string(TEST_DATA_DIR) + "/kl_golden.csv");
    CHECK(got == want);
}

TEST_CASE("forest sweep output") {
    TempDir dir("sweep_cli_test");
    ExperimentConfig cfg;
    cfg.sizes = {3, 4, 5};
    cfg.betas = TempGrid{0.0, 0.2, 3, false};
    cfg.out_path = dir.file("sweep.csv");
    CHECK(cmd_forest_sweep(cfg, "ring") == kExitOk);
    auto lines = split_lines(read_file(cfg.out_path));
    REQUIRE(lines.size() == 1 + 9);
    CHECK(lines[0] ==
          "family,L,beta,z_exact,z_forest,z_tree,z_first_order,"
          "gap_forest,gap_tree,gap_first,bound,status");
    for (size_t i = 1; i < lines.size(); ++i) {
        auto f = split_csv(lines[i]);
        REQUIRE(f.size() == 12);
        CHECK(f[11] == "ok");
        double l = std::stod(f[1]);
        double beta = std::stod(f[2]);
        double z_exact = std::stod(f[3]);
        if (beta == 0.0) {
            // All partition columns collapse to the state count.
            double states = std::pow(2.0, l);
            for (int col : {3, 4, 5, 6})
                CHECK(std::stod(f[col]) == doctest::Approx(states).epsilon(1e-12));
        } else {
            CHECK(std::stod(f[4]) <= z_exact);  // forest sum from below here
            CHECK(std::stod(f[7]) < std::stod(f[8]));  // forest beats bare tree
        }
    }

    // Unknown family is a usage error surfaced as invalid_argument.
    CHECK_THROWS_AS(cmd_forest_sweep(cfg, "torus"), std::invalid_argument);

    // one_chord: first-order gap below tree gap in every row.
    cfg.sizes = {5, 6};
    cfg.betas = TempGrid{0.1, 0.1, 1, false};
    cfg.out_path = dir.file("chord.csv");
    CHECK(cmd_forest_sweep(cfg, "one_chord") == kExitOk);
    auto chord_lines = split_lines(read_file(cfg.out_path));
    for (size_t i = 1; i < chord_lines.size(); ++i) {
        auto f = split_csv(chord_lines[i]);
        CHECK(std::stod(f[9]) < std::stod(f[8]));
    }

    // Rows below the family's minimum size are skipped with a reason.
    cfg.sizes = {2, 3};
    cfg.out_path = dir.file("skip.csv");
    CHECK(cmd_forest_sweep(cfg, "ring") == kExitOk);
    auto skip_lines = split_lines(read_file(cfg.out_path));
    CHECK(split_csv(skip_lines[1])[11].rfind("skip:", 0) == 0);
    CHECK(split_csv(skip_lines[2])[11] == "ok");
}

TEST_CASE("report command") {
    TempDir dir("report_cli_test");
    {
        std::ofstream graph(dir.file("g.txt"));
        graph << "3\n0 1\n0 2\n1 2\n";
        std::ofstream cfg(dir.file("m.cfg"));
        cfg << "model = ising\nJ = 1\nhalf_factor = false\nbeta = 0.2\n"
            << "graph = g.txt\n";
    }
    std::ostringstream out;
    CHECK(cmd_report(dir.file("g.txt"), dir.file("m.cfg"), 0.5, out) == kExitOk);
    std::string text = out.str();
    CHECK(text.find("girth: 3") != std::string::npos);
    CHECK(text.find("beta_c: 0.567143") != std::string::npos);
    CHECK(text.find("below_critical") != std::string::npos);

    {
        std::ofstream graph(dir.file("tree.txt"));
        graph << "3\n0 1\n1 2\n";
        std::ofstream cfg(dir.file("t.cfg"));
        cfg << "model = ising\nJ = 1\nhalf_factor = false\nbeta = 0.2\n"
            << "graph = tree.txt\n";
    }
    std::ostringstream tree_out;
    CHECK(cmd_report(dir.file("tree.txt"), dir.file("t.cfg"), 0.5, tree_out) ==
          kExitOk);
    CHECK(tree_out.str().find("girth: inf") != std::string::npos);
    CHECK(tree_out.str().find("no cycles") != std::string::npos);
}

TEST_CASE("cli exit codes") {
    TempDir dir("cli_exit_test");
    CHECK(run_cli({"bogus"}) == kExitUsage);
    CHECK(run_cli({}) == kExitUsage);
    CHECK(run_cli({"kl", "--temps", "nonsense"}) == kExitUsage);
    CHECK(run_cli({"report", "--graph", dir.file("missing.txt"), "--config",
                   dir.file("missing.cfg")}) == kExitIo);
    // Enumeration cap: a sweep size too big for forest enumeration.
    ExperimentConfig cfg;
    cfg.sizes = {30};
    cfg.betas = TempGrid{0.1, 0.1, 1, false};
    cfg.out_path = dir.file("cap.csv");
    CHECK(cmd_forest_sweep(cfg, "ring") == kExitOk);  // per-cell status instead
    auto lines = split_lines(read_file(cfg.out_path));
    CHECK(split_csv(lines[1])[11].rfind("cap_exceeded:", 0) == 0);

    // Full CLI round trip with flags.
    std::string out = dir.file("cli.csv");
    CHECK(run_cli({"sweep", "--family", "ring", "--sizes", "3", "--betas",
                   "0.1:0.1:1:lin", "--out", out}) == kExitOk);
    CHECK(split_lines(read_file(out)).size() == 2);
}

TEST_CASE("cli config file feeds kl parameters") {
    TempDir dir("cli_cfg_test");
    ExperimentConfig cfg;
    cfg.sizes = {6};
    cfg.samples = 2;
    cfg.temps = TempGrid{1.0, 10.0, 3, true};
    cfg.out_path = dir.file("from_cfg.csv");
    cfg.save(dir.file("exp.cfg"));
    CHECK(run_cli({"kl", "--config", dir.file("exp.cfg")}) == kExitOk);
    auto lines = split_lines(read_file(dir.file("from_cfg.csv")));
    CHECK(lines.size() == 1 + 3 + 2 * 3);
    // Flags override the file.
    CHECK(run_cli({"kl", "--config", dir.file("exp.cfg"), "--out",
                   dir.file("override.csv")}) == kExitOk);
    CHECK(std::filesystem::exists(dir.file("override.csv")));
}
