#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "acceptance.hpp"
#include "experiments.hpp"

using namespace hyst;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const char* kSmallConfig = R"(
[grid]
T = 1.0
N = 64
[ensemble]
M = 600
seed = 33
[functional]
name = "cumulative"
[estimator]
degree = 2
features = "wt,iw"
[pipeline]
window = 9
test_times = "0.25,0.5,0.75"
)";

} // namespace

TEST_CASE("config parsing") {
    auto cfg = parse_config_text(kSmallConfig);
    CHECK(cfg.horizon == 1.0);
    CHECK(cfg.steps == 64);
    CHECK(cfg.paths == 600);
    CHECK(cfg.seed == 33);
    CHECK(cfg.functional == "cumulative");
    CHECK(cfg.basis.degree == 2);
    CHECK(cfg.basis.features.size() == 2);
    CHECK(cfg.window == 9);

    CHECK_THROWS_AS(parse_config_text("[grid]\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[nope]\nT = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[grid]\nT garbage\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[grid]\nT = -2\n"), ConfigError);

    // resolved text parses back to the same values
    auto again = parse_config_text(cfg.resolved());
    CHECK(again.steps == cfg.steps);
    CHECK(again.seed == cfg.seed);
    CHECK(again.functional == cfg.functional);
}

TEST_CASE("elasticity command produces its files and reproduces them") {
    const std::string dir = "out_test_elasticity";
    std::filesystem::remove_all(dir);
    {
        std::ofstream f("test_small.toml");
        f << kSmallConfig;
    }
    int rc = run_command("elasticity", "test_small.toml", dir, 1, true);
    CHECK(rc == 0);
    for (const char* name : {"C.csv", "decomposition.csv", "empirical_vs_predicted.csv",
                             "report.txt", "config.resolved.toml", "VERSION"})
        CHECK(std::filesystem::exists(dir + "/" + std::string(name)));

    const std::string first = slurp(dir + "/C.csv");
    rc = run_command("elasticity", "test_small.toml", dir, 2, true);
    CHECK(rc == 0);
    CHECK(slurp(dir + "/C.csv") == first); // byte-identical rerun

    std::filesystem::remove_all(dir);
    std::remove("test_small.toml");
}

TEST_CASE("climate command on the constant kernel") {
    const std::string dir = "out_test_climate";
    std::filesystem::remove_all(dir);
    {
        std::ofstream f("test_climate.toml");
        f << "[grid]\nT = 1.0\nN = 64\n[ensemble]\nM = 600\nseed = 12\n"
             "[functional]\nname = \"climate\"\ng = \"zero\"\nkernel = \"const\"\nscale = 1.0\n"
             "[estimator]\ndegree = 2\nfeatures = \"wt,iw\"\n[pipeline]\neps = 0.1\nwindow = 9\n";
    }
    int rc = run_command("climate", "test_climate.toml", dir, 1, true);
    CHECK(rc == 0);
    // Lambda column is exactly T - t: check one row of tax.csv
    std::ifstream f(dir + "/tax.csv");
    std::string header, row;
    std::getline(f, header);
    std::getline(f, row); // "# mean"
    std::getline(f, row);
    double first = 0.0;
    std::sscanf(row.c_str(), "%lf", &first);
    CHECK(first == doctest::Approx(1.0));
    std::filesystem::remove_all(dir);
    std::remove("test_climate.toml");
}

TEST_CASE("bad inputs exit with a config error") {
    CHECK(run_command("elasticity", "missing_config.toml", "out_test_bad", 1, false) == 1);
    {
        std::ofstream f("test_bad.toml");
        f << "[functional]\nname = \"not_a_functional\"\n";
    }
    CHECK(run_command("elasticity", "test_bad.toml", "out_test_bad", 1, false) == 1);
    CHECK(run_command("not-a-command", "test_bad.toml", "out_test_bad", 1, false) == 1);
    std::remove("test_bad.toml");
    std::filesystem::remove_all("out_test_bad");
}

TEST_CASE("tree oracle command") {
    const std::string dir = "out_test_tree";
    std::filesystem::remove_all(dir);
    {
        std::ofstream f("test_tree.toml");
        f << "[grid]\nT = 1.0\nN = 6\n[ensemble]\nM = 1\nseed = 1\n"
             "[functional]\nname = \"climate\"\ng = \"wt\"\nkernel = \"exp\"\nrate = 1.0\n"
             "[pipeline]\neps = 0.2\n";
    }
    CHECK(run_command("tree-oracle", "test_tree.toml", dir, 1, false) == 0);
    CHECK(slurp(dir + "/report.txt").find("PASS") != std::string::npos);
    std::filesystem::remove_all(dir);
    std::remove("test_tree.toml");
}

TEST_CASE("convergence command needs a long enough ladder") {
    {
        std::ofstream f("test_conv.toml");
        f << "[grid]\nT = 1.0\nN = 64\n[ensemble]\nM = 400\nseed = 5\n"
             "[functional]\nname = \"state_dependent\"\nf = \"sin\"\n"
             "[estimator]\ndegree = 2\nfeatures = \"wt\"\n"
             "[pipeline]\nquantity = \"ito_reconstruction\"\nladder = \"dt\"\nladder_values = \"64,128\"\n";
    }
    CHECK(run_command("convergence", "test_conv.toml", "out_test_conv", 1, false) == 1);
    std::remove("test_conv.toml");
    std::filesystem::remove_all("out_test_conv");
}

TEST_CASE("verify dispatches suites") {
    CHECK(cmd_verify("tree", "") == 0);
    CHECK(cmd_verify("definitely_not_a_suite", "") == 1);
    CHECK(acceptance_suites().size() == 10);
}
