#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "condexp.hpp"
#include "dynamics.hpp"

namespace hyst {

// Flat typed key-value config, one table per module. Unknown keys are
// rejected; every run writes the fully resolved config next to its outputs.
struct ExperimentConfig {
    // [grid]
    double horizon = 1.0;
    int steps = 256;
    // [ensemble]
    int paths = 10000;
    std::uint64_t seed = 12345;
    // [functional]
    std::string functional = "cumulative";
    std::map<std::string, std::string> functional_params;
    // [estimator]
    BasisSpec basis;
    int inner = 20000;
    // [pipeline]
    double eps = 0.1;
    std::vector<double> eps_ladder = {0.1, 0.05, 0.025};
    std::vector<double> test_times = {0.25, 0.5, 0.75};
    int window = 8;
    std::string ladder = "dt";              // convergence ladder kind: dt | eps | paths
    std::vector<double> ladder_values;      // dt ladder holds step counts
    std::string quantity = "ito_reconstruction";

    std::string resolved() const;
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Writes one CSV per quantity: columns are nodes; rows are per-path values, or
// the summary statistics (mean, sd, quantiles) when `summary` is set.
class RunWriter {
public:
    RunWriter(std::string out_dir, bool summary);
    void write_matrix(const std::string& name, const TimeGrid& grid,
                      const std::function<void(int, std::span<double>)>& row, int rows);
    void write_report(const std::string& name, const std::string& text);
    void write_resolved_config(const ExperimentConfig& cfg);
    const std::string& dir() const { return dir_; }
    bool summary() const { return summary_; }

private:
    std::string dir_;
    bool summary_;
};

// Command pipelines; return process exit codes (0 ok, 1 config, 2 validation).
int cmd_elasticity(const ExperimentConfig& cfg, RunWriter& out);
int cmd_climate(const ExperimentConfig& cfg, RunWriter& out);
int cmd_tipping(const ExperimentConfig& cfg, RunWriter& out);
int cmd_tree_oracle(const ExperimentConfig& cfg, RunWriter& out);
int cmd_convergence(const ExperimentConfig& cfg, RunWriter& out);

int run_command(const std::string& command, const std::string& config_path,
                const std::string& out_dir, int threads, bool summary);

const char* version_string();

} // namespace hyst
