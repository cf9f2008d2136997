// Batch experiment runner over the shared-library C API.
#include <CLI11.hpp>
#include <string>

#include "hyst.h"

int main(int argc, char** argv) {
    CLI::App app{std::string("hysteresis policy engine (") + hyst_version() + ")"};
    app.require_subcommand(1);

    std::string config, out_dir = "out", suite = "all";
    int threads = 0;
    bool summary = false;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config, "experiment config file (TOML)");
        if (needs_config) opt->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
        cmd->add_flag("--summary", summary, "write per-node summary statistics instead of paths");
    };

    add_common(app.add_subcommand("elasticity",
                                  "elasticity of the optimal policy and its dynamics"),
               true);
    add_common(app.add_subcommand("climate", "Pigouvian tax and optimal emissions"), true);
    add_common(app.add_subcommand("tipping", "tipping-point closed form vs nested Monte Carlo"),
               true);
    add_common(app.add_subcommand("tree-oracle", "exact scenario-tree optimizer check"), true);
    add_common(app.add_subcommand("convergence", "observed convergence orders over a ladder"),
               true);
    auto* verify = app.add_subcommand("verify", "run validation suites");
    verify->add_option("suite", suite, "suite name or 'all'");
    add_common(verify, false);

    CLI11_PARSE(app, argc, argv);

    hyst_set_threads(threads);
    hyst_status rc = HYST_ERR_CONFIG;
    if (app.got_subcommand("verify")) {
        rc = hyst_run_verify(suite.c_str(), out_dir.c_str());
    } else {
        const char* name = app.get_subcommands().front()->get_name().c_str();
        rc = hyst_run_command(name, config.empty() ? nullptr : config.c_str(),
                              out_dir.c_str(), threads, summary ? 1 : 0);
    }
    if (rc != HYST_OK && hyst_last_error()[0] != '\0')
        std::fprintf(stderr, "%s\n", hyst_last_error());
    return static_cast<int>(rc);
}
