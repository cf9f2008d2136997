#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "oracles.hpp"
#include "parallel.hpp"

namespace hyst {

const char* version_string() { return "hyst 1.0.0"; }

namespace {

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                          (v.front() == '\'' && v.back() == '\'')))
        return v.substr(1, v.size() - 2);
    return v;
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    cfg.basis = BasisSpec{};
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": bad section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        try {
            if (section == "grid") {
                if (key == "T") cfg.horizon = std::stod(value);
                else if (key == "N") cfg.steps = std::stoi(value);
                else throw ConfigError("unknown key [grid] " + key);
            } else if (section == "ensemble") {
                if (key == "M") cfg.paths = std::stoi(value);
                else if (key == "seed") cfg.seed = std::stoull(value);
                else throw ConfigError("unknown key [ensemble] " + key);
            } else if (section == "functional") {
                if (key == "name") cfg.functional = value;
                else if (key == "f" || key == "h2" || key == "kernel" || key == "rate" ||
                         key == "scale" || key == "g")
                    cfg.functional_params[key] = value;
                else throw ConfigError("unknown key [functional] " + key);
            } else if (section == "estimator") {
                if (key == "degree") cfg.basis.degree = std::stoi(value);
                else if (key == "split_fit") cfg.basis.split_fit = (value == "true" || value == "1");
                else if (key == "inner") cfg.inner = std::stoi(value);
                else if (key == "features") {
                    cfg.basis.features.clear();
                    std::stringstream fs(value);
                    std::string tok;
                    while (std::getline(fs, tok, ','))
                        if (!trim(tok).empty()) cfg.basis.features.push_back(feature_from_name(trim(tok)));
                } else throw ConfigError("unknown key [estimator] " + key);
            } else if (section == "pipeline") {
                if (key == "eps") cfg.eps = std::stod(value);
                else if (key == "eps_ladder") cfg.eps_ladder = parse_double_list(value);
                else if (key == "test_times") cfg.test_times = parse_double_list(value);
                else if (key == "window") cfg.window = std::stoi(value);
                else if (key == "ladder") cfg.ladder = value;
                else if (key == "ladder_values") cfg.ladder_values = parse_double_list(value);
                else if (key == "quantity") cfg.quantity = value;
                else throw ConfigError("unknown key [pipeline] " + key);
            } else {
                throw ConfigError("unknown section [" + section + "]");
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError("config line " + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    if (cfg.horizon <= 0 || cfg.steps < 2) throw ConfigError("bad grid");
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str());
}

std::string ExperimentConfig::resolved() const {
    std::ostringstream os;
    os << "# resolved by " << version_string() << "\n";
    os << "[grid]\nT = " << fmt_full(horizon) << "\nN = " << steps << "\n";
    os << "[ensemble]\nM = " << paths << "\nseed = " << seed << "\n";
    os << "[functional]\nname = \"" << functional << "\"\n";
    for (const auto& [k, v] : functional_params) os << k << " = \"" << v << "\"\n";
    os << "[estimator]\ndegree = " << basis.degree << "\nsplit_fit = "
       << (basis.split_fit ? "true" : "false") << "\ninner = " << inner << "\nfeatures = \"";
    for (std::size_t i = 0; i < basis.features.size(); ++i)
        os << (i ? "," : "") << feature_name(basis.features[i]);
    os << "\"\n";
    os << "[pipeline]\neps = " << fmt_full(eps) << "\neps_ladder = \"";
    for (std::size_t i = 0; i < eps_ladder.size(); ++i)
        os << (i ? "," : "") << fmt_full(eps_ladder[i]);
    os << "\"\ntest_times = \"";
    for (std::size_t i = 0; i < test_times.size(); ++i)
        os << (i ? "," : "") << fmt_full(test_times[i]);
    os << "\"\nwindow = " << window << "\nladder = \"" << ladder << "\"\nladder_values = \"";
    for (std::size_t i = 0; i < ladder_values.size(); ++i)
        os << (i ? "," : "") << fmt_full(ladder_values[i]);
    os << "\"\nquantity = \"" << quantity << "\"\n";
    return os.str();
}

// --- writer -----------------------------------------------------------------

RunWriter::RunWriter(std::string out_dir, bool summary)
    : dir_(std::move(out_dir)), summary_(summary) {
    std::filesystem::create_directories(dir_);
}

void RunWriter::write_matrix(const std::string& name, const TimeGrid& grid,
                             const std::function<void(int, std::span<double>)>& row, int rows) {
    const std::string path = dir_ + "/" + name;
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    for (int i = 0; i < grid.nodes(); ++i)
        std::fprintf(f, "%s%s", i ? "," : "", fmt_full(grid.node(i)).c_str());
    std::fprintf(f, "\n");
    std::vector<double> buf(static_cast<std::size_t>(grid.nodes()));
    if (!summary_) {
        for (int j = 0; j < rows; ++j) {
            row(j, buf);
            for (std::size_t k = 0; k < buf.size(); ++k)
                std::fprintf(f, "%s%s", k ? "," : "", fmt_full(buf[k]).c_str());
            std::fprintf(f, "\n");
        }
    } else {
        const std::size_t nn = buf.size();
        std::vector<double> mean(nn, 0.0), m2(nn, 0.0), lo(nn, 0.0), hi(nn, 0.0);
        for (int j = 0; j < rows; ++j) {
            row(j, buf);
            for (std::size_t k = 0; k < nn; ++k) {
                mean[k] += buf[k];
                m2[k] += buf[k] * buf[k];
                lo[k] = j == 0 ? buf[k] : std::min(lo[k], buf[k]);
                hi[k] = j == 0 ? buf[k] : std::max(hi[k], buf[k]);
            }
        }
        auto emit = [&](const char* label, const std::function<double(std::size_t)>& v) {
            std::fprintf(f, "# %s\n", label);
            for (std::size_t k = 0; k < nn; ++k)
                std::fprintf(f, "%s%s", k ? "," : "", fmt_full(v(k)).c_str());
            std::fprintf(f, "\n");
        };
        emit("mean", [&](std::size_t k) { return mean[k] / rows; });
        emit("sd", [&](std::size_t k) {
            const double m = mean[k] / rows;
            return std::sqrt(std::max(0.0, m2[k] / rows - m * m));
        });
        emit("min", [&](std::size_t k) { return lo[k]; });
        emit("max", [&](std::size_t k) { return hi[k]; });
    }
    std::fclose(f);
}

void RunWriter::write_report(const std::string& name, const std::string& text) {
    std::ofstream f(dir_ + "/" + name);
    if (!f) throw ConfigError("cannot write " + name);
    f << text;
}

void RunWriter::write_resolved_config(const ExperimentConfig& cfg) {
    std::ofstream f(dir_ + "/config.resolved.toml");
    f << cfg.resolved();
    std::ofstream v(dir_ + "/VERSION");
    v << version_string() << "\n";
}

// --- shared helpers ------------------------------------------------------------

namespace {

std::vector<int> nodes_from_times(const TimeGrid& grid, const std::vector<double>& times) {
    std::vector<int> out;
    for (double t : times) {
        int i = static_cast<int>(std::lround(t / grid.dt()));
        i = std::clamp(i, 1, grid.steps() - 1);
        out.push_back(i);
    }
    return out;
}

std::string check_table(const std::vector<CoefficientCheck>& checks, const TimeGrid& grid) {
    std::ostringstream os;
    os << "node,time,alpha_mean,alpha_se,beta_mean,beta_se,z_alpha,z_beta\n";
    for (const auto& c : checks)
        os << c.node << "," << fmt_full(grid.node(c.node)) << "," << fmt_full(c.alpha_mean)
           << "," << fmt_full(c.alpha_se) << "," << fmt_full(c.beta_mean) << ","
           << fmt_full(c.beta_se) << "," << fmt_full(c.z_alpha) << "," << fmt_full(c.z_beta)
           << "\n";
    return os.str();
}

bool all_z_within(const std::vector<CoefficientCheck>& checks, double bound) {
    for (const auto& c : checks)
        if (std::abs(c.z_alpha) > bound || std::abs(c.z_beta) > bound) return false;
    return true;
}

} // namespace

// --- commands ----------------------------------------------------------------------

int cmd_elasticity(const ExperimentConfig& cfg, RunWriter& out) {
    TimeGrid grid(cfg.horizon, cfg.steps);
    BrownianEnsemble ens(grid, cfg.paths, cfg.seed);
    auto h = make_functional(cfg.functional, cfg.functional_params);
    out.write_resolved_config(cfg);

    ElasticityPipeline pipe(*h, ens, cfg.basis);
    ElasticityDynamics dyn(*h, ens, cfg.basis);

    const int b = eval_begin(ens, cfg.basis);
    const int rows = ens.paths() - b;
    const std::size_t nn = static_cast<std::size_t>(grid.nodes());

    out.write_matrix("C.csv", grid, [&](int j, std::span<double> buf) {
        std::vector<double> I(nn), F(nn);
        pipe.rows(ens.path(b + j), buf, I, F);
    }, rows);
    out.write_matrix("decomposition.csv", grid, [&](int j, std::span<double> buf) {
        // interleave present and future: even rows I, odd rows F
        std::vector<double> C(nn), I(nn), F(nn);
        pipe.rows(ens.path(b + j / 2), C, I, F);
        const auto& src = (j % 2 == 0) ? I : F;
        std::copy(src.begin(), src.end(), buf.begin());
    }, 2 * rows);

    const auto nodes = nodes_from_times(grid, cfg.test_times);
    auto value_row = [&](int j, PathRef w, std::span<double> buf) {
        (void)j;
        pipe.c_row(w, buf);
    };
    auto pred_drift = [&](int, PathRef w, std::span<double> buf) { dyn.drift_row(w, buf); };
    auto pred_diff = [&](int, PathRef w, std::span<double> buf) { dyn.diffusion_row(w, buf); };
    auto checks = empirical_coefficients(ens, b, value_row, nodes, cfg.window, pred_drift,
                                         pred_diff);

    std::ostringstream rep;
    rep << version_string() << "\nfunctional: " << h->name() << "\n";
    rep << "empirical minus predicted coefficients, " << rows << " paths\n";
    rep << check_table(checks, grid);
    const bool ok = all_z_within(checks, 3.0);
    rep << (ok ? "PASS" : "FAIL") << ": all |z| <= 3\n";
    out.write_report("report.txt", rep.str());

    std::ostringstream cmpcsv;
    cmpcsv << "node,time,beta_empirical,beta_predicted_mean,z_beta,alpha_empirical,z_alpha\n";
    for (const auto& c : checks)
        cmpcsv << c.node << "," << fmt_full(grid.node(c.node)) << "," << fmt_full(c.beta_mean)
               << "," << fmt_full(c.beta_mean - c.beta_diff_mean) << "," << fmt_full(c.z_beta)
               << "," << fmt_full(c.alpha_mean) << "," << fmt_full(c.z_alpha) << "\n";
    out.write_report("empirical_vs_predicted.csv", cmpcsv.str());
    return ok ? 0 : 2;
}

int cmd_climate(const ExperimentConfig& cfg, RunWriter& out) {
    TimeGrid grid(cfg.horizon, cfg.steps);
    BrownianEnsemble ens(grid, cfg.paths, cfg.seed);
    auto h = make_functional(cfg.functional, cfg.functional_params);
    if (!h->linear_in_policy())
        throw ConfigError("climate command requires a policy-linear functional");
    out.write_resolved_config(cfg);

    TaxPipeline tax(*h, cfg.eps, ens, cfg.basis);
    const int b = eval_begin(ens, cfg.basis);
    const int rows = ens.paths() - b;

    out.write_matrix("tax.csv", grid, [&](int j, std::span<double> buf) {
        tax.lambda_row(ens.path(b + j), buf);
    }, rows);
    out.write_matrix("policy.csv", grid, [&](int j, std::span<double> buf) {
        tax.policy_row(ens.path(b + j), buf);
    }, rows);

    const auto nodes = nodes_from_times(grid, cfg.test_times);
    auto value_row = [&](int, PathRef w, std::span<double> buf) { tax.lambda_row(w, buf); };
    auto pred_drift = [&](int, PathRef w, std::span<double> buf) {
        for (int i = 0; i < static_cast<int>(buf.size()); ++i)
            buf[static_cast<std::size_t>(i)] = tax.pred_lambda_drift(i, w);
    };
    auto pred_diff = [&](int, PathRef w, std::span<double> buf) {
        for (int i = 0; i < static_cast<int>(buf.size()); ++i)
            buf[static_cast<std::size_t>(i)] = tax.pred_lambda_diffusion(i, w);
    };
    auto checks =
        empirical_coefficients(ens, b, value_row, nodes, cfg.window, pred_drift, pred_diff);

    std::ostringstream dyncsv;
    dyncsv << check_table(checks, grid);
    out.write_report("dynamics.csv", dyncsv.str());

    std::ostringstream rep;
    rep << version_string() << "\nfunctional: " << h->name() << "\neps = " << fmt_full(cfg.eps)
        << "\n";
    rep << "tax dynamics, empirical minus predicted, " << rows << " paths\n";
    rep << check_table(checks, grid);
    const bool ok = all_z_within(checks, 3.0);
    rep << (ok ? "PASS" : "FAIL") << ": all |z| <= 3\n";
    out.write_report("report.txt", rep.str());
    return ok ? 0 : 2;
}

int cmd_tipping(const ExperimentConfig& cfg, RunWriter& out) {
    TimeGrid grid(cfg.horizon, cfg.steps);
    BrownianEnsemble ens(grid, cfg.paths, cfg.seed);
    auto weight = smooth_fn(cfg.functional_params.count("f") ? cfg.functional_params.at("f")
                                                             : "relu");
    TippingFunctional h(weight);
    out.write_resolved_config(cfg);

    const auto nodes = nodes_from_times(grid, cfg.test_times);
    const int prefixes = std::min(20, ens.paths());

    std::ostringstream csv;
    csv << "path,node,time,closed_form,nested_mc,mc_se,z\n";
    bool ok = true;
    for (int j = 0; j < prefixes; ++j) {
        PathRef w = ens.path(j);
        for (int i : nodes) {
            const double cf = oracle_tipping_policy(weight, i, w, grid.horizon());
            auto xi = [&](PathRef full) { return h.future_density_sum_at(i, full, full); };
            auto mc = nested_mc(xi, grid, w.v, i, cfg.inner, mix64(cfg.seed, j, i));
            const double mc_policy = w[i] - mc.mean;
            const double z = mc.se > 0 ? (cf - mc_policy) / mc.se : 0.0;
            ok = ok && std::abs(z) <= 3.0;
            csv << j << "," << i << "," << fmt_full(grid.node(i)) << "," << fmt_full(cf) << ","
                << fmt_full(mc_policy) << "," << fmt_full(mc.se) << "," << fmt_full(z) << "\n";
        }
    }
    out.write_report("tipping.csv", csv.str());

    // diffusion of the closed-form policy vs the predicted 1 - g_{t,t}
    auto value_row = [&](int, PathRef w, std::span<double> buf) {
        for (int i = 0; i < static_cast<int>(buf.size()); ++i)
            buf[static_cast<std::size_t>(i)] = oracle_tipping_policy(weight, i, w, grid.horizon());
    };
    auto pred_diff = [&](int, PathRef w, std::span<double> buf) {
        for (int i = 0; i < static_cast<int>(buf.size()); ++i)
            buf[static_cast<std::size_t>(i)] =
                oracle_tipping_diffusion(weight, i, w, grid.horizon());
    };
    auto checks = empirical_coefficients(ens, 0, value_row, nodes, cfg.window, nullptr,
                                         pred_diff);
    std::ostringstream rep;
    rep << version_string() << "\ntipping weight: " << weight.name << "\n";
    rep << "closed form vs nested Monte Carlo on " << prefixes << " prefixes\n";
    rep << check_table(checks, grid);
    for (const auto& c : checks) ok = ok && std::abs(c.z_beta) <= 3.0;
    rep << (ok ? "PASS" : "FAIL") << "\n";
    out.write_report("report.txt", rep.str());
    return ok ? 0 : 2;
}

int cmd_tree_oracle(const ExperimentConfig& cfg, RunWriter& out) {
    const int depth = std::min(cfg.steps, 10);
    ScenarioTree tree(cfg.horizon, depth);
    auto h = make_functional(cfg.functional, cfg.functional_params);
    out.write_resolved_config(cfg);

    auto exact = tree_optimize(*h, cfg.eps, tree);
    auto formula = tree_foc_formula(*h, cfg.eps, tree);
    const double diff = tree_policy_max_difference(exact, formula);

    std::ostringstream csv;
    csv << "level,history,policy_optimize,policy_formula\n";
    for (int i = 0; i < depth; ++i)
        for (std::uint32_t hist = 0; hist < (1u << i); ++hist)
            csv << i << "," << hist << "," << fmt_full(exact.at(i, hist)) << ","
                << fmt_full(formula.at(i, hist)) << "\n";
    out.write_report("tree.csv", csv.str());

    std::ostringstream rep;
    rep << version_string() << "\ndepth " << depth << ", eps " << fmt_full(cfg.eps) << "\n";
    rep << "max |optimize - formula| = " << fmt_full(diff) << "\n";
    const bool ok = diff <= 1e-10;
    rep << (ok ? "PASS" : "FAIL") << ": <= 1e-10\n";
    out.write_report("report.txt", rep.str());
    return ok ? 0 : 2;
}

int cmd_convergence(const ExperimentConfig& cfg, RunWriter& out) {
    out.write_resolved_config(cfg);
    if (cfg.ladder_values.size() < 3) throw ConfigError("convergence ladder needs >= 3 points");

    std::vector<double> xs, errs;
    if (cfg.quantity == "small_eps") {
        TimeGrid grid(cfg.horizon, cfg.steps);
        BrownianEnsemble ens(grid, cfg.paths, cfg.seed);
        auto h = make_functional(cfg.functional, cfg.functional_params);
        auto rep = small_eps_check(*h, cfg.ladder_values, ens, cfg.basis);
        xs = rep.eps;
        errs = rep.err;
    } else if (cfg.quantity == "ito_reconstruction") {
        // Euler reconstruction error of the predicted elasticity coefficients
        auto h = make_functional(cfg.functional, cfg.functional_params);
        for (double nd : cfg.ladder_values) {
            const int n = static_cast<int>(nd);
            TimeGrid grid(cfg.horizon, n);
            BrownianEnsemble ens(grid, cfg.paths, cfg.seed);
            ElasticityPipeline pipe(*h, ens, cfg.basis);
            ElasticityDynamics dyn(*h, ens, cfg.basis);
            const int b = eval_begin(ens, cfg.basis);
            const std::size_t nn = static_cast<std::size_t>(grid.nodes());
            std::vector<double> C(nn), I(nn), F(nn), dr(nn), df(nn);
            double ss = 0.0;
            for (int j = b; j < ens.paths(); ++j) {
                PathRef w = ens.path(j);
                pipe.rows(w, C, I, F);
                dyn.drift_row(w, dr);
                dyn.diffusion_row(w, df);
                double rec = C[0];
                for (int i = 0; i < n; ++i)
                    rec += dr[static_cast<std::size_t>(i)] * grid.dt() +
                           df[static_cast<std::size_t>(i)] * (w[i + 1] - w[i]);
                const double d = rec - C[nn - 1];
                ss += d * d;
            }
            xs.push_back(grid.dt());
            errs.push_back(std::sqrt(ss / (ens.paths() - b)));
        }
    } else if (cfg.quantity == "se") {
        auto h = make_functional(cfg.functional, cfg.functional_params);
        for (double md : cfg.ladder_values) {
            const int m = static_cast<int>(md);
            TimeGrid grid(cfg.horizon, cfg.steps);
            BrownianEnsemble ens(grid, m, cfg.seed);
            ElasticityPipeline pipe(*h, ens, cfg.basis);
            const auto nodes = nodes_from_times(grid, cfg.test_times);
            auto value_row = [&](int, PathRef w, std::span<double> buf) { pipe.c_row(w, buf); };
            auto checks = empirical_coefficients(ens, eval_begin(ens, cfg.basis), value_row,
                                                 nodes, cfg.window);
            double se = 0.0;
            for (const auto& c : checks) se = std::max(se, c.beta_se);
            xs.push_back(static_cast<double>(m));
            errs.push_back(se);
        }
    } else {
        throw ConfigError("unknown convergence quantity: " + cfg.quantity);
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (errs[k] <= 1e-14) continue;
        const double lx = std::log(xs[k]), ly = std::log(errs[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    const double order = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx)
                                : std::numeric_limits<double>::infinity();

    std::ostringstream csv;
    csv << "x,error\n";
    for (std::size_t k = 0; k < xs.size(); ++k)
        csv << fmt_full(xs[k]) << "," << fmt_full(errs[k]) << "\n";
    csv << "# observed_order," << fmt_full(order) << "\n";
    out.write_report("rates.csv", csv.str());
    return 0;
}

int run_command(const std::string& command, const std::string& config_path,
                const std::string& out_dir, int threads, bool summary) {
    try {
        set_thread_count(threads);
        ExperimentConfig cfg =
            config_path.empty() ? ExperimentConfig{} : parse_config_file(config_path);
        RunWriter out(out_dir.empty() ? "out" : out_dir, summary);
        if (command == "elasticity") return cmd_elasticity(cfg, out);
        if (command == "climate") return cmd_climate(cfg, out);
        if (command == "tipping") return cmd_tipping(cfg, out);
        if (command == "tree-oracle") return cmd_tree_oracle(cfg, out);
        if (command == "convergence") return cmd_convergence(cfg, out);
        throw ConfigError("unknown command: " + command);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

} // namespace hyst
