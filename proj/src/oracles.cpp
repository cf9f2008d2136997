#include "oracles.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "common.hpp"

namespace hyst {

ScenarioTree::ScenarioTree(double horizon, int depth)
    : grid_(horizon, depth), depth_(depth) {
    if (depth < 1 || depth > 20) throw ConfigError("tree depth must be in [1, 20]");
}

double ScenarioTree::w_value(int level, std::uint32_t hist) const {
    const double step = std::sqrt(grid_.dt());
    double v = 0.0;
    for (int b = 0; b < level; ++b) v += (hist >> b & 1u) ? step : -step;
    return v;
}

std::vector<double> ScenarioTree::w_path(std::uint32_t hist) const {
    const double step = std::sqrt(grid_.dt());
    std::vector<double> out(static_cast<std::size_t>(depth_) + 1, 0.0);
    for (int b = 0; b < depth_; ++b)
        out[static_cast<std::size_t>(b) + 1] =
            out[static_cast<std::size_t>(b)] + ((hist >> b & 1u) ? step : -step);
    return out;
}

namespace {

int var_offset(int level) { return (1 << level) - 1; } // sum of 2^j, j < level

} // namespace

TreePolicy tree_optimize(const HysteresisFunctional& h, double eps, const ScenarioTree& tree) {
    if (!h.linear_in_policy())
        throw ConfigError("tree oracle requires a policy-linear functional");
    const int n = tree.depth();
    const double dt = tree.dt();
    const int nvars = (1 << n) - 1; // adapted decisions at levels 0..n-1

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nvars, nvars);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(nvars);

    // Stationarity of sum_{i<n} sum_{leaves} P [ -1/2 (c - w)^2 - eps h_i ] dt
    // over the adapted variables. Terminal histories carry the kernel weights
    // of all their ancestors.
    const std::uint32_t leaves = 1u << n;
    const double pleaf = 1.0 / static_cast<double>(leaves);
    SamplePath wpath(tree.grid(), std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    for (std::uint32_t leaf = 0; leaf < leaves; ++leaf) {
        wpath.values = tree.w_path(leaf);
        PathRef w = wpath.ref();
        for (int i = 0; i < n; ++i) {
            const std::uint32_t hist_i = leaf & ((1u << i) - 1u);
            const int vi = var_offset(i) + static_cast<int>(hist_i);
            // quadratic tracking term and the contemporaneous damage
            A(vi, vi) += pleaf * dt;
            b(vi) += pleaf * dt * (w[i] - eps * h.atom(i, w, w));
            // past-policy damages: dh_i / dc_j = density(j, i) dt for j < i
            for (int j = 0; j < i; ++j) {
                const std::uint32_t hist_j = leaf & ((1u << j) - 1u);
                const int vj = var_offset(j) + static_cast<int>(hist_j);
                b(vj) += -pleaf * dt * eps * h.density(j, i, w, w) * dt;
            }
        }
    }

    Eigen::LDLT<Eigen::MatrixXd> solver(A);
    if (solver.info() != Eigen::Success)
        throw ValidationError("tree stationarity system is singular");
    Eigen::VectorXd c = solver.solve(b);

    TreePolicy out;
    out.c.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out.c[static_cast<std::size_t>(i)].resize(1u << i);
        for (std::uint32_t hist = 0; hist < (1u << i); ++hist)
            out.at(i, hist) = c(var_offset(i) + static_cast<int>(hist));
    }
    return out;
}

TreePolicy tree_foc_formula(const HysteresisFunctional& h, double eps,
                            const ScenarioTree& tree) {
    const int n = tree.depth();
    const double dt = tree.dt();
    TreePolicy out;
    out.c.resize(static_cast<std::size_t>(n));
    SamplePath wpath(tree.grid(), std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    for (int i = 0; i < n; ++i) {
        out.c[static_cast<std::size_t>(i)].resize(1u << i);
        for (std::uint32_t hist = 0; hist < (1u << i); ++hist) {
            // exact conditional expectation over all continuations of hist
            const int tail_bits = n - i;
            const std::uint32_t tails = 1u << tail_bits;
            double acc = 0.0, g_acc = 0.0;
            for (std::uint32_t tail = 0; tail < tails; ++tail) {
                const std::uint32_t leaf = hist | (tail << i);
                wpath.values = tree.w_path(leaf);
                PathRef w = wpath.ref();
                g_acc += h.atom(i, w, w);
                for (int s = i + 1; s < n; ++s) acc += h.density(i, s, w, w) * dt;
            }
            out.at(i, hist) =
                tree.w_value(i, hist) -
                eps * (g_acc / tails + acc / tails);
        }
    }
    return out;
}

double tree_policy_max_difference(const TreePolicy& a, const TreePolicy& b) {
    double sup = 0.0;
    for (std::size_t i = 0; i < a.c.size(); ++i)
        for (std::size_t k = 0; k < a.c[i].size(); ++k)
            sup = std::max(sup, std::abs(a.c[i][k] - b.c[i][k]));
    return sup;
}

// --- closed forms ------------------------------------------------------------------

OracleValues oracle_cumulative(int i, PathRef w) {
    const double T = w.grid->horizon();
    const double t = w.grid->node(i);
    double integral = 0.0;
    for (int j = 0; j < i; ++j) integral += w[j];
    integral *= w.dt();
    return {-integral - (T - t) * w[i], 0.0, -(T - t)};
}

OracleValues oracle_state_dependent(const SmoothFn& f, int i, PathRef w) {
    return {-f.d1(w[i]), -0.5 * f.d3(w[i]), -f.d2(w[i])};
}

double oracle_jump(double theta_t, double t, double horizon, double eps) {
    // left rule at the midpoint itself
    return t <= 0.5 * horizon ? theta_t - 2.0 * eps : theta_t;
}

double oracle_tipping_policy(const SmoothFn& f, int i, PathRef w, double horizon) {
    return w[i] - tipping_closed_form(i, w, f, horizon);
}

double oracle_tipping_diffusion(const SmoothFn& f, int i, PathRef w, double horizon) {
    double m = w[0];
    int arg = 0;
    for (int j = 1; j <= i; ++j)
        if (w[j] > m) {
            m = w[j];
            arg = j;
        }
    const double t = w.grid->node(i);
    const double weight = f.f(t - w.grid->node(arg));
    if (weight == 0.0) return 1.0;
    return 1.0 + weight * tipping_gap_integral_dz(m - w[i], t, horizon);
}

// --- Detemple-Zapatero route ----------------------------------------------------------

DetempleZapateroOracle::DetempleZapateroOracle(BivariateFn h2, SmoothFn gt, SmoothFn gs,
                                               std::shared_ptr<const DetKernel> kernel,
                                               const BrownianEnsemble& ens,
                                               const BasisSpec& spec)
    : h2_(h2), gt_(std::move(gt)), gs_(std::move(gs)),
      instance_(std::move(h2), std::move(kernel)) {
    const int n = ens.grid().steps();
    const double dt = ens.grid().dt();
    auto xi = [this, n, dt](PathRef w) {
        std::vector<double> q(static_cast<std::size_t>(n) + 1);
        q_row(w, q);
        double acc = 0.0;
        for (int s = 0; s < n; ++s)
            acc += gs_.f(w.grid->node(s)) * q[static_cast<std::size_t>(s)];
        return acc * dt;
    };
    co_ = clark_ocone_integrand(xi, ens, spec);
}

void DetempleZapateroOracle::q_row(PathRef w, std::span<double> out) const {
    const int n = w.steps();
    std::vector<double> y(static_cast<std::size_t>(n) + 1);
    instance_.averages(w, y);
    for (int s = 0; s <= n; ++s)
        out[static_cast<std::size_t>(s)] = h2_.f2(w[s], y[static_cast<std::size_t>(s)]);
}

double DetempleZapateroOracle::future_effect(int i, PathRef w) const {
    const int n = w.steps();
    const double dt = w.dt();
    std::vector<double> q(static_cast<std::size_t>(n) + 1);
    q_row(w, q);
    std::vector<double> g(static_cast<std::size_t>(n) + 1);
    co_.integrand.evaluate_row(w, g);
    double martingale = co_.xi_mean;
    double past = 0.0;
    for (int r = 0; r < i; ++r) {
        martingale += g[static_cast<std::size_t>(r)] * (w[r + 1] - w[r]);
        past += gs_.f(w.grid->node(r)) * q[static_cast<std::size_t>(r)] * dt;
    }
    return gt_.f(w.grid->node(i)) * (martingale - past);
}

double DetempleZapateroOracle::diffusion(int i, PathRef w) const {
    return gt_.f(w.grid->node(i)) * co_.integrand.evaluate(i, w);
}

} // namespace hyst
