#pragma once

#include <cstdint>
#include <vector>

#include "dynamics.hpp"
#include "functionals.hpp"
#include "malliavin.hpp"

namespace hyst {

// Binomial Brownian approximation: at each step the state moves by +-sqrt(dt)
// with probability 1/2, matching the first two Brownian moments. Histories at
// level i are bitmasks of up-moves; depth <= 20 keeps the dense solve feasible.
class ScenarioTree {
public:
    ScenarioTree(double horizon, int depth);

    int depth() const { return depth_; }
    double dt() const { return grid_.dt(); }
    const TimeGrid& grid() const { return grid_; }

    // noise value after `level` moves encoded by the low bits of hist
    double w_value(int level, std::uint32_t hist) const;
    // full node-value path of a history of `depth` moves
    std::vector<double> w_path(std::uint32_t hist) const;

private:
    TimeGrid grid_;
    int depth_;
};

// Adapted policy on the tree: value per (level, history), levels 0..depth-1.
struct TreePolicy {
    std::vector<std::vector<double>> c;
    double& at(int level, std::uint32_t hist) { return c[level][hist]; }
    double at(int level, std::uint32_t hist) const { return c[level][hist]; }
};

// Exact maximizer of the discretized objective for a policy-linear functional:
// assembles the stationarity system over all adapted node variables and solves
// it densely.
TreePolicy tree_optimize(const HysteresisFunctional& h, double eps, const ScenarioTree& tree);

// Independent route: the first-order condition c = w - eps (g + E[sum k]) with
// conditional expectations computed exactly by enumerating continuations.
TreePolicy tree_foc_formula(const HysteresisFunctional& h, double eps, const ScenarioTree& tree);

double tree_policy_max_difference(const TreePolicy& a, const TreePolicy& b);

// --- closed forms for the worked examples -------------------------------------

struct OracleValues {
    double C = 0.0, drift = 0.0, diffusion = 0.0;
};

// h = c_t int c: C = -int_0^t w ds - (T-t) w_t, drift 0, diffusion -(T-t).
OracleValues oracle_cumulative(int i, PathRef w);

// h = f(c_t): C = -f'(w_t), drift -f'''(w_t)/2, diffusion -f''(w_t).
OracleValues oracle_state_dependent(const SmoothFn& f, int i, PathRef w);

// Optimal policy for the midpoint functional with deterministic theta.
double oracle_jump(double theta_t, double t, double horizon, double eps);

// Optimal policy for the tipping functional: w_t - f(t - theta_t) G(M_t - w_t, t),
// plus the predicted diffusion 1 + f(t - theta_t) dG/dz.
double oracle_tipping_policy(const SmoothFn& f, int i, PathRef w, double horizon);
double oracle_tipping_diffusion(const SmoothFn& f, int i, PathRef w, double horizon);

// Martingale-extraction route for multiplicative kernels a_{s,t} = gt(t) gs(s):
// F_t = gt(t) (M_t - int_0^t gs(s) q_s ds) with q_s = h2_2(w_s, Y_s) and the
// martingale M reconstructed from a Clark-Ocone integrand fitted once.
class DetempleZapateroOracle {
public:
    DetempleZapateroOracle(BivariateFn h2, SmoothFn gt, SmoothFn gs,
                           std::shared_ptr<const DetKernel> kernel,
                           const BrownianEnsemble& ens, const BasisSpec& spec);

    double future_effect(int i, PathRef w) const;   // F_t
    double diffusion(int i, PathRef w) const;       // gt(t) * CO integrand of M

private:
    void q_row(PathRef w, std::span<double> out) const; // q_s = h2_2(w_s, Y_s)
    BivariateFn h2_;
    SmoothFn gt_, gs_;
    KernelAverageFunctional instance_;
    ClarkOconeResult co_;
};

} // namespace hyst
