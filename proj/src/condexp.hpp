#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ensemble.hpp"
#include "grid.hpp"
#include "smoothfn.hpp"

namespace hyst {

// Adapted per-node features of the noise path; the numerical stand-in for the
// filtration.
enum class Feature { Time, Wt, IntW, MaxW, ArgMaxW };

Feature feature_from_name(const std::string& name);
std::string feature_name(Feature f);

struct BasisSpec {
    std::vector<Feature> features = {Feature::Wt, Feature::IntW, Feature::MaxW};
    int degree = 3;
    bool split_fit = true; // fit on the first half of the ensemble, evaluate on the second
    // explicit fit range [fit_begin, fit_begin + fit_count); overrides split_fit
    // when fit_count > 0 (used by block-wise validation)
    int fit_begin = 0;
    int fit_count = -1;
};

// Fills rows[f][i] = feature f at node i in one pass over the path.
void feature_rows(PathRef w, const std::vector<Feature>& feats,
                  std::vector<std::vector<double>>& rows);

struct NodeDiagnostics {
    double r2 = 1.0;
    double condition = 1.0;
    bool degenerate = false;    // zero-variance target, constant fit
    bool ill_conditioned = false;
};

// Per-node least-squares fit of a target on polynomials of adapted features.
// Fitting is a single frozen phase; evaluation afterwards is pure.
class CondExpEstimator {
public:
    double evaluate(int node, PathRef w) const;
    void evaluate_row(PathRef w, std::span<double> out) const;

    const NodeDiagnostics& diagnostics(int node) const {
        return diag_[static_cast<std::size_t>(node)];
    }
    int nodes() const { return static_cast<int>(coef_.size()); }
    int basis_dimension() const { return static_cast<int>(exponents_.size()); }
    bool any_ill_conditioned() const;

    void write_coefficients_csv(const std::string& file) const;

private:
    friend CondExpEstimator fit_conditional(
        const BrownianEnsemble&, const std::function<void(int, PathRef, std::span<double>)>&,
        const BasisSpec&);
    friend CondExpEstimator fit_tail_recursive(
        const BrownianEnsemble&, const std::function<void(int, PathRef, std::span<double>)>&,
        std::span<const double>, const BasisSpec&);

    std::vector<Feature> features_;
    std::vector<std::vector<int>> exponents_;  // one multi-index per basis term
    std::vector<std::vector<double>> coef_;    // per node
    std::vector<std::vector<double>> mean_, scale_; // per node, per feature
    std::vector<NodeDiagnostics> diag_;
};

// target_row(j, w_j, out) writes the per-node target values of path j.
// With spec.split_fit the fit uses paths [0, M/2); evaluation of the returned
// estimator is valid for any path. M must be at least 10x the basis dimension.
CondExpEstimator fit_conditional(
    const BrownianEnsemble& ens,
    const std::function<void(int, PathRef, std::span<double>)>& target_row,
    const BasisSpec& spec);

// Backward-recursive fit of tail sums F_t = E[sum_{s>=t} q_s dt | F_t] whose
// one-step decomposition F_t = q_t dt + gamma_t F_{t+1} holds pathwise (gamma
// deterministic per node). The per-node target is q_t dt + gamma_t Fhat_{t+1}
// with the previous fit substituted, which carries one-step rather than
// whole-tail variance. Same estimator contract as fit_conditional.
CondExpEstimator fit_tail_recursive(
    const BrownianEnsemble& ens,
    const std::function<void(int, PathRef, std::span<double>)>& q_row,
    std::span<const double> gamma, const BasisSpec& spec);

// First path index of the held-out half (0 when split_fit is off).
int eval_begin(const BrownianEnsemble& ens, const BasisSpec& spec);

// --- nested Monte Carlo ------------------------------------------------------

struct NestedMcResult {
    double mean = 0.0;
    double se = 0.0;
};

// Average of a full-path functional over fresh continuations of prefix past
// node i. Seeds derive from `seed` and the continuation index only.
NestedMcResult nested_mc(const std::function<double(PathRef)>& future_functional,
                         const TimeGrid& grid, std::span<const double> prefix, int i,
                         int inner, std::uint64_t seed);

// --- closed forms --------------------------------------------------------------

double norm_cdf(double x);
double norm_pdf(double x);

// G(z, t) = int_t^T (2 Phi(z / sqrt(s-t)) - 1) ds, computed with the u = sqrt(s-t)
// substitution that removes the endpoint singularity; dG/dz alongside.
double tipping_gap_integral(double z, double t, double horizon, double tol = 1e-10);
double tipping_gap_integral_dz(double z, double t, double horizon, double tol = 1e-10);

// f(t - theta_t) * G(M_t - w_t, t) evaluated on a path.
double tipping_closed_form(int i, PathRef w, const SmoothFn& f, double horizon);

// Monte Carlo for E[int_t^T f(t - theta_s) ds | F_t] on continuations of the
// prefix. Within-step record crossings are integrated out with Brownian-bridge
// probabilities, so the estimate is unbiased for the continuum quantity and
// comparable to the closed form at Monte Carlo resolution.
NestedMcResult tipping_nested_mc(const SmoothFn& f, const TimeGrid& grid,
                                 std::span<const double> prefix, int i, int inner,
                                 std::uint64_t seed);

// Named exact conditional expectations used to validate the regression engine.
struct ClosedFormEntry {
    std::string name;
    std::function<double(int, PathRef)> value; // exact E[target | F_node]
};
ClosedFormEntry closed_form(const std::string& name, const TimeGrid& grid);

} // namespace hyst
