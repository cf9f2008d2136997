#pragma once

#include <functional>
#include <span>
#include <vector>

#include "condexp.hpp"
#include "dupire.hpp"
#include "ensemble.hpp"
#include "functionals.hpp"

namespace hyst {

// Absolutely continuous, possibly anticipative process xi_t with its time
// derivative and diagonal Malliavin derivative D_t xi_t. Row fillers are
// optional fast paths; the scalar evaluators are the contract.
struct ConditionalProcess {
    std::function<double(int, PathRef)> xi, dxi_dt, malliavin_diag;
    std::function<void(PathRef, std::span<double>)> xi_row, dxi_dt_row, malliavin_diag_row;
};

// Fitted semimartingale data of the adapted projection X_t = E[xi_t | F_t]:
//   dX = E[d_t xi | F_t] dt + E[D_t xi_t | F_t] dw.
struct TotalDerivativeResult {
    CondExpEstimator drift, diffusion, projection;
};

TotalDerivativeResult total_derivative(const ConditionalProcess& xi,
                                       const BrownianEnsemble& ens, const BasisSpec& spec);

// Adapted coefficient fields along the noise path.
struct CoefficientField {
    std::function<double(int, PathRef)> drift, diffusion;
};

// The anticipative process xi_t = eta_0 + int_0^t alpha ds + int_0^T beta dw
// whose adapted projection is the Ito process with coefficients eta.
// d_beta(t, s, w) = D_t beta_s when beta is genuinely random (0 by default).
ConditionalProcess ito_to_projection(double eta0, const CoefficientField& eta,
                                     std::function<double(int, int, PathRef)> d_beta = nullptr);

// --- stochastic hysteresis elasticity ---------------------------------------

// C_t = -d_{c_t}h_t(w^t) - E[int_t^T delta_t h_s(w^s) ds | F_t], with the
// future part fitted once on the ensemble.
class ElasticityPipeline {
public:
    ElasticityPipeline(const HysteresisFunctional& h, const BrownianEnsemble& ens,
                       const BasisSpec& spec);

    void rows(PathRef w, std::span<double> C, std::span<double> I, std::span<double> F) const;
    void c_row(PathRef w, std::span<double> out) const;

    const CondExpEstimator& future() const { return future_; }
    const HysteresisFunctional& functional() const { return *h_; }

private:
    const HysteresisFunctional* h_;
    CondExpEstimator future_;
};

// Predicted coefficients of dC from the closed-form decomposition:
//   drift     = -(Delta_t dh + 1/2 d^3 h - delta_t h_t + E[int d_t(delta_t h_s) ds | F_t])
//   diffusion = -(d^2 h + E[int D_t(delta_t h_s) ds | F_t])
class ElasticityDynamics {
public:
    ElasticityDynamics(const HysteresisFunctional& h, const BrownianEnsemble& ens,
                       const BasisSpec& spec, dupire::Options opts = {});

    double drift(int i, PathRef w) const;
    double diffusion(int i, PathRef w) const;
    void drift_row(PathRef w, std::span<double> out) const;
    void diffusion_row(PathRef w, std::span<double> out) const;

private:
    const HysteresisFunctional* h_;
    CondExpEstimator time_part_, stoch_part_;
    dupire::Options opts_;
};

// --- empirical drift/diffusion extraction -----------------------------------

// Window estimates around node i using steps u with u+1 centered on i (so a
// coefficient varying linearly in time incurs no placement bias):
//   per path:  beta = sum dX dw / sum (dw)^2, alpha = mean (dX - beta dw)/dt
//   pooled:    same ratios over all paths jointly (kills errors that are
//              common across paths but independent of future increments)
// with cross-path standard errors; optionally compared against per-path
// predicted coefficients.
struct CoefficientCheck {
    int node = 0;
    double alpha_mean = 0, alpha_se = 0, beta_mean = 0, beta_se = 0;
    double alpha_diff_mean = 0, alpha_diff_se = 0, beta_diff_mean = 0, beta_diff_se = 0;
    double z_alpha = 0, z_beta = 0;
    double alpha_pooled = 0, alpha_pooled_se = 0, beta_pooled = 0, beta_pooled_se = 0;
    // pooled discrepancies vs the window-averaged predictions, with sandwich
    // standard errors; free of the per-path ratio bias
    double alpha_pooled_diff = 0, alpha_pooled_diff_se = 0;
    double beta_pooled_diff = 0, beta_pooled_diff_se = 0;
    double z_alpha_pooled = 0, z_beta_pooled = 0;
};

using PathRowFn = std::function<void(int, PathRef, std::span<double>)>;

std::vector<CoefficientCheck> empirical_coefficients(
    const BrownianEnsemble& ens, int first_path, const PathRowFn& value_row,
    std::span<const int> nodes, int window, const PathRowFn& pred_drift_row = nullptr,
    const PathRowFn& pred_diffusion_row = nullptr, int last_path = -1);

// Validation with the conditioning noise in the error bars: the ensemble is cut
// into independent (fit, evaluate) blocks, the factory rebuilds the pipeline on
// each block's fit range, and the per-block pooled discrepancies provide the
// standard errors. z fields carry the blocked statistics.
struct BlockSpec {
    int blocks = 16;
    int window = 9;
};

// factory(fit_begin, fit_count) -> (value_row, pred_drift_row, pred_diffusion_row)
using PipelineFactory = std::function<void(int, int, PathRowFn&, PathRowFn&, PathRowFn&)>;

std::vector<CoefficientCheck> blocked_empirical_check(const BrownianEnsemble& ens,
                                                      const PipelineFactory& factory,
                                                      std::span<const int> nodes,
                                                      const BlockSpec& spec);

// --- Pigouvian tax -----------------------------------------------------------

// For functionals linear in the policy: Lambda_t = g_t(w^t) + E[int_t^T
// k_{t,s}(w^s) ds | F_t] and c_t = w_t - eps * Lambda_t, with the predicted
// coefficients of d Lambda.
class TaxPipeline {
public:
    TaxPipeline(const HysteresisFunctional& h, double eps, const BrownianEnsemble& ens,
                const BasisSpec& spec, dupire::Options opts = {});

    void lambda_row(PathRef w, std::span<double> out) const;
    void policy_row(PathRef w, std::span<double> out) const;

    double pred_lambda_drift(int i, PathRef w) const;
    double pred_lambda_diffusion(int i, PathRef w) const;
    double pred_policy_drift(int i, PathRef w) const { return -eps_ * pred_lambda_drift(i, w); }
    double pred_policy_diffusion(int i, PathRef w) const {
        return 1.0 - eps_ * pred_lambda_diffusion(i, w);
    }

    const CondExpEstimator& future() const { return future_; }
    double eps() const { return eps_; }

private:
    const HysteresisFunctional* h_;
    double eps_;
    CondExpEstimator future_, time_part_, stoch_part_;
    dupire::Options opts_;
};

// --- first-order-condition solver ---------------------------------------------

struct FocOptions {
    double damping = 0.5;
    double tol = 1e-9;
    int max_iter = 80;
};

struct PolicyProcess {
    std::vector<double> c; // paths x nodes, row-major
    std::size_t stride = 0;
    bool converged = true;
    int iterations = 0;
    std::vector<double> residual_trace; // sup-node ensemble RMS of each update

    std::span<const double> row(int j) const {
        return {c.data() + static_cast<std::size_t>(j) * stride, stride};
    }
};

// Damped fixed-point iteration on c = w - eps (atom + E[future density | F]).
// Exact in one step when the derivative data is policy-free; the conditioner
// is refit against the current iterate otherwise. Non-contraction is reported
// through `converged` and the residual trace.
PolicyProcess foc_solve(const HysteresisFunctional& h, double eps,
                        const BrownianEnsemble& ens, const BasisSpec& spec,
                        const FocOptions& opts = {});

// --- optimal-policy coefficients ------------------------------------------------

// Coefficient formulas of the optimal policy, assembled from the atom's Dupire
// data and the fitted conditional expectations; beta enters alpha.
class PolicyCoefficients {
public:
    PolicyCoefficients(const HysteresisFunctional& h, double eps, const PolicyProcess& policy,
                       const BrownianEnsemble& ens, const BasisSpec& spec,
                       dupire::Options opts = {});

    double beta(int i, PathRef c, PathRef w) const;
    double alpha(int i, PathRef c, PathRef w) const;

    // residuals of the two coefficient equations at externally estimated
    // (alpha, beta); zero in expectation along the solved policy
    double residual_drift(int i, PathRef c, PathRef w, double alpha_emp, double beta_emp) const;
    double residual_diffusion(int i, PathRef c, PathRef w, double beta_emp) const;

private:
    double denom(int i, PathRef c, PathRef w, const dupire::AtomIto& ai) const;
    const HysteresisFunctional* h_;
    double eps_;
    CondExpEstimator time_part_, stoch_part_;
    dupire::Options opts_;
};

// --- deterministic environment ---------------------------------------------------

struct DeterministicElasticityResult {
    std::vector<double> theta, C, dC_dt;
};

// d theta = b(theta) dt; elasticity and its time derivative along the frozen path.
DeterministicElasticityResult deterministic_elasticity(
    const HysteresisFunctional& h, const std::function<double(double)>& b,
    const TimeGrid& grid, double theta0, dupire::Options opts = {});

// --- small-eps asymptotics ---------------------------------------------------------

struct SmallEpsReport {
    std::vector<double> eps, err;
    std::vector<bool> converged;
    double observed_order = 0.0;
};

// e(eps) = sup-node ensemble RMS of c^eps - (w + eps C) over the evaluation half.
SmallEpsReport small_eps_check(const HysteresisFunctional& h, std::span<const double> ladder,
                               const BrownianEnsemble& ens, const BasisSpec& spec,
                               const FocOptions& opts = {});

} // namespace hyst
