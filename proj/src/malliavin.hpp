#pragma once

#include <functional>
#include <vector>

#include "condexp.hpp"
#include "ensemble.hpp"
#include "grid.hpp"

namespace hyst {

// Scalar functional of a whole path.
using ScalarFunctional = std::function<double(PathRef)>;

// F(w) = g(w_{t_1}, ..., w_{t_k}) with node indices for the t_i.
struct CylindricalFunctional {
    std::vector<int> node_indices;
    std::function<double(std::span<const double>)> g;
    // optional analytic partials dg/dx_i; central differences otherwise
    std::function<double(int, std::span<const double>)> partial;

    double value(PathRef w) const;
};

// D_t F = sum_i d_i g(w_{t_1},...,w_{t_k}) 1_{t <= t_i}.
double malliavin_cylindrical(const CylindricalFunctional& f, PathRef w, int t_idx);

struct DirectionalOptions {
    int ramp_steps = 4;   // perturbation window [t, t + ramp_steps * dt)
    double eps = 1e-4;
};

// Difference quotient of F under a Cameron-Martin ramp starting at t; common
// random numbers, so the estimate is noise-free in eps. Approximates the
// average of D_r F over the ramp.
double malliavin_directional(const ScalarFunctional& F, const SamplePath& w, int t_idx,
                             const DirectionalOptions& opts = {});

// Policy coefficients and their Malliavin derivatives, the inputs of the
// tangent equation.
struct TangentInputs {
    std::function<double(int, PathRef)> alpha, beta;
    std::function<double(int, int, PathRef)> d_alpha, d_beta; // D_t of coeff at s
};

// Euler solution of d(D_t c_s) = (D_t alpha_s) ds + (D_t beta_s) dw_s from
// D_t c_t = beta_t; out[s] = D_t c_s (0 for s < t).
std::vector<double> tangent_process(const TangentInputs& in, PathRef w, int t_idx);

// Clark-Ocone integrand E[D_t xi | F_t] fitted by cross-sectional regression of
// pathwise Malliavin estimates. When `analytic_d` is set it supplies D_t xi per
// (node, path); otherwise the directional estimator is used path by path.
struct ClarkOconeResult {
    CondExpEstimator integrand; // g_{t, t} as a function of the path at t
    double xi_mean = 0.0;
    // residual of xi - E[xi] - sum g dw over the evaluation half: rms and
    // rms / std(xi)
    double reconstruction_rms = 0.0;
    double reconstruction_rel = 0.0;
};

ClarkOconeResult clark_ocone_integrand(
    const ScalarFunctional& xi, const BrownianEnsemble& ens, const BasisSpec& spec,
    const std::function<double(int, PathRef)>& analytic_d = nullptr,
    const DirectionalOptions& opts = {});

} // namespace hyst
