#pragma once

#include <functional>

#include "functionals.hpp"
#include "grid.hpp"

namespace hyst::dupire {

// An adapted family q_t(x) evaluated at node i on path x.
using PathFamily = std::function<double(int, PathRef)>;

struct Options {
    double eps_scale = 1e-4; // bump = eps_scale * (1 + sup|path|)
    int extension_steps = 1; // horizontal extension length k
};

double bump_size(PathRef x, const Options& opts = {});

// Central finite differences of q under node bumps at i; order in {1, 2, 3}.
double vertical_derivative(const PathFamily& q, const SamplePath& x, int i, int order,
                           double eps);

// [q_{i+k}(flat extension) - q_i(x)] / (k dt).
double horizontal_derivative(const PathFamily& q, const SamplePath& x, int i, int k);

// Full numeric derivative record of a family at (i, x).
struct DupireDerivatives {
    double vertical_1 = 0.0;
    double vertical_2 = 0.0;
    double vertical_3 = 0.0;
    double horizontal = 0.0;
    double mixed_horizontal_of_vertical = 0.0; // horizontal of the vertical family
};

DupireDerivatives full_derivatives(const PathFamily& q, const SamplePath& x, int i,
                                   const Options& opts = {});

// Family with optional analytic suppliers; null members fall back to differencing.
struct FamilyWithDerivatives {
    PathFamily eval;
    PathFamily vertical1;  // may be empty
    PathFamily vertical2;  // may be empty
    PathFamily horizontal; // may be empty
};

struct ItoTerms {
    double drift = 0.0;
    double diffusion = 0.0;
};

// Coefficients of d q_t(x) when dx = b dt + sigma dw:
//   drift = Delta_t q + dq * b + 1/2 d^2 q * sigma^2, diffusion = dq * sigma.
ItoTerms functional_ito(const FamilyWithDerivatives& q, double b, double sigma,
                        const SamplePath& x, int i, const Options& opts = {});

// Two-grid extrapolation in dt: value(2n) refined once, 2 v(2n) - v(n).
double richardson_in_dt(const std::function<double(int)>& value_at_steps, int steps);

// Ito coefficients (along c* = w, so b = 0, sigma = 1) of the atom process
// t -> d_{c_t} h_t. Uses analytic data when the functional carries it; otherwise
// differences the atom family on the path it actually reads.
struct AtomIto {
    double vertical2 = 0.0;
    double vertical3 = 0.0;
    double horizontal = 0.0;
    double drift() const { return horizontal + 0.5 * vertical3; }
    double diffusion() const { return vertical2; }
};

AtomIto atom_ito(const HysteresisFunctional& h, int i, PathRef c, PathRef w,
                 const Options& opts = {});

} // namespace hyst::dupire
