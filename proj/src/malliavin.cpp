#include "malliavin.hpp"

#include <cmath>

#include "common.hpp"

namespace hyst {

double CylindricalFunctional::value(PathRef w) const {
    std::vector<double> x(node_indices.size());
    for (std::size_t i = 0; i < node_indices.size(); ++i) x[i] = w[node_indices[i]];
    return g(x);
}

double malliavin_cylindrical(const CylindricalFunctional& f, PathRef w, int t_idx) {
    std::vector<double> x(f.node_indices.size());
    for (std::size_t i = 0; i < f.node_indices.size(); ++i) x[i] = w[f.node_indices[i]];
    double acc = 0.0;
    for (std::size_t i = 0; i < f.node_indices.size(); ++i) {
        if (t_idx > f.node_indices[i]) continue;
        if (f.partial) {
            acc += f.partial(static_cast<int>(i), x);
        } else {
            const double eps = 1e-5 * (1.0 + std::abs(x[i]));
            std::vector<double> up = x, dn = x;
            up[i] += eps;
            dn[i] -= eps;
            acc += (f.g(up) - f.g(dn)) / (2.0 * eps);
        }
    }
    return acc;
}

double malliavin_directional(const ScalarFunctional& F, const SamplePath& w, int t_idx,
                             const DirectionalOptions& opts) {
    const int n = w.grid.steps();
    if (t_idx + opts.ramp_steps > n) throw ConfigError("perturbation ramp exits the grid");
    const double delta = opts.ramp_steps * w.grid.dt();
    SamplePath z(w.grid, std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    for (int j = t_idx; j < t_idx + opts.ramp_steps; ++j) z[j] = 1.0 / delta;
    SamplePath shifted = perturb_direction(w, z, opts.eps);
    return (F(shifted.ref()) - F(w.ref())) / opts.eps;
}

std::vector<double> tangent_process(const TangentInputs& in, PathRef w, int t_idx) {
    const int n = w.steps();
    const double dt = w.dt();
    std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
    out[static_cast<std::size_t>(t_idx)] = in.beta(t_idx, w);
    for (int s = t_idx; s < n; ++s) {
        const double dw = w[s + 1] - w[s];
        out[static_cast<std::size_t>(s) + 1] =
            out[static_cast<std::size_t>(s)] + in.d_alpha(t_idx, s, w) * dt +
            in.d_beta(t_idx, s, w) * dw;
    }
    return out;
}

ClarkOconeResult clark_ocone_integrand(
    const ScalarFunctional& xi, const BrownianEnsemble& ens, const BasisSpec& spec,
    const std::function<double(int, PathRef)>& analytic_d, const DirectionalOptions& opts) {
    const int n = ens.grid().steps();

    auto d_row = [&](int, PathRef w, std::span<double> out) {
        if (analytic_d) {
            for (int t = 0; t <= n; ++t) out[static_cast<std::size_t>(t)] = analytic_d(t, w);
            return;
        }
        SamplePath base(*w.grid, std::vector<double>(w.v.begin(), w.v.end()));
        for (int t = 0; t <= n; ++t) {
            const int ramp = std::min(opts.ramp_steps, n - t);
            if (ramp <= 0) {
                out[static_cast<std::size_t>(t)] = 0.0;
                continue;
            }
            DirectionalOptions o = opts;
            o.ramp_steps = ramp;
            out[static_cast<std::size_t>(t)] = malliavin_directional(xi, base, t, o);
        }
    };

    ClarkOconeResult res;
    res.integrand = fit_conditional(ens, d_row, spec);

    // mean of xi over the fit half, reconstruction residual over the other
    const int fit_end = spec.split_fit ? ens.paths() / 2 : ens.paths();
    double mean = 0.0;
    for (int j = 0; j < fit_end; ++j) mean += xi(ens.path(j));
    mean /= fit_end;
    res.xi_mean = mean;

    // residual of the stochastic-integral part over the held-out half; the
    // scalar mean estimate is centered out so the metric tracks the integrand
    const int b = eval_begin(ens, spec);
    double rs = 0.0, rs2 = 0.0, ss_xi = 0.0, mean_xi_eval = 0.0;
    std::vector<double> g(static_cast<std::size_t>(n) + 1);
    for (int j = b; j < ens.paths(); ++j) {
        PathRef w = ens.path(j);
        res.integrand.evaluate_row(w, g);
        double acc = mean;
        for (int t = 0; t < n; ++t)
            acc += g[static_cast<std::size_t>(t)] * (w[t + 1] - w[t]);
        const double v = xi(w);
        const double r = v - acc;
        rs += r;
        rs2 += r * r;
        mean_xi_eval += v;
        ss_xi += v * v;
    }
    const int m = ens.paths() - b;
    mean_xi_eval /= m;
    const double xi_std = std::sqrt(std::max(0.0, ss_xi / m - mean_xi_eval * mean_xi_eval));
    const double rmean = rs / m;
    res.reconstruction_rms = std::sqrt(std::max(0.0, rs2 / m - rmean * rmean));
    res.reconstruction_rel = xi_std > 0.0 ? res.reconstruction_rms / xi_std : 0.0;
    return res;
}

} // namespace hyst
