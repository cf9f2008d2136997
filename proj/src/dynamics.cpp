#include "dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"

namespace hyst {

namespace {

void fill_row(const std::function<double(int, PathRef)>& f, PathRef w, std::span<double> out) {
    for (int i = 0; i < static_cast<int>(out.size()); ++i) out[static_cast<std::size_t>(i)] = f(i, w);
}

double loglog_slope(std::span<const double> x, std::span<const double> y, double floor) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (y[k] < floor) continue;
        const double lx = std::log(x[k]), ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2) return std::numeric_limits<double>::infinity();
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

} // namespace

TotalDerivativeResult total_derivative(const ConditionalProcess& xi,
                                       const BrownianEnsemble& ens, const BasisSpec& spec) {
    auto row_of = [&](const std::function<double(int, PathRef)>& f,
                      const std::function<void(PathRef, std::span<double>)>& filler) {
        return [&f, &filler](int, PathRef w, std::span<double> out) {
            if (filler)
                filler(w, out);
            else
                fill_row(f, w, out);
        };
    };
    TotalDerivativeResult res{
        fit_conditional(ens, row_of(xi.dxi_dt, xi.dxi_dt_row), spec),
        fit_conditional(ens, row_of(xi.malliavin_diag, xi.malliavin_diag_row), spec),
        fit_conditional(ens, row_of(xi.xi, xi.xi_row), spec)};
    return res;
}

ConditionalProcess ito_to_projection(double eta0, const CoefficientField& eta,
                                     std::function<double(int, int, PathRef)> d_beta) {
    ConditionalProcess p;
    p.xi = [eta0, eta](int i, PathRef w) {
        const int n = w.steps();
        const double dt = w.dt();
        double acc = eta0;
        for (int j = 0; j < i; ++j) acc += eta.drift(j, w) * dt;
        for (int j = 0; j < n; ++j) acc += eta.diffusion(j, w) * (w[j + 1] - w[j]);
        return acc;
    };
    p.xi_row = [eta0, eta](PathRef w, std::span<double> out) {
        const int n = w.steps();
        const double dt = w.dt();
        double stoch = 0.0;
        for (int j = 0; j < n; ++j) stoch += eta.diffusion(j, w) * (w[j + 1] - w[j]);
        double acc = eta0 + stoch;
        for (int i = 0; i <= n; ++i) {
            out[static_cast<std::size_t>(i)] = acc;
            if (i < n) acc += eta.drift(i, w) * dt;
        }
    };
    p.dxi_dt = eta.drift;
    if (d_beta) {
        auto beta = eta.diffusion;
        p.malliavin_diag = [beta, d_beta](int t, PathRef w) {
            const int n = w.steps();
            double acc = beta(t, w);
            for (int s = t; s < n; ++s) acc += d_beta(t, s, w) * (w[s + 1] - w[s]);
            return acc;
        };
    } else {
        p.malliavin_diag = eta.diffusion;
    }
    return p;
}

// --- elasticity ---------------------------------------------------------------

namespace {

// Conditional expectation of the future-density sum; the one-step backward fit
// when the functional carries the structure, the direct tail fit otherwise.
// policy_row may be null (then c = w).
CondExpEstimator fit_future(const HysteresisFunctional& h, const BrownianEnsemble& ens,
                            const BasisSpec& spec,
                            const std::function<PathRef(int)>& policy_row = nullptr) {
    if (h.has_recursive_tail()) {
        std::vector<double> gamma(static_cast<std::size_t>(ens.grid().nodes()));
        h.tail_gamma(ens.grid(), gamma);
        return fit_tail_recursive(
            ens,
            [&h, &policy_row](int j, PathRef w, std::span<double> q) {
                h.tail_increment(policy_row ? policy_row(j) : w, w, q);
            },
            gamma, spec);
    }
    return fit_conditional(
        ens,
        [&h, &policy_row](int j, PathRef w, std::span<double> out) {
            h.future_density_sums(policy_row ? policy_row(j) : w, w, out);
        },
        spec);
}

} // namespace

ElasticityPipeline::ElasticityPipeline(const HysteresisFunctional& h,
                                       const BrownianEnsemble& ens, const BasisSpec& spec)
    : h_(&h), future_(fit_future(h, ens, spec)) {
    if (!h.class_a()) throw ConfigError(h.name() + " has no class-A derivative data");
}

void ElasticityPipeline::rows(PathRef w, std::span<double> C, std::span<double> I,
                              std::span<double> F) const {
    future_.evaluate_row(w, F);
    h_->atom_row(w, w, I);
    for (std::size_t k = 0; k < C.size(); ++k) C[k] = -I[k] - F[k];
}

void ElasticityPipeline::c_row(PathRef w, std::span<double> out) const {
    std::vector<double> F(out.size()), I(out.size());
    rows(w, out, I, F);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = -I[k] - F[k];
}

ElasticityDynamics::ElasticityDynamics(const HysteresisFunctional& h,
                                       const BrownianEnsemble& ens, const BasisSpec& spec,
                                       dupire::Options opts)
    : h_(&h),
      time_part_(fit_conditional(
          ens,
          [&h](int, PathRef w, std::span<double> out) { h.future_density_dt_sums(w, w, out); },
          spec)),
      stoch_part_(fit_conditional(
          ens,
          [&h](int, PathRef w, std::span<double> out) {
              h.future_density_malliavin_sums(w, out);
          },
          spec)),
      opts_(opts) {}

double ElasticityDynamics::drift(int i, PathRef w) const {
    const auto ai = dupire::atom_ito(*h_, i, w, w, opts_);
    return -(ai.drift() - h_->density(i, i, w, w) + time_part_.evaluate(i, w));
}

double ElasticityDynamics::diffusion(int i, PathRef w) const {
    const auto ai = dupire::atom_ito(*h_, i, w, w, opts_);
    return -(ai.diffusion() + stoch_part_.evaluate(i, w));
}

void ElasticityDynamics::drift_row(PathRef w, std::span<double> out) const {
    time_part_.evaluate_row(w, out);
    for (int i = 0; i < static_cast<int>(out.size()); ++i) {
        const auto ai = dupire::atom_ito(*h_, i, w, w, opts_);
        out[static_cast<std::size_t>(i)] =
            -(ai.drift() - h_->density(i, i, w, w) + out[static_cast<std::size_t>(i)]);
    }
}

void ElasticityDynamics::diffusion_row(PathRef w, std::span<double> out) const {
    stoch_part_.evaluate_row(w, out);
    for (int i = 0; i < static_cast<int>(out.size()); ++i) {
        const auto ai = dupire::atom_ito(*h_, i, w, w, opts_);
        out[static_cast<std::size_t>(i)] = -(ai.diffusion() + out[static_cast<std::size_t>(i)]);
    }
}

// --- empirical extraction -------------------------------------------------------

namespace {

// steps u with right endpoints u+1 centered on i (exactly for odd window)
void window_bounds(int i, int window, int n, int& lo, int& hi) {
    window = std::max(1, window);
    lo = i - (window - 1) / 2 - 1;
    hi = lo + window - 1;
    if (lo < 0) {
        lo = 0;
        hi = std::min(n - 1, window - 1);
    } else if (hi > n - 1) {
        hi = n - 1;
        lo = std::max(0, hi - window + 1);
    }
}

} // namespace

std::vector<CoefficientCheck> empirical_coefficients(
    const BrownianEnsemble& ens, int first_path, const PathRowFn& value_row,
    std::span<const int> nodes, int window, const PathRowFn& pred_drift_row,
    const PathRowFn& pred_diffusion_row, int last_path) {
    const int n = ens.grid().steps();
    const double dt = ens.grid().dt();
    const std::size_t nn = static_cast<std::size_t>(n) + 1;
    const std::size_t nq = nodes.size();
    if (last_path < 0) last_path = ens.paths();

    struct Moments {
        double a = 0, a2 = 0, b = 0, b2 = 0, da = 0, da2 = 0, db = 0, db2 = 0;
        double sxw = 0, sww = 0, pa_sum = 0, pb_sum = 0;
        std::vector<double> path_sxw, path_sww, path_sx, path_sw, path_pa, path_pb;
    };
    std::vector<Moments> agg(nq);
    const int m = last_path - first_path;
    if (m < 2) throw ConfigError("empirical coefficients need at least two paths");
    for (auto& mo : agg) {
        mo.path_sxw.reserve(m);
        mo.path_sww.reserve(m);
        mo.path_sx.reserve(m);
        mo.path_sw.reserve(m);
        mo.path_pa.reserve(m);
        mo.path_pb.reserve(m);
    }
    std::vector<double> X(nn), pa(nn, 0.0), pb(nn, 0.0);

    for (int j = first_path; j < last_path; ++j) {
        PathRef w = ens.path(j);
        value_row(j, w, X);
        if (pred_drift_row) pred_drift_row(j, w, pa);
        if (pred_diffusion_row) pred_diffusion_row(j, w, pb);
        for (std::size_t q = 0; q < nq; ++q) {
            const int i = nodes[q];
            int lo, hi;
            window_bounds(i, window, n, lo, hi);
            double sxw = 0, sww = 0, sx = 0, sw = 0, pa_avg = 0, pb_avg = 0;
            for (int u = lo; u <= hi; ++u) {
                const double dX = X[static_cast<std::size_t>(u) + 1] - X[static_cast<std::size_t>(u)];
                const double dW = w[u + 1] - w[u];
                sxw += dX * dW;
                sww += dW * dW;
                sx += dX;
                sw += dW;
                // predictions averaged the same way the window averages the
                // coefficients; node-evaluated increments respond to dw at the
                // right endpoint of each step
                pa_avg += pa[static_cast<std::size_t>(u) + 1];
                pb_avg += pb[static_cast<std::size_t>(u) + 1];
            }
            const int kw = hi - lo + 1;
            pa_avg /= kw;
            pb_avg /= kw;
            const double beta = sww > 0.0 ? sxw / sww : 0.0;
            double adrift = (sx - beta * sw) / (kw * dt);
            // removing the fitted beta from the same window shrinks the drift
            // by exactly (1 - 1/K); undo it
            if (kw > 1) adrift *= static_cast<double>(kw) / (kw - 1);
            Moments& mo = agg[q];
            mo.a += adrift;
            mo.a2 += adrift * adrift;
            mo.b += beta;
            mo.b2 += beta * beta;
            const double da = adrift - pa_avg;
            const double db = beta - pb_avg;
            mo.da += da;
            mo.da2 += da * da;
            mo.db += db;
            mo.db2 += db * db;
            mo.sxw += sxw;
            mo.sww += sww;
            mo.pa_sum += pa_avg;
            mo.pb_sum += pb_avg;
            mo.path_sxw.push_back(sxw);
            mo.path_sww.push_back(sww);
            mo.path_sx.push_back(sx);
            mo.path_sw.push_back(sw);
            mo.path_pa.push_back(pa_avg);
            mo.path_pb.push_back(pb_avg);
        }
    }

    std::vector<CoefficientCheck> out(nq);
    for (std::size_t q = 0; q < nq; ++q) {
        Moments& mo = agg[q];
        CoefficientCheck& c = out[q];
        c.node = nodes[q];
        auto stats = [&](double s, double s2, double& mean, double& se) {
            mean = s / m;
            const double var = std::max(0.0, s2 / m - mean * mean);
            se = std::sqrt(var / m);
        };
        stats(mo.a, mo.a2, c.alpha_mean, c.alpha_se);
        stats(mo.b, mo.b2, c.beta_mean, c.beta_se);
        stats(mo.da, mo.da2, c.alpha_diff_mean, c.alpha_diff_se);
        stats(mo.db, mo.db2, c.beta_diff_mean, c.beta_diff_se);
        c.z_alpha = c.alpha_diff_se > 0.0 ? c.alpha_diff_mean / c.alpha_diff_se : 0.0;
        c.z_beta = c.beta_diff_se > 0.0 ? c.beta_diff_mean / c.beta_diff_se : 0.0;

        int lo, hi;
        window_bounds(c.node, window, n, lo, hi);
        const int kw = hi - lo + 1;

        // pooled ratio estimator with a sandwich standard error; the contrast
        // pairs each prediction with its expected quadratic variation kw dt
        // (E[dX dw] = dt E[pred] exactly for Gaussian increments)
        c.beta_pooled = mo.sww > 0.0 ? mo.sxw / mo.sww : 0.0;
        double s2 = 0.0, d2sum = 0.0, dsum = 0.0;
        for (int j = 0; j < m; ++j) {
            const std::size_t k = static_cast<std::size_t>(j);
            const double r = mo.path_sxw[k] - c.beta_pooled * mo.path_sww[k];
            s2 += r * r;
            const double rd = mo.path_sxw[k] - mo.path_pb[k] * kw * dt;
            dsum += rd;
            d2sum += rd * rd;
        }
        c.beta_pooled_se = mo.sww > 0.0 ? std::sqrt(s2) / mo.sww : 0.0;
        c.beta_pooled_diff = dsum / (static_cast<double>(m) * kw * dt);
        {
            const double rm = dsum / m;
            const double rvar = std::max(0.0, d2sum / m - rm * rm);
            c.beta_pooled_diff_se = std::sqrt(rvar / m) / (kw * dt);
        }
        c.z_beta_pooled =
            c.beta_pooled_diff_se > 0.0 ? c.beta_pooled_diff / c.beta_pooled_diff_se : 0.0;
        double asum = 0.0, asum2 = 0.0, adsum = 0.0, ad2sum = 0.0;
        for (int j = 0; j < m; ++j) {
            const std::size_t k = static_cast<std::size_t>(j);
            // pooled beta removed: its noise dominates the raw increments
            const double r = mo.path_sx[k] - c.beta_pooled * mo.path_sw[k];
            asum += r;
            asum2 += r * r;
            const double rd = r / (kw * dt) - mo.path_pa[k];
            adsum += rd;
            ad2sum += rd * rd;
        }
        c.alpha_pooled = asum / (static_cast<double>(m) * kw * dt);
        const double rm = asum / m;
        const double rvar = std::max(0.0, asum2 / m - rm * rm);
        c.alpha_pooled_se = std::sqrt(rvar / m) / (kw * dt);
        c.alpha_pooled_diff = adsum / m;
        const double am = adsum / m;
        const double avar = std::max(0.0, ad2sum / m - am * am);
        c.alpha_pooled_diff_se = std::sqrt(avar / m);
        c.z_alpha_pooled =
            c.alpha_pooled_diff_se > 0.0 ? c.alpha_pooled_diff / c.alpha_pooled_diff_se : 0.0;
    }
    return out;
}

std::vector<CoefficientCheck> blocked_empirical_check(const BrownianEnsemble& ens,
                                                      const PipelineFactory& factory,
                                                      std::span<const int> nodes,
                                                      const BlockSpec& spec) {
    const int B = std::max(1, spec.blocks);
    const int per_block = ens.paths() / B;
    if (per_block < 4) throw ConfigError("too few paths per validation block");
    const std::size_t nq = nodes.size();
    std::vector<std::vector<double>> da(nq), db(nq);

    for (int b = 0; b < B; ++b) {
        const int begin = b * per_block;
        const int fit_count = per_block / 2;
        PathRowFn value, pred_drift, pred_diff;
        factory(begin, fit_count, value, pred_drift, pred_diff);
        auto checks = empirical_coefficients(ens, begin + fit_count, value, nodes, spec.window,
                                             pred_drift, pred_diff, begin + per_block);
        for (std::size_t q = 0; q < nq; ++q) {
            da[q].push_back(checks[q].alpha_pooled_diff);
            db[q].push_back(checks[q].beta_pooled_diff);
        }
    }

    std::vector<CoefficientCheck> out(nq);
    for (std::size_t q = 0; q < nq; ++q) {
        CoefficientCheck& c = out[q];
        c.node = nodes[q];
        auto stats = [&](const std::vector<double>& v, double& mean, double& se) {
            double s = 0, s2 = 0;
            for (double x : v) {
                s += x;
                s2 += x * x;
            }
            mean = s / static_cast<double>(v.size());
            const double var = std::max(0.0, s2 / v.size() - mean * mean);
            se = v.size() > 1 ? std::sqrt(var / (v.size() - 1)) : 0.0;
        };
        stats(da[q], c.alpha_diff_mean, c.alpha_diff_se);
        stats(db[q], c.beta_diff_mean, c.beta_diff_se);
        c.z_alpha = c.alpha_diff_se > 0.0 ? c.alpha_diff_mean / c.alpha_diff_se : 0.0;
        c.z_beta = c.beta_diff_se > 0.0 ? c.beta_diff_mean / c.beta_diff_se : 0.0;
    }
    return out;
}

// --- Pigouvian tax ------------------------------------------------------------------

TaxPipeline::TaxPipeline(const HysteresisFunctional& h, double eps,
                         const BrownianEnsemble& ens, const BasisSpec& spec,
                         dupire::Options opts)
    : h_(&h), eps_(eps), future_(fit_future(h, ens, spec)),
      time_part_(fit_conditional(
          ens,
          [&h](int, PathRef w, std::span<double> out) { h.future_density_dt_sums(w, w, out); },
          spec)),
      stoch_part_(fit_conditional(
          ens,
          [&h](int, PathRef w, std::span<double> out) {
              h.future_density_malliavin_sums(w, out);
          },
          spec)),
      opts_(opts) {
    if (!h.linear_in_policy())
        throw ConfigError(h.name() + " is not linear in the policy; use foc_solve");
}

void TaxPipeline::lambda_row(PathRef w, std::span<double> out) const {
    future_.evaluate_row(w, out);
    std::vector<double> g(out.size());
    h_->atom_row(w, w, g);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += g[k];
}

void TaxPipeline::policy_row(PathRef w, std::span<double> out) const {
    lambda_row(w, out);
    for (int i = 0; i < static_cast<int>(out.size()); ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        out[k] = w[i] - eps_ * out[k];
    }
}

double TaxPipeline::pred_lambda_drift(int i, PathRef w) const {
    const auto ai = dupire::atom_ito(*h_, i, w, w, opts_);
    return ai.drift() + time_part_.evaluate(i, w) - h_->density(i, i, w, w);
}

double TaxPipeline::pred_lambda_diffusion(int i, PathRef w) const {
    const auto ai = dupire::atom_ito(*h_, i, w, w, opts_);
    return ai.diffusion() + stoch_part_.evaluate(i, w);
}

// --- FOC solver ----------------------------------------------------------------------

PolicyProcess foc_solve(const HysteresisFunctional& h, double eps,
                        const BrownianEnsemble& ens, const BasisSpec& spec,
                        const FocOptions& opts) {
    const int n = ens.grid().steps();
    const int M = ens.paths();
    const std::size_t nn = static_cast<std::size_t>(n) + 1;

    PolicyProcess out;
    out.stride = nn;
    out.c.resize(nn * static_cast<std::size_t>(M));

    if (!h.class_a()) {
        // discrete dual weight; the conditional expectation is deterministic
        for (int j = 0; j < M; ++j) {
            PathRef w = ens.path(j);
            double* row = out.c.data() + static_cast<std::size_t>(j) * nn;
            for (int i = 0; i <= n; ++i)
                row[static_cast<std::size_t>(i)] = w[i] - eps * h.foc_dual_weight(i, ens.grid());
        }
        out.iterations = 1;
        out.residual_trace = {0.0};
        return out;
    }

    if (h.linear_in_policy()) {
        CondExpEstimator fit = fit_future(h, ens, spec);
        std::vector<double> F(nn), g(nn);
        for (int j = 0; j < M; ++j) {
            PathRef w = ens.path(j);
            fit.evaluate_row(w, F);
            h.atom_row(w, w, g);
            double* row = out.c.data() + static_cast<std::size_t>(j) * nn;
            for (int i = 0; i <= n; ++i)
                row[static_cast<std::size_t>(i)] =
                    w[i] - eps * (g[static_cast<std::size_t>(i)] + F[static_cast<std::size_t>(i)]);
        }
        out.iterations = 1;
        out.residual_trace = {0.0};
        return out;
    }

    // damped fixed point, conditioner refit against each iterate
    for (int j = 0; j < M; ++j) {
        auto r = ens.row(j);
        std::copy(r.begin(), r.end(), out.c.begin() + static_cast<std::size_t>(j) * nn);
    }
    std::vector<double> F(nn);
    const double lambda = opts.damping;
    int grew = 0;
    for (int it = 0; it < opts.max_iter; ++it) {
        auto policy_row = [&](int j) { return PathRef{&ens.grid(), out.row(j)}; };
        CondExpEstimator fit = fit_future(h, ens, spec, policy_row);
        std::vector<double> rms(nn, 0.0), g(nn);
        for (int j = 0; j < M; ++j) {
            PathRef w = ens.path(j);
            PathRef c{&ens.grid(), out.row(j)};
            fit.evaluate_row(w, F);
            h.atom_row(c, w, g);
            double* row = out.c.data() + static_cast<std::size_t>(j) * nn;
            for (int i = 0; i <= n; ++i) {
                const std::size_t k = static_cast<std::size_t>(i);
                const double proposal = w[i] - eps * (g[k] + F[k]);
                const double next = (1.0 - lambda) * row[k] + lambda * proposal;
                const double upd = next - row[k];
                rms[k] += upd * upd;
                row[k] = next;
            }
        }
        double sup = 0.0;
        for (std::size_t k = 0; k < nn; ++k)
            sup = std::max(sup, std::sqrt(rms[k] / M));
        out.residual_trace.push_back(sup);
        out.iterations = it + 1;
        if (sup < opts.tol) return out;
        const std::size_t tr = out.residual_trace.size();
        if (tr >= 2 && out.residual_trace[tr - 1] > out.residual_trace[tr - 2]) {
            if (++grew >= 3) break; // contraction lost
        } else {
            grew = 0;
        }
    }
    out.converged = false;
    return out;
}

// --- policy coefficients ----------------------------------------------------------------

PolicyCoefficients::PolicyCoefficients(const HysteresisFunctional& h, double eps,
                                       const PolicyProcess& policy, const BrownianEnsemble& ens,
                                       const BasisSpec& spec, dupire::Options opts)
    : h_(&h), eps_(eps),
      time_part_(fit_conditional(
          ens,
          [&h, &policy, &ens](int j, PathRef w, std::span<double> out) {
              PathRef c{&ens.grid(), policy.row(j)};
              h.future_density_dt_sums(c, w, out);
          },
          spec)),
      stoch_part_(fit_conditional(
          ens,
          [&h](int, PathRef w, std::span<double> out) {
              h.future_density_malliavin_sums(w, out);
          },
          spec)),
      opts_(opts) {}

double PolicyCoefficients::denom(int i, PathRef c, PathRef w, const dupire::AtomIto& ai) const {
    if (h_->linear_in_policy()) return 1.0;
    const double d = 1.0 + eps_ * ai.vertical2;
    if (std::abs(d) < 1e-6)
        throw ValidationError("policy coefficients: 1 + d^2 h is numerically singular");
    (void)c;
    (void)w;
    return d;
}

double PolicyCoefficients::beta(int i, PathRef c, PathRef w) const {
    const auto ai = dupire::atom_ito(*h_, i, c, w, opts_);
    if (h_->linear_in_policy())
        return 1.0 - eps_ * (ai.diffusion() + stoch_part_.evaluate(i, w));
    return (1.0 - eps_ * stoch_part_.evaluate(i, w)) / denom(i, c, w, ai);
}

double PolicyCoefficients::alpha(int i, PathRef c, PathRef w) const {
    const auto ai = dupire::atom_ito(*h_, i, c, w, opts_);
    const double b = beta(i, c, w);
    const double time_term = time_part_.evaluate(i, w) - h_->density(i, i, c, w);
    if (h_->linear_in_policy()) return -eps_ * (ai.drift() + time_term);
    return -eps_ * (0.5 * ai.vertical3 * b * b + ai.horizontal + time_term) /
           denom(i, c, w, ai);
}

double PolicyCoefficients::residual_drift(int i, PathRef c, PathRef w, double alpha_emp,
                                          double beta_emp) const {
    const auto ai = dupire::atom_ito(*h_, i, c, w, opts_);
    const double time_term = time_part_.evaluate(i, w) - h_->density(i, i, c, w);
    if (h_->linear_in_policy()) return alpha_emp + eps_ * (ai.drift() + time_term);
    return (1.0 + eps_ * ai.vertical2) * alpha_emp +
           eps_ * (0.5 * ai.vertical3 * beta_emp * beta_emp + ai.horizontal + time_term);
}

double PolicyCoefficients::residual_diffusion(int i, PathRef c, PathRef w,
                                              double beta_emp) const {
    const auto ai = dupire::atom_ito(*h_, i, c, w, opts_);
    if (h_->linear_in_policy())
        return beta_emp + eps_ * (ai.diffusion() + stoch_part_.evaluate(i, w)) - 1.0;
    return (1.0 + eps_ * ai.vertical2) * beta_emp + eps_ * stoch_part_.evaluate(i, w) - 1.0;
}

// --- deterministic case --------------------------------------------------------------------

DeterministicElasticityResult deterministic_elasticity(
    const HysteresisFunctional& h, const std::function<double(double)>& b,
    const TimeGrid& grid, double theta0, dupire::Options opts) {
    const int n = grid.steps();
    const double dt = grid.dt();
    DeterministicElasticityResult res;
    res.theta.resize(static_cast<std::size_t>(n) + 1);
    res.theta[0] = theta0;
    for (int i = 0; i < n; ++i) {
        // classic RK4 for the coefficient path
        const double x = res.theta[static_cast<std::size_t>(i)];
        const double k1 = b(x);
        const double k2 = b(x + 0.5 * dt * k1);
        const double k3 = b(x + 0.5 * dt * k2);
        const double k4 = b(x + dt * k3);
        res.theta[static_cast<std::size_t>(i) + 1] = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    SamplePath theta(grid, res.theta);
    PathRef p = theta.ref();
    std::vector<double> fut(static_cast<std::size_t>(n) + 1);
    std::vector<double> fut_dt(static_cast<std::size_t>(n) + 1);
    h.future_density_sums(p, p, fut);
    h.future_density_dt_sums(p, p, fut_dt);
    res.C.resize(static_cast<std::size_t>(n) + 1);
    res.dC_dt.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        res.C[k] = -(h.atom(i, p, p) + fut[k]);
        const auto ai = dupire::atom_ito(h, i, p, p, opts);
        res.dC_dt[k] = -(ai.horizontal + ai.vertical2 * b(res.theta[k]) -
                         h.density(i, i, p, p) + fut_dt[k]);
    }
    return res;
}

// --- small-eps asymptotics --------------------------------------------------------------------

SmallEpsReport small_eps_check(const HysteresisFunctional& h, std::span<const double> ladder,
                               const BrownianEnsemble& ens, const BasisSpec& spec,
                               const FocOptions& opts) {
    const int n = ens.grid().steps();
    const std::size_t nn = static_cast<std::size_t>(n) + 1;
    ElasticityPipeline elast(h, ens, spec);

    SmallEpsReport rep;
    const int b = eval_begin(ens, spec);
    std::vector<double> C(nn), I(nn), F(nn);
    for (double eps : ladder) {
        PolicyProcess pol = foc_solve(h, eps, ens, spec, opts);
        rep.converged.push_back(pol.converged);
        if (!pol.converged)
            throw ValidationError("fixed point did not converge at eps = " + fmt_full(eps));
        std::vector<double> sq(nn, 0.0);
        for (int j = b; j < ens.paths(); ++j) {
            PathRef w = ens.path(j);
            elast.rows(w, C, I, F);
            auto crow = pol.row(j);
            for (std::size_t k = 0; k < nn; ++k) {
                const double d = crow[k] - (w[static_cast<int>(k)] + eps * C[k]);
                sq[k] += d * d;
            }
        }
        double sup = 0.0;
        const int m = ens.paths() - b;
        for (std::size_t k = 0; k < nn; ++k) sup = std::max(sup, std::sqrt(sq[k] / m));
        rep.eps.push_back(eps);
        rep.err.push_back(sup);
    }
    rep.observed_order = loglog_slope(rep.eps, rep.err, 1e-14);
    return rep;
}

} // namespace hyst
