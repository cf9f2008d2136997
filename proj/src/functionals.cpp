#include "functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"

namespace hyst {

namespace {

SamplePath to_sample(PathRef p) {
    return SamplePath(*p.grid, std::vector<double>(p.v.begin(), p.v.end()));
}

double parse_param(const std::map<std::string, std::string>& params, const std::string& key,
                   double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : std::stod(it->second);
}

std::string parse_param(const std::map<std::string, std::string>& params, const std::string& key,
                        const std::string& fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

} // namespace

double HysteresisFunctional::default_bump(PathRef p, int i) {
    double sup = 0.0;
    for (int j = 0; j <= i; ++j) sup = std::max(sup, std::abs(p[j]));
    return 1e-4 * (1.0 + sup);
}

double HysteresisFunctional::atom(int i, PathRef c, PathRef w) const {
    const double eps = default_bump(c, i);
    SamplePath base = to_sample(c);
    SamplePath up = bump_path(base, i, eps);
    SamplePath dn = bump_path(base, i, -eps);
    return (eval(i, up.ref(), w) - eval(i, dn.ref(), w)) / (2.0 * eps);
}

double HysteresisFunctional::density(int s, int i, PathRef c, PathRef w) const {
    // A node bump at s < i carries weight dt in every left-endpoint integral
    // evaluated past s, which is exactly the absolutely continuous part.
    const int at = std::min(s, i - 1);
    if (at < 0) return 0.0;
    const double eps = default_bump(c, i);
    SamplePath base = to_sample(c);
    SamplePath up = bump_path(base, at, eps);
    SamplePath dn = bump_path(base, at, -eps);
    return (eval(i, up.ref(), w) - eval(i, dn.ref(), w)) / (2.0 * eps * c.dt());
}

double HysteresisFunctional::atom_vertical2(int, PathRef, PathRef) const {
    throw ValidationError(name() + ": no analytic atom data");
}
double HysteresisFunctional::atom_vertical3(int, PathRef, PathRef) const {
    throw ValidationError(name() + ": no analytic atom data");
}
double HysteresisFunctional::atom_horizontal(int, PathRef, PathRef) const {
    throw ValidationError(name() + ": no analytic atom data");
}
double HysteresisFunctional::density_dt(int t, int s, PathRef c, PathRef w) const {
    // difference in the perturbation-time index
    const double dt = c.dt();
    const int lo = std::max(0, t - 1), hi = std::min(s, t + 1);
    if (hi == lo) return 0.0;
    return (density(hi, s, c, w) - density(lo, s, c, w)) / ((hi - lo) * dt);
}

double HysteresisFunctional::density_malliavin_w(int t, int s, PathRef w) const {
    // directional estimate along c = w: ramp the noise just after t
    const int n = w.steps();
    const int ramp = std::min(4, n - t);
    if (ramp <= 0) return 0.0;
    const double eps = default_bump(w, n);
    const double delta = ramp * w.dt();
    SamplePath pert(*w.grid, std::vector<double>(w.v.begin(), w.v.end()));
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        pert[i] += eps * acc;
        if (i >= t && i < t + ramp) acc += 1.0 / delta * w.dt();
    }
    return (density(t, s, pert.ref(), pert.ref()) - density(t, s, w, w)) / eps;
}

void HysteresisFunctional::future_density_sums(PathRef c, PathRef w,
                                               std::span<double> out) const {
    const int n = c.steps();
    const double dt = c.dt();
    for (int t = 0; t <= n; ++t) {
        double acc = 0.0;
        for (int s = t; s < n; ++s) acc += density(t, s, c, w) * dt;
        out[static_cast<std::size_t>(t)] = acc;
    }
}

double HysteresisFunctional::future_density_sum_at(int t, PathRef c, PathRef w) const {
    const int n = c.steps();
    const double dt = c.dt();
    double acc = 0.0;
    for (int s = t; s < n; ++s) acc += density(t, s, c, w) * dt;
    return acc;
}

void HysteresisFunctional::future_density_dt_sums(PathRef c, PathRef w,
                                                  std::span<double> out) const {
    const int n = c.steps();
    const double dt = c.dt();
    for (int t = 0; t <= n; ++t) {
        double acc = 0.0;
        for (int s = t; s < n; ++s) acc += density_dt(t, s, c, w) * dt;
        out[static_cast<std::size_t>(t)] = acc;
    }
}

void HysteresisFunctional::future_density_malliavin_sums(PathRef w,
                                                         std::span<double> out) const {
    // one directional difference of the whole tail sum per node
    const int n = w.steps();
    const double dt = w.dt();
    const double eps = default_bump(w, n);
    std::vector<double> pert(w.v.begin(), w.v.end());
    for (int t = 0; t <= n; ++t) {
        const int ramp = std::min(4, n - t);
        if (ramp <= 0) {
            out[static_cast<std::size_t>(t)] = 0.0;
            continue;
        }
        const double delta = ramp * dt;
        std::copy(w.v.begin(), w.v.end(), pert.begin());
        double acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            pert[static_cast<std::size_t>(i)] += eps * acc;
            if (i >= t && i < t + ramp) acc += dt / delta;
        }
        PathRef p{w.grid, pert};
        out[static_cast<std::size_t>(t)] =
            (future_density_sum_at(t, p, p) - future_density_sum_at(t, w, w)) / eps;
    }
}

double HysteresisFunctional::foc_dual_weight(int, const TimeGrid&) const {
    throw ValidationError(name() + ": no discrete first-order-condition weight");
}

void HysteresisFunctional::tail_increment(PathRef, PathRef, std::span<double>) const {
    throw ValidationError(name() + ": no one-step tail structure");
}
void HysteresisFunctional::tail_gamma(const TimeGrid&, std::span<double>) const {
    throw ValidationError(name() + ": no one-step tail structure");
}

void HysteresisFunctional::atom_row(PathRef c, PathRef w, std::span<double> out) const {
    for (int i = 0; i < static_cast<int>(out.size()); ++i)
        out[static_cast<std::size_t>(i)] = atom(i, c, w);
}

// --- cumulative ------------------------------------------------------------

double CumulativeFunctional::eval(int i, PathRef c, PathRef) const {
    double acc = 0.0;
    for (int j = 0; j < i; ++j) acc += c[j];
    return c[i] * acc * c.dt();
}

double CumulativeFunctional::atom(int i, PathRef c, PathRef) const {
    double acc = 0.0;
    for (int j = 0; j < i; ++j) acc += c[j];
    return acc * c.dt();
}

double CumulativeFunctional::density(int, int i, PathRef c, PathRef) const { return c[i]; }

void CumulativeFunctional::atom_row(PathRef c, PathRef, std::span<double> out) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = acc;
        acc += c.v[i] * c.dt();
    }
}

void CumulativeFunctional::future_density_sums(PathRef c, PathRef w,
                                               std::span<double> out) const {
    (void)w;
    const int n = c.steps();
    double acc = 0.0;
    out[static_cast<std::size_t>(n)] = 0.0;
    for (int t = n - 1; t >= 0; --t) {
        acc += c[t] * c.dt();
        out[static_cast<std::size_t>(t)] = acc;
    }
}

void CumulativeFunctional::future_density_malliavin_sums(PathRef w,
                                                         std::span<double> out) const {
    const int n = w.steps();
    double acc = 0.0;
    out[static_cast<std::size_t>(n)] = 0.0;
    for (int t = n - 1; t >= 0; --t) {
        acc += w.dt();
        out[static_cast<std::size_t>(t)] = acc;
    }
}

// --- kernel average ----------------------------------------------------------

double KernelAverageFunctional::average_at(int i, PathRef c) const {
    const double ti = c.grid->node(i);
    double acc = 0.0;
    for (int j = 0; j < i; ++j) acc += a_->a(ti, c.grid->node(j)) * c[j];
    return acc * c.dt();
}

void KernelAverageFunctional::averages(PathRef c, std::span<double> out) const {
    const int n = c.steps();
    const double dt = c.dt();
    if (auto* ek = dynamic_cast<const ExpDetKernel*>(a_.get())) {
        const double decay = std::exp(-ek->rate() * dt);
        out[0] = 0.0;
        for (int i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i) + 1] =
                decay * (out[static_cast<std::size_t>(i)] + ek->a(0.0, 0.0) * c[i] * dt);
        return;
    }
    for (int i = 0; i <= n; ++i) out[static_cast<std::size_t>(i)] = average_at(i, c);
}

double KernelAverageFunctional::eval(int i, PathRef c, PathRef) const {
    return h2_.f(c[i], average_at(i, c));
}

double KernelAverageFunctional::atom(int i, PathRef c, PathRef) const {
    return h2_.f1(c[i], average_at(i, c));
}

double KernelAverageFunctional::density(int s, int i, PathRef c, PathRef) const {
    return a_->a(c.grid->node(i), c.grid->node(s)) * h2_.f2(c[i], average_at(i, c));
}

double KernelAverageFunctional::atom_vertical2(int i, PathRef c, PathRef) const {
    return h2_.f11(c[i], average_at(i, c));
}

double KernelAverageFunctional::atom_vertical3(int i, PathRef c, PathRef) const {
    return h2_.f111(c[i], average_at(i, c));
}

double KernelAverageFunctional::atom_horizontal(int i, PathRef c, PathRef) const {
    const double ti = c.grid->node(i);
    const double y = average_at(i, c);
    double drift_of_average = a_->a(ti, ti) * c[i];
    if (auto* ek = dynamic_cast<const ExpDetKernel*>(a_.get())) {
        drift_of_average += -ek->rate() * y;
    } else {
        double acc = 0.0;
        for (int j = 0; j < i; ++j) acc += a_->d1(ti, c.grid->node(j)) * c[j];
        drift_of_average += acc * c.dt();
    }
    return h2_.f12(c[i], y) * drift_of_average;
}

double KernelAverageFunctional::density_dt(int t, int s, PathRef c, PathRef) const {
    return a_->d2(c.grid->node(s), c.grid->node(t)) * h2_.f2(c[s], average_at(s, c));
}

double KernelAverageFunctional::density_malliavin_w(int t, int s, PathRef w) const {
    const double ts = w.grid->node(s), tt = w.grid->node(t);
    const double y = average_at(s, w);
    return a_->a(ts, tt) * (h2_.f12(w[s], y) + h2_.f22(w[s], y) * a_->tail_integral(tt, ts));
}

void KernelAverageFunctional::atom_row(PathRef c, PathRef, std::span<double> out) const {
    std::vector<double> y(out.size());
    averages(c, y);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = h2_.f1(c.v[i], y[i]);
}

bool KernelAverageFunctional::has_recursive_tail() const {
    return dynamic_cast<const ExpDetKernel*>(a_.get()) != nullptr ||
           dynamic_cast<const ConstDetKernel*>(a_.get()) != nullptr;
}

void KernelAverageFunctional::tail_increment(PathRef c, PathRef, std::span<double> q_out) const {
    std::vector<double> y(q_out.size());
    averages(c, y);
    const double a0 = a_->a(0.0, 0.0);
    for (std::size_t i = 0; i < q_out.size(); ++i) q_out[i] = a0 * h2_.f2(c.v[i], y[i]);
}

void KernelAverageFunctional::tail_gamma(const TimeGrid& grid, std::span<double> out) const {
    double g = 1.0;
    if (auto* ek = dynamic_cast<const ExpDetKernel*>(a_.get()))
        g = std::exp(-ek->rate() * grid.dt());
    std::fill(out.begin(), out.end(), g);
}

void KernelAverageFunctional::future_density_sums(PathRef c, PathRef w,
                                                  std::span<double> out) const {
    (void)w;
    const int n = c.steps();
    const double dt = c.dt();
    std::vector<double> y(static_cast<std::size_t>(n) + 1);
    averages(c, y);
    if (auto* ek = dynamic_cast<const ExpDetKernel*>(a_.get())) {
        const double decay = std::exp(-ek->rate() * dt);
        const double a0 = ek->a(0.0, 0.0);
        double acc = 0.0;
        out[static_cast<std::size_t>(n)] = 0.0;
        for (int t = n - 1; t >= 0; --t) {
            acc = a0 * h2_.f2(c[t], y[static_cast<std::size_t>(t)]) * dt + decay * acc;
            out[static_cast<std::size_t>(t)] = acc;
        }
        return;
    }
    for (int t = 0; t <= n; ++t) {
        const double tt = c.grid->node(t);
        double acc = 0.0;
        for (int s = t; s < n; ++s)
            acc += a_->a(c.grid->node(s), tt) * h2_.f2(c[s], y[static_cast<std::size_t>(s)]);
        out[static_cast<std::size_t>(t)] = acc * dt;
    }
}

void KernelAverageFunctional::future_density_dt_sums(PathRef c, PathRef w,
                                                     std::span<double> out) const {
    (void)w;
    const int n = c.steps();
    const double dt = c.dt();
    std::vector<double> y(static_cast<std::size_t>(n) + 1);
    averages(c, y);
    if (auto* ek = dynamic_cast<const ExpDetKernel*>(a_.get())) {
        // d2 of the exponential kernel is rate * a
        future_density_sums(c, w, out);
        for (auto& v : out) v *= ek->rate();
        return;
    }
    for (int t = 0; t <= n; ++t) {
        const double tt = c.grid->node(t);
        double acc = 0.0;
        for (int s = t; s < n; ++s)
            acc += a_->d2(c.grid->node(s), tt) * h2_.f2(c[s], y[static_cast<std::size_t>(s)]);
        out[static_cast<std::size_t>(t)] = acc * dt;
    }
}

void KernelAverageFunctional::future_density_malliavin_sums(PathRef w,
                                                            std::span<double> out) const {
    const int n = w.steps();
    const double dt = w.dt();
    std::vector<double> y(static_cast<std::size_t>(n) + 1);
    averages(w, y);
    if (auto* ek = dynamic_cast<const ExpDetKernel*>(a_.get())) {
        // a(s,t) tail(t,s) = (a(s,t) - scale * e^{-2 rate (s-t)}) / rate, so the
        // sum splits into two one-sided recursions
        const double r = ek->rate();
        const double a0 = ek->a(0.0, 0.0);
        const double d1 = std::exp(-r * dt), d2 = std::exp(-2.0 * r * dt);
        double acc12 = 0.0, acc22a = 0.0, acc22b = 0.0;
        out[static_cast<std::size_t>(n)] = 0.0;
        for (int t = n - 1; t >= 0; --t) {
            const double f12 = h2_.f12(w[t], y[static_cast<std::size_t>(t)]);
            const double f22 = h2_.f22(w[t], y[static_cast<std::size_t>(t)]);
            acc12 = a0 * f12 * dt + d1 * acc12;
            acc22a = a0 * f22 * dt + d1 * acc22a;
            acc22b = a0 * f22 * dt + d2 * acc22b;
            double v = acc12;
            if (r != 0.0)
                v += (acc22a - acc22b) / r;
            out[static_cast<std::size_t>(t)] = v;
        }
        return;
    }
    for (int t = 0; t <= n; ++t) {
        double acc = 0.0;
        for (int s = t; s < n; ++s) acc += density_malliavin_w(t, s, w);
        out[static_cast<std::size_t>(t)] = acc * dt;
    }
}

// --- W functionals -----------------------------------------------------------

double WFunctional::vertical1(int, PathRef) const {
    throw ValidationError(name() + ": no analytic data");
}
double WFunctional::vertical2(int, PathRef) const {
    throw ValidationError(name() + ": no analytic data");
}
double WFunctional::horizontal(int, PathRef) const {
    throw ValidationError(name() + ": no analytic data");
}

std::unique_ptr<WFunctional> make_w_functional(const std::string& name) {
    if (name == "zero") return std::make_unique<ZeroW>();
    if (name == "wt") return std::make_unique<CurrentNoiseW>();
    throw ConfigError("unknown damage coefficient: " + name);
}

// --- climate -----------------------------------------------------------------

double ClimateFunctional::eval(int i, PathRef c, PathRef w) const {
    double acc = 0.0;
    for (int j = 0; j < i; ++j) acc += k_->eval(j, i, w) * c[j];
    return g_->eval(i, w) * c[i] + acc * c.dt();
}

void ClimateFunctional::future_density_sums(PathRef c, PathRef w,
                                            std::span<double> out) const {
    const int n = w.steps();
    const double dt = w.dt();
    out[static_cast<std::size_t>(n)] = 0.0;
    if (auto* ek = dynamic_cast<const ExpWKernel*>(k_.get())) {
        const double decay = std::exp(-ek->rate() * dt);
        double acc = 0.0;
        for (int t = n - 1; t >= 0; --t) {
            acc = k_->eval(t, t, w) * dt + decay * acc;
            out[static_cast<std::size_t>(t)] = acc;
        }
        return;
    }
    if (k_->deterministic() || dynamic_cast<const NoiseLevelWKernel*>(k_.get())) {
        double acc = 0.0;
        for (int t = n - 1; t >= 0; --t) {
            acc += k_->eval(t, t, w) * dt;
            out[static_cast<std::size_t>(t)] = acc;
        }
        // constants and w_s kernels do not depend on the first slot
        return;
    }
    for (int t = 0; t < n; ++t) {
        double acc = 0.0;
        for (int s = t; s < n; ++s) acc += k_->eval(t, s, w) * dt;
        out[static_cast<std::size_t>(t)] = acc;
    }
    (void)c;
}

void ClimateFunctional::future_density_dt_sums(PathRef c, PathRef w,
                                               std::span<double> out) const {
    (void)c;
    const int n = w.steps();
    const double dt = w.dt();
    out[static_cast<std::size_t>(n)] = 0.0;
    if (auto* ek = dynamic_cast<const ExpWKernel*>(k_.get())) {
        future_density_sums(c, w, out);
        for (auto& v : out) v *= ek->rate();
        return;
    }
    for (int t = 0; t <= n; ++t) {
        double acc = 0.0;
        for (int s = t; s < n; ++s) acc += k_->dt(t, s, w) * dt;
        out[static_cast<std::size_t>(t)] = acc;
    }
}

bool ClimateFunctional::has_recursive_tail() const {
    return k_->deterministic() || dynamic_cast<const NoiseLevelWKernel*>(k_.get());
}

void ClimateFunctional::tail_increment(PathRef, PathRef w, std::span<double> q_out) const {
    for (int i = 0; i < static_cast<int>(q_out.size()); ++i)
        q_out[static_cast<std::size_t>(i)] = k_->eval(i, i, w);
}

void ClimateFunctional::tail_gamma(const TimeGrid& grid, std::span<double> out) const {
    double g = 1.0;
    if (auto* ek = dynamic_cast<const ExpWKernel*>(k_.get()))
        g = std::exp(-ek->rate() * grid.dt());
    std::fill(out.begin(), out.end(), g);
}

void ClimateFunctional::future_density_malliavin_sums(PathRef w,
                                                      std::span<double> out) const {
    const int n = w.steps();
    const double dt = w.dt();
    if (k_->deterministic()) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    if (dynamic_cast<const NoiseLevelWKernel*>(k_.get())) {
        double acc = 0.0;
        out[static_cast<std::size_t>(n)] = 0.0;
        for (int t = n - 1; t >= 0; --t) {
            acc += dt;
            out[static_cast<std::size_t>(t)] = acc;
        }
        return;
    }
    for (int t = 0; t <= n; ++t) {
        double acc = 0.0;
        for (int s = t; s < n; ++s) acc += k_->malliavin(t, s, w) * dt;
        out[static_cast<std::size_t>(t)] = acc;
    }
}

// --- tipping -----------------------------------------------------------------

void scan_running_max(PathRef w, std::span<double> max_out, std::span<int> argmax_out) {
    double m = w[0];
    int arg = 0;
    for (int i = 0; i <= w.steps(); ++i) {
        if (w[i] > m) {
            m = w[i];
            arg = i;
        }
        max_out[static_cast<std::size_t>(i)] = m;
        argmax_out[static_cast<std::size_t>(i)] = arg;
    }
}

int running_argmax(PathRef w, int i) {
    double m = w[0];
    int arg = 0;
    for (int j = 1; j <= i; ++j)
        if (w[j] > m) {
            m = w[j];
            arg = j;
        }
    return arg;
}

double TippingFunctional::eval(int i, PathRef c, PathRef w) const {
    const double theta = w.grid->node(running_argmax(w, i));
    double acc = 0.0;
    for (int j = 0; j < i; ++j) acc += f_.f(w.grid->node(j) - theta) * c[j];
    return acc * c.dt();
}

double TippingFunctional::density(int s, int i, PathRef, PathRef w) const {
    const double theta = w.grid->node(running_argmax(w, i));
    return f_.f(w.grid->node(s) - theta);
}

void TippingFunctional::future_density_sums(PathRef c, PathRef w,
                                            std::span<double> out) const {
    (void)c;
    const int n = w.steps();
    const double dt = w.dt();
    std::vector<double> m(static_cast<std::size_t>(n) + 1);
    std::vector<int> arg(static_cast<std::size_t>(n) + 1);
    scan_running_max(w, m, arg);
    for (int t = 0; t <= n; ++t) {
        const double tt = w.grid->node(t);
        double acc = 0.0;
        for (int s = t; s < n; ++s)
            acc += f_.f(tt - w.grid->node(arg[static_cast<std::size_t>(s)]));
        out[static_cast<std::size_t>(t)] = acc * dt;
    }
}

double TippingFunctional::future_density_sum_at(int t, PathRef c, PathRef w) const {
    (void)c;
    const int n = w.steps();
    const double dt = w.dt();
    const double tt = w.grid->node(t);
    double m = w[0], acc = 0.0;
    int arg = 0;
    for (int s = 0; s < n; ++s) {
        if (w[s] > m) {
            m = w[s];
            arg = s;
        }
        if (s >= t) acc += f_.f(tt - w.grid->node(arg));
    }
    return acc * dt;
}

// --- midpoint ------------------------------------------------------------------

double MidpointFunctional::atom(int, PathRef, PathRef) const {
    throw ValidationError("midpoint is not class A (interior atom)");
}
double MidpointFunctional::density(int, int, PathRef, PathRef) const {
    throw ValidationError("midpoint is not class A (interior atom)");
}

double MidpointFunctional::foc_dual_weight(int j, const TimeGrid& grid) const {
    const int n = grid.steps();
    int count = 0;
    if (2 * j <= n - 1) ++count;
    if (2 * j + 1 <= n - 1) ++count;
    return static_cast<double>(count);
}

// --- smoothing -------------------------------------------------------------------

double SmoothedFunctional::eval(int i, PathRef c, PathRef w) const {
    std::vector<double> r(c.v.begin(), c.v.end());
    const double dt = c.dt();
    for (int j = i - 1; j >= 0; --j) {
        const std::size_t k = static_cast<std::size_t>(j);
        r[k] = r[k + 1] + dt * n_ * (c[j + 1] - r[k + 1]);
    }
    return g_->eval(i, PathRef{c.grid, r}, w);
}

std::unique_ptr<HysteresisFunctional> smooth_approximation(
    std::shared_ptr<const HysteresisFunctional> g, double n) {
    if (!(n > 0.0)) throw ConfigError("smoothing rate must be positive");
    return std::make_unique<SmoothedFunctional>(std::move(g), n);
}

// --- catalog ---------------------------------------------------------------------

std::unique_ptr<HysteresisFunctional> make_functional(
    const std::string& name, const std::map<std::string, std::string>& params) {
    if (name == "zero") return std::make_unique<ZeroFunctional>();
    if (name == "cumulative") return std::make_unique<CumulativeFunctional>();
    if (name == "midpoint") return std::make_unique<MidpointFunctional>();
    if (name == "state_dependent")
        return std::make_unique<StateDependentFunctional>(
            smooth_fn(parse_param(params, "f", "sin")));
    if (name == "kernel_average") {
        auto a = make_det_kernel(parse_param(params, "kernel", "exp"),
                                 parse_param(params, "rate", 1.0),
                                 parse_param(params, "scale", 1.0));
        return std::make_unique<KernelAverageFunctional>(
            bivariate_fn(parse_param(params, "h2", "xy")),
            std::shared_ptr<const DetKernel>(std::move(a)));
    }
    if (name == "climate") {
        auto k = make_w_kernel(parse_param(params, "kernel", "exp"),
                               parse_param(params, "rate", 1.0),
                               parse_param(params, "scale", 1.0));
        return std::make_unique<ClimateFunctional>(
            std::shared_ptr<const WFunctional>(make_w_functional(parse_param(params, "g", "zero"))),
            std::shared_ptr<const WKernel>(std::move(k)));
    }
    if (name == "tipping")
        return std::make_unique<TippingFunctional>(smooth_fn(parse_param(params, "f", "relu")));
    throw ConfigError("unknown functional: " + name);
}

std::vector<CatalogEntry> functional_catalog() {
    return {
        {"zero", true, true},           {"state_dependent", true, true},
        {"cumulative", true, true},     {"kernel_average", true, false},
        {"climate", true, true},        {"tipping", false, true},
        {"midpoint", false, true},
    };
}

// --- Frechet check -----------------------------------------------------------------

FrechetReport frechet_check(const HysteresisFunctional& h, const SamplePath& c,
                            const SamplePath& z, std::span<const double> eps_ladder,
                            int node, PathRef w) {
    if (!(c.grid == z.grid)) throw ConfigError("direction lives on a different grid");
    FrechetReport rep;
    const double dt = c.grid.dt();
    const double base = h.eval(node, c.ref(), w);
    double linear_part = h.atom(node, c.ref(), w) * z[node];
    for (int s = 0; s < node; ++s)
        linear_part += h.density(s, node, c.ref(), w) * z[s] * dt;
    for (double eps : eps_ladder) {
        SamplePath shifted = c;
        for (int i = 0; i <= c.grid.steps(); ++i) shifted[i] += eps * z[i];
        const double r = std::abs(h.eval(node, shifted.ref(), w) - base - eps * linear_part);
        rep.eps.push_back(eps);
        rep.residual.push_back(r);
    }
    // slope of log residual vs log eps over the usable part of the ladder
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t k = 0; k < rep.eps.size(); ++k) {
        if (rep.residual[k] < 1e-13) continue;
        const double lx = std::log(rep.eps[k]), ly = std::log(rep.residual[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2) {
        rep.linear = true;
        rep.observed_order = std::numeric_limits<double>::infinity();
    } else {
        rep.observed_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    return rep;
}

} // namespace hyst
