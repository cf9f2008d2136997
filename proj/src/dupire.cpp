#include "dupire.hpp"

#include <cmath>

namespace hyst::dupire {

double bump_size(PathRef x, const Options& opts) {
    double sup = 0.0;
    for (double v : x.v) sup = std::max(sup, std::abs(v));
    return opts.eps_scale * (1.0 + sup);
}

double vertical_derivative(const PathFamily& q, const SamplePath& x, int i, int order,
                           double eps) {
    if (eps <= 0.0) throw ConfigError("bump size must be positive");
    switch (order) {
    case 1: {
        SamplePath up = bump_path(x, i, eps), dn = bump_path(x, i, -eps);
        return (q(i, up.ref()) - q(i, dn.ref())) / (2.0 * eps);
    }
    case 2: {
        SamplePath up = bump_path(x, i, eps), dn = bump_path(x, i, -eps);
        return (q(i, up.ref()) - 2.0 * q(i, x.ref()) + q(i, dn.ref())) / (eps * eps);
    }
    case 3: {
        SamplePath up2 = bump_path(x, i, 2.0 * eps), up = bump_path(x, i, eps);
        SamplePath dn = bump_path(x, i, -eps), dn2 = bump_path(x, i, -2.0 * eps);
        return (q(i, up2.ref()) - 2.0 * q(i, up.ref()) + 2.0 * q(i, dn.ref()) -
                q(i, dn2.ref())) /
               (2.0 * eps * eps * eps);
    }
    default:
        throw ConfigError("vertical derivative order must be 1, 2 or 3");
    }
}

double horizontal_derivative(const PathFamily& q, const SamplePath& x, int i, int k) {
    if (k < 1) throw ConfigError("horizontal extension needs at least one step");
    if (i + k > x.grid.steps()) throw ConfigError("flat extension past grid end");
    SamplePath ext = flat_extend(x, i, k);
    return (q(i + k, ext.ref()) - q(i, x.ref())) / (static_cast<double>(k) * x.grid.dt());
}

DupireDerivatives full_derivatives(const PathFamily& q, const SamplePath& x, int i,
                                   const Options& opts) {
    DupireDerivatives d;
    // wider bumps for higher orders keep the round-off term subdominant
    const double eps = bump_size(x.ref(), opts);
    d.vertical_1 = vertical_derivative(q, x, i, 1, eps);
    d.vertical_2 = vertical_derivative(q, x, i, 2, 10.0 * eps);
    d.vertical_3 = vertical_derivative(q, x, i, 3, 20.0 * eps);
    if (i + opts.extension_steps <= x.grid.steps()) {
        d.horizontal = horizontal_derivative(q, x, i, opts.extension_steps);
        PathFamily v1 = [&](int j, PathRef p) {
            SamplePath sp(*p.grid, std::vector<double>(p.v.begin(), p.v.end()));
            return vertical_derivative(q, sp, j, 1, eps);
        };
        d.mixed_horizontal_of_vertical = horizontal_derivative(v1, x, i, opts.extension_steps);
    }
    return d;
}

ItoTerms functional_ito(const FamilyWithDerivatives& q, double b, double sigma,
                        const SamplePath& x, int i, const Options& opts) {
    const double eps = bump_size(x.ref(), opts);
    const double v1 = q.vertical1 ? q.vertical1(i, x.ref())
                                  : vertical_derivative(q.eval, x, i, 1, eps);
    const double v2 = q.vertical2 ? q.vertical2(i, x.ref())
                                  : vertical_derivative(q.eval, x, i, 2, eps);
    const double hz = q.horizontal ? q.horizontal(i, x.ref())
                                   : horizontal_derivative(q.eval, x, i, opts.extension_steps);
    return ItoTerms{hz + v1 * b + 0.5 * v2 * sigma * sigma, v1 * sigma};
}

double richardson_in_dt(const std::function<double(int)>& value_at_steps, int steps) {
    return 2.0 * value_at_steps(2 * steps) - value_at_steps(steps);
}

AtomIto atom_ito(const HysteresisFunctional& h, int i, PathRef c, PathRef w,
                 const Options& opts) {
    AtomIto out;
    if (h.has_atom_dupire()) {
        out.vertical2 = h.atom_vertical2(i, c, w);
        out.vertical3 = h.atom_vertical3(i, c, w);
        out.horizontal = h.atom_horizontal(i, c, w);
        return out;
    }
    if (auto* climate = dynamic_cast<const ClimateFunctional*>(&h)) {
        // atom = g_t(w^t); differentiate along the noise path
        const WFunctional& g = climate->g();
        if (g.has_dupire()) {
            out.vertical2 = g.vertical1(i, w);
            out.vertical3 = g.vertical2(i, w);
            out.horizontal = g.horizontal(i, w);
            return out;
        }
        SamplePath base(*w.grid, std::vector<double>(w.v.begin(), w.v.end()));
        PathFamily q = [&](int j, PathRef x) { return g.eval(j, x); };
        const double eps = bump_size(w, opts);
        out.vertical2 = vertical_derivative(q, base, i, 1, eps);
        out.vertical3 = vertical_derivative(q, base, i, 2, eps);
        out.horizontal = i + opts.extension_steps <= w.steps()
                             ? horizontal_derivative(q, base, i, opts.extension_steps)
                             : 0.0;
        return out;
    }
    const bool bump_noise = h.linear_in_policy();
    SamplePath base = bump_noise
                          ? SamplePath(*w.grid, std::vector<double>(w.v.begin(), w.v.end()))
                          : SamplePath(*c.grid, std::vector<double>(c.v.begin(), c.v.end()));
    PathFamily q = bump_noise ? PathFamily([&](int j, PathRef x) { return h.atom(j, c, x); })
                              : PathFamily([&](int j, PathRef x) { return h.atom(j, x, w); });
    const double eps = bump_size(base.ref(), opts);
    out.vertical2 = vertical_derivative(q, base, i, 1, eps);
    out.vertical3 = vertical_derivative(q, base, i, 2, 10.0 * eps);
    out.horizontal = i + opts.extension_steps <= base.grid.steps()
                         ? horizontal_derivative(q, base, i, opts.extension_steps)
                         : 0.0;
    return out;
}

} // namespace hyst::dupire
