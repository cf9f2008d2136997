#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dupire.hpp"
#include "ensemble.hpp"
#include "functionals.hpp"

using namespace hyst;
using namespace hyst::dupire;

namespace {

SamplePath linear_path(const TimeGrid& g) {
    std::vector<double> v(static_cast<std::size_t>(g.nodes()));
    for (int i = 0; i < g.nodes(); ++i) v[static_cast<std::size_t>(i)] = g.node(i);
    return SamplePath(g, std::move(v));
}

// hides the analytic suppliers so the differencing path gets exercised
class Stripped final : public HysteresisFunctional {
public:
    explicit Stripped(const HysteresisFunctional& inner) : inner_(&inner) {}
    std::string name() const override { return "stripped(" + inner_->name() + ")"; }
    double eval(int i, PathRef c, PathRef w) const override { return inner_->eval(i, c, w); }
    double atom(int i, PathRef c, PathRef w) const override { return inner_->atom(i, c, w); }
    double density(int s, int i, PathRef c, PathRef w) const override {
        return inner_->density(s, i, c, w);
    }

private:
    const HysteresisFunctional* inner_;
};

} // namespace

TEST_CASE("vertical derivative of the cumulative functional") {
    TimeGrid g(1.0, 512);
    SamplePath c = linear_path(g);
    CumulativeFunctional h;
    PathFamily q = [&](int i, PathRef x) { return h.eval(i, x, x); };
    const double eps = bump_size(c.ref());
    const double v1 = vertical_derivative(q, c, g.steps(), 1, eps);
    // agrees with the atom up to the quadrature gap of the discrete integral
    CHECK(std::abs(v1 - 0.5) <= 2.0 * g.dt());
    CHECK(v1 == doctest::Approx(h.atom(g.steps(), c.ref(), c.ref())).epsilon(1e-9));
}

TEST_CASE("second vertical of a state functional") {
    TimeGrid g(1.0, 64);
    SamplePath c(g, std::vector<double>(65, 0.0));
    StateDependentFunctional h(smooth_fn("sin"));
    PathFamily q = [&](int i, PathRef x) { return h.eval(i, x, x); };
    const double v2 = vertical_derivative(q, c, 32, 2, 1e-3);
    CHECK(std::abs(v2 - (-std::sin(0.0))) < 1e-6);
}

TEST_CASE("differencing self-convergence") {
    TimeGrid g(1.0, 64);
    SamplePath c(g, std::vector<double>(65, 0.4));
    StateDependentFunctional h(smooth_fn("exp"));
    PathFamily q = [&](int i, PathRef x) { return h.eval(i, x, x); };
    const double exact = std::exp(0.4);
    const double e1 = std::abs(vertical_derivative(q, c, 32, 1, 2e-3) - exact);
    const double e2 = std::abs(vertical_derivative(q, c, 32, 1, 1e-3) - exact);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 1.8); // central differencing is second order
}

TEST_CASE("horizontal derivative") {
    TimeGrid g(1.0, 128);
    std::vector<double> v(129, 0.7);
    SamplePath c(g, std::move(v));

    // running integral family: slope is the frozen value
    PathFamily run = [&](int i, PathRef x) {
        double acc = 0.0;
        for (int j = 0; j < i; ++j) acc += x[j];
        return acc * x.dt();
    };
    CHECK(horizontal_derivative(run, c, 64, 1) == doctest::Approx(0.7));

    // state-dependent atom family has no horizontal variation
    StateDependentFunctional h(smooth_fn("sin"));
    PathFamily atom = [&](int i, PathRef x) { return h.atom(i, x, x); };
    CHECK(horizontal_derivative(atom, c, 64, 1) == doctest::Approx(0.0));

    // pure time functional
    PathFamily clock = [&](int i, PathRef x) { return x.grid->node(i); };
    CHECK(horizontal_derivative(clock, c, 64, 1) == doctest::Approx(1.0));

    CHECK_THROWS_AS(horizontal_derivative(clock, c, 128, 1), ConfigError);
}

TEST_CASE("functional Ito coefficients") {
    TimeGrid g(1.0, 256);
    BrownianEnsemble ens(g, 1, 3);
    SamplePath x(g, std::vector<double>(ens.row(0).begin(), ens.row(0).end()));

    // classical Ito for a function of the state on a Brownian path
    SmoothFn f = smooth_fn("sin");
    FamilyWithDerivatives q;
    q.eval = [&](int i, PathRef p) { return f.f(p[i]); };
    const int i = 100;
    auto terms = functional_ito(q, 0.0, 1.0, x, i);
    CHECK(terms.drift == doctest::Approx(0.5 * f.d2(x[i])).epsilon(1e-5));
    CHECK(terms.diffusion == doctest::Approx(f.d1(x[i])).epsilon(1e-6));

    // running integral: drift x_t, no diffusion
    FamilyWithDerivatives run;
    run.eval = [&](int k, PathRef p) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j) acc += p[j];
        return acc * p.dt();
    };
    auto t2 = functional_ito(run, 0.0, 1.0, x, i);
    CHECK(t2.drift == doctest::Approx(x[i]).epsilon(1e-8));
    CHECK(t2.diffusion == doctest::Approx(0.0).epsilon(1e-10));

    PathFamily run_plain = [&](int k, PathRef p) { return run.eval(k, p); };
    CHECK(t2.drift == doctest::Approx(horizontal_derivative(run_plain, x, i, 1)).epsilon(1e-8));
}

TEST_CASE("full derivative record and dt extrapolation") {
    CumulativeFunctional h;
    auto value_at = [&](int steps) {
        TimeGrid g(1.0, steps);
        SamplePath c = linear_path(g);
        PathFamily q = [&](int i, PathRef x) { return h.eval(i, x, x); };
        return vertical_derivative(q, c, steps, 1, 1e-4);
    };
    // the raw value misses the continuum atom by ~dt/2; two grids fix it
    const double raw = value_at(256);
    const double extrapolated = richardson_in_dt(value_at, 256);
    CHECK(std::abs(raw - 0.5) <= 2.0 / 256);
    CHECK(std::abs(extrapolated - 0.5) < 1e-5);

    TimeGrid g(1.0, 128);
    SamplePath c = linear_path(g);
    PathFamily q = [&](int i, PathRef x) { return h.eval(i, x, x); };
    auto d = full_derivatives(q, c, 64);
    CHECK(d.vertical_2 == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(d.horizontal == doctest::Approx(h.atom_horizontal(64, c.ref(), c.ref())).epsilon(0.05));
}

TEST_CASE("atom Ito data: analytic vs numeric") {
    TimeGrid g(1.0, 256);
    BrownianEnsemble ens(g, 1, 5);
    PathRef w = ens.path(0);
    const int i = 128;

    KernelAverageFunctional h(bivariate_fn("xy"), std::make_shared<ExpDetKernel>(1.0));
    Stripped numeric(h);
    auto a = atom_ito(h, i, w, w);
    auto b = atom_ito(numeric, i, w, w);
    CHECK(b.vertical2 == doctest::Approx(a.vertical2).epsilon(1e-4));
    CHECK(std::abs(b.vertical3 - a.vertical3) < 1e-4);
    CHECK(b.horizontal == doctest::Approx(a.horizontal).epsilon(0.05));

    StateDependentFunctional f(smooth_fn("sin"));
    Stripped fn(f);
    auto c1 = atom_ito(f, i, w, w);
    auto c2 = atom_ito(fn, i, w, w);
    CHECK(c2.vertical2 == doctest::Approx(c1.vertical2).epsilon(1e-5));
    CHECK(std::abs(c2.vertical3 - c1.vertical3) < 1e-4);
}

TEST_CASE("Euler reconstruction of a smooth family") {
    // q = f(x_t) along Brownian paths: the coefficient sum reproduces the
    // terminal value at strong order >= 0.45
    SmoothFn f = smooth_fn("sin");
    std::vector<double> dts, rms;
    for (int n : {64, 128, 256}) {
        TimeGrid g(1.0, n);
        BrownianEnsemble ens(g, 800, 31);
        double ss = 0.0;
        for (int j = 0; j < ens.paths(); ++j) {
            auto w = ens.path(j);
            double acc = f.f(w[0]);
            for (int i = 0; i < n; ++i)
                acc += 0.5 * f.d2(w[i]) * g.dt() + f.d1(w[i]) * (w[i + 1] - w[i]);
            const double d = acc - f.f(w[n]);
            ss += d * d;
        }
        dts.push_back(g.dt());
        rms.push_back(std::sqrt(ss / ens.paths()));
    }
    const double order01 = std::log2(rms[0] / rms[1]);
    const double order12 = std::log2(rms[1] / rms[2]);
    CHECK(0.5 * (order01 + order12) >= 0.45);
}
