#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ensemble.hpp"
#include "malliavin.hpp"

using namespace hyst;

TEST_CASE("cylindrical derivative") {
    TimeGrid g(1.0, 128);
    BrownianEnsemble ens(g, 1, 9);
    PathRef w = ens.path(0);
    const int s = 96;

    CylindricalFunctional level{{s}, [](std::span<const double> x) { return x[0]; }, nullptr};
    CHECK(malliavin_cylindrical(level, w, 10) == doctest::Approx(1.0));
    CHECK(malliavin_cylindrical(level, w, s) == doctest::Approx(1.0));
    CHECK(malliavin_cylindrical(level, w, s + 1) == 0.0);

    CylindricalFunctional square{{s},
                                 [](std::span<const double> x) { return x[0] * x[0]; },
                                 nullptr};
    CHECK(malliavin_cylindrical(square, w, 20) == doctest::Approx(2.0 * w[s]).epsilon(1e-6));
}

TEST_CASE("directional estimates") {
    TimeGrid g(1.0, 256);
    const int n = g.steps();
    BrownianEnsemble ens(g, 1, 10);
    SamplePath w(g, std::vector<double>(ens.row(0).begin(), ens.row(0).end()));

    ScalarFunctional terminal = [n](PathRef p) { return p[n]; };
    CHECK(malliavin_directional(terminal, w, 30) == doctest::Approx(1.0).epsilon(1e-9));

    // average of D_r over the ramp; the integral functional gives T - t - delta/2
    ScalarFunctional integral = [n](PathRef p) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += p[j];
        return acc * p.dt();
    };
    DirectionalOptions opts;
    const int t = 64;
    const double delta = opts.ramp_steps * g.dt();
    // exact value for the discrete ramp, derived by summing the left rule
    double expected = 0.0;
    {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            expected += acc * g.dt();
            if (i >= t && i < t + opts.ramp_steps) acc += g.dt() / delta;
        }
    }
    CHECK(malliavin_directional(integral, w, t, opts) ==
          doctest::Approx(expected).epsilon(1e-9));
    CHECK(std::abs(expected - (1.0 - g.node(t) - 0.5 * delta)) < 2.0 * g.dt());

    ScalarFunctional constant = [](PathRef) { return 3.5; };
    CHECK(malliavin_directional(constant, w, 10) == 0.0);

    // F_t-measurable functional with the ramp after its window
    ScalarFunctional early = [](PathRef p) { return p[100]; };
    CHECK(malliavin_directional(early, w, 101) == 0.0);

    CHECK_THROWS_AS(malliavin_directional(terminal, w, n - 1, DirectionalOptions{4, 1e-4}),
                    ConfigError);
}

TEST_CASE("tangent process") {
    TimeGrid g(1.0, 256);
    BrownianEnsemble ens(g, 1, 12);
    PathRef w = ens.path(0);
    const int n = g.steps();
    const int t = 64;

    // c = w
    TangentInputs brownian{[](int, PathRef) { return 0.0; }, [](int, PathRef) { return 1.0; },
                           [](int, int, PathRef) { return 0.0; },
                           [](int, int, PathRef) { return 0.0; }};
    auto d1 = tangent_process(brownian, w, t);
    for (int s = t; s <= n; ++s) CHECK(d1[static_cast<std::size_t>(s)] == doctest::Approx(1.0));

    // deterministic diffusion beta_t = t: D_t c_s = t for s >= t
    TangentInputs det{[](int, PathRef) { return 0.0; },
                      [](int i, PathRef p) { return p.grid->node(i); },
                      [](int, int, PathRef) { return 0.0; },
                      [](int, int, PathRef) { return 0.0; }};
    auto d2 = tangent_process(det, w, t);
    for (int s = t; s <= n; ++s)
        CHECK(d2[static_cast<std::size_t>(s)] == doctest::Approx(g.node(t)));

    // c_t = int_0^t w ds: alpha = w, D_t alpha_s = 1, beta = 0
    TangentInputs integral{[](int i, PathRef p) { return p[i]; },
                           [](int, PathRef) { return 0.0; },
                           [](int t_idx, int s, PathRef) { return s >= t_idx ? 1.0 : 0.0; },
                           [](int, int, PathRef) { return 0.0; }};
    auto d3 = tangent_process(integral, w, t);
    for (int s : {t, 128, 200, n})
        CHECK(d3[static_cast<std::size_t>(s)] ==
              doctest::Approx(g.node(s) - g.node(t)).epsilon(1e-9));

    // cross-check against the directional estimate of F = int_0^s w
    SamplePath ws(g, std::vector<double>(w.v.begin(), w.v.end()));
    const int s_target = 200;
    ScalarFunctional F = [s_target](PathRef p) {
        double acc = 0.0;
        for (int j = 0; j < s_target; ++j) acc += p[j];
        return acc * p.dt();
    };
    const double dir = malliavin_directional(F, ws, t);
    CHECK(std::abs(dir - d3[s_target]) < 3.0 * 4.0 * g.dt());
}

TEST_CASE("Clark-Ocone integrand") {
    TimeGrid g(1.0, 128);
    const int n = g.steps();
    BrownianEnsemble ens(g, 2000, 77);
    BasisSpec spec;

    // xi = int_0^T w ds: integrand T - t up to the ramp-average bias
    auto co = clark_ocone_integrand(
        [n](PathRef p) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += p[j];
            return acc * p.dt();
        },
        ens, spec);
    const double delta = 4.0 * g.dt();
    for (int i : {16, 64, 100}) {
        const double got = co.integrand.evaluate(i, ens.path(1500));
        CHECK(std::abs(got - (1.0 - g.node(i))) <= 3.0 * delta / 2.0 + 1e-3);
    }
    CHECK(co.reconstruction_rel < 0.05);

    // xi = w_T: integrand identically one
    auto co2 = clark_ocone_integrand([n](PathRef p) { return p[n]; }, ens, spec);
    for (int i : {10, 60, 120})
        CHECK(co2.integrand.evaluate(i, ens.path(1700)) == doctest::Approx(1.0).epsilon(1e-6));

    // xi = w_T^2: integrand 2 w_t, checked by regressing on w_t
    auto co3 = clark_ocone_integrand([n](PathRef p) { return p[n] * p[n]; }, ens, spec);
    const int i = 64;
    double sxy = 0, sxx = 0, sy = 0, sx = 0, syy = 0;
    const int m0 = eval_begin(ens, spec);
    const int m = ens.paths() - m0;
    for (int j = m0; j < ens.paths(); ++j) {
        PathRef w = ens.path(j);
        const double x = w[i];
        const double y = co3.integrand.evaluate(i, w);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double cov = sxy / m - sx / m * sy / m;
    const double vx = sxx / m - sx / m * sx / m;
    const double vy = syy / m - sy / m * sy / m;
    const double slope = cov / vx;
    const double r2 = cov * cov / (vx * vy);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
    CHECK(r2 >= 0.99);
}
