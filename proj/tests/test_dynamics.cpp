#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dynamics.hpp"
#include "oracles.hpp"

using namespace hyst;

TEST_CASE("ito_to_projection round trips") {
    TimeGrid g(1.0, 128);
    const int n = g.steps();
    BrownianEnsemble ens(g, 3000, 202);
    BasisSpec spec;

    // eta = w: xi_t = w_T, projection ~ w_t
    CoefficientField bm{[](int, PathRef) { return 0.0; }, [](int, PathRef) { return 1.0; }};
    auto xi = ito_to_projection(0.0, bm);
    CHECK(xi.xi(10, ens.path(5)) == doctest::Approx(ens.path(5)[n]).epsilon(1e-12));
    auto res = total_derivative(xi, ens, spec);
    const int b = eval_begin(ens, spec);
    double d = 0, d2 = 0;
    for (int j = b; j < ens.paths(); ++j) {
        PathRef w = ens.path(j);
        const double diff = res.projection.evaluate(64, w) - w[64];
        d += diff;
        d2 += diff * diff;
    }
    const int m = ens.paths() - b;
    d /= m;
    CHECK(std::abs(d) < 3.0 * std::sqrt(std::max(0.0, d2 / m - d * d) / m) + 1e-3);

    // deterministic drift: xi_t = t, projection exact
    CoefficientField det{[](int, PathRef) { return 1.0; }, [](int, PathRef) { return 0.0; }};
    auto xi2 = ito_to_projection(0.0, det);
    auto res2 = total_derivative(xi2, ens, spec);
    CHECK(res2.projection.evaluate(64, ens.path(7)) == doctest::Approx(g.node(64)).epsilon(1e-12));
    CHECK(res2.drift.evaluate(30, ens.path(7)) == doctest::Approx(1.0).epsilon(1e-12));

    // already adapted absolutely continuous process: identity case
    CoefficientField run{[](int i, PathRef w) { return w[i]; }, [](int, PathRef) { return 0.0; }};
    auto xi3 = ito_to_projection(0.0, run);
    PathRef w0 = ens.path(3);
    double acc = 0.0;
    for (int i = 0; i < 64; ++i) acc += w0[i] * g.dt();
    CHECK(xi3.xi(64, w0) == doctest::Approx(acc).epsilon(1e-12));
}

TEST_CASE("elasticity closed forms") {
    TimeGrid g(1.0, 256);
    BrownianEnsemble ens(g, 4000, 301);
    BasisSpec spec;
    const std::size_t nn = static_cast<std::size_t>(g.nodes());

    SUBCASE("zero functional") {
        ZeroFunctional h;
        ElasticityPipeline pipe(h, ens, spec);
        std::vector<double> C(nn), I(nn), F(nn);
        pipe.rows(ens.path(2100), C, I, F);
        for (double v : C) CHECK(v == 0.0);
    }

    SUBCASE("state dependent is minus the derivative") {
        StateDependentFunctional h(smooth_fn("sin"));
        ElasticityPipeline pipe(h, ens, spec);
        std::vector<double> C(nn), I(nn), F(nn);
        PathRef w = ens.path(2100);
        pipe.rows(w, C, I, F);
        for (int i : {0, 100, 256})
            CHECK(C[static_cast<std::size_t>(i)] ==
                  doctest::Approx(-std::cos(w[i])).epsilon(1e-12));
    }

    SUBCASE("cumulative matches the closed form within noise") {
        CumulativeFunctional h;
        ElasticityPipeline pipe(h, ens, spec);
        std::vector<double> C(nn), I(nn), F(nn);
        const int b = eval_begin(ens, spec);
        for (int i : {64, 128, 192}) {
            double d = 0, d2 = 0;
            for (int j = b; j < ens.paths(); ++j) {
                PathRef w = ens.path(j);
                pipe.rows(w, C, I, F);
                const double diff = C[static_cast<std::size_t>(i)] - oracle_cumulative(i, w).C;
                d += diff;
                d2 += diff * diff;
            }
            const int m = ens.paths() - b;
            d /= m;
            const double se = std::sqrt(std::max(0.0, d2 / m - d * d) / m);
            CHECK(std::abs(d) <= 3.0 * se + 1e-4);
            // the decomposition identity holds exactly
            CHECK(C[static_cast<std::size_t>(i)] ==
                  -I[static_cast<std::size_t>(i)] - F[static_cast<std::size_t>(i)]);
        }
    }
}

TEST_CASE("predicted elasticity dynamics") {
    TimeGrid g(1.0, 256);
    BrownianEnsemble ens(g, 4000, 303);
    BasisSpec spec;

    SUBCASE("state dependent termwise") {
        StateDependentFunctional h(smooth_fn("sin"));
        ElasticityDynamics dyn(h, ens, spec);
        PathRef w = ens.path(3000);
        for (int i : {10, 128, 250}) {
            auto o = oracle_state_dependent(h.f(), i, w);
            CHECK(dyn.drift(i, w) == doctest::Approx(o.drift).epsilon(1e-9));
            CHECK(dyn.diffusion(i, w) == doctest::Approx(o.diffusion).epsilon(1e-9));
        }
    }

    SUBCASE("cumulative: drift zero, diffusion -(T-t)") {
        CumulativeFunctional h;
        ElasticityDynamics dyn(h, ens, spec);
        PathRef w = ens.path(3000);
        for (int i : {10, 128, 250}) {
            CHECK(dyn.drift(i, w) == doctest::Approx(0.0).epsilon(1e-10));
            CHECK(dyn.diffusion(i, w) == doctest::Approx(-(1.0 - g.node(i))).epsilon(1e-10));
        }
    }

    SUBCASE("kernel average agrees with the empirical coefficients") {
        KernelAverageFunctional h(bivariate_fn("xy"), std::make_shared<ExpDetKernel>(1.0));
        ElasticityPipeline pipe(h, ens, spec);
        ElasticityDynamics dyn(h, ens, spec);
        const std::vector<int> nodes{64, 128, 192};
        auto value = [&](int, PathRef w, std::span<double> buf) { pipe.c_row(w, buf); };
        auto pd = [&](int, PathRef w, std::span<double> buf) { dyn.drift_row(w, buf); };
        auto pf = [&](int, PathRef w, std::span<double> buf) { dyn.diffusion_row(w, buf); };
        auto checks = empirical_coefficients(ens, eval_begin(ens, spec), value, nodes, 9, pd, pf);
        for (const auto& c : checks) {
            CHECK(std::abs(c.z_beta_pooled) <= 3.5);
            CHECK(std::abs(c.alpha_pooled_diff) <=
                  3.0 * c.alpha_pooled_diff_se + 0.05);
        }
    }
}

TEST_CASE("pigouvian tax") {
    TimeGrid g(1.0, 256);
    BrownianEnsemble ens(g, 3000, 404);
    BasisSpec spec;
    const std::size_t nn = static_cast<std::size_t>(g.nodes());

    SUBCASE("constant kernel: Lambda = T - t, drift -1, no diffusion") {
        ClimateFunctional h(std::make_shared<ZeroW>(), std::make_shared<ConstWKernel>(1.0));
        TaxPipeline tax(h, 0.1, ens, spec);
        std::vector<double> lam(nn);
        PathRef w = ens.path(2000);
        tax.lambda_row(w, lam);
        for (int i : {0, 100, 256})
            CHECK(lam[static_cast<std::size_t>(i)] == doctest::Approx(1.0 - g.node(i)));
        CHECK(tax.pred_lambda_drift(100, w) == doctest::Approx(-1.0));
        CHECK(tax.pred_lambda_diffusion(100, w) == doctest::Approx(0.0));
    }

    SUBCASE("identity damage: Lambda = w_t, d Lambda = dw") {
        ClimateFunctional h(std::make_shared<CurrentNoiseW>(),
                            std::make_shared<ConstWKernel>(0.0));
        TaxPipeline tax(h, 0.3, ens, spec);
        std::vector<double> lam(nn), pol(nn);
        PathRef w = ens.path(2000);
        tax.lambda_row(w, lam);
        tax.policy_row(w, pol);
        for (int i : {50, 150}) {
            CHECK(lam[static_cast<std::size_t>(i)] == doctest::Approx(w[i]));
            CHECK(pol[static_cast<std::size_t>(i)] == doctest::Approx(w[i] - 0.3 * w[i]));
        }
        CHECK(tax.pred_lambda_drift(100, w) == doctest::Approx(0.0));
        CHECK(tax.pred_lambda_diffusion(100, w) == doctest::Approx(1.0));
    }

    SUBCASE("level kernel: Lambda = (T-t) w_t by the martingale property") {
        ClimateFunctional h(std::make_shared<ZeroW>(), std::make_shared<NoiseLevelWKernel>());
        TaxPipeline tax(h, 0.1, ens, spec);
        const std::vector<int> nodes{64, 128, 192};
        auto value = [&](int, PathRef w, std::span<double> buf) { tax.lambda_row(w, buf); };
        auto pd = [&](int, PathRef w, std::span<double> buf) {
            for (int i = 0; i < static_cast<int>(buf.size()); ++i)
                buf[static_cast<std::size_t>(i)] = tax.pred_lambda_drift(i, w);
        };
        auto pf = [&](int, PathRef w, std::span<double> buf) {
            for (int i = 0; i < static_cast<int>(buf.size()); ++i)
                buf[static_cast<std::size_t>(i)] = tax.pred_lambda_diffusion(i, w);
        };
        PathRef w = ens.path(2900);
        CHECK(tax.pred_lambda_drift(128, w) == doctest::Approx(-w[128]));
        CHECK(tax.pred_lambda_diffusion(128, w) == doctest::Approx(1.0 - g.node(128)));
        auto checks = empirical_coefficients(ens, eval_begin(ens, spec), value, nodes, 9, pd, pf);
        for (const auto& c : checks) {
            CHECK(std::abs(c.z_beta_pooled) <= 3.5);
            CHECK(std::abs(c.z_alpha_pooled) <= 3.5);
        }
    }
}

TEST_CASE("first order condition solver") {
    TimeGrid g(1.0, 128);
    BrownianEnsemble ens(g, 3000, 505);
    BasisSpec spec;

    SUBCASE("no hysteresis tracks the noise in one sweep") {
        StateDependentFunctional h(smooth_fn("sin"));
        auto pol = foc_solve(h, 0.0, ens, spec);
        CHECK(pol.iterations == 1);
        auto r = pol.row(17);
        PathRef w = ens.path(17);
        for (int i = 0; i <= g.steps(); ++i) CHECK(r[static_cast<std::size_t>(i)] == w[i]);
    }

    SUBCASE("policy-linear functional solves in one step") {
        ClimateFunctional h(std::make_shared<CurrentNoiseW>(),
                            std::make_shared<ExpWKernel>(1.0));
        auto pol = foc_solve(h, 0.2, ens, spec);
        CHECK(pol.iterations == 1);
        CHECK(pol.converged);
        TaxPipeline tax(h, 0.2, ens, spec);
        std::vector<double> want(static_cast<std::size_t>(g.nodes()));
        PathRef w = ens.path(42);
        tax.policy_row(w, want);
        auto got = pol.row(42);
        for (int i = 0; i <= g.steps(); ++i)
            CHECK(got[static_cast<std::size_t>(i)] ==
                  doctest::Approx(want[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }

    SUBCASE("quadratic state cost halves the tracking") {
        // c = w - f'(c) with f = x^2/2 gives c = w/2
        StateDependentFunctional h(smooth_fn("half_square"));
        FocOptions opts;
        opts.tol = 1e-12;
        opts.max_iter = 200;
        auto pol = foc_solve(h, 1.0, ens, spec, opts);
        CHECK(pol.converged);
        PathRef w = ens.path(5);
        auto r = pol.row(5);
        for (int i : {10, 64, 128})
            CHECK(r[static_cast<std::size_t>(i)] == doctest::Approx(0.5 * w[i]).epsilon(1e-9));
    }
}

TEST_CASE("policy coefficient formulas") {
    TimeGrid g(1.0, 128);
    BrownianEnsemble ens(g, 3000, 606);
    BasisSpec spec;

    SUBCASE("zero functional") {
        ZeroFunctional h;
        auto pol = foc_solve(h, 0.5, ens, spec);
        PolicyCoefficients coeff(h, 0.5, pol, ens, spec);
        PathRef w = ens.path(9);
        PathRef c{&ens.grid(), pol.row(9)};
        CHECK(coeff.beta(64, c, w) == doctest::Approx(1.0));
        CHECK(coeff.alpha(64, c, w) == doctest::Approx(0.0));
    }

    SUBCASE("quadratic state cost: beta = 1/(1 + f'')") {
        StateDependentFunctional h(smooth_fn("half_square"));
        FocOptions opts;
        opts.tol = 1e-12;
        auto pol = foc_solve(h, 1.0, ens, spec, opts);
        PolicyCoefficients coeff(h, 1.0, pol, ens, spec);
        PathRef w = ens.path(9);
        PathRef c{&ens.grid(), pol.row(9)};
        CHECK(coeff.beta(64, c, w) == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(coeff.alpha(64, c, w) == doctest::Approx(0.0).epsilon(1e-9));
        // the halved policy really has diffusion 1/2
        auto value = [&](int j, PathRef, std::span<double> buf) {
            auto r = pol.row(j);
            std::copy(r.begin(), r.end(), buf.begin());
        };
        auto pf = [&](int, PathRef, std::span<double> buf) {
            std::fill(buf.begin(), buf.end(), 0.5);
        };
        const std::vector<int> nodes{64};
        auto checks =
            empirical_coefficients(ens, eval_begin(ens, spec), value, nodes, 9, nullptr, pf);
        CHECK(std::abs(checks[0].z_beta_pooled) <= 3.5);
    }
}

TEST_CASE("deterministic elasticity") {
    TimeGrid g(1.0, 256);

    SUBCASE("cumulative on a frozen unit path") {
        CumulativeFunctional h;
        auto res = deterministic_elasticity(h, [](double) { return 0.0; }, g, 1.0);
        for (int i : {0, 100, 256}) {
            CHECK(res.C[static_cast<std::size_t>(i)] == doctest::Approx(-1.0));
            CHECK(res.dC_dt[static_cast<std::size_t>(i)] == doctest::Approx(0.0));
        }
    }

    SUBCASE("zero functional") {
        ZeroFunctional h;
        auto res = deterministic_elasticity(h, [](double x) { return -x; }, g, 1.0);
        for (double v : res.C) CHECK(v == 0.0);
    }

    SUBCASE("state dependent on a frozen path") {
        StateDependentFunctional h(smooth_fn("sin"));
        auto res = deterministic_elasticity(h, [](double) { return 0.0; }, g, 0.7);
        for (int i : {10, 200})
            CHECK(res.dC_dt[static_cast<std::size_t>(i)] == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(res.C[50] == doctest::Approx(-std::cos(0.7)));
    }
}

TEST_CASE("empirical coefficient extraction") {
    TimeGrid g(1.0, 256);
    BrownianEnsemble ens(g, 4000, 707);
    const std::vector<int> nodes{64, 128, 192};

    SUBCASE("the noise itself") {
        auto value = [&](int, PathRef w, std::span<double> buf) {
            std::copy(w.v.begin(), w.v.end(), buf.begin());
        };
        auto checks = empirical_coefficients(ens, 0, value, nodes, 9);
        for (const auto& c : checks) {
            CHECK(std::abs(c.beta_mean - 1.0) <= 3.0 * c.beta_se + 1e-12);
            CHECK(std::abs(c.alpha_mean) <= 3.0 * c.alpha_se);
        }
    }

    SUBCASE("product process (T-t) w_t") {
        auto value = [&](int, PathRef w, std::span<double> buf) {
            for (int i = 0; i < static_cast<int>(buf.size()); ++i)
                buf[static_cast<std::size_t>(i)] = (1.0 - w.grid->node(i)) * w[i];
        };
        auto pd = [&](int, PathRef w, std::span<double> buf) {
            for (int i = 0; i < static_cast<int>(buf.size()); ++i)
                buf[static_cast<std::size_t>(i)] = -w[i];
        };
        auto pf = [&](int, PathRef w, std::span<double> buf) {
            for (int i = 0; i < static_cast<int>(buf.size()); ++i)
                buf[static_cast<std::size_t>(i)] = 1.0 - w.grid->node(i);
        };
        auto checks = empirical_coefficients(ens, 0, value, nodes, 9, pd, pf);
        for (const auto& c : checks) {
            CHECK(std::abs(c.z_alpha_pooled) <= 3.5);
            CHECK(std::abs(c.z_beta_pooled) <= 3.5);
        }
    }

    SUBCASE("deterministic ramp") {
        auto value = [&](int, PathRef w, std::span<double> buf) {
            for (int i = 0; i < static_cast<int>(buf.size()); ++i)
                buf[static_cast<std::size_t>(i)] = w.grid->node(i);
        };
        auto checks = empirical_coefficients(ens, 0, value, nodes, 9);
        for (const auto& c : checks) {
            CHECK(std::abs(c.beta_mean) <= 3.0 * c.beta_se + 1e-9);
            CHECK(c.alpha_mean == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("small-eps ladder on exactly linear instances") {
    TimeGrid g(1.0, 64);
    BrownianEnsemble ens(g, 2000, 808);
    BasisSpec spec;

    ZeroFunctional zero;
    const double ladder[] = {0.1, 0.05, 0.025};
    auto rep = small_eps_check(zero, ladder, ens, spec);
    for (double e : rep.err) CHECK(e <= 1e-14);

    // policy-linear: the first order is exact, so the gap vanishes identically
    ClimateFunctional lin(std::make_shared<CurrentNoiseW>(),
                          std::make_shared<ExpWKernel>(1.0));
    auto rep2 = small_eps_check(lin, ladder, ens, spec);
    for (double e : rep2.err) CHECK(e <= 1e-12);
}
