#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ensemble.hpp"
#include "functionals.hpp"

using namespace hyst;

namespace {

SamplePath linear_path(const TimeGrid& g) {
    std::vector<double> v(static_cast<std::size_t>(g.nodes()));
    for (int i = 0; i < g.nodes(); ++i) v[static_cast<std::size_t>(i)] = g.node(i);
    return SamplePath(g, std::move(v));
}

SamplePath constant_path(const TimeGrid& g, double c) {
    return SamplePath(g, std::vector<double>(static_cast<std::size_t>(g.nodes()), c));
}

SamplePath random_path(const TimeGrid& g, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(g.dt()));
    std::vector<double> v(static_cast<std::size_t>(g.nodes()), 0.0);
    for (int i = 1; i < g.nodes(); ++i)
        v[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i) - 1] + gauss(eng);
    return SamplePath(g, std::move(v));
}

// scrambles nodes beyond i; adapted functionals must not notice
void scramble_tail(SamplePath& p, int i, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int k = i + 1; k < p.grid.nodes(); ++k) p[k] = u(eng);
}

} // namespace

TEST_CASE("state dependent") {
    TimeGrid g(1.0, 8);
    SamplePath c = constant_path(g, 0.3);
    PathRef r = c.ref();

    StateDependentFunctional ident(smooth_fn("identity"));
    CHECK(ident.atom(4, r, r) == doctest::Approx(1.0));
    CHECK(ident.density(2, 4, r, r) == 0.0);

    StateDependentFunctional sq(smooth_fn("half_square"));
    CHECK(sq.atom(4, r, r) == doctest::Approx(0.3));

    StateDependentFunctional sine(smooth_fn("sin"));
    SamplePath zero = constant_path(g, 0.0);
    CHECK(sine.atom(4, zero.ref(), zero.ref()) == doctest::Approx(1.0));
}

TEST_CASE("cumulative") {
    TimeGrid g(1.0, 2048);
    SamplePath c = linear_path(g);
    PathRef r = c.ref();
    const int n = g.steps();

    CumulativeFunctional h;
    CHECK(h.atom(n, r, r) == doctest::Approx(0.5).epsilon(2.0 * g.dt()));
    SamplePath zero = constant_path(g, 0.0);
    CHECK(h.eval(n, zero.ref(), zero.ref()) == 0.0);
    CHECK(h.atom(n, zero.ref(), zero.ref()) == 0.0);

    TimeGrid g2(1.0, 512);
    SamplePath one = constant_path(g2, 1.0);
    const int half = 256;
    CHECK(h.atom(half, one.ref(), one.ref()) == doctest::Approx(0.5));
    CHECK(h.density(100, half, one.ref(), one.ref()) == doctest::Approx(1.0));
}

TEST_CASE("kernel average") {
    TimeGrid g(1.0, 1024);
    SamplePath c = random_path(g, 3);
    PathRef r = c.ref();
    const int n = g.steps();

    KernelAverageFunctional pure(bivariate_fn("y"),
                                 std::make_shared<ConstDetKernel>(1.0));
    CHECK(pure.atom(n / 2, r, r) == doctest::Approx(0.0));
    CHECK(pure.density(10, n / 2, r, r) == doctest::Approx(1.0));

    // h2 = x*y with unit kernel reproduces the cumulative functional
    KernelAverageFunctional prod(bivariate_fn("xy"),
                                 std::make_shared<ConstDetKernel>(1.0));
    CumulativeFunctional cum;
    for (int i : {0, 200, 700, n})
        CHECK(prod.eval(i, r, r) == doctest::Approx(cum.eval(i, r, r)).epsilon(1e-12));

    KernelAverageFunctional expk(bivariate_fn("y"),
                                 std::make_shared<ExpDetKernel>(1.0));
    SamplePath one = constant_path(g, 1.0);
    CHECK(expk.eval(n, one.ref(), one.ref()) ==
          doctest::Approx(1.0 - std::exp(-1.0)).epsilon(2.0 * g.dt()));
}

TEST_CASE("climate") {
    TimeGrid g(1.0, 1024);
    BrownianEnsemble ens(g, 1, 17);
    PathRef w = ens.path(0);
    const int n = g.steps();

    ClimateFunctional zero(std::make_shared<ZeroW>(), std::make_shared<ConstWKernel>(0.0));
    CHECK(zero.eval(n / 2, w, w) == 0.0);

    ClimateFunctional current(std::make_shared<CurrentNoiseW>(),
                              std::make_shared<ConstWKernel>(0.0));
    SamplePath one = constant_path(g, 1.0);
    CHECK(current.eval(n / 2, one.ref(), w) == doctest::Approx(w[n / 2]));

    ClimateFunctional expk(std::make_shared<ZeroW>(), std::make_shared<ExpWKernel>(1.0));
    CHECK(expk.eval(n, one.ref(), w) ==
          doctest::Approx(1.0 - std::exp(-1.0)).epsilon(2.0 * g.dt()));
}

TEST_CASE("tipping") {
    TimeGrid g(1.0, 512);
    const int n = g.steps();
    TippingFunctional h(smooth_fn("relu"));

    TippingFunctional zero_w(smooth_fn("zero"));
    SamplePath c = constant_path(g, 1.0);
    SamplePath rising = linear_path(g);
    CHECK(zero_w.eval(n, c.ref(), rising.ref()) == 0.0);

    // strictly increasing noise: record at the present, weight vanishes
    CHECK(h.eval(n, c.ref(), rising.ref()) == doctest::Approx(0.0));
    for (int s : {10, 100, 400})
        CHECK(h.density(s, n, c.ref(), rising.ref()) == 0.0);

    // maximum at node 0: h = int_0^1 s ds
    std::vector<double> v(static_cast<std::size_t>(g.nodes()));
    v[0] = 1.0;
    for (int i = 1; i <= n; ++i) v[static_cast<std::size_t>(i)] = 1.0 - g.node(i);
    SamplePath falling(g, std::move(v));
    CHECK(h.eval(n, c.ref(), falling.ref()) == doctest::Approx(0.5).epsilon(2.0 * g.dt()));

    // density vanishes at or before the record
    BrownianEnsemble ens(g, 8, 23);
    for (int j = 0; j < ens.paths(); ++j) {
        PathRef w = ens.path(j);
        for (int i : {64, 256, 511}) {
            const int arg = running_argmax(w, i);
            for (int s = 0; s <= arg; ++s) CHECK(h.density(s, i, w, w) == 0.0);
        }
    }
}

TEST_CASE("midpoint") {
    TimeGrid g(1.0, 512);
    MidpointFunctional h;
    SamplePath c = linear_path(g);
    CHECK(h.eval(512, c.ref(), c.ref()) == doctest::Approx(0.5));
    SamplePath k = constant_path(g, 0.7);
    CHECK(h.eval(300, k.ref(), k.ref()) == doctest::Approx(0.7));
    CHECK(h.eval(0, c.ref(), c.ref()) == doctest::Approx(0.0));
    CHECK_FALSE(h.class_a());
    CHECK_THROWS_AS(h.atom(10, c.ref(), c.ref()), ValidationError);
}

TEST_CASE("frechet consistency") {
    TimeGrid g(1.0, 256);
    SamplePath c = random_path(g, 5);
    SamplePath z = random_path(g, 6);
    const double ladder[] = {1e-1, 5e-2, 2.5e-2, 1.25e-2};

    CumulativeFunctional cum;
    auto rep = frechet_check(cum, c, z, ladder, g.steps(), c.ref());
    CHECK(rep.observed_order >= 1.9);

    ClimateFunctional lin(std::make_shared<CurrentNoiseW>(),
                          std::make_shared<ExpWKernel>(1.0));
    auto rep2 = frechet_check(lin, c, z, ladder, g.steps(), c.ref());
    for (double r : rep2.residual) CHECK(r <= 1e-12);
    CHECK(rep2.linear);

    StateDependentFunctional sine(smooth_fn("sin"));
    auto rep3 = frechet_check(sine, c, z, ladder, g.steps(), c.ref());
    CHECK(rep3.observed_order >= 1.9);

    KernelAverageFunctional ka(bivariate_fn("xy"), std::make_shared<ExpDetKernel>(1.0));
    auto rep4 = frechet_check(ka, c, z, ladder, g.steps(), c.ref());
    CHECK(rep4.observed_order >= 1.9);
}

TEST_CASE("adaptedness under tail scrambling") {
    TimeGrid g(1.0, 128);
    SamplePath base = random_path(g, 11);
    const int i = 64;
    for (const auto& entry : functional_catalog()) {
        auto h = make_functional(entry.name, {});
        SamplePath c = base, w = base;
        const double v0 = h->eval(i, c.ref(), w.ref());
        scramble_tail(c, i, 100);
        scramble_tail(w, i, 101);
        CHECK(h->eval(i, c.ref(), w.ref()) == v0);
    }
}

TEST_CASE("numeric frechet fallback matches analytic") {
    TimeGrid g(1.0, 256);
    SamplePath c = random_path(g, 7);
    PathRef r = c.ref();
    CumulativeFunctional cum;
    // the base-class differencing, bypassing the overrides
    const double atom_numeric = cum.HysteresisFunctional::atom(200, r, r);
    CHECK(atom_numeric == doctest::Approx(cum.atom(200, r, r)).epsilon(1e-7));
    const double dens_numeric = cum.HysteresisFunctional::density(50, 200, r, r);
    CHECK(dens_numeric == doctest::Approx(cum.density(50, 200, r, r)).epsilon(1e-6));
}

TEST_CASE("exponential smoother") {
    TimeGrid g(1.0, 2048);
    auto ident = std::make_shared<StateDependentFunctional>(smooth_fn("identity"));
    auto s = smooth_approximation(ident, 8.0);
    SamplePath c = random_path(g, 9);
    // boundary condition: unchanged at the evaluation node
    CHECK(s->eval(g.steps(), c.ref(), c.ref()) ==
          doctest::Approx(ident->eval(g.steps(), c.ref(), c.ref())));
    // constants are fixed points
    SamplePath k = constant_path(g, 0.8);
    auto cume = std::make_shared<CumulativeFunctional>();
    auto sk = smooth_approximation(cume, 16.0);
    CHECK(sk->eval(g.steps(), k.ref(), k.ref()) ==
          doctest::Approx(cume->eval(g.steps(), k.ref(), k.ref())).epsilon(1e-12));

    // linear functional of a smoothed linear path converges at rate >= 0.9 in 1/n
    auto lin = std::make_shared<ClimateFunctional>(std::make_shared<ZeroW>(),
                                                   std::make_shared<ConstWKernel>(1.0));
    SamplePath ramp = linear_path(g);
    const double exact = lin->eval(g.steps(), ramp.ref(), ramp.ref());
    std::vector<double> errs;
    for (double nrate : {4.0, 8.0, 16.0, 32.0}) {
        auto sm = smooth_approximation(lin, nrate);
        errs.push_back(std::abs(sm->eval(g.steps(), ramp.ref(), ramp.ref()) - exact));
    }
    for (std::size_t k2 = 1; k2 < errs.size(); ++k2) {
        const double rate = std::log2(errs[k2 - 1] / errs[k2]);
        CHECK(rate >= 0.9);
    }
}

TEST_CASE("catalog factory") {
    CHECK(make_functional("cumulative", {})->name() == "cumulative");
    CHECK(make_functional("state_dependent", {{"f", "sin"}})->linear_in_policy() == false);
    CHECK(make_functional("climate", {{"g", "wt"}, {"kernel", "exp"}})->linear_in_policy());
    CHECK_THROWS_AS(make_functional("nope", {}), ConfigError);
    CHECK(functional_catalog().size() >= 7);
}
