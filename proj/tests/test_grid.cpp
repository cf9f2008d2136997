#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "ensemble.hpp"
#include "grid.hpp"
#include "parallel.hpp"

using namespace hyst;

TEST_CASE("uniform grid") {
    TimeGrid g = make_grid(1.0, 4);
    CHECK(g.nodes() == 5);
    for (int i = 0; i <= 4; ++i) CHECK(g.node(i) == doctest::Approx(0.25 * i));
    CHECK(make_grid(2.0, 2).dt() == doctest::Approx(1.0));
    CHECK_THROWS_AS(make_grid(1.0, 1), ConfigError);
    CHECK_THROWS_AS(make_grid(0.0, 4), ConfigError);
    CHECK_THROWS_AS(make_grid(-1.0, 4), ConfigError);
}

TEST_CASE("bump path") {
    SamplePath p(make_grid(1.0, 2), {0.0, 0.5, 1.0});
    SamplePath b = bump_path(p, 2, 0.1);
    CHECK(b[0] == 0.0);
    CHECK(b[1] == 0.5);
    CHECK(b[2] == doctest::Approx(1.1));
    CHECK(b.kind == PathKind::CadlagBumped);

    SamplePath same = bump_path(p, 1, 0.0);
    CHECK(same[1] == p[1]);
    CHECK_THROWS_AS(bump_path(p, 3, 0.1), ConfigError);

    // bump then unbump restores exactly
    SamplePath back = bump_path(bump_path(p, 1, 0.37), 1, -0.37);
    for (int i = 0; i <= 2; ++i) CHECK(back[i] == p[i]);
}

TEST_CASE("flat extension") {
    SamplePath p(make_grid(1.0, 3), {0.0, 1.0, 2.0, 3.0});
    SamplePath e = flat_extend(p, 1, 2);
    CHECK(e[0] == 0.0);
    CHECK(e[1] == 1.0);
    CHECK(e[2] == 1.0);
    CHECK(e[3] == 1.0);
    SamplePath u = flat_extend(p, 1, 0);
    CHECK(u[1] == 1.0);
    CHECK_THROWS_AS(flat_extend(p, 3, 1), ConfigError);
}

TEST_CASE("direction perturbation") {
    TimeGrid g = make_grid(1.0, 2);
    SamplePath p(g, {0.0, 0.0, 0.0});
    SamplePath ones(g, {1.0, 1.0, 1.0});
    SamplePath s = perturb_direction(p, ones, 1.0);
    CHECK(s[0] == doctest::Approx(0.0));
    CHECK(s[1] == doctest::Approx(0.5));
    CHECK(s[2] == doctest::Approx(1.0));

    SamplePath zero_dir(g, {0.0, 0.0, 0.0});
    SamplePath id = perturb_direction(p, zero_dir, 3.0);
    for (int i = 0; i <= 2; ++i) CHECK(id[i] == p[i]);
    SamplePath id2 = perturb_direction(p, ones, 0.0);
    for (int i = 0; i <= 2; ++i) CHECK(id2[i] == p[i]);

    // additivity in eps (quadrature is linear)
    SamplePath a = perturb_direction(perturb_direction(p, ones, 0.3), ones, 0.3);
    SamplePath b = perturb_direction(p, ones, 0.6);
    for (int i = 0; i <= 2; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));
}

TEST_CASE("brownian moments") {
    TimeGrid g = make_grid(1.0, 256);
    BrownianEnsemble ens(g, 100000, 7);
    double mean = 0.0, var = 0.0;
    for (int j = 0; j < ens.paths(); ++j) {
        const double wt = ens.path(j)[256];
        mean += wt;
        var += wt * wt;
    }
    mean /= ens.paths();
    var = var / ens.paths() - mean * mean;
    CHECK(std::abs(mean) < 3.0 * std::sqrt(1.0 / ens.paths()));
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("determinism across thread counts") {
    TimeGrid g = make_grid(1.0, 64);
    set_thread_count(1);
    BrownianEnsemble a(g, 5000, 42);
    set_thread_count(4);
    BrownianEnsemble b(g, 5000, 42);
    set_thread_count(0);
    for (int j : {0, 17, 4999})
        for (int i = 0; i <= 64; ++i) CHECK(a.path(j)[i] == b.path(j)[i]);
}

TEST_CASE("quadratic variation concentration") {
    const int n = 512;
    TimeGrid g = make_grid(1.0, n);
    BrownianEnsemble ens(g, 2000, 99);
    const double tol = 5.0 * std::sqrt(2.0 / n);
    for (int j = 0; j < ens.paths(); ++j) {
        auto w = ens.path(j);
        double qv = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = w[i + 1] - w[i];
            qv += d * d;
        }
        CHECK(std::abs(qv - 1.0) < tol);
    }
}

TEST_CASE("csv round trip is bit exact") {
    TimeGrid g = make_grid(1.0, 32);
    BrownianEnsemble ens(g, 20, 5);
    const std::string file = "test_ensemble_roundtrip.csv";
    ens.write_csv(file);
    BrownianEnsemble back = BrownianEnsemble::read_csv(file);
    REQUIRE(back.paths() == ens.paths());
    REQUIRE(back.grid().steps() == ens.grid().steps());
    for (int j = 0; j < 20; ++j)
        for (int i = 0; i <= 32; ++i) CHECK(back.path(j)[i] == ens.path(j)[i]);
    std::remove(file.c_str());
}
