#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "hyst.h"

TEST_CASE("grid handle") {
    hyst_grid* g = nullptr;
    REQUIRE(hyst_grid_create(1.0, 64, &g) == HYST_OK);
    CHECK(hyst_grid_steps(g) == 64);
    CHECK(hyst_grid_dt(g) == doctest::Approx(1.0 / 64));
    hyst_grid_free(g);

    hyst_grid* bad = nullptr;
    CHECK(hyst_grid_create(1.0, 1, &bad) == HYST_ERR_CONFIG);
    CHECK(std::strlen(hyst_last_error()) > 0);
    CHECK(hyst_grid_create(-1.0, 8, &bad) == HYST_ERR_CONFIG);
}

TEST_CASE("ensemble handle and csv round trip") {
    hyst_grid* g = nullptr;
    REQUIRE(hyst_grid_create(1.0, 32, &g) == HYST_OK);
    hyst_ensemble* ens = nullptr;
    REQUIRE(hyst_ensemble_sample(g, 50, 7, &ens) == HYST_OK);
    CHECK(hyst_ensemble_paths(ens) == 50);
    CHECK(hyst_ensemble_nodes(ens) == 33);

    std::vector<double> row(33);
    REQUIRE(hyst_ensemble_values(ens, 5, row.data(), 33) == HYST_OK);
    CHECK(row[0] == 0.0);
    CHECK(hyst_ensemble_values(ens, 99, row.data(), 33) == HYST_ERR_CONFIG);
    CHECK(hyst_ensemble_values(ens, 5, row.data(), 10) == HYST_ERR_CONFIG);

    const char* file = "capi_roundtrip.csv";
    REQUIRE(hyst_ensemble_write_csv(ens, file) == HYST_OK);
    hyst_ensemble* back = nullptr;
    REQUIRE(hyst_ensemble_read_csv(file, &back) == HYST_OK);
    std::vector<double> row2(33);
    REQUIRE(hyst_ensemble_values(back, 5, row2.data(), 33) == HYST_OK);
    for (int i = 0; i < 33; ++i) CHECK(row[static_cast<std::size_t>(i)] == row2[static_cast<std::size_t>(i)]);
    hyst_ensemble_free(back);
    hyst_ensemble_free(ens);
    hyst_grid_free(g);
    std::remove(file);
}

TEST_CASE("functional handle") {
    hyst_grid* g = nullptr;
    REQUIRE(hyst_grid_create(1.0, 64, &g) == HYST_OK);
    hyst_ensemble* ens = nullptr;
    REQUIRE(hyst_ensemble_sample(g, 500, 3, &ens) == HYST_OK);

    hyst_functional* h = nullptr;
    REQUIRE(hyst_functional_create("cumulative", nullptr, nullptr, 0, &h) == HYST_OK);
    double value = 0, atom = 0, dens = 0;
    REQUIRE(hyst_functional_eval(h, ens, 3, 32, &value) == HYST_OK);
    REQUIRE(hyst_functional_atom(h, ens, 3, 32, &atom) == HYST_OK);
    REQUIRE(hyst_functional_density(h, ens, 3, 10, 32, &dens) == HYST_OK);

    std::vector<double> w(65);
    REQUIRE(hyst_ensemble_values(ens, 3, w.data(), 65) == HYST_OK);
    double integral = 0.0;
    for (int i = 0; i < 32; ++i) integral += w[static_cast<std::size_t>(i)];
    integral /= 64.0;
    CHECK(value == doctest::Approx(w[32] * integral));
    CHECK(atom == doctest::Approx(integral));
    CHECK(dens == doctest::Approx(w[32]));
    hyst_functional_free(h);

    hyst_functional* bad = nullptr;
    CHECK(hyst_functional_create("nope", nullptr, nullptr, 0, &bad) == HYST_ERR_CONFIG);

    const char* keys[] = {"f"};
    const char* vals[] = {"sin"};
    hyst_functional* sine = nullptr;
    REQUIRE(hyst_functional_create("state_dependent", keys, vals, 1, &sine) == HYST_OK);

    // elasticity of the state-dependent functional: C = -cos(w_t)
    std::vector<double> C(65), I(65), F(65);
    REQUIRE(hyst_elasticity_path(sine, ens, 450, C.data(), I.data(), F.data()) == HYST_OK);
    CHECK(C[32] == doctest::Approx(-std::cos(w[32])).epsilon(0.5)); // path 450, not 3
    REQUIRE(hyst_ensemble_values(ens, 450, w.data(), 65) == HYST_OK);
    CHECK(C[32] == doctest::Approx(-std::cos(w[32])).epsilon(1e-9));
    CHECK(F[32] == doctest::Approx(0.0).epsilon(1e-12));
    hyst_functional_free(sine);

    hyst_ensemble_free(ens);
    hyst_grid_free(g);
}

TEST_CASE("command runner and version") {
    CHECK(std::string(hyst_version()).find("hyst") != std::string::npos);
    CHECK(hyst_run_command("not-a-command", nullptr, "out_capi_test", 1, 0) ==
          HYST_ERR_CONFIG);
    CHECK(hyst_run_verify("tree", "") == HYST_OK);
    CHECK(hyst_run_verify("bogus", "") == HYST_ERR_CONFIG);
}
