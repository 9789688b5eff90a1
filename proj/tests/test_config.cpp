// test_config.cpp — JSON run configuration

#include <doctest.h>

#include "bosedot/config.hpp"
#include "bosedot/errors.hpp"

using namespace bosedot;
using nlohmann::json;

TEST_CASE("defaults and round trip") {
    auto c = RunConfig::from_json(json::object());
    CHECK(c.dot.d == 2);
    CHECK(c.lambdas.size() == 1u);
    auto again = RunConfig::from_json(c.to_json());
    CHECK(again.to_json() == c.to_json());
}

TEST_CASE("parsing") {
    json j = {{"dot", {{"d", 3}}},
              {"reservoir", {{"dispersion", "nonrelativistic"}, {"beta", 2.0}, {"rho_bar", 0.5},
                             {"form_factor", {{"preset", "power_law"}, {"p", 0.5}}}}},
              {"grid", {{"n_modes", 5}, {"omega_max", 4.0}, {"spacing", "log"}, {"omega_min", 0.05}}},
              {"trunc", {{"n_max", 2}}},
              {"physics", {{"lambda", 0.03}, {"condensate", true}, {"xi", {{{"r_minus_crit", 0.1}, {"theta", 0.5}}}}}},
              {"solver", {{"k_eigs", 7}, {"T", {10, 20}}, {"conjugate", "custom_antisymmetric"}}},
              {"observables", {{"A", "population:2"}}},
              {"outputs", {{"formats", "csv"}}}};
    auto c = RunConfig::from_json(j);
    CHECK(c.dot.d == 3);
    CHECK(c.dispersion == Dispersion::nonrelativistic);
    CHECK(c.lambdas == std::vector<double>{0.03});
    CHECK(c.trunc.n_modes == 5);
    CHECK(c.solver.k == 7);
    CHECK(c.T.size() == 2u);
    CHECK(c.conjugate == ConjugateScheme::custom_antisymmetric);
    CHECK(c.formats == std::vector<std::string>{"csv"});
    auto pts = c.xi_points();
    REQUIRE(pts.size() == 1u);
    CHECK(pts[0].r == doctest::Approx(c.rho_crit() + 0.1).epsilon(1e-15));
    auto grid = c.build_grid();
    CHECK(grid.size() == 5);
    CHECK(grid.spacing == Spacing::log);
    auto pop = named_dot_matrix(c.dot, c.observable_A);
    CHECK(pop(2, 2) == cplx(1.0, 0.0));
    CHECK(pop.norm() == 1.0);
}

TEST_CASE("validation errors") {
    CHECK_THROWS_AS(RunConfig::from_json({{"bogus", 1}}), ValidationError);
    CHECK_THROWS_AS(RunConfig::from_json({{"dot", {{"d", "two"}}}}), ValidationError);
    CHECK_THROWS_AS(RunConfig::from_json({{"dot", {{"d", 0}}}}), ValidationError);
    CHECK_THROWS_AS(RunConfig::from_json({{"reservoir", {{"beta", -1.0}}}}), ValidationError);
    CHECK_THROWS_AS(RunConfig::from_json({{"grid", {{"spacing", "cubic"}}}}), ValidationError);
    CHECK_THROWS_AS(RunConfig::from_json({{"outputs", {{"formats", {"xml"}}}}}), ValidationError);
    CHECK_THROWS_AS(RunConfig::from_json({{"observables", {{"A", "population:5"}}}}), ValidationError);
    CHECK_THROWS_AS(RunConfig::from_json({{"physics", {{"lambda", json::array()}}}}), ValidationError);
    CHECK_THROWS_AS(RunConfig::from_file("/nonexistent/config.json"), ValidationError);
}

TEST_CASE("measures from config") {
    json j = {{"reservoir", {{"rho_bar", 0.3}}},
              {"physics", {{"condensate", true}, {"mu", {{"kind", "kac"}, {"n_r", 3}, {"n_theta", 2}}}}}};
    auto c = RunConfig::from_json(j);
    CHECK(c.xi_points().size() == 6u);
    CHECK_NOTHROW(c.xi_measure().validate(c.rho_crit()));
    j["physics"]["mu"] = {{"kind", "uniform_theta"}, {"n_theta", 5}, {"r_minus_crit", 0.2}};
    CHECK(RunConfig::from_json(j).xi_points().size() == 5u);
}
