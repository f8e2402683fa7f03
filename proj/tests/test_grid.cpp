#include <catch_amalgamated.hpp>

#include "flockkit/grid.hpp"

using namespace flockkit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("make_grid puts a centre exactly at xi = 0") {
    const auto g = make_grid(75, 101, -0.5, 0.5, -15.0, 15.0);
    CHECK(g.J == 50);
    CHECK(g.xi(g.J) == 0.0);
    CHECK_THAT(g.dxi, WithinRel(30.0 / 101.0, 1e-15));
    CHECK_THAT(g.dx, WithinRel(1.0 / 75.0, 1e-15));
    // Symmetric about 0, bit for bit.
    for (std::size_t j = 0; j < g.nxi; ++j) CHECK(g.xi(j) == -g.xi(g.nxi - 1 - j));
    CHECK_THAT(g.xi_face(0), WithinAbs(-15.0, 1e-12));
    CHECK_THAT(g.xi_face(g.nxi), WithinAbs(15.0, 1e-12));
    CHECK(g.xi_face(g.J) == -0.5 * g.dxi);
}

TEST_CASE("make_grid rejects boxes without a centre at 0") {
    CHECK_THROWS_AS(make_grid(4, 100, 0.0, 1.0, -1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(make_grid(4, 2, 0.0, 1.0, -1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(make_grid(0, 11, 0.0, 1.0, -1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(make_grid(4, 11, 1.0, 0.0, -1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(make_grid(4, 11, 0.0, 1.0, 0.5, 1.0), ConfigError);
    // Asymmetric but compatible: dxi = 1, centres at -2..4.
    const auto g = make_grid(2, 7, 0.0, 1.0, -2.5, 4.5);
    CHECK(g.J == 2);
    CHECK(g.xi(0) == -2.0);
}

TEST_CASE("velocity grid has no centring requirement") {
    const auto g = make_velocity_grid(3, 4, 0.0, 3.0, 0.0, 2.0);
    CHECK(!g.zero_centred);
    CHECK(g.xi(0) == 0.25);
    CHECK(g.x(2) == 2.5);
}

TEST_CASE("row moments and mass by hand") {
    const auto g = make_grid(2, 3, 0.0, 1.0, -1.5, 1.5);
    Field f(g);
    // Row 0: (1, 2, 3) at xi = (-1, 0, 1).
    f(0, 0) = 1.0;
    f(0, 1) = 2.0;
    f(0, 2) = 3.0;
    f(1, 1) = 4.0;
    const auto m = moments(f);
    CHECK(m.rho[0] == 6.0);
    CHECK(m.M[0] == 2.0);
    CHECK(m.P[0] == 4.0);
    CHECK(m.rho[1] == 4.0);
    CHECK(m.M[1] == 0.0);
    CHECK_THAT(f.mass(), WithinRel(0.5 * 10.0, 1e-15));
    CHECK(f.max() == 4.0);
    CHECK(f.min() == 0.0);
}

TEST_CASE("moments reject non-finite values") {
    const auto g = make_grid(1, 3, 0.0, 1.0, -1.5, 1.5);
    Field f(g);
    f(0, 1) = std::nan("");
    CHECK_THROWS_AS(moments(f), NumericalError);
}
