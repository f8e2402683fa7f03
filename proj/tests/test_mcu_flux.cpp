#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "flockkit/mcu_flux.hpp"

using namespace flockkit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

PhaseGrid toy_grid(std::size_t n, double L) { return make_grid(1, n, 0.0, 1.0, -L, L, BoundaryKind::outflow); }

long double momentum(const std::vector<double>& g, const PhaseGrid& grid) {
    long double m = 0.0L;
    for (std::size_t j = 0; j < g.size(); ++j) m += static_cast<long double>(grid.xi(j)) * g[j];
    return m * grid.dxi;
}

} // namespace

TEST_CASE("outer faces carry no flux") {
    const auto grid = toy_grid(11, 2.75);
    const std::vector<double> g(11, 1.0);
    for (double c : {-1.0, 1.0}) {
        for (const auto& F : {upwind_drift_flux(g, grid, c), mcu_drift_flux(g, grid, c, 1.0)}) {
            CHECK(F.size() == 12);
            CHECK(F.front() == 0.0);
            CHECK(F.back() == 0.0);
        }
    }
}

TEST_CASE("upwind face flux by hand") {
    // dxi = 1, centres -2..2.
    const auto grid = toy_grid(5, 2.5);
    const std::vector<double> g{1.0, 2.0, 3.0, 4.0, 5.0};
    const auto F = upwind_drift_flux(g, grid, 1.0);
    // Right half (face +1/2 between cells 2 and 3): velocity +0.5 takes g from the left.
    CHECK(F[3] == 0.5 * 3.0);
    CHECK(F[4] == 1.5 * 4.0);
    // Left half (face -1/2): velocity -0.5 takes g from the right.
    CHECK(F[2] == -0.5 * 3.0);
    CHECK(F[1] == -1.5 * 2.0);
    const auto M = mcu_drift_flux(g, grid, 1.0, 0.0);
    CHECK(M[3] == 0.0 * 3.0);
    CHECK(M[4] == 1.0 * 4.0);
    CHECK(M[2] == 0.0 * 3.0);
    CHECK(M[1] == -1.0 * 2.0);
    const auto M1 = mcu_drift_flux(g, grid, 2.0, 1.0);
    CHECK(M1[4] == 2.0 * 1.0 * 4.0 - 0.5 * 2.0 * 1.0 * (5.0 - 4.0));
    CHECK_THROWS_AS(mcu_drift_flux(g, grid, 1.0, 1.5), ConfigError);
}

TEST_CASE("MCU step obeys M' = (1 + c dt) M on a field with empty end cells") {
    const auto grid = toy_grid(41, 4.1);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> g(grid.nxi, 0.0);
        for (std::size_t j = 1; j + 1 < grid.nxi; ++j) g[j] = U(rng);
        const double c = -2.0 + 4.0 * U(rng);
        const double theta = static_cast<double>(trial % 3) - 1.0;
        const double dt = 0.9 * grid.dxi / (std::abs(c) * grid.xi_half_width());
        const auto next = step_toy(g, grid, {c, theta, FluxFamily::mcu}, dt);
        const long double lhs = momentum(next, grid);
        const long double rhs = (1.0L + static_cast<long double>(c) * dt) * momentum(g, grid);
        CHECK(std::abs(static_cast<double>(lhs - rhs)) <= 1e-15 * momentum_scale(g, grid));
    }
}

TEST_CASE("upwind step does not obey the momentum law") {
    const auto grid = toy_grid(41, 4.1);
    std::vector<double> g(grid.nxi, 0.0);
    for (std::size_t j = 5; j < 20; ++j) g[j] = 1.0 + 0.1 * static_cast<double>(j);
    const double dt = 0.01;
    const auto next = step_toy(g, grid, {1.0, 0.0, FluxFamily::upwind}, dt);
    const long double lhs = momentum(next, grid);
    const long double rhs = (1.0L + dt) * momentum(g, grid);
    CHECK(std::abs(static_cast<double>(lhs - rhs)) > 1e-6);
}

TEST_CASE("toy step conserves mass exactly and stays nonnegative for c theta >= 0") {
    const auto grid = toy_grid(31, 3.1);
    std::vector<double> g(grid.nxi);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = std::exp(-grid.xi(j) * grid.xi(j));
    double m0 = 0.0;
    for (double v : g) m0 += v;
    for (double c : {-1.5, 1.5}) {
        const double dt = grid.dxi / (std::abs(c) * grid.xi_half_width());
        auto h = g;
        for (int k = 0; k < 200; ++k) h = step_toy(h, grid, {c, c > 0 ? 1.0 : -1.0, FluxFamily::mcu}, dt);
        double m1 = 0.0;
        for (double v : h) {
            CHECK(v >= 0.0);
            m1 += v;
        }
        CHECK_THAT(m1, WithinRel(m0, 1e-13));
    }
}

TEST_CASE("toy step refuses an unstable dt") {
    const auto grid = toy_grid(11, 1.1);
    const std::vector<double> g(11, 1.0);
    const double lim = grid.dxi / grid.xi_half_width();
    CHECK_NOTHROW(step_toy(g, grid, {1.0, 1.0, FluxFamily::mcu}, lim));
    CHECK_THROWS_AS(step_toy(g, grid, {1.0, 1.0, FluxFamily::mcu}, 1.01 * lim), NumericalError);
    CHECK_THAT(toy_courant(grid, 2.0, lim), WithinRel(2.0, 1e-15));
}
