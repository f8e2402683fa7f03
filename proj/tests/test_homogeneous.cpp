#include <catch_amalgamated.hpp>

#include <cmath>

#include "flockkit/homogeneous.hpp"

using namespace flockkit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("two cells with constant weight relax exponentially") {
    // dx = 1/2, rho = 1, phi = 1: d(u1 - u2)/dt = -(u1 - u2).
    const auto grid = make_grid(2, 3, 0.0, 1.0, -1.5, 1.5);
    const std::vector<double> u0{1.0, -0.5};
    const auto sol = propagate_u_homog(u0, {1.0, 1.0}, InfluenceFunction::indicator(1.0), Model::cs, grid, 2.0, 1e-2);
    CHECK(sol.A == std::vector<double>{1.0, 1.0});
    for (double t : {0.5, 1.0, 2.0}) {
        const double diff = 1.5 * std::exp(-t);
        CHECK_THAT(sol.u_at(0, t) - sol.u_at(1, t), WithinAbs(diff, 1e-9));
        CHECK_THAT(sol.u_at(0, t) + sol.u_at(1, t), WithinAbs(0.5, 1e-14));
    }
    CHECK_THROWS_AS(sol.u_at(0, 2.5), ConfigError);
}

TEST_CASE("MT homogeneous flow: weights normalized, unequal densities") {
    // B_1 = rho_2 (u2 - u1) / (rho_1 + rho_2) per cell; the rho-weighted mean is fixed.
    const auto grid = make_grid(2, 3, 0.0, 1.0, -1.5, 1.5);
    const auto sol = propagate_u_homog({0.0, 3.0}, {1.0, 2.0}, InfluenceFunction::indicator(1.0), Model::mt, grid, 1.0, 1e-2);
    const double t = 1.0;
    // u1 - u2 decays at rate (rho_1 + rho_2) / (rho_1 + rho_2) = 1.
    CHECK_THAT(sol.u_at(0, t) - sol.u_at(1, t), WithinAbs(-3.0 * std::exp(-t), 1e-9));
    CHECK_THAT(sol.u_at(0, t) + 2.0 * sol.u_at(1, t), WithinAbs(6.0, 1e-13));
}

TEST_CASE("closed-form f: initial value and conserved mass") {
    const auto f0 = [](double, double v) { return std::exp(-(v - 1.0) * (v - 1.0)); };
    CHECK(exact_f_homog(f0, 2.0, 1.0, 1.0, 0.0, 0.5, 0.7) == f0(0.5, 0.7));
    const double A = 1.7;
    const double t = 0.8;
    // Integrate over v; the mass of f0 is sqrt(pi).
    double m = 0.0;
    const double dv = 1e-3;
    for (double v = -10.0; v < 10.0; v += dv) m += exact_f_homog(f0, A, 1.0, 0.4, t, 0.0, v) * dv;
    CHECK_THAT(m, WithinRel(std::sqrt(std::acos(-1.0)), 1e-8));
    // Mean velocity moves to u(t).
    double mv = 0.0;
    for (double v = -10.0; v < 10.0; v += dv) mv += v * exact_f_homog(f0, A, 1.0, 0.4, t, 0.0, v) * dv;
    CHECK_THAT(mv / m, WithinAbs(0.4, 1e-8));
}

TEST_CASE("propagate_u_homog input checks") {
    const auto grid = make_grid(2, 3, 0.0, 1.0, -1.5, 1.5);
    CHECK_THROWS_AS(propagate_u_homog({0.0, 0.0}, {1.0, 1.0}, InfluenceFunction::inverse_sqrt(), Model::cs, grid, 1.0, 0.0),
                    ConfigError);
}
