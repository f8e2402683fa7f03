#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "flockkit/direct.hpp"

using namespace flockkit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

DirectState sample_state(Model model, std::size_t nx = 8, std::size_t nv = 24) {
    const auto grid = make_velocity_grid(nx, nv, 0.0, 1.0, -4.0, 4.0);
    DirectState s;
    s.model = model;
    s.f = Field(grid);
    for (std::size_t i = 0; i < nx; ++i) {
        const double u = std::sin(2.0 * std::numbers::pi * grid.x(i));
        for (std::size_t j = 0; j < nv; ++j) {
            const double d = grid.xi(j) - u;
            s.f(i, j) = (1.0 + 0.3 * grid.x(i)) * std::exp(-d * d);
        }
    }
    return s;
}

} // namespace

TEST_CASE("moment-based drift matches the quadruple loop") {
    for (auto model : {Model::cs, Model::mt}) {
        const auto s = sample_state(model);
        const InfluenceMatrix W(s.phi, s.f.grid);
        const auto a = drift_field(s.f, W, model);
        const auto b = drift_field_naive(s.f, W, model);
        for (std::size_t k = 0; k < a.values.size(); ++k) {
            CHECK_THAT(a.values[k], WithinAbs(b.values[k], 1e-12 * (1.0 + std::abs(b.values[k]))));
        }
    }
}

TEST_CASE("MT drift vanishes at the local mean velocity of a uniform state") {
    const auto grid = make_velocity_grid(4, 9, 0.0, 1.0, -2.25, 2.25);
    DirectState s;
    s.model = Model::mt;
    s.f = Field(grid);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 9; ++j) s.f(i, j) = std::exp(-grid.xi(j) * grid.xi(j));
    }
    const auto D = drift_field(s.f, InfluenceMatrix(s.phi, grid), Model::mt);
    // Mean velocity 0 sits at the centre cell; D = -(v - 0).
    for (std::size_t j = 0; j < 9; ++j) CHECK_THAT(D(1, j), WithinAbs(-grid.xi(j), 1e-14));
}

TEST_CASE("direct step conserves mass") {
    auto s = sample_state(Model::cs);
    const double m0 = s.f.mass();
    const DirectSolver solver(s.f.grid, s.phi);
    for (int k = 0; k < 50; ++k) s = solver.step(s, 2e-3);
    CHECK_THAT(s.f.mass(), WithinRel(m0, 1e-13));
    CHECK(s.f.min() >= 0.0);
    CHECK_THAT(s.t, WithinAbs(0.1, 1e-14));
}

TEST_CASE("free transport of an x-uniform state is stationary") {
    auto s = sample_state(Model::free_transport);
    for (std::size_t i = 0; i < s.f.grid.nx; ++i) {
        for (std::size_t j = 0; j < s.f.grid.nxi; ++j) s.f(i, j) = s.f(0, j);
    }
    const auto n = step_direct(s, 1e-2);
    CHECK(n.f.values == s.f.values);
}

TEST_CASE("direct step checks dt and the CFL bound") {
    const auto s = sample_state(Model::cs);
    CHECK_THROWS_AS(step_direct(s, 0.0), ConfigError);
    CHECK_THROWS_AS(step_direct(s, 1.0), NumericalError);
    DirectOptions o;
    o.cfl_policy = CflPolicy::ignore;
    CHECK_NOTHROW(step_direct(s, 1.0, o));
}
