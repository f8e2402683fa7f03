#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "flockkit/claw.hpp"

using namespace flockkit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("van Leer limiter") {
    CHECK(van_leer(-1.0) == 0.0);
    CHECK(van_leer(0.0) == 0.0);
    CHECK(van_leer(1.0) == 1.0);
    CHECK_THAT(van_leer(3.0), WithinRel(1.5, 1e-15));
    CHECK(van_leer(1e300) <= 2.0);
}

TEST_CASE("MUSCL reconstruction is exact for linear data away from the ends") {
    std::vector<Vec<1>> U(8);
    for (std::size_t i = 0; i < 8; ++i) U[i] = {2.0 * static_cast<double>(i)};
    const auto s = muscl_reconstruct(U, BoundaryKind::outflow);
    for (std::size_t k = 2; k <= 6; ++k) {
        CHECK_THAT(s.left[k][0], WithinAbs(2.0 * static_cast<double>(k) - 1.0, 1e-14));
        CHECK_THAT(s.right[k][0], WithinAbs(2.0 * static_cast<double>(k) - 1.0, 1e-14));
    }
    // Extremum: the limiter falls back to first order.
    std::vector<Vec<1>> P{{0.0}, {1.0}, {0.0}};
    const auto e = muscl_reconstruct(P, BoundaryKind::outflow);
    CHECK(e.left[2][0] == 1.0);
    CHECK(e.right[1][0] == 1.0);
}

TEST_CASE("periodic linear advection conserves mass and converges") {
    const auto period = [](std::size_t n) {
        const auto mesh = ClawMesh::uniform(n, 0.0, 1.0, BoundaryKind::periodic);
        LinearAdvectionFlux flux{std::vector<double>(n + 1, 1.0)};
        ClawState<1> s{mesh, std::vector<Vec<1>>(n)};
        const auto exact = [&](std::size_t i) { return 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * mesh.centre(i)); };
        double m0 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s.U[i] = {exact(i)};
            m0 += s.U[i][0];
        }
        const double dt = 0.25 / static_cast<double>(n);
        for (std::size_t k = 0; k < 4 * n; ++k) s = step_claw(s, flux, {}, dt);
        double m1 = 0.0;
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m1 += s.U[i][0];
            err += std::abs(s.U[i][0] - exact(i)) / static_cast<double>(n);
        }
        CHECK_THAT(m1, WithinRel(m0, 1e-14));
        return err;
    };
    const double e1 = period(64);
    const double e2 = period(128);
    const double e3 = period(256);
    CHECK(e2 < 0.6 * e1);
    CHECK(e3 < 0.6 * e2);
}

TEST_CASE("claw step enforces the CFL policy") {
    const auto mesh = ClawMesh::uniform(4, 0.0, 1.0, BoundaryKind::periodic);
    LinearAdvectionFlux flux{std::vector<double>(5, 1.0)};
    ClawState<1> s{mesh, std::vector<Vec<1>>(4, Vec<1>{1.0})};
    CHECK_THROWS_AS(step_claw(s, flux, {}, 0.3), NumericalError);
    CHECK_NOTHROW(step_claw(s, flux, {}, 0.3, CflPolicy::ignore));
    CHECK_THROWS_AS(step_claw(s, flux, {}, 0.0), ConfigError);
    CHECK_THROWS_AS(ClawMesh::uniform(1, 0.0, 1.0, BoundaryKind::periodic), ConfigError);
}

TEST_CASE("omega update with A = 1 and u = 0 is forward Euler") {
    const std::size_t n = 5;
    const auto mesh = ClawMesh::uniform(n, 0.0, 1.0, BoundaryKind::periodic);
    std::vector<double> w(n, 1.0);
    const std::vector<double> u(n, 0.0);
    const std::vector<double> A(n, 1.0);
    const double dt = 1e-2;
    long double expect = 1.0L;
    for (int k = 0; k < 100; ++k) {
        w = step_omega_cs(w, u, A, dt, mesh);
        expect *= 1.0L + dt;
    }
    for (double v : w) CHECK_THAT(v, WithinRel(static_cast<double>(expect), 1e-13));
    CHECK_THROWS_AS(step_omega_cs(std::vector<double>(n, -1.0), u, A, dt, mesh), NumericalError);
}

TEST_CASE("macro step: uniform flow stays uniform, source adds momentum") {
    const std::size_t n = 8;
    const auto mesh = ClawMesh::uniform(n, 0.0, 1.0, BoundaryKind::periodic);
    const std::vector<double> rho(n, 2.0);
    const std::vector<double> u(n, 0.5);
    const std::vector<double> P(n, 3.0);
    const std::vector<double> w(n, 1.5);
    const std::vector<double> B(n, 0.25);
    const double dt = 0.01;
    const auto r = step_macro_u(rho, u, P, w, B, dt, mesh);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK_THAT(r.rho[i], WithinRel(2.0, 1e-14));
        CHECK_THAT(r.m[i], WithinRel(2.0 * 0.5 + dt * 2.0 * 0.25, 1e-14));
        CHECK_THAT(r.u[i], WithinRel(0.5 + dt * 0.25, 1e-14));
    }
    CHECK_THROWS_AS(step_macro_u(std::vector<double>(n, -1.0), u, P, w, B, dt, mesh), NumericalError);
}

TEST_CASE("central gradient of a linear profile") {
    const auto mesh = ClawMesh::uniform(6, 0.0, 3.0, BoundaryKind::outflow);
    std::vector<double> q(6);
    for (std::size_t i = 0; i < 6; ++i) q[i] = 4.0 * mesh.centre(i);
    const auto d = central_gradient(q, mesh);
    for (std::size_t i = 1; i + 1 < 6; ++i) CHECK_THAT(d[i], WithinRel(4.0, 1e-14));
    const auto fa = face_average(q, BoundaryKind::outflow);
    CHECK(fa.size() == 7);
    CHECK(fa[0] == q[0]);
    CHECK_THAT(fa[3], WithinRel(0.5 * (q[2] + q[3]), 1e-15));
}
