#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "flockkit/kinetic.hpp"

using namespace flockkit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Symmetric rows (zero momentum up to rounding) over a periodic unit interval.
/// wall: leave the end cells occupied.
RescaledState make_state(Model model, bool wall, std::size_t nx = 12, std::size_t nxi = 31) {
    const double L = 6.0;
    RescaledState s;
    s.model = model;
    s.phi = model == Model::mt ? InfluenceFunction::indicator(0.25) : InfluenceFunction::inverse_sqrt();
    s.g = Field(make_grid(nx, nxi, -0.5, 0.5, -L, L));
    const auto& grid = s.g.grid;
    s.u.resize(nx);
    s.omega.resize(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        const double x = grid.x(i);
        const double rho = 1.0 + 0.4 * std::cos(kTwoPi * x);
        s.u[i] = 0.5 + std::sin(kTwoPi * x);
        s.omega[i] = model == Model::mt ? 1.0 : 1.0 + 0.3 * std::cos(kTwoPi * x + 0.4);
        const double T = wall ? 16.0 : 1.0;
        for (std::size_t j = 0; j < nxi; ++j) {
            const double xi = grid.xi(j);
            s.g(i, j) = rho * std::exp(-xi * xi / (2.0 * T));
        }
        if (!wall) {
            s.g(i, 0) = 0.0;
            s.g(i, nxi - 1) = 0.0;
        }
    }
    s.omega0 = s.omega;
    return s;
}

/// Row momentum in extended precision.
long double row_M(const Field& g, std::size_t i) {
    long double m = 0.0L;
    for (std::size_t j = 0; j < g.grid.nxi; ++j) m += static_cast<long double>(g.grid.xi(j)) * g(i, j);
    return m * g.grid.dxi;
}

double row_scale(const Field& g, std::size_t i) {
    double m = 0.0;
    for (std::size_t j = 0; j < g.grid.nxi; ++j) m += std::abs(g.grid.xi(j) * g(i, j));
    return m * g.grid.dxi;
}

double worst_M_ratio(const Field& g) {
    double w = 0.0;
    for (std::size_t i = 0; i < g.grid.nx; ++i) {
        w = std::max(w, static_cast<double>(std::abs(row_M(g, i))) / row_scale(g, i));
    }
    return w;
}

double total_mass(const Field& g) {
    long double s = 0.0L;
    for (double v : g.values) s += v;
    return static_cast<double>(s) * g.grid.dx * g.grid.dxi;
}

} // namespace

TEST_CASE("F2 and F4 exchange no momentum (MT)") {
    const auto s = make_state(Model::mt, false);
    const auto& grid = s.g.grid;
    const auto wf = face_average(s.omega, grid.bc_x);
    const auto F2 = flux_F2(s.g, wf);
    const auto rho = moments(s.g).rho;
    const auto F4 = flux_F4(s.g, rho, s.omega, Model::mt);
    for (std::size_t i = 0; i < grid.nx; ++i) {
        long double x = 0.0L;
        long double v = 0.0L;
        for (std::size_t j = 0; j < grid.nxi; ++j) {
            const long double xi = grid.xi(j);
            x += xi * (F2(i + 1, j) - F2(i, j));
            v += xi * (F4(i, j + 1) - F4(i, j));
        }
        const long double r = x * grid.dxi / grid.dx + v;
        const long double size = std::abs(x * grid.dxi / grid.dx);
        CHECK(size > 1e-3);
        CHECK(static_cast<double>(std::abs(r)) <= 1e-13 * static_cast<double>(size));
    }
}

TEST_CASE("F2, F4 and F5 exchange no momentum (CS)") {
    const auto s = make_state(Model::cs, false);
    const auto& grid = s.g.grid;
    const auto wf = face_average(s.omega, grid.bc_x);
    const auto F2 = flux_F2(s.g, wf);
    const auto rho = moments(s.g).rho;
    for (auto variant : {F5Variant::improved, F5Variant::simple}) {
        const auto F4 = flux_F4(s.g, rho, s.omega, Model::cs);
        const auto F5 = flux_F5(s.g, wf, variant);
        for (std::size_t i = 0; i < grid.nx; ++i) {
            long double x = 0.0L;
            long double v = 0.0L;
            for (std::size_t j = 0; j < grid.nxi; ++j) {
                const long double xi = grid.xi(j);
                x += xi * (F2(i + 1, j) - F2(i, j));
                v += xi * ((F4(i, j + 1) - F4(i, j)) + (F5(i, j + 1) - F5(i, j)));
            }
            const long double r = x * grid.dxi / grid.dx + v;
            CHECK(static_cast<double>(std::abs(r)) <= 1e-13 * static_cast<double>(std::abs(x * grid.dxi / grid.dx)));
        }
    }
}

TEST_CASE("full steps keep zero momentum and conserve mass") {
    for (auto model : {Model::mt, Model::cs}) {
        for (bool wall : {false, true}) {
            for (auto force : {ForceScheme::unsplit, ForceScheme::split_remap}) {
                INFO("model " << model_name(model) << " wall " << wall << " split " << (force == ForceScheme::split_remap));
                auto s = make_state(model, wall);
                SolverOptions opt;
                opt.force = force;
                opt.macro = force == ForceScheme::split_remap ? MacroScheme::kinetic : MacroScheme::muscl;
                const KineticSolver solver(s.g.grid, s.phi, opt);
                const double m0 = total_mass(s.g);
                for (int k = 0; k < 20; ++k) s = solver.step(s, 0.5 * solver.stable_dt(s));
                CHECK(worst_M_ratio(s.g) <= 1e-14);
                CHECK_THAT(total_mass(s.g), WithinRel(m0, 1e-14));
                // F5 is a centred flux, so only MT steps keep g >= 0.
                if (model == Model::mt) CHECK(s.g.min() >= 0.0);
            }
        }
    }
}

TEST_CASE("wall closure is what keeps momentum when the end cells are occupied") {
    for (auto model : {Model::mt, Model::cs}) {
        auto s = make_state(model, true);
        CHECK(s.g(0, 0) > 0.1);
        SolverOptions on;
        SolverOptions off;
        off.wall_closure = false;
        const double dt = 0.5 * stable_dt(s, on);
        const auto a = KineticSolver(s.g.grid, s.phi, on).step(s, dt);
        const auto b = KineticSolver(s.g.grid, s.phi, off).step(s, dt);
        CHECK(worst_M_ratio(a.g) <= 1e-14);
        CHECK(worst_M_ratio(b.g) > 1e-6);
    }
}

TEST_CASE("wall-balanced speed equals the plain speed when the ends are empty") {
    const auto s = make_state(Model::cs, false);
    const auto& grid = s.g.grid;
    const auto wf = face_average(s.omega, grid.bc_x);
    const auto rho = moments(s.g).rho;
    const std::vector<double> c(grid.nx, 0.7);
    const auto a = force_speed(force_gradient(s.g, wf, Model::cs), rho, s.omega, wf, Model::cs);
    const auto outer = outer_fluxes(s.g, c, std::vector<double>(grid.nx, 1.0), &wf, F5Variant::improved);
    CHECK(wall_balanced_speed(s.g, a, rho, outer) == a);
}

TEST_CASE("remap by a whole cell shifts the row") {
    const auto grid = make_grid(1, 7, 0.0, 1.0, -1.75, 1.75);
    Field g(grid);
    g(0, 2) = 1.0;
    g(0, 3) = 2.0;
    remap_rows(g, {grid.dxi}, 1.0);
    CHECK(g(0, 2) == 0.0);
    CHECK(g(0, 3) == 1.0);
    CHECK(g(0, 4) == 2.0);
    // Against the wall nothing leaves the box.
    remap_rows(g, {-10.0 * grid.dxi}, 1.0);
    CHECK(g(0, 0) == 3.0);
}

TEST_CASE("momentum remap hits the requested change") {
    const auto grid = make_grid(3, 41, 0.0, 1.0, -4.1, 4.1);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Field g(grid);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 1; j + 1 < grid.nxi; ++j) g(i, j) = U(rng);
    }
    // Row 2 sits against the upper wall.
    for (std::size_t j = 0; j < grid.nxi; ++j) g(2, j) = j + 3 >= grid.nxi ? 1.0 : 0.0;
    const Field before = g;
    std::vector<double> dM(3);
    for (std::size_t i = 0; i < 3; ++i) dM[i] = (i == 1 ? -1.3 : 0.7) * row_moments(g.row(i), grid).rho * grid.dxi;
    dM[2] = 0.02;
    remap_rows_momentum(g, dM);
    for (std::size_t i = 0; i < 3; ++i) {
        const double gain = static_cast<double>(row_M(g, i) - row_M(before, i));
        CHECK_THAT(gain, WithinAbs(dM[i], 1e-13 * row_scale(before, i)));
        CHECK_THAT(row_moments(g.row(i), grid).rho, WithinRel(row_moments(before.row(i), grid).rho, 1e-14));
    }
    CHECK(g.min() >= 0.0);
}

TEST_CASE("kinetic macro update: density is the kinetic density") {
    auto s = make_state(Model::cs, true);
    SolverOptions opt;
    opt.force = ForceScheme::split_remap;
    opt.macro = MacroScheme::kinetic;
    const KineticSolver solver(s.g.grid, s.phi, opt);
    const auto rep = solver.step_detailed(s, 0.5 * solver.stable_dt(s));
    CHECK(rep.rho_macro == moments(rep.next.g).rho);
}

TEST_CASE("kinetic macro update: uniform flow and empty cells") {
    const auto grid = make_grid(6, 5, 0.0, 1.0, -2.5, 2.5);
    Field g(grid);
    for (std::size_t i = 0; i < 6; ++i) {
        if (i == 3) continue;
        for (std::size_t j = 1; j < 4; ++j) g(i, j) = 1.0;
    }
    std::vector<double> u{2.0, 2.0, 1.0, 7.0, 3.0, 2.0};
    const XFlux none(6, 5);
    const auto r = kinetic_macro_update(g, g, u, face_average(u, grid.bc_x), std::vector<double>(7, 1.0), none, none,
                                        std::vector<double>(6, 0.5), 0.1);
    CHECK(r.rho[3] == 0.0);
    CHECK_THAT(r.u[3], WithinRel(0.5 * ((1.0 + 0.05) + (3.0 + 0.05)), 1e-14));
    CHECK_THAT(r.u[0], WithinRel(2.0 + 0.1 * 0.5, 1e-15));
}

TEST_CASE("transport off: g frozen, u follows the alignment, MT omega is exponential") {
    auto s = make_state(Model::mt, false);
    SolverOptions opt;
    opt.transport = false;
    const KineticSolver solver(s.g.grid, s.phi, opt);
    const auto rep = solver.step_detailed(s, 0.01);
    CHECK(rep.next.g.values == s.g.values);
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        CHECK_THAT(rep.next.u[i], WithinAbs(s.u[i] + 0.01 * rep.alignment.B[i], 1e-15));
        CHECK_THAT(rep.next.omega[i], WithinRel(std::exp(0.01), 1e-15));
    }
}

TEST_CASE("stable_dt passes the CFL check and a larger step does not") {
    auto s = make_state(Model::cs, false);
    SolverOptions opt;
    opt.cfl = 1.0;
    opt.dt_max = 1.0;
    const KineticSolver solver(s.g.grid, s.phi, opt);
    const double dt = solver.stable_dt(s);
    CHECK_NOTHROW(solver.step(s, dt));
    CHECK_THROWS_AS(solver.step(s, 1.1 * dt), NumericalError);
}

TEST_CASE("model checks on the convenience steppers") {
    const auto mt = make_state(Model::mt, false);
    const auto cs = make_state(Model::cs, false);
    CHECK_THROWS_AS(step_cs(mt, 1e-4), ConfigError);
    CHECK_THROWS_AS(step_mt(cs, 1e-4), ConfigError);
    CHECK_THROWS_AS(step_mt(mt, 0.0), ConfigError);
    auto bad = cs;
    bad.omega[2] = 0.0;
    CHECK_THROWS_AS(step_cs(bad, 1e-4), NumericalError);
}

TEST_CASE("rescale_initial yields zero row momentum") {
    const auto xg = make_grid(8, 41, 0.0, 1.0, -8.0, 8.0);
    const auto vg = make_velocity_grid(8, 800, 0.0, 1.0, -6.0, 10.0);
    const PhaseSampler f0 = [](double x, double v) {
        const double u = 2.0 + std::sin(kTwoPi * x);
        return (1.0 + 0.5 * x) * std::exp(-(v - u) * (v - u) / 2.0) / std::sqrt(kTwoPi);
    };
    const auto s = rescale_initial(f0, [](double) { return 1.0; }, vg, xg, Model::mt, InfluenceFunction::indicator(0.2));
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(static_cast<double>(std::abs(row_M(s.g, i))) <= 1e-15 * row_scale(s.g, i));
        CHECK_THAT(s.u[i], WithinAbs(2.0 + std::sin(kTwoPi * xg.x(i)), 1e-6));
    }
    CHECK_THROWS_AS(rescale_initial(f0, [](double x) { return 1.0 + x; }, vg, xg, Model::mt, InfluenceFunction::indicator(0.2)),
                    ConfigError);
    const PhaseSampler empty = [](double x, double v) { return x < 0.5 ? std::exp(-v * v) : 0.0; };
    CHECK_THROWS_AS(rescale_initial(empty, [](double) { return 1.0; }, vg, xg, Model::mt, InfluenceFunction::indicator(0.2)),
                    ConfigError);
    CHECK_NOTHROW(rescale_initial(empty, [](double) { return 1.0; }, vg, xg, Model::cs, InfluenceFunction::inverse_sqrt()));
}
