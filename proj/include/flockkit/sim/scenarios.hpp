#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "flockkit/claw.hpp"
#include "flockkit/diagnostics.hpp"
#include "flockkit/direct.hpp"
#include "flockkit/homogeneous.hpp"
#include "flockkit/kinetic.hpp"
#include "flockkit/mcu_flux.hpp"
#include "flockkit/sim/config.hpp"
#include "flockkit/sim/csv.hpp"
#include "flockkit/sim/manifest.hpp"

namespace flockkit::sim {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Small helpers

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
};

/// Least-squares line through (x, y).
inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LinearFit f;
    f.n = x.size();
    if (x.size() != y.size() || x.size() < 2) return f;
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

/// Fits log(y) = a t + b over t in [t0, t1]; nonpositive samples are skipped.
inline LinearFit fit_exponential(const std::vector<double>& t, const std::vector<double>& y,
                                 double t0, double t1) {
    std::vector<double> xs;
    std::vector<double> ls;
    const double eps = 1e-9 * std::max(1.0, std::abs(t1));
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] >= t0 - eps && t[k] <= t1 + eps && y[k] > 0.0) {
            xs.push_back(t[k]);
            ls.push_back(std::log(y[k]));
        }
    }
    return fit_line(xs, ls);
}

/// Step sizes covering [0, t_end]: whole steps of dt plus a short last one if needed.
inline std::vector<double> step_plan(double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end > 0.0)) throw ConfigError("step plan: need dt > 0 and t_end > 0");
    const double q = t_end / dt;
    auto n = static_cast<std::size_t>(std::floor(q + 1e-9));
    std::vector<double> steps(n, dt);
    const double rest = t_end - static_cast<double>(n) * dt;
    if (rest > 1e-9 * dt) steps.push_back(rest);
    return steps;
}

inline std::string time_label(double t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "t%g", t);
    return buf;
}

inline void prepare_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

/// L1 distance dx dv sum |a - b| on a shared grid.
inline double l1_distance(const Field& a, const Field& b) {
    if (a.values.size() != b.values.size()) throw ConfigError("l1_distance: grids differ");
    double s = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) s += std::abs(a.values[k] - b.values[k]);
    return s * a.grid.dx * a.grid.dxi;
}

// ---------------------------------------------------------------------------
// Test 1: toy drift equation

/// Two-Gaussian profile with weights 1/2 and 3/2.
inline double test1_initial(double xi, const RunConfig& c) {
    const double T = c.gauss_temp;
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * T);
    const double a = xi - c.gauss_c1;
    const double b = xi - c.gauss_c2;
    return norm * (0.5 * std::exp(-a * a / (2.0 * T)) + 1.5 * std::exp(-b * b / (2.0 * T)));
}

inline double toy_moment(std::span<const double> g, const PhaseGrid& grid) {
    double m = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) m += grid.xi(j) * g[j];
    return m * grid.dxi;
}

struct ToyRun {
    std::vector<double> t;
    std::vector<double> M;
    std::vector<double> g; ///< final profile
};

inline ToyRun run_toy(const PhaseGrid& grid, const RunConfig& c, const DriftFluxSpec& spec,
                      double dt, double t_end) {
    ToyRun r;
    r.g.resize(grid.nxi);
    for (std::size_t j = 0; j < grid.nxi; ++j) r.g[j] = test1_initial(grid.xi(j), c);
    double t = 0.0;
    r.t.push_back(t);
    r.M.push_back(toy_moment(r.g, grid));
    for (double h : step_plan(t_end, dt)) {
        r.g = step_toy(r.g, grid, spec, h, c.cfl_policy);
        t += h;
        r.t.push_back(t);
        r.M.push_back(toy_moment(r.g, grid));
    }
    return r;
}

inline PhaseGrid test1_grid(const RunConfig& c, std::size_t nxi) {
    return make_grid(1, nxi, 0.0, 1.0, c.xi_min, c.xi_max, BoundaryKind::outflow);
}

struct Table1Row {
    std::size_t nxi = 0;
    double dt = 0.0;
    double upwind = 0.0;
    double mcu1 = 0.0;
    double mcu0 = 0.0;
};

struct Test1Result {
    PhaseGrid grid;
    ToyRun upwind;
    ToyRun mcu1;
    ToyRun mcu0;
    std::vector<double> reference; ///< second-order solution on ref_nxi cells
    PhaseGrid reference_grid;
    std::vector<Table1Row> table;
};

inline double max_abs_window(const ToyRun& r, double t_max) {
    double m = 0.0;
    for (std::size_t k = 0; k < r.t.size(); ++k) {
        if (r.t[k] <= t_max * (1.0 + 1e-12)) m = std::max(m, std::abs(r.M[k]));
    }
    return m;
}

/// Second-order MUSCL solution of d_t g + d_xi(c xi g) = 0.
inline std::vector<double> test1_reference(const RunConfig& c, PhaseGrid& grid_out) {
    const auto mesh = ClawMesh::uniform(c.ref_nxi, c.xi_min, c.xi_max, BoundaryKind::outflow);
    LinearAdvectionFlux flux;
    flux.face_speed.resize(mesh.faces.size());
    for (std::size_t k = 0; k < mesh.faces.size(); ++k) flux.face_speed[k] = c.drift_c * mesh.faces[k];
    ClawState<1> st{mesh, std::vector<Vec<1>>(mesh.n())};
    for (std::size_t j = 0; j < mesh.n(); ++j) st.U[j][0] = test1_initial(mesh.centre(j), c);
    for (double h : step_plan(c.t_end, c.ref_dt)) st = step_claw(st, flux, {}, h, c.cfl_policy);
    grid_out = make_velocity_grid(1, c.ref_nxi, 0.0, 1.0, c.xi_min, c.xi_max, BoundaryKind::outflow);
    std::vector<double> g(mesh.n());
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = st.U[j][0];
    return g;
}

inline Test1Result run_test1(const RunConfig& c, bool with_reference = true) {
    validate(c);
    Test1Result res;
    res.grid = test1_grid(c, c.nxi);
    const DriftFluxSpec up{c.drift_c, 0.0, FluxFamily::upwind};
    const DriftFluxSpec m1{c.drift_c, 1.0, FluxFamily::mcu};
    const DriftFluxSpec m0{c.drift_c, 0.0, FluxFamily::mcu};
    res.upwind = run_toy(res.grid, c, up, c.dt, c.t_end);
    res.mcu1 = run_toy(res.grid, c, m1, c.dt, c.t_end);
    res.mcu0 = run_toy(res.grid, c, m0, c.dt, c.t_end);
    for (double nv : c.table_nxi) {
        Table1Row row;
        row.nxi = static_cast<std::size_t>(nv);
        row.dt = c.dt * static_cast<double>(c.nxi) / nv;
        const auto grid = test1_grid(c, row.nxi);
        row.upwind = max_abs_window(run_toy(grid, c, up, row.dt, c.table_t_end), c.table_t_end);
        row.mcu1 = max_abs_window(run_toy(grid, c, m1, row.dt, c.table_t_end), c.table_t_end);
        row.mcu0 = max_abs_window(run_toy(grid, c, m0, row.dt, c.table_t_end), c.table_t_end);
        res.table.push_back(row);
    }
    if (with_reference) res.reference = test1_reference(c, res.reference_grid);
    return res;
}

inline void write_profile(const fs::path& path, const PhaseGrid& grid, const std::vector<double>& g) {
    Field f(grid);
    std::copy(g.begin(), g.end(), f.values.begin());
    write_snapshot(path, f);
}

inline void write_test1(const Test1Result& r, const RunConfig& c, const fs::path& dir) {
    prepare_dir(dir);
    {
        CsvWriter w(dir / "moment_test1.csv", {"t", "M_upwind", "M_mcu1", "M_mcu0"});
        for (std::size_t k = 0; k < r.upwind.t.size(); ++k) {
            w.row({r.upwind.t[k], r.upwind.M[k], r.mcu1.M[k], r.mcu0.M[k]});
        }
    }
    {
        CsvWriter w(dir / "table1.csv", {"Nxi", "maxM_upwind", "maxM_mcu1", "maxM_mcu0"});
        for (const auto& row : r.table) w.row({static_cast<double>(row.nxi), row.upwind, row.mcu1, row.mcu0});
    }
    const std::string lab = time_label(c.t_end);
    write_profile(dir / ("snapshot_g_upwind_" + lab + ".csv"), r.grid, r.upwind.g);
    write_profile(dir / ("snapshot_g_mcu1_" + lab + ".csv"), r.grid, r.mcu1.g);
    write_profile(dir / ("snapshot_g_mcu0_" + lab + ".csv"), r.grid, r.mcu0.g);
    if (!r.reference.empty()) {
        write_profile(dir / ("snapshot_g_reference_" + lab + ".csv"), r.reference_grid, r.reference);
    }
}

// ---------------------------------------------------------------------------
// Tests 2, 3 and custom runs of the rescaled solver

inline double initial_density(double x, const RunConfig& c) {
    double rho = c.rho_floor;
    if (c.rho_temp > 0.0) {
        rho += std::exp(-x * x / (2.0 * c.rho_temp)) / std::sqrt(2.0 * std::numbers::pi * c.rho_temp);
    }
    return rho;
}

inline double initial_velocity(double x, const RunConfig& c) {
    const double L = c.x_max - c.x_min;
    return c.u_mean + c.u_amp * std::sin(2.0 * std::numbers::pi * x / L);
}

inline PhaseSampler initial_f(const RunConfig& c) {
    if (c.init == InitKind::box) {
        return [bx = c.box_x, bv = c.box_v](double x, double v) {
            return (std::abs(x) <= bx && std::abs(v) <= bv) ? 1.0 : 0.0;
        };
    }
    return [c](double x, double v) {
        const double w = v - initial_velocity(x, c);
        return initial_density(x, c) * std::exp(-w * w / (2.0 * c.v_temp)) /
               std::sqrt(2.0 * std::numbers::pi * c.v_temp);
    };
}

inline PhaseGrid kinetic_grid(const RunConfig& c) {
    return make_grid(c.nx, c.nxi, c.x_min, c.x_max, c.xi_min, c.xi_max, c.bc_x);
}

inline PhaseGrid quadrature_grid(const RunConfig& c) {
    return make_velocity_grid(c.nx, c.nv_quad, c.x_min, c.x_max, c.v_quad_min, c.v_quad_max, c.bc_x);
}

inline RescaledState initial_state(const RunConfig& c) {
    return rescale_initial(initial_f(c), [](double) { return 1.0; }, quadrature_grid(c), kinetic_grid(c),
                           c.model, make_influence(c));
}

struct KineticRun {
    std::vector<DiagRecord> diag;
    RescaledState final_state;
    std::size_t steps = 0;
    double mass0 = 0.0;
    double max_mass_drift = 0.0;  ///< relative to mass0
    double max_momentum = 0.0;    ///< max over steps and cells of |M_i|
    double max_g0 = 0.0;
    double min_g_ratio = 1.0;     ///< of max_g(t) / max_g(0)
    double max_g_ratio = 1.0;
    double seconds = 0.0;
    std::vector<double> omega_mean; ///< sampled with diag
};

/// Drives the rescaled solver; writes diag.csv and snapshots when dir is set.
inline KineticRun run_kinetic(const RunConfig& c, const std::optional<fs::path>& dir) {
    validate(c);
    const auto t_start = std::chrono::steady_clock::now();
    RescaledState s = initial_state(c);
    const KineticSolver solver(s.g.grid, s.phi, make_solver_options(c));

    KineticRun run;
    run.mass0 = s.g.mass();
    run.max_g0 = s.g.max();
    std::optional<CsvWriter> diag_csv;
    if (dir) {
        prepare_dir(*dir);
        diag_csv.emplace(*dir / "diag.csv",
                         std::vector<std::string>{"t", "mass", "max_f", "max_g", "momentum_residual", "S", "V"});
    }
    const auto record = [&](const RescaledState& st) {
        const auto d = diagnostics(st, c.support_threshold);
        run.diag.push_back(d);
        double wm = 0.0;
        for (double w : st.omega) wm += w;
        run.omega_mean.push_back(wm / static_cast<double>(st.omega.size()));
        if (diag_csv) diag_csv->row({d.t, d.mass, d.max_f, d.max_g, d.momentum_residual, d.S, d.V});
    };
    const auto observe = [&](const RescaledState& st) {
        for (double M : moments(st.g).M) run.max_momentum = std::max(run.max_momentum, std::abs(M));
        run.max_mass_drift = std::max(run.max_mass_drift, std::abs(st.g.mass() - run.mass0) / run.mass0);
        const double r = st.g.max() / run.max_g0;
        run.min_g_ratio = std::min(run.min_g_ratio, r);
        run.max_g_ratio = std::max(run.max_g_ratio, r);
    };
    std::vector<double> snaps = c.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;
    const auto snapshot_due = [&](double t, double tol) {
        bool due = false;
        while (next_snap < snaps.size() && snaps[next_snap] <= t + tol) {
            due = true;
            ++next_snap;
        }
        return due;
    };
    const auto write_snaps = [&](const RescaledState& st) {
        if (!dir) return;
        const std::string lab = time_label(st.t);
        write_snapshot(*dir / ("snapshot_g_" + lab + ".csv"), st.g);
        write_snapshot(*dir / ("snapshot_f_" + lab + ".csv"), reconstruct_f(st.g, st.u, st.omega, default_v_grid(st)));
    };

    observe(s);
    record(s);
    if (snapshot_due(0.0, 0.0)) write_snaps(s);

    while (s.t < c.t_end * (1.0 - 1e-12)) {
        double h = c.dt > 0.0 ? c.dt : solver.stable_dt(s);
        double target = c.t_end;
        if (next_snap < snaps.size()) target = std::min(target, snaps[next_snap]);
        const double remaining = target - s.t;
        if (h >= remaining - 1e-9 * h) h = remaining;
        if (!(h > 0.0)) throw NumericalError(NumericalFailure::cfl_violation, "run: time step collapsed to zero");
        s = solver.step(s, h);
        ++run.steps;
        observe(s);
        const bool snap = snapshot_due(s.t, 1e-9 * h);
        const bool last = s.t >= c.t_end * (1.0 - 1e-12);
        if (snap || last || run.steps % c.diag_every == 0) record(s);
        if (snap) write_snaps(s);
    }
    run.final_state = std::move(s);
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return run;
}

inline std::vector<double> diag_column(const std::vector<DiagRecord>& d, double DiagRecord::*field) {
    std::vector<double> out;
    out.reserve(d.size());
    for (const auto& r : d) out.push_back(r.*field);
    return out;
}

inline KineticRun run_test2(const RunConfig& c, const std::optional<fs::path>& dir = {}) {
    return run_kinetic(c, dir);
}

inline KineticRun run_test3(const RunConfig& c, const std::optional<fs::path>& dir = {}) {
    return run_kinetic(c, dir);
}

// ---------------------------------------------------------------------------
// Cross-check against the direct and homogeneous oracles

struct CrossLevel {
    std::size_t nx = 0;
    std::size_t nxi = 0;
    double dt = 0.0;
    std::size_t steps = 0;
    double l1_direct = 0.0;
    double l1_homogeneous = 0.0;
};

struct TimingRow {
    std::size_t nxi = 0;
    double direct_seconds = 0.0;
    double kinetic_seconds = 0.0;
    [[nodiscard]] double ratio() const { return direct_seconds / kinetic_seconds; }
};

struct CrosscheckReport {
    std::vector<CrossLevel> levels;
    double order_direct = 0.0;      ///< smallest pairwise order
    double order_homogeneous = 0.0;
    bool direct_monotone = false;
    bool homogeneous_monotone = false;
    std::vector<TimingRow> timing;
    double timing_slope = 0.0;      ///< d log(ratio) / d log(nxi)
};

inline RunConfig level_config(const RunConfig& c, std::size_t nx, std::size_t nxi) {
    RunConfig lc = c;
    lc.nx = nx;
    lc.nxi = nxi;
    return lc;
}

/// f sampled on the v-grid of a direct run.
inline Field sample_f(const PhaseSampler& f0, const PhaseGrid& vg) {
    Field f(vg);
    for (std::size_t i = 0; i < vg.nx; ++i) {
        for (std::size_t m = 0; m < vg.nxi; ++m) f(i, m) = f0(vg.x(i), vg.xi(m));
    }
    return f;
}

/// Full transport + alignment: rescaled vs direct, compared at t_end on the v-grid.
inline CrossLevel cross_direct(const RunConfig& c, std::size_t nx, std::size_t nxi) {
    const RunConfig lc = level_config(c, nx, nxi);
    RescaledState s = initial_state(lc);
    const auto phi = make_influence(lc);
    SolverOptions so = make_solver_options(lc);
    const KineticSolver kin(s.g.grid, phi, so);
    const auto vg = make_velocity_grid(nx, nxi, lc.x_min, lc.x_max, lc.xi_min, lc.xi_max, lc.bc_x);
    DirectState d{sample_f(initial_f(lc), vg), lc.model, phi, 0.0};
    DirectOptions dopt;
    dopt.cfl_policy = lc.cfl_policy;
    const DirectSolver dir(vg, phi, dopt);

    double vmax = std::max(std::abs(vg.xi(0)), std::abs(vg.xi(vg.nxi - 1)));
    double dmax = 0.0;
    for (double v : drift_field(d.f, dir.influence(), d.model).values) dmax = std::max(dmax, std::abs(v));
    const double dt_direct = lc.cfl / (vmax / vg.dx + dmax / vg.dxi);
    const double dt = std::min(kin.stable_dt(s), dt_direct);

    CrossLevel lv;
    lv.nx = nx;
    lv.nxi = nxi;
    const auto plan = step_plan(lc.t_end, dt);
    lv.dt = plan.front();
    lv.steps = plan.size();
    for (double h : plan) {
        s = kin.step(s, h);
        d = dir.step(d, h);
    }
    lv.l1_direct = l1_distance(reconstruct_f(s.g, s.u, s.omega, vg), d.f);
    return lv;
}

/// Transport off: rescaled solver vs the closed-form homogeneous solution.
inline double cross_homogeneous(const RunConfig& c, std::size_t nx, std::size_t nxi) {
    const RunConfig lc = level_config(c, nx, nxi);
    RescaledState s = initial_state(lc);
    const auto phi = make_influence(lc);
    SolverOptions so = make_solver_options(lc);
    so.transport = false;
    const KineticSolver kin(s.g.grid, phi, so);
    const auto vg = make_velocity_grid(nx, nxi, lc.x_min, lc.x_max, lc.xi_min, lc.xi_max, lc.bc_x);

    // Density and mean velocity of f0 from the fine quadrature, as the exact solution sees them.
    const auto qg = quadrature_grid(lc);
    const auto f0 = initial_f(lc);
    const Field fq = sample_f(f0, qg);
    const auto mq = moments(fq);
    std::vector<double> u0(nx);
    for (std::size_t i = 0; i < nx; ++i) u0[i] = mq.M[i] / mq.rho[i];

    // dt proportional to dxi keeps the Euler error in u at the order of the grid error.
    const double dt = 0.5 * s.g.grid.dxi / (lc.xi_max - lc.xi_min);
    const auto plan = step_plan(lc.t_end, dt);
    for (double h : plan) s = kin.step(s, h);
    const auto sol = propagate_u_homog(u0, mq.rho, phi, lc.model, s.g.grid, lc.t_end, 1e-3);
    Field exact(vg);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t m = 0; m < vg.nxi; ++m) {
            exact(i, m) = exact_f_homog(f0, sol.A[i], u0[i], sol.u_at(i, lc.t_end), lc.t_end, vg.x(i), vg.xi(m));
        }
    }
    return l1_distance(reconstruct_f(s.g, s.u, s.omega, vg), exact);
}

/// Grid with nxi cells of width 12/nxi and a centre at 0, for any nxi.
inline PhaseGrid timing_grid(std::size_t nx, std::size_t nxi, const RunConfig& c) {
    const double h = 12.0 / static_cast<double>(nxi);
    const double lo = -h * (static_cast<double>(nxi / 2) + 0.5);
    return make_grid(nx, nxi, c.x_min, c.x_max, lo, lo + h * static_cast<double>(nxi), c.bc_x);
}

template <class Fn>
double best_time(Fn&& fn, int repeats) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

/// Per-step wall clock of the direct solver (plain quadrature drift) and the rescaled solver.
inline TimingRow time_level(const RunConfig& c, std::size_t nx, std::size_t nxi, std::size_t steps) {
    RunConfig lc = c;
    lc.nx = nx;
    lc.nxi = nxi;
    const auto grid = timing_grid(nx, nxi, lc);
    const auto phi = make_influence(lc);
    const RescaledState s0 = rescale_initial(initial_f(lc), [](double) { return 1.0; }, quadrature_grid(lc),
                                             grid, lc.model, phi);
    SolverOptions so = make_solver_options(lc);
    so.cfl_policy = CflPolicy::ignore;
    const KineticSolver kin(grid, phi, so);
    const auto vg = make_velocity_grid(nx, nxi, lc.x_min, lc.x_max, grid.xi_min, grid.xi_max, lc.bc_x);
    DirectOptions dopt;
    dopt.naive_drift = true;
    dopt.cfl_policy = CflPolicy::ignore;
    const DirectSolver dir(vg, phi, dopt);
    const DirectState d0{sample_f(initial_f(lc), vg), lc.model, phi, 0.0};
    const double dt = 1e-5;

    TimingRow row;
    row.nxi = nxi;
    double sink = 0.0;
    row.kinetic_seconds = best_time([&] {
        RescaledState s = s0;
        for (std::size_t k = 0; k < steps; ++k) s = kin.step(s, dt);
        sink += s.g.values[0];
    }, 3);
    row.direct_seconds = best_time([&] {
        DirectState d = d0;
        for (std::size_t k = 0; k < steps; ++k) d = dir.step(d, dt);
        sink += d.f.values[0];
    }, 3);
    if (!std::isfinite(sink)) row.direct_seconds = 0.0;
    return row;
}

inline double pair_order(double e_coarse, double e_fine, double h_coarse, double h_fine) {
    return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

inline CrosscheckReport run_crosscheck(const RunConfig& c, const std::optional<fs::path>& dir = {},
                                       const std::vector<std::size_t>& timing_nxi = {16, 32, 64},
                                       std::size_t timing_nx = 32, std::size_t timing_steps = 5) {
    validate(c);
    CrosscheckReport rep;
    for (std::size_t k = 0; k < c.cross_nx.size(); ++k) {
        const auto nx = static_cast<std::size_t>(c.cross_nx[k]);
        const auto nxi = static_cast<std::size_t>(c.cross_nxi[k]);
        CrossLevel lv = cross_direct(c, nx, nxi);
        lv.l1_homogeneous = cross_homogeneous(c, nx, nxi);
        rep.levels.push_back(lv);
    }
    rep.order_direct = 1e300;
    rep.order_homogeneous = 1e300;
    rep.direct_monotone = true;
    rep.homogeneous_monotone = true;
    for (std::size_t k = 0; k + 1 < rep.levels.size(); ++k) {
        const auto& a = rep.levels[k];
        const auto& b = rep.levels[k + 1];
        const double ha = (c.xi_max - c.xi_min) / static_cast<double>(a.nxi);
        const double hb = (c.xi_max - c.xi_min) / static_cast<double>(b.nxi);
        rep.order_direct = std::min(rep.order_direct, pair_order(a.l1_direct, b.l1_direct, ha, hb));
        rep.order_homogeneous = std::min(rep.order_homogeneous, pair_order(a.l1_homogeneous, b.l1_homogeneous, ha, hb));
        rep.direct_monotone = rep.direct_monotone && b.l1_direct < a.l1_direct;
        rep.homogeneous_monotone = rep.homogeneous_monotone && b.l1_homogeneous < a.l1_homogeneous;
    }
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t n : timing_nxi) {
        rep.timing.push_back(time_level(c, timing_nx, n, timing_steps));
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(rep.timing.back().ratio()));
    }
    rep.timing_slope = fit_line(lx, ly).slope;

    if (dir) {
        prepare_dir(*dir);
        CsvWriter w(*dir / "crosscheck.csv", {"Nx", "Nxi", "dt", "steps", "l1_direct", "l1_homogeneous"});
        for (const auto& lv : rep.levels) {
            w.row({static_cast<double>(lv.nx), static_cast<double>(lv.nxi), lv.dt, static_cast<double>(lv.steps),
                   lv.l1_direct, lv.l1_homogeneous});
        }
        CsvWriter t(*dir / "timing.csv", {"Nxi", "direct_seconds", "kinetic_seconds", "ratio"});
        for (const auto& row : rep.timing) {
            t.row({static_cast<double>(row.nxi), row.direct_seconds, row.kinetic_seconds, row.ratio()});
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Custom run with an optional oracle alongside

struct CustomResult {
    KineticRun run;
    std::vector<double> oracle_t;
    std::vector<double> oracle_l1;
};

inline CustomResult run_custom(const RunConfig& c, const std::optional<fs::path>& dir = {}) {
    CustomResult res;
    if (c.oracle == OracleKind::off) {
        res.run = run_kinetic(c, dir);
        return res;
    }
    RunConfig kc = c;
    if (c.oracle == OracleKind::homogeneous) kc.snapshot_times.clear();
    res.run = run_kinetic(kc, dir);
    const auto& fin = res.run.final_state;
    const auto vg = make_velocity_grid(c.nx, c.nxi, c.x_min, c.x_max, c.xi_min, c.xi_max, c.bc_x);
    const auto phi = make_influence(c);
    const auto f0 = initial_f(c);
    Field other(vg);
    if (c.oracle == OracleKind::direct) {
        DirectOptions dopt;
        dopt.cfl_policy = c.cfl_policy;
        const DirectSolver ds(vg, phi, dopt);
        DirectState d{sample_f(f0, vg), c.model, phi, 0.0};
        double vmax = std::max(std::abs(vg.xi(0)), std::abs(vg.xi(vg.nxi - 1)));
        while (d.t < c.t_end * (1.0 - 1e-12)) {
            double dmax = 0.0;
            for (double v : drift_field(d.f, ds.influence(), d.model).values) dmax = std::max(dmax, std::abs(v));
            double h = c.cfl / (vmax / vg.dx + dmax / vg.dxi);
            if (c.dt > 0.0) h = std::min(h, c.dt);
            h = std::min(h, c.t_end - d.t);
            d = ds.step(d, h);
        }
        other = d.f;
    } else {
        const auto qg = quadrature_grid(c);
        const auto mq = moments(sample_f(f0, qg));
        std::vector<double> u0(c.nx);
        for (std::size_t i = 0; i < c.nx; ++i) u0[i] = mq.rho[i] > 0.0 ? mq.M[i] / mq.rho[i] : 0.0;
        const auto sol = propagate_u_homog(u0, mq.rho, phi, c.model, fin.g.grid, c.t_end, 1e-3);
        for (std::size_t i = 0; i < c.nx; ++i) {
            for (std::size_t m = 0; m < vg.nxi; ++m) {
                other(i, m) = exact_f_homog(f0, sol.A[i], u0[i], sol.u_at(i, c.t_end), c.t_end, vg.x(i), vg.xi(m));
            }
        }
    }
    res.oracle_t.push_back(fin.t);
    res.oracle_l1.push_back(l1_distance(reconstruct_f(fin.g, fin.u, fin.omega, vg), other));
    if (dir) {
        CsvWriter w(*dir / "oracle.csv", {"t", "l1"});
        w.row({res.oracle_t.back(), res.oracle_l1.back()});
        write_snapshot(*dir / ("snapshot_f_oracle_" + time_label(c.t_end) + ".csv"), other);
    }
    return res;
}

} // namespace flockkit::sim
