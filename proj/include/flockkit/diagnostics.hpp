#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "flockkit/direct.hpp"
#include "flockkit/errors.hpp"
#include "flockkit/grid.hpp"
#include "flockkit/kinetic.hpp"

namespace flockkit {

/// g_i evaluated at an arbitrary xi by linear interpolation between centres;
/// zero outside [xi_0, xi_{n-1}].
inline double lerp_row(std::span<const double> row, const PhaseGrid& grid, double xi) {
    const double p = (xi - grid.xi(0)) / grid.dxi;
    const double last = static_cast<double>(grid.nxi - 1);
    const double pr = std::round(p);
    if (std::abs(p - pr) <= 1e-12 * std::max(1.0, std::abs(p))) {
        if (pr < 0.0 || pr > last) return 0.0;
        return row[static_cast<std::size_t>(pr)];
    }
    if (p < 0.0 || p > last) return 0.0;
    const auto j0 = static_cast<std::size_t>(std::floor(p));
    const double w = p - static_cast<double>(j0);
    return (1.0 - w) * row[j0] + w * row[j0 + 1];
}

/// f_{i,m} = omega_i g_i(omega_i (v_m - u_i))  (d = 1).
inline Field reconstruct_f(const Field& g, const std::vector<double>& u,
                           const std::vector<double>& omega, const PhaseGrid& v_grid) {
    if (v_grid.nx != g.grid.nx) throw ConfigError("reconstruct_f: v grid must share the x cells");
    Field f(v_grid);
    for (std::size_t i = 0; i < v_grid.nx; ++i) {
        if (!(omega[i] > 0.0)) throw NumericalError(NumericalFailure::nonpositive_omega, "reconstruct_f: omega must be > 0");
        const auto row = g.row(i);
        for (std::size_t m = 0; m < v_grid.nxi; ++m) {
            f(i, m) = omega[i] * lerp_row(row, g.grid, omega[i] * (v_grid.xi(m) - u[i]));
        }
    }
    return f;
}

/// [u_min - L/omega_min, u_max + L/omega_min] with as many cells as the xi grid.
inline PhaseGrid default_v_grid(const RescaledState& s) {
    const auto& grid = s.g.grid;
    const double umin = *std::min_element(s.u.begin(), s.u.end());
    const double umax = *std::max_element(s.u.begin(), s.u.end());
    const double wmin = *std::min_element(s.omega.begin(), s.omega.end());
    const double half = grid.xi_half_width() / wmin;
    return make_velocity_grid(grid.nx, grid.nxi, grid.x_min, grid.x_max, umin - half, umax + half,
                              grid.bc_x);
}

struct SupportDiameters {
    double S = 0.0;
    double V = 0.0;
};

/// Support = cells with f >= threshold_frac * max f. Extents are centre to centre;
/// on a periodic x-axis S is the shortest arc covering all occupied columns.
inline SupportDiameters support_diameters(const Field& f, double threshold_frac = 1e-4) {
    if (!(threshold_frac > 0.0 && threshold_frac < 1.0)) {
        throw ConfigError("support_diameters: threshold_frac must lie in (0, 1)");
    }
    const auto& grid = f.grid;
    const double fmax = f.max();
    if (!(fmax > 0.0)) return {};
    const double thr = threshold_frac * fmax;
    std::vector<char> col(grid.nx, 0);
    std::size_t vlo = grid.nxi;
    std::size_t vhi = 0;
    for (std::size_t i = 0; i < grid.nx; ++i) {
        for (std::size_t m = 0; m < grid.nxi; ++m) {
            if (f(i, m) >= thr) {
                col[i] = 1;
                vlo = std::min(vlo, m);
                vhi = std::max(vhi, m);
            }
        }
    }
    SupportDiameters d;
    d.V = static_cast<double>(vhi - vlo) * grid.dxi;
    std::vector<std::size_t> occ;
    for (std::size_t i = 0; i < grid.nx; ++i) {
        if (col[i]) occ.push_back(i);
    }
    if (grid.bc_x == BoundaryKind::periodic) {
        // Largest empty gap on the circle, in cells between consecutive occupied columns.
        std::size_t gap = occ.front() + grid.nx - occ.back();
        for (std::size_t k = 1; k < occ.size(); ++k) gap = std::max(gap, occ[k] - occ[k - 1]);
        d.S = static_cast<double>(grid.nx - gap) * grid.dx;
    } else {
        d.S = static_cast<double>(occ.back() - occ.front()) * grid.dx;
    }
    return d;
}

struct DiagRecord {
    double t = 0.0;
    double mass = 0.0;
    double max_f = 0.0;
    double max_g = 0.0;
    double momentum_residual = 0.0;
    double S = 0.0;
    double V = 0.0;
};

inline DiagRecord diagnostics(const RescaledState& s, const PhaseGrid& v_grid,
                              double threshold_frac = 1e-4) {
    DiagRecord r;
    r.t = s.t;
    r.mass = s.g.mass();
    r.max_g = s.g.max();
    const auto m = moments(s.g);
    for (double M : m.M) r.momentum_residual = std::max(r.momentum_residual, std::abs(M));
    const Field f = reconstruct_f(s.g, s.u, s.omega, v_grid);
    r.max_f = f.max();
    const auto d = support_diameters(f, threshold_frac);
    r.S = d.S;
    r.V = d.V;
    return r;
}

inline DiagRecord diagnostics(const RescaledState& s, double threshold_frac = 1e-4) {
    return diagnostics(s, default_v_grid(s), threshold_frac);
}

/// For the direct solver the momentum column holds the total momentum drift
/// dx dv sum v f, which CS conserves.
inline DiagRecord diagnostics(const DirectState& s, double threshold_frac = 1e-4) {
    DiagRecord r;
    r.t = s.t;
    r.mass = s.f.mass();
    r.max_f = s.f.max();
    r.max_g = r.max_f;
    const auto m = moments(s.f);
    double total = 0.0;
    for (double M : m.M) total += M;
    r.momentum_residual = std::abs(total * s.f.grid.dx);
    const auto d = support_diameters(s.f, threshold_frac);
    r.S = d.S;
    r.V = d.V;
    return r;
}

} // namespace flockkit
