#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "flockkit/claw.hpp"
#include "flockkit/errors.hpp"
#include "flockkit/grid.hpp"

namespace flockkit {

enum class FluxFamily { upwind, mcu };

/// Drift d_t g + c d_xi(xi g) = 0 discretized with the given flux family.
struct DriftFluxSpec {
    double c = 1.0;
    double theta = 0.0;
    FluxFamily family = FluxFamily::mcu;
};

// Flux vectors below have nxi + 1 entries; F[k] lives on the face between cells
// k - 1 and k, i.e. F[j + 1] is F_{j+1/2}. The outer faces carry zero flux.

inline std::vector<double> upwind_drift_flux(std::span<const double> g, const PhaseGrid& grid,
                                             double c) {
    const std::size_t n = grid.nxi;
    std::vector<double> F(n + 1, 0.0);
    if (c == 0.0) return F;
    const std::size_t J = grid.J;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double xh = grid.xi_face(j + 1);
        const bool right_half = j >= J;
        // The upwind cell is j when the face velocity c * xh points right.
        const bool from_left = (c > 0.0) == right_half;
        F[j + 1] = c * xh * (from_left ? g[j] : g[j + 1]);
    }
    return F;
}

inline std::vector<double> mcu_drift_flux(std::span<const double> g, const PhaseGrid& grid,
                                          double c, double theta) {
    if (!(theta >= -1.0 && theta <= 1.0)) throw ConfigError("mcu flux: theta must lie in [-1, 1]");
    const std::size_t n = grid.nxi;
    std::vector<double> F(n + 1, 0.0);
    if (c == 0.0) return F;
    const std::size_t J = grid.J;
    const double corr = 0.5 * c * theta * grid.dxi;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const bool right_half = j >= J;
        const bool from_left = (c > 0.0) == right_half;
        const double f0 = from_left ? c * grid.xi(j) * g[j] : c * grid.xi(j + 1) * g[j + 1];
        F[j + 1] = f0 - corr * (g[j + 1] - g[j]);
    }
    return F;
}

inline std::vector<double> drift_flux(std::span<const double> g, const PhaseGrid& grid,
                                      const DriftFluxSpec& spec) {
    return spec.family == FluxFamily::upwind ? upwind_drift_flux(g, grid, spec.c)
                                             : mcu_drift_flux(g, grid, spec.c, spec.theta);
}

/// dt / dxi <= 1 / (|c| L) with L the half-width of the xi box.
inline double toy_courant(const PhaseGrid& grid, double c, double dt) {
    return dt / grid.dxi * std::abs(c) * grid.xi_half_width();
}

inline std::vector<double> step_toy(std::span<const double> g, const PhaseGrid& grid,
                                    const DriftFluxSpec& spec, double dt,
                                    CflPolicy policy = CflPolicy::error) {
    if (!(dt > 0.0)) throw ConfigError("step_toy: dt must be positive");
    if (g.size() != grid.nxi) throw ConfigError("step_toy: row length differs from nxi");
    check_cfl(toy_courant(grid, spec.c, dt), 1.0, policy, "step_toy");
    const auto F = drift_flux(g, grid, spec);
    const double r = dt / grid.dxi;
    std::vector<double> out(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) out[j] = g[j] - r * (F[j + 1] - F[j]);
    return out;
}

/// |M(step(g)) - (1 + c dt) M(g)|, moments accumulated in extended precision.
inline double discrete_momentum_law_check(std::span<const double> g, const PhaseGrid& grid,
                                          const DriftFluxSpec& spec, double dt) {
    const auto next = step_toy(g, grid, spec, dt, CflPolicy::ignore);
    long double m0 = 0.0L;
    long double m1 = 0.0L;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const long double xi = grid.xi(j);
        m0 += xi * g[j];
        m1 += xi * next[j];
    }
    const long double dxi = grid.dxi;
    const long double r = dxi * m1 - (1.0L + static_cast<long double>(spec.c) * dt) * dxi * m0;
    return static_cast<double>(r < 0 ? -r : r);
}

/// Delta xi * sum_j |xi_j| g_j, the natural size of the momentum.
inline double momentum_scale(std::span<const double> g, const PhaseGrid& grid) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) s += std::abs(grid.xi(j)) * std::abs(g[j]);
    return s * grid.dxi;
}

} // namespace flockkit
