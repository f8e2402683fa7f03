#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "flockkit/alignment.hpp"
#include "flockkit/claw.hpp"
#include "flockkit/errors.hpp"
#include "flockkit/grid.hpp"
#include "flockkit/influence.hpp"
#include "flockkit/mcu_flux.hpp"
#include "flockkit/parallel.hpp"

namespace flockkit {

/// Rescaled unknowns: f(x, v) = omega g(x, xi) with xi = omega (v - u).
struct RescaledState {
    Field g;
    std::vector<double> u;
    std::vector<double> omega;
    std::vector<double> omega0; ///< initial scaling, used by the analytic MT update
    double t = 0.0;
    Model model = Model::mt;
    InfluenceFunction phi = InfluenceFunction::inverse_sqrt();
};

enum class ThetaPolicy { fixed, sign_of_c };
enum class F5Variant { improved, simple };

/// How the xi-force term (pressure gradient) is applied.
/// unsplit: upwind flux inside the single forward-Euler update.
/// split_remap: applied after the other terms as an exact flux-form shift of each
/// row by a_i dt, with a_i normalized by the intermediate density. Same momentum
/// contribution, positive for any shift length, and defined when a cell starts
/// the step empty.
enum class ForceScheme { unsplit, split_remap };

/// How (rho, rho u) is advanced.
/// muscl: second-order MUSCL / Lax-Friedrichs on the pressureless system with a
/// centred pressure source (the claw solver's step_macro_u).
/// kinetic: first-order upwind fluxes read off the g-fluxes, each row carrying
/// its particle velocity u + xi / omega. The density then equals the kinetic one
/// exactly, and near-empty cells only receive momentum together with mass.
enum class MacroScheme { muscl, kinetic };

struct SolverOptions {
    ThetaPolicy theta_policy = ThetaPolicy::sign_of_c;
    double theta = 0.0;
    F5Variant f5 = F5Variant::improved;
    ForceScheme force = ForceScheme::unsplit;
    MacroScheme macro = MacroScheme::muscl;
    bool transport = true;
    CflPolicy cfl_policy = CflPolicy::error;
    double cfl = 0.9;
    double dt_max = 1e-2;
    /// Balance the momentum that the zero-flux xi-boundary injects through F4.
    bool wall_closure = true;
};

/// Fluxes on x-faces: (nx + 1) faces by nxi rows; face k sits between cells k-1 and k.
struct XFlux {
    std::size_t nx = 0;
    std::size_t nxi = 0;
    std::vector<double> v;
    XFlux(std::size_t nx_, std::size_t nxi_) : nx(nx_), nxi(nxi_), v((nx_ + 1) * nxi_, 0.0) {}
    double& operator()(std::size_t k, std::size_t j) noexcept { return v[k * nxi + j]; }
    double operator()(std::size_t k, std::size_t j) const noexcept { return v[k * nxi + j]; }
};

/// Fluxes on xi-faces: nx cells by (nxi + 1) faces; face k sits between rows k-1 and k.
struct XiFlux {
    std::size_t nx = 0;
    std::size_t nxi = 0;
    std::vector<double> v;
    XiFlux(std::size_t nx_, std::size_t nxi_) : nx(nx_), nxi(nxi_), v(nx_ * (nxi_ + 1), 0.0) {}
    double& operator()(std::size_t i, std::size_t k) noexcept { return v[i * (nxi + 1) + k]; }
    double operator()(std::size_t i, std::size_t k) const noexcept { return v[i * (nxi + 1) + k]; }
};

namespace detail {

/// Ghost x-index for a kinetic field: periodic wrap or zero-gradient copy.
inline std::size_t xcell(std::ptrdiff_t i, const PhaseGrid& grid) {
    return ghost_index(i, grid.nx, grid.bc_x);
}

inline void require_zero_centred(const PhaseGrid& grid) {
    if (!grid.zero_centred) throw ConfigError("kinetic: xi grid must have a cell centre at 0");
}

} // namespace detail

/// Upwind flux of u g through x-faces.
inline XFlux flux_F1(const Field& g, const std::vector<double>& u_face) {
    const auto& grid = g.grid;
    XFlux F(grid.nx, grid.nxi);
    for (std::size_t k = 0; k <= grid.nx; ++k) {
        const double a = u_face[k];
        if (a == 0.0) continue;
        const auto k_ = static_cast<std::ptrdiff_t>(k);
        const std::size_t src = detail::xcell(a >= 0.0 ? k_ - 1 : k_, grid);
        for (std::size_t j = 0; j < grid.nxi; ++j) F(k, j) = a * g(src, j);
    }
    return F;
}

/// Upwind flux of (xi / omega) g through x-faces, split at the row xi = 0.
inline XFlux flux_F2(const Field& g, const std::vector<double>& omega_face) {
    const auto& grid = g.grid;
    detail::require_zero_centred(grid);
    XFlux F(grid.nx, grid.nxi);
    for (std::size_t k = 0; k <= grid.nx; ++k) {
        const auto k_ = static_cast<std::ptrdiff_t>(k);
        const std::size_t left = detail::xcell(k_ - 1, grid);
        const std::size_t right = detail::xcell(k_, grid);
        const double inv = 1.0 / omega_face[k];
        for (std::size_t j = 0; j < grid.nxi; ++j) {
            const double s = grid.xi(j) * inv;
            F(k, j) = s * (j >= grid.J ? g(left, j) : g(right, j));
        }
    }
    return F;
}

/// MCU flux of -xi (d_x u) g per x-cell; c_i = -(d_x u)_i.
inline XiFlux flux_F3(const Field& g, const std::vector<double>& c,
                      const std::vector<double>& theta) {
    const auto& grid = g.grid;
    XiFlux F(grid.nx, grid.nxi);
    for (std::size_t i = 0; i < grid.nx; ++i) {
        const auto row = mcu_drift_flux(g.row(i), grid, c[i], theta[i]);
        std::copy(row.begin(), row.end(), F.v.begin() + static_cast<std::ptrdiff_t>(i * (grid.nxi + 1)));
    }
    return F;
}

/// Pressure-type gradient used by the xi-force term.
///
/// MT (omega uniform): (d_x P)_i with the biased one-sided differences.
/// CS: [d_x(P / omega^2)]_i; cell i pairs with omega_{i+1/2}^2 and cell i-1 with
/// omega_{i-1/2}^2 in the forward branch (mirrored in the backward branch), which
/// makes the F2 + F4 + F5 momentum budget cancel exactly.
inline std::vector<double> force_gradient(const Field& g, const std::vector<double>& omega_face,
                                          Model model) {
    const auto& grid = g.grid;
    detail::require_zero_centred(grid);
    std::vector<double> D(grid.nx, 0.0);
    const std::size_t J = grid.J;
    for (std::size_t i = 0; i < grid.nx; ++i) {
        const auto i_ = static_cast<std::ptrdiff_t>(i);
        const std::size_t im = detail::xcell(i_ - 1, grid);
        const std::size_t ip = detail::xcell(i_ + 1, grid);
        double s = 0.0;
        if (model == Model::mt) {
            for (std::size_t j = J + 1; j < grid.nxi; ++j) {
                const double x2 = grid.xi(j) * grid.xi(j);
                s += x2 * (g(i, j) - g(im, j));
            }
            for (std::size_t j = 0; j < J; ++j) {
                const double x2 = grid.xi(j) * grid.xi(j);
                s += x2 * (g(ip, j) - g(i, j));
            }
        } else {
            const double hp2 = omega_face[i + 1] * omega_face[i + 1];
            const double hm2 = omega_face[i] * omega_face[i];
            for (std::size_t j = J + 1; j < grid.nxi; ++j) {
                const double x2 = grid.xi(j) * grid.xi(j);
                s += x2 * (g(i, j) / hp2 - g(im, j) / hm2);
            }
            for (std::size_t j = 0; j < J; ++j) {
                const double x2 = grid.xi(j) * grid.xi(j);
                s += x2 * (g(ip, j) / hp2 - g(i, j) / hm2);
            }
        }
        D[i] = s * grid.dxi / grid.dx;
    }
    return D;
}

/// xi-velocity a_i of the force term: (d_x P)_i / (rho_i omega_i) for MT,
/// ((omega_{i+1/2} + omega_{i-1/2}) / 2) [d_x(P/omega^2)]_i / rho_i for CS.
/// Empty cells get a_i = 0 (nothing to move).
inline std::vector<double> force_speed(const std::vector<double>& D, const std::vector<double>& rho,
                                       const std::vector<double>& omega,
                                       const std::vector<double>& omega_face, Model model) {
    std::vector<double> a(D.size(), 0.0);
    for (std::size_t i = 0; i < D.size(); ++i) {
        if (rho[i] < 0.0) throw NumericalError(NumericalFailure::vacuum, "force term: negative density");
        if (rho[i] == 0.0) continue;
        const double w = model == Model::mt ? omega[i] : 0.5 * (omega_face[i + 1] + omega_face[i]);
        a[i] = model == Model::mt ? D[i] / (rho[i] * w) : w * D[i] / rho[i];
    }
    return a;
}

/// Upwind xi-flux a_i g.
inline XiFlux flux_F4(const Field& g, const std::vector<double>& a) {
    const auto& grid = g.grid;
    XiFlux F(grid.nx, grid.nxi);
    for (std::size_t i = 0; i < grid.nx; ++i) {
        const double ai = a[i];
        if (ai == 0.0) continue;
        for (std::size_t j = 0; j + 1 < grid.nxi; ++j) {
            F(i, j + 1) = ai * (ai >= 0.0 ? g(i, j) : g(i, j + 1));
        }
    }
    return F;
}

/// Convenience overload computing the force speed from the field itself.
inline XiFlux flux_F4(const Field& g, const std::vector<double>& rho,
                      const std::vector<double>& omega, Model model) {
    const auto of = face_average(omega, g.grid.bc_x);
    const auto D = force_gradient(g, of, model);
    return flux_F4(g, force_speed(D, rho, omega, of, model));
}

/// Flux of (d_x omega / omega^2) xi^2 g. d_x omega is the centred difference of the
/// face values, (omega_{i+1/2} - omega_{i-1/2}) / dx.
inline XiFlux flux_F5(const Field& g, const std::vector<double>& omega_face,
                      F5Variant variant = F5Variant::improved) {
    const auto& grid = g.grid;
    detail::require_zero_centred(grid);
    XiFlux F(grid.nx, grid.nxi);
    const std::size_t J = grid.J;
    for (std::size_t i = 0; i < grid.nx; ++i) {
        const double hp = omega_face[i + 1];
        const double hm = omega_face[i];
        const double grad = (hp - hm) / grid.dx;
        if (grad == 0.0) continue;
        const double ihp2 = 1.0 / (hp * hp);
        const double ihm2 = 1.0 / (hm * hm);
        const auto i_ = static_cast<std::ptrdiff_t>(i);
        const std::size_t im = detail::xcell(i_ - 1, grid);
        const std::size_t ip = detail::xcell(i_ + 1, grid);
        for (std::size_t j = 0; j + 1 < grid.nxi; ++j) {
            // Upper branch pairs (i, i-1); lower branch pairs (i+1, i).
            const std::size_t a = j >= J ? i : ip;
            const std::size_t b = j >= J ? im : i;
            double val = 0.0;
            if (variant == F5Variant::improved) {
                const double w = 0.25 * grid.xi(j) * grid.xi(j + 1);
                val = w * ((g(a, j) + g(a, j + 1)) * ihp2 + (g(b, j) + g(b, j + 1)) * ihm2);
            } else {
                const double w = 0.5 * grid.xi(j) * grid.xi(j);
                val = w * (g(a, j) * ihp2 + g(b, j) * ihm2);
            }
            F(i, j + 1) = val * grad;
        }
    }
    return F;
}

/// F3 and F5 evaluated on the two outer xi-faces as if the box continued with
/// empty cells. The solver holds those faces at zero flux; dxi * (lo + hi) is the
/// momentum rate that the closed boundary adds to row i.
struct OuterFlux {
    std::vector<double> lo;
    std::vector<double> hi;
};

inline OuterFlux outer_fluxes(const Field& g, const std::vector<double>& c,
                              const std::vector<double>& theta, const std::vector<double>* omega_face,
                              F5Variant variant) {
    const auto& grid = g.grid;
    detail::require_zero_centred(grid);
    const std::size_t nx = grid.nx;
    const std::size_t n = grid.nxi;
    const double xlo = grid.xi(0);
    const double xhi = grid.xi(n - 1);
    const double xlo_ghost = xlo - grid.dxi;
    const double xhi_ghost = xhi + grid.dxi;
    OuterFlux out{std::vector<double>(nx, 0.0), std::vector<double>(nx, 0.0)};
    for (std::size_t i = 0; i < nx; ++i) {
        const double g0 = g(i, 0);
        const double gn = g(i, n - 1);
        if (c[i] != 0.0) {
            const double corr = 0.5 * c[i] * theta[i] * grid.dxi;
            out.lo[i] = (c[i] > 0.0 ? c[i] * xlo * g0 : 0.0) - corr * g0;
            out.hi[i] = (c[i] > 0.0 ? c[i] * xhi * gn : 0.0) + corr * gn;
        }
        if (omega_face == nullptr) continue;
        const double hp = (*omega_face)[i + 1];
        const double hm = (*omega_face)[i];
        const double grad = (hp - hm) / grid.dx;
        if (grad == 0.0) continue;
        const double ihp2 = 1.0 / (hp * hp);
        const double ihm2 = 1.0 / (hm * hm);
        const auto i_ = static_cast<std::ptrdiff_t>(i);
        const std::size_t im = detail::xcell(i_ - 1, grid);
        const std::size_t ip = detail::xcell(i_ + 1, grid);
        if (variant == F5Variant::improved) {
            out.lo[i] += 0.25 * xlo_ghost * xlo * (g(ip, 0) * ihp2 + g(i, 0) * ihm2) * grad;
            out.hi[i] += 0.25 * xhi * xhi_ghost * (g(i, n - 1) * ihp2 + g(im, n - 1) * ihm2) * grad;
        } else {
            out.hi[i] += 0.5 * xhi * xhi * (g(i, n - 1) * ihp2 + g(im, n - 1) * ihm2) * grad;
        }
    }
    return out;
}

/// Force speed with the closed-box correction: A_i S_i = a_i rho_i + dxi (lo_i + hi_i),
/// where S_i is the mass that the upwind F4 actually moves (rho_i minus the
/// boundary cell it cannot empty). Equals a_i whenever both boundary cells are empty.
inline std::vector<double> wall_balanced_speed(const Field& g, const std::vector<double>& a,
                                               const std::vector<double>& rho, const OuterFlux& outer) {
    const auto& grid = g.grid;
    const std::size_t n = grid.nxi;
    std::vector<double> A(a);
    for (std::size_t i = 0; i < grid.nx; ++i) {
        const double extra = grid.dxi * (outer.lo[i] + outer.hi[i]);
        if (extra == 0.0 && g(i, 0) == 0.0 && g(i, n - 1) == 0.0) continue;
        const double N = a[i] * rho[i] + extra;
        if (N == 0.0) {
            A[i] = 0.0;
            continue;
        }
        const double S = rho[i] - grid.dxi * (N > 0.0 ? g(i, n - 1) : g(i, 0));
        if (S > 0.0) A[i] = N / S;
    }
    return A;
}

namespace detail {

/// Flux-form shift of one row by s cells (multi-cell upwind), zero flux through the
/// outer faces. src and dst must not alias.
inline void remap_row(const double* src, double* dst, std::size_t n, double s, std::vector<double>& Fm) {
    Fm.assign(n + 1, 0.0);
    const double as = std::abs(s);
    const auto q = static_cast<std::ptrdiff_t>(std::floor(as));
    const double frac = as - static_cast<double>(q);
    const auto at = [&](std::ptrdiff_t j) {
        return (j >= 0 && j < static_cast<std::ptrdiff_t>(n)) ? src[static_cast<std::size_t>(j)] : 0.0;
    };
    for (std::size_t k = 1; k < n; ++k) {
        const auto k_ = static_cast<std::ptrdiff_t>(k);
        double m = 0.0;
        if (s > 0.0) {
            for (std::ptrdiff_t p = k_ - q; p <= k_ - 1; ++p) m += at(p);
            m += frac * at(k_ - q - 1);
            Fm[k] = m;
        } else {
            for (std::ptrdiff_t p = k_; p <= k_ + q - 1; ++p) m += at(p);
            m += frac * at(k_ + q);
            Fm[k] = -m;
        }
    }
    for (std::size_t j = 0; j < n; ++j) dst[j] = src[j] - (Fm[j + 1] - Fm[j]);
}

inline double row_momentum(const double* r, const PhaseGrid& grid) {
    double m = 0.0;
    for (std::size_t j = 0; j < grid.nxi; ++j) m += grid.xi(j) * r[j];
    return grid.dxi * m;
}

} // namespace detail

/// Shifts every row i by a_i dt in xi using exact flux-form remapping
/// (multi-cell upwind). Zero flux through the outer faces.
inline void remap_rows(Field& g, const std::vector<double>& a, double dt) {
    const auto& grid = g.grid;
    const std::size_t n = grid.nxi;
    std::vector<double> Fm;
    std::vector<double> row(n);
    for (std::size_t i = 0; i < grid.nx; ++i) {
        const double s = a[i] * dt / grid.dxi;
        if (s == 0.0) continue;
        auto r = g.row(i);
        std::copy(r.begin(), r.end(), row.begin());
        detail::remap_row(row.data(), r.data(), n, s, Fm);
    }
}

/// Remap whose shift is chosen so that each row's momentum changes by exactly
/// dM_i (the shift a row would get without walls is dM_i / (rho_i dxi) cells).
/// Mass piling up against a wall moves less momentum per cell, so the shift is
/// found by bisection; dM_i outside the reachable range is clipped.
inline void remap_rows_momentum(Field& g, const std::vector<double>& dM) {
    const auto& grid = g.grid;
    const std::size_t n = grid.nxi;
    std::vector<double> Fm;
    std::vector<double> row(n);
    std::vector<double> trial(n);
    for (std::size_t i = 0; i < grid.nx; ++i) {
        if (dM[i] == 0.0) continue;
        auto r = g.row(i);
        std::copy(r.begin(), r.end(), row.begin());
        const double rho = row_moments(r, grid).rho;
        if (!(rho > 0.0)) continue;
        const double M0 = detail::row_momentum(row.data(), grid);
        const auto gain = [&](double s) {
            detail::remap_row(row.data(), trial.data(), n, s, Fm);
            return detail::row_momentum(trial.data(), grid) - M0;
        };
        const double s0 = dM[i] / (rho * grid.dxi);
        const double scale = grid.dxi * rho * (std::abs(grid.xi(0)) + std::abs(grid.xi(n - 1)));
        double s = s0;
        if (std::abs(gain(s0) - dM[i]) > 1e-15 * scale) {
            // Bracket: gain is nondecreasing in s for a nonnegative row, and
            // saturates once the whole row sits in one end cell (s = +-n).
            const bool below = gain(s0) < dM[i];
            double lo = below ? s0 : -static_cast<double>(n);
            double hi = below ? static_cast<double>(n) : s0;
            for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                (gain(mid) < dM[i] ? lo : hi) = mid;
            }
            s = std::abs(gain(lo) - dM[i]) <= std::abs(gain(hi) - dM[i]) ? lo : hi;
        }
        detail::remap_row(row.data(), r.data(), n, s, Fm);
    }
}

/// Kinetic update of (rho, rho u): face momentum flux sum_j (u_k + xi_j / omega_k) (F1 + F2)_kj dxi,
/// source rho B. rho is the row density of the updated g. An empty cell takes the
/// mean velocity of its occupied neighbours so that face speeds next to it stay
/// those of the flock.
inline MacroUpdate kinetic_macro_update(const Field& g_old, const Field& g_new, const std::vector<double>& u,
                                        const std::vector<double>& u_face, const std::vector<double>& w_face,
                                        const XFlux& F1, const XFlux& F2, const std::vector<double>& B,
                                        double dt) {
    const auto& grid = g_old.grid;
    const std::size_t nx = grid.nx;
    std::vector<double> G(nx + 1, 0.0);
    for (std::size_t k = 0; k <= nx; ++k) {
        double m = 0.0;
        for (std::size_t j = 0; j < grid.nxi; ++j) {
            const double f = F1(k, j) + F2(k, j);
            if (f != 0.0) m += (u_face[k] + grid.xi(j) / w_face[k]) * f;
        }
        G[k] = grid.dxi * m;
    }
    MacroUpdate out;
    out.rho.resize(nx);
    out.u.resize(nx);
    out.m.resize(nx);
    const double rx = dt / grid.dx;
    for (std::size_t i = 0; i < nx; ++i) {
        const double rho0 = row_moments(g_old.row(i), grid).rho;
        const double r = row_moments(g_new.row(i), grid).rho;
        if (r < 0.0) throw NumericalError(NumericalFailure::vacuum, "kinetic macro update: negative density");
        out.rho[i] = r;
        out.m[i] = rho0 * u[i] - rx * (G[i + 1] - G[i]) + dt * rho0 * B[i];
    }
    for (std::size_t i = 0; i < nx; ++i) {
        if (out.rho[i] > 0.0) {
            out.u[i] = out.m[i] / out.rho[i];
            if (!std::isfinite(out.u[i])) {
                throw NumericalError(NumericalFailure::non_finite, "kinetic macro update: non-finite velocity");
            }
        }
    }
    for (std::size_t i = 0; i < nx; ++i) {
        if (out.rho[i] > 0.0) continue;
        out.m[i] = 0.0;
        const auto i_ = static_cast<std::ptrdiff_t>(i);
        double sum = 0.0;
        int cnt = 0;
        for (const std::ptrdiff_t d : {-1, 1}) {
            const std::ptrdiff_t k = i_ + d;
            if (grid.bc_x != BoundaryKind::periodic && (k < 0 || k >= static_cast<std::ptrdiff_t>(nx))) continue;
            const std::size_t kk = detail::xcell(k, grid);
            if (out.rho[kk] > 0.0) {
                sum += out.u[kk];
                ++cnt;
            }
        }
        out.u[i] = cnt > 0 ? sum / cnt : u[i];
    }
    return out;
}

/// Per-x-cell MCU blend parameter for the stretching term.
inline std::vector<double> stretch_theta(const std::vector<double>& c, const SolverOptions& opt) {
    std::vector<double> th(c.size(), opt.theta);
    if (opt.theta_policy == ThetaPolicy::sign_of_c) {
        for (std::size_t i = 0; i < c.size(); ++i) th[i] = c[i] > 0.0 ? 1.0 : (c[i] < 0.0 ? -1.0 : 0.0);
    }
    return th;
}

struct StepReport {
    RescaledState next;
    AlignmentFields alignment;
    MomentSet moments;            ///< of the input state
    std::vector<double> rho_macro; ///< density advanced by the continuity equation
};

/// Time stepper for the rescaled system. Caches the influence table and x-mesh.
class KineticSolver {
public:
    KineticSolver(const PhaseGrid& grid, const InfluenceFunction& phi, SolverOptions opt = {})
        : grid_(grid), W_(phi, grid), mesh_(ClawMesh::from_grid(grid)), opt_(opt) {
        detail::require_zero_centred(grid);
    }

    [[nodiscard]] const SolverOptions& options() const noexcept { return opt_; }
    [[nodiscard]] const InfluenceMatrix& influence() const noexcept { return W_; }
    [[nodiscard]] const ClawMesh& mesh() const noexcept { return mesh_; }

    [[nodiscard]] RescaledState step(const RescaledState& s, double dt) const {
        return step_detailed(s, dt).next;
    }

    [[nodiscard]] StepReport step_detailed(const RescaledState& s, double dt) const {
        if (!(dt > 0.0)) throw ConfigError("kinetic step: dt must be positive");
        check_state(s);
        const auto& grid = grid_;
        const std::size_t nx = grid.nx;
        const std::size_t nxi = grid.nxi;

        StepReport rep;
        rep.moments = moments(s.g);
        const auto& rho = rep.moments.rho;
        rep.alignment = compute_alignment(s.model, W_, rho, s.u, grid);
        const auto& A = rep.alignment.A;
        const auto& B = rep.alignment.B;

        RescaledState out = s;
        out.t = s.t + dt;

        if (!opt_.transport) {
            rep.rho_macro = rho;
            for (std::size_t i = 0; i < nx; ++i) out.u[i] = s.u[i] + dt * B[i];
            update_omega_homog(s, out, A, dt);
            rep.next = std::move(out);
            return rep;
        }

        const Model fm = s.model == Model::mt ? Model::mt : Model::cs;
        const auto u_face = face_average(s.u, grid.bc_x);
        const auto w_face = face_average(s.omega, grid.bc_x);
        const auto F1 = flux_F1(s.g, u_face);
        const auto F2 = flux_F2(s.g, w_face);
        const auto dudx = central_gradient(s.u, mesh_);
        std::vector<double> c(nx);
        for (std::size_t i = 0; i < nx; ++i) c[i] = -dudx[i];
        const auto D = force_gradient(s.g, w_face, fm);
        const bool split = opt_.force == ForceScheme::split_remap;
        const bool has_f5 = s.model != Model::mt;
        const auto F3 = flux_F3(s.g, c, stretch_theta(c, opt_));
        const auto a = split ? std::vector<double>(nx, 0.0) : unsplit_speed(s, rho, c, w_face);
        const XiFlux F4 = split ? XiFlux(nx, nxi) : flux_F4(s.g, a);
        const XiFlux F5 = has_f5 ? flux_F5(s.g, w_face, opt_.f5) : XiFlux(nx, nxi);

        check_cfl(courant(s, c, a, w_face, dt), 1.0, opt_.cfl_policy, "kinetic step");

        const double rx = dt / grid.dx;
        const double rv = dt / grid.dxi;
        parallel_for(nx, [&](std::size_t i) {
            for (std::size_t j = 0; j < nxi; ++j) {
                const double dx_flux = (F1(i + 1, j) - F1(i, j)) + (F2(i + 1, j) - F2(i, j));
                const double dv_flux = (F3(i, j + 1) - F3(i, j)) + (F4(i, j + 1) - F4(i, j)) +
                                       (F5(i, j + 1) - F5(i, j));
                out.g(i, j) = s.g(i, j) - rx * dx_flux - rv * dv_flux;
            }
        });

        if (split) {
            std::vector<double> rho_star(nx);
            for (std::size_t i = 0; i < nx; ++i) rho_star[i] = row_moments(out.g.row(i), grid).rho;
            const auto a_star = force_speed(D, rho_star, s.omega, w_face, fm);
            if (opt_.wall_closure) {
                const auto outer =
                    outer_fluxes(s.g, c, stretch_theta(c, opt_), has_f5 ? &w_face : nullptr, opt_.f5);
                std::vector<double> dM(nx);
                for (std::size_t i = 0; i < nx; ++i) {
                    dM[i] = dt * (a_star[i] * rho_star[i] + grid.dxi * (outer.lo[i] + outer.hi[i]));
                }
                remap_rows_momentum(out.g, dM);
            } else {
                remap_rows(out.g, a_star, dt);
            }
        }

        if (opt_.macro == MacroScheme::kinetic) {
            auto macro = kinetic_macro_update(s.g, out.g, s.u, u_face, w_face, F1, F2, B, dt);
            out.u = std::move(macro.u);
            rep.rho_macro = std::move(macro.rho);
        } else {
            MacroOptions mo;
            mo.cfl_policy = opt_.cfl_policy;
            auto macro = step_macro_u(rho, s.u, rep.moments.P, s.omega, B, dt, mesh_, mo);
            out.u = std::move(macro.u);
            rep.rho_macro = std::move(macro.rho);
        }

        if (s.model == Model::mt) {
            for (std::size_t i = 0; i < nx; ++i) out.omega[i] = s.omega0[i] * std::exp(out.t);
        } else {
            out.omega = step_omega_cs(s.omega, s.u, A, dt, mesh_, opt_.cfl_policy);
        }
        for (double v : out.g.values) {
            if (!std::isfinite(v)) throw NumericalError(NumericalFailure::non_finite, "kinetic step: non-finite g");
        }
        rep.next = std::move(out);
        return rep;
    }

    /// Largest stable step: cfl / (x rate + xi rate), capped by dt_max.
    [[nodiscard]] double stable_dt(const RescaledState& s) const {
        if (!(opt_.cfl > 0.0 && opt_.cfl <= 1.0)) throw ConfigError("stable_dt: cfl must lie in (0, 1]");
        const std::size_t nx = grid_.nx;
        const auto ms = moments(s.g);
        const auto w_face = face_average(s.omega, grid_.bc_x);
        std::vector<double> c(nx, 0.0);
        std::vector<double> a(nx, 0.0);
        if (opt_.transport) {
            const auto dudx = central_gradient(s.u, mesh_);
            for (std::size_t i = 0; i < nx; ++i) c[i] = -dudx[i];
            if (opt_.force == ForceScheme::unsplit) a = unsplit_speed(s, ms.rho, c, w_face);
        }
        const double rate = courant(s, c, a, w_face, 1.0);
        if (!(rate > 0.0)) return opt_.dt_max;
        return std::min(opt_.cfl / rate, opt_.dt_max);
    }

private:
    [[nodiscard]] std::vector<double> unsplit_speed(const RescaledState& s, const std::vector<double>& rho,
                                                    const std::vector<double>& c,
                                                    const std::vector<double>& w_face) const {
        const Model fm = s.model == Model::mt ? Model::mt : Model::cs;
        auto a = force_speed(force_gradient(s.g, w_face, fm), rho, s.omega, w_face, fm);
        if (!opt_.wall_closure) return a;
        const bool has_f5 = s.model != Model::mt;
        return wall_balanced_speed(s.g, a, rho,
                                   outer_fluxes(s.g, c, stretch_theta(c, opt_), has_f5 ? &w_face : nullptr, opt_.f5));
    }

    void check_state(const RescaledState& s) const {
        if (s.g.grid.nx != grid_.nx || s.g.grid.nxi != grid_.nxi || s.u.size() != grid_.nx ||
            s.omega.size() != grid_.nx || s.omega0.size() != grid_.nx) {
            throw ConfigError("kinetic step: state does not match the solver grid");
        }
        for (double w : s.omega) {
            if (!(w > 0.0)) throw NumericalError(NumericalFailure::nonpositive_omega, "kinetic step: omega must be > 0");
        }
    }

    /// Outflow rate of the worst cell times dt (x and xi terms summed).
    [[nodiscard]] double courant(const RescaledState& s, const std::vector<double>& c,
                                 const std::vector<double>& a, const std::vector<double>& w_face,
                                 double dt) const {
        const double L = grid_.xi_half_width();
        double rx = 0.0;
        double rv = 0.0;
        for (std::size_t i = 0; i < grid_.nx; ++i) {
            if (opt_.transport) {
                const double wmin = std::min(w_face[i], w_face[i + 1]);
                rx = std::max(rx, std::max(std::abs(s.u[i]), 0.0) + L / wmin);
            }
            double v = std::abs(c[i]) * L + std::abs(a[i]);
            if (opt_.transport && s.model != Model::mt) {
                const double hp = w_face[i + 1];
                const double hm = w_face[i];
                v += std::abs(hp - hm) / grid_.dx * L * L / std::min(hp * hp, hm * hm);
            }
            rv = std::max(rv, v);
        }
        return dt * (rx / grid_.dx + rv / grid_.dxi);
    }

    void update_omega_homog(const RescaledState& s, RescaledState& out,
                            const std::vector<double>& A, double dt) const {
        for (std::size_t i = 0; i < grid_.nx; ++i) {
            out.omega[i] = s.model == Model::mt ? s.omega0[i] * std::exp(out.t) : s.omega[i] * (1.0 + dt * A[i]);
        }
    }

    PhaseGrid grid_;
    InfluenceMatrix W_;
    ClawMesh mesh_;
    SolverOptions opt_;
};

inline RescaledState step_mt(const RescaledState& s, double dt, const SolverOptions& opt = {}) {
    if (s.model != Model::mt) throw ConfigError("step_mt: state is not a Motsch-Tadmor state");
    return KineticSolver(s.g.grid, s.phi, opt).step(s, dt);
}

inline RescaledState step_cs(const RescaledState& s, double dt, const SolverOptions& opt = {}) {
    if (s.model == Model::mt) throw ConfigError("step_cs: state is a Motsch-Tadmor state");
    return KineticSolver(s.g.grid, s.phi, opt).step(s, dt);
}

inline double stable_dt(const RescaledState& s, const SolverOptions& opt = {}) {
    return KineticSolver(s.g.grid, s.phi, opt).stable_dt(s);
}

/// f0(x, v) -> density; omega0(x) -> positive scaling.
using PhaseSampler = std::function<double(double, double)>;
using ProfileSampler = std::function<double(double)>;

/// Builds (g, u, omega) from f0. rho and u come from a v-quadrature on v_grid
/// (same x cells as xi_grid); g is sampled at xi centres and then projected so
/// that every cell has zero discrete momentum.
inline RescaledState rescale_initial(const PhaseSampler& f0, const ProfileSampler& omega0,
                                     const PhaseGrid& v_grid, const PhaseGrid& xi_grid, Model model,
                                     const InfluenceFunction& phi) {
    detail::require_zero_centred(xi_grid);
    if (v_grid.nx != xi_grid.nx || v_grid.x_min != xi_grid.x_min || v_grid.x_max != xi_grid.x_max) {
        throw ConfigError("rescale_initial: v and xi grids must share the x cells");
    }
    const std::size_t nx = xi_grid.nx;
    RescaledState s;
    s.model = model;
    s.phi = phi;
    s.g = Field(xi_grid);
    s.u.assign(nx, 0.0);
    s.omega.assign(nx, 1.0);
    for (std::size_t i = 0; i < nx; ++i) {
        const double x = xi_grid.x(i);
        double m0 = 0.0;
        double m1 = 0.0;
        for (std::size_t l = 0; l < v_grid.nxi; ++l) {
            const double v = v_grid.xi(l);
            const double f = f0(x, v);
            if (!(f >= 0.0)) throw ConfigError("rescale_initial: f0 must be nonnegative and finite");
            m0 += f;
            m1 += v * f;
        }
        m0 *= v_grid.dxi;
        m1 *= v_grid.dxi;
        const double w0 = omega0(x);
        if (!(w0 > 0.0)) throw ConfigError("rescale_initial: omega0 must be > 0");
        s.omega[i] = w0;
        if (m0 > 0.0) {
            s.u[i] = m1 / m0;
        } else if (model == Model::mt) {
            std::ostringstream os;
            os << "rescale_initial: empty cell " << i << " (Motsch-Tadmor needs rho > 0)";
            throw ConfigError(os.str());
        }
        for (std::size_t j = 0; j < xi_grid.nxi; ++j) {
            s.g(i, j) = f0(x, s.u[i] + xi_grid.xi(j) / w0) / w0;
        }
        auto row = s.g.row(i);
        for (int it = 0; it < 3; ++it) {
            const auto r = row_moments(row, xi_grid);
            if (r.M == 0.0 || !(r.P > 0.0)) break;
            for (std::size_t j = 0; j < row.size(); ++j) {
                row[j] = std::max(0.0, row[j] * (1.0 - xi_grid.xi(j) * r.M / r.P));
            }
        }
    }
    s.omega0 = s.omega;
    if (model == Model::mt) {
        for (double w : s.omega) {
            if (w != s.omega.front()) throw ConfigError("rescale_initial: Motsch-Tadmor needs a uniform omega0");
        }
    }
    return s;
}

} // namespace flockkit
