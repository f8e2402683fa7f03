#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <sstream>
#include <vector>

#include "flockkit/errors.hpp"
#include "flockkit/grid.hpp"
#include "flockkit/log.hpp"

namespace flockkit {

/// Van Leer limiter (theta + |theta|) / (1 + |theta|).
inline double van_leer(double theta) noexcept {
    return (theta + std::abs(theta)) / (1.0 + std::abs(theta));
}

/// 1D control volumes given by their n + 1 face positions.
struct ClawMesh {
    std::vector<double> faces;
    BoundaryKind bc = BoundaryKind::periodic;

    static ClawMesh uniform(std::size_t n, double a, double b, BoundaryKind bc) {
        if (n < 2 || !(a < b)) throw ConfigError("claw: need n >= 2 cells on an ordered interval");
        ClawMesh m;
        m.bc = bc;
        m.faces.resize(n + 1);
        const double h = (b - a) / static_cast<double>(n);
        for (std::size_t k = 0; k <= n; ++k) m.faces[k] = a + static_cast<double>(k) * h;
        m.faces[n] = b;
        return m;
    }

    static ClawMesh from_grid(const PhaseGrid& g) {
        return uniform(g.nx, g.x_min, g.x_max, g.bc_x);
    }

    [[nodiscard]] std::size_t n() const noexcept { return faces.size() - 1; }
    [[nodiscard]] double width(std::size_t i) const noexcept { return faces[i + 1] - faces[i]; }
    [[nodiscard]] double centre(std::size_t i) const noexcept {
        return 0.5 * (faces[i] + faces[i + 1]);
    }
    [[nodiscard]] double length() const noexcept { return faces.back() - faces.front(); }
    [[nodiscard]] double min_width() const noexcept {
        double h = width(0);
        for (std::size_t i = 1; i < n(); ++i) h = std::min(h, width(i));
        return h;
    }
};

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct ClawState {
    ClawMesh mesh;
    std::vector<Vec<N>> U;
};

/// G(U) and its spectral radius. The face index k (face between cells k-1 and k)
/// lets a flux carry position-dependent coefficients.
template <class F, std::size_t N>
concept ConservationFlux = requires(const F& f, const Vec<N>& u, std::size_t k) {
    { f.evaluate(u, k) } -> std::convertible_to<Vec<N>>;
    { f.max_wavespeed(u, k) } -> std::convertible_to<double>;
};

namespace detail {

/// Ghost index: periodic wrap or zero-gradient clamp.
inline std::size_t ghost_index(std::ptrdiff_t i, std::size_t n, BoundaryKind bc) {
    const auto m = static_cast<std::ptrdiff_t>(n);
    if (bc == BoundaryKind::periodic) return static_cast<std::size_t>(((i % m) + m) % m);
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, m - 1));
}

/// Cell value with ghost cells: periodic wrap or zero-gradient copy.
template <class T>
const T& ghost(const std::vector<T>& v, std::ptrdiff_t i, BoundaryKind bc) {
    return v[ghost_index(i, v.size(), bc)];
}

/// phi(theta_i) * (u_{i+1} - u_i), with phi = 0 when the forward difference vanishes.
inline double limited_increment(double um, double u0, double up) noexcept {
    const double fwd = up - u0;
    const double scale = std::max({std::abs(um), std::abs(u0), std::abs(up)});
    if (std::abs(fwd) <= 1e-14 * scale || fwd == 0.0) return 0.0;
    return van_leer((u0 - um) / fwd) * fwd;
}

} // namespace detail

template <std::size_t N>
struct InterfaceStates {
    std::vector<Vec<N>> left;  ///< u_{k-1/2,-}, k = 0..n
    std::vector<Vec<N>> right; ///< u_{k-1/2,+}
};

/// Slope-limited states on both sides of every face (face k between cells k-1 and k).
template <std::size_t N>
InterfaceStates<N> muscl_reconstruct(const std::vector<Vec<N>>& U, BoundaryKind bc) {
    const auto n = static_cast<std::ptrdiff_t>(U.size());
    InterfaceStates<N> s;
    s.left.resize(static_cast<std::size_t>(n + 1));
    s.right.resize(static_cast<std::size_t>(n + 1));
    for (std::ptrdiff_t k = 0; k <= n; ++k) {
        const auto& a = detail::ghost(U, k - 2, bc);
        const auto& b = detail::ghost(U, k - 1, bc);
        const auto& c = detail::ghost(U, k, bc);
        const auto& d = detail::ghost(U, k + 1, bc);
        auto& L = s.left[static_cast<std::size_t>(k)];
        auto& R = s.right[static_cast<std::size_t>(k)];
        for (std::size_t q = 0; q < N; ++q) {
            L[q] = b[q] + 0.5 * detail::limited_increment(a[q], b[q], c[q]);
            R[q] = c[q] - 0.5 * detail::limited_increment(b[q], c[q], d[q]);
        }
    }
    return s;
}

/// Local Lax-Friedrichs (Rusanov) flux.
template <std::size_t N, ConservationFlux<N> F>
Vec<N> lf_flux(const Vec<N>& uL, const Vec<N>& uR, const F& flux, std::size_t k = 0) {
    const Vec<N> gL = flux.evaluate(uL, k);
    const Vec<N> gR = flux.evaluate(uR, k);
    const double lam = std::max(flux.max_wavespeed(uL, k), flux.max_wavespeed(uR, k));
    Vec<N> out{};
    for (std::size_t q = 0; q < N; ++q) out[q] = 0.5 * (gL[q] + gR[q]) - 0.5 * lam * (uR[q] - uL[q]);
    return out;
}

template <std::size_t N>
struct FaceFluxes {
    std::vector<Vec<N>> F; ///< size n + 1
    double max_courant = 0.0;
};

template <std::size_t N, ConservationFlux<N> F>
FaceFluxes<N> claw_face_fluxes(const ClawState<N>& state, const F& flux, double dt) {
    const auto& mesh = state.mesh;
    const std::size_t n = mesh.n();
    const auto rec = muscl_reconstruct(state.U, mesh.bc);
    FaceFluxes<N> out;
    out.F.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        if (mesh.bc == BoundaryKind::periodic && k == n) {
            out.F[n] = out.F[0];
            break;
        }
        out.F[k] = lf_flux<N>(rec.left[k], rec.right[k], flux, k);
        const double lam =
            std::max(flux.max_wavespeed(rec.left[k], k), flux.max_wavespeed(rec.right[k], k));
        const double h = std::min(mesh.width(k == 0 ? 0 : k - 1), mesh.width(k == n ? n - 1 : k));
        out.max_courant = std::max(out.max_courant, dt * lam / h);
    }
    return out;
}

inline void check_cfl(double courant, double limit, CflPolicy policy, const char* where) {
    if (!(courant <= limit)) {
        std::ostringstream os;
        os << where << ": CFL number " << courant << " exceeds " << limit;
        if (policy == CflPolicy::error) throw NumericalError(NumericalFailure::cfl_violation, os.str());
        if (policy == CflPolicy::warn) warn_once(where, os.str());
    }
}

/// U_i += dt * (-(F_{i+1/2} - F_{i-1/2}) / |K_i| + H_i). H is a per-volume source rate.
template <std::size_t N>
std::vector<Vec<N>> claw_apply(const std::vector<Vec<N>>& U, const ClawMesh& mesh,
                               const std::vector<Vec<N>>& F, const std::vector<Vec<N>>& H,
                               double dt) {
    std::vector<Vec<N>> out(U.size());
    for (std::size_t i = 0; i < U.size(); ++i) {
        const double r = dt / mesh.width(i);
        for (std::size_t q = 0; q < N; ++q) {
            const double h = H.empty() ? 0.0 : H[i][q];
            out[i][q] = U[i][q] - r * (F[i + 1][q] - F[i][q]) + dt * h;
        }
    }
    return out;
}

/// One forward-Euler MUSCL / Lax-Friedrichs step.
template <std::size_t N, ConservationFlux<N> F>
ClawState<N> step_claw(const ClawState<N>& state, const F& flux, const std::vector<Vec<N>>& source,
                       double dt, CflPolicy policy = CflPolicy::error) {
    if (!(dt > 0.0)) throw ConfigError("claw: dt must be positive");
    const auto ff = claw_face_fluxes(state, flux, dt);
    check_cfl(ff.max_courant, 1.0, policy, "step_claw");
    return {state.mesh, claw_apply(state.U, state.mesh, ff.F, source, dt)};
}

/// Central difference (q_{i+1} - q_{i-1}) / (x_{i+1} - x_{i-1}) with ghost cells.
inline std::vector<double> central_gradient(const std::vector<double>& q, const ClawMesh& mesh) {
    const std::size_t n = q.size();
    std::vector<double> out(n);
    const auto in = static_cast<std::ptrdiff_t>(n);
    for (std::ptrdiff_t i = 0; i < in; ++i) {
        const double qm = detail::ghost(q, i - 1, mesh.bc);
        const double qp = detail::ghost(q, i + 1, mesh.bc);
        const std::size_t im = static_cast<std::size_t>(i == 0 ? 0 : i - 1);
        const std::size_t ip = static_cast<std::size_t>(i == in - 1 ? in - 1 : i + 1);
        const auto ui = static_cast<std::size_t>(i);
        const double span = mesh.width(ui) + 0.5 * (mesh.width(im) + mesh.width(ip));
        out[ui] = (qp - qm) / span;
    }
    return out;
}

/// Pressureless gas dynamics flux G(rho, m) = (m, m^2 / rho).
struct MacroFlux {
    Vec<2> evaluate(const Vec<2>& U, std::size_t) const noexcept {
        if (!(U[0] > 0.0)) return {0.0, 0.0};
        return {U[1], U[1] * U[1] / U[0]};
    }
    double max_wavespeed(const Vec<2>& U, std::size_t) const noexcept {
        return U[0] > 0.0 ? std::abs(U[1] / U[0]) : 0.0;
    }
};

/// G(omega) = a_k * omega with a_k the mean of the two adjacent cell velocities.
struct LinearAdvectionFlux {
    std::vector<double> face_speed;
    Vec<1> evaluate(const Vec<1>& U, std::size_t k) const noexcept { return {face_speed[k] * U[0]}; }
    double max_wavespeed(const Vec<1>&, std::size_t k) const noexcept {
        return std::abs(face_speed[k]);
    }
};

inline std::vector<double> face_average(const std::vector<double>& u, BoundaryKind bc) {
    const auto n = static_cast<std::ptrdiff_t>(u.size());
    std::vector<double> a(static_cast<std::size_t>(n + 1));
    for (std::ptrdiff_t k = 0; k <= n; ++k) {
        a[static_cast<std::size_t>(k)] =
            0.5 * (detail::ghost(u, k - 1, bc) + detail::ghost(u, k, bc));
    }
    return a;
}

struct MacroUpdate {
    std::vector<double> rho;
    std::vector<double> u;
    std::vector<double> m; ///< rho * u after the step
};

struct MacroOptions {
    /// Optional mass flux per face (size n + 1). When set it replaces the
    /// Lax-Friedrichs density flux, so that rho tracks the kinetic density.
    const std::vector<double>* mass_flux = nullptr;
    CflPolicy cfl_policy = CflPolicy::error;
};

/// One step of (rho, rho u) with source (0, rho B - d/dx(P / omega^2)).
inline MacroUpdate step_macro_u(const std::vector<double>& rho, const std::vector<double>& u,
                                const std::vector<double>& P, const std::vector<double>& omega,
                                const std::vector<double>& B, double dt, const ClawMesh& mesh,
                                const MacroOptions& opt = {}) {
    const std::size_t n = mesh.n();
    if (rho.size() != n || u.size() != n || P.size() != n || omega.size() != n || B.size() != n) {
        throw ConfigError("step_macro_u: array sizes do not match the mesh");
    }
    if (!(dt > 0.0)) throw ConfigError("step_macro_u: dt must be positive");

    ClawState<2> s{mesh, std::vector<Vec<2>>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        if (rho[i] < 0.0) throw NumericalError(NumericalFailure::vacuum, "step_macro_u: negative density");
        s.U[i] = {rho[i], rho[i] * u[i]};
    }
    auto ff = claw_face_fluxes(s, MacroFlux{}, dt);
    check_cfl(ff.max_courant, 1.0, opt.cfl_policy, "step_macro_u");
    if (opt.mass_flux != nullptr) {
        if (opt.mass_flux->size() != n + 1) throw ConfigError("step_macro_u: mass flux needs n + 1 faces");
        for (std::size_t k = 0; k <= n; ++k) ff.F[k][0] = (*opt.mass_flux)[k];
    }

    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = P[i] / (omega[i] * omega[i]);
    const auto dq = central_gradient(q, mesh);
    std::vector<Vec<2>> H(n);
    for (std::size_t i = 0; i < n; ++i) H[i] = {0.0, rho[i] * B[i] - dq[i]};

    const auto Un = claw_apply(s.U, mesh, ff.F, H, dt);
    MacroUpdate out;
    out.rho.resize(n);
    out.u.resize(n);
    out.m.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = Un[i][0];
        if (r > 0.0 && std::isfinite(r)) {
            out.rho[i] = r;
            out.m[i] = Un[i][1];
            out.u[i] = Un[i][1] / r;
        } else if (r == 0.0 && rho[i] == 0.0) {
            // Cell stays empty; keep its velocity.
            out.rho[i] = 0.0;
            out.m[i] = 0.0;
            out.u[i] = u[i];
        } else {
            std::ostringstream os;
            os << "step_macro_u: vacuum formed in cell " << i << " (rho = " << r << ")";
            throw NumericalError(NumericalFailure::vacuum, os.str());
        }
        if (!std::isfinite(out.u[i])) {
            throw NumericalError(NumericalFailure::non_finite, "step_macro_u: non-finite velocity");
        }
    }
    return out;
}

/// One step of d_t omega + d_x(u omega) = omega (d_x u + A).
inline std::vector<double> step_omega_cs(const std::vector<double>& omega,
                                         const std::vector<double>& u,
                                         const std::vector<double>& A, double dt,
                                         const ClawMesh& mesh,
                                         CflPolicy policy = CflPolicy::error) {
    const std::size_t n = mesh.n();
    if (omega.size() != n || u.size() != n || A.size() != n) {
        throw ConfigError("step_omega_cs: array sizes do not match the mesh");
    }
    ClawState<1> s{mesh, std::vector<Vec<1>>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        if (!(omega[i] > 0.0)) {
            throw NumericalError(NumericalFailure::nonpositive_omega, "step_omega_cs: omega must be > 0");
        }
        s.U[i] = {omega[i]};
    }
    const LinearAdvectionFlux flux{face_average(u, mesh.bc)};
    const auto dudx = central_gradient(u, mesh);
    std::vector<Vec<1>> H(n);
    for (std::size_t i = 0; i < n; ++i) H[i] = {omega[i] * (dudx[i] + A[i])};
    const auto next = step_claw(s, flux, H, dt, policy);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = next.U[i][0];
        if (!(out[i] > 0.0) || !std::isfinite(out[i])) {
            std::ostringstream os;
            os << "step_omega_cs: omega became " << out[i] << " in cell " << i
               << " (time step too large)";
            throw NumericalError(NumericalFailure::nonpositive_omega, os.str());
        }
    }
    return out;
}

} // namespace flockkit
