#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "flockkit/alignment.hpp"
#include "flockkit/claw.hpp"
#include "flockkit/errors.hpp"
#include "flockkit/grid.hpp"
#include "flockkit/influence.hpp"

namespace flockkit {

/// f on an (x, v) grid, advanced without rescaling.
struct DirectState {
    Field f;
    Model model = Model::cs;
    InfluenceFunction phi = InfluenceFunction::inverse_sqrt();
    double t = 0.0;
};

namespace detail {

inline void throw_mt_vacuum(std::size_t i) {
    std::ostringstream os;
    os << "drift_field: vacuum in influence range of cell " << i;
    throw NumericalError(NumericalFailure::vacuum, os.str());
}

} // namespace detail

/// D_ij = dx dv sum_{k,l} phi_ik (v_l - v_j) f_kl (MT: divided by dx dv sum phi_ik f_kl),
/// evaluated through the per-cell moments.
inline Field drift_field(const Field& f, const InfluenceMatrix& W, Model model) {
    const auto& grid = f.grid;
    Field D(grid);
    if (model == Model::free_transport) return D;
    std::vector<double> m0(grid.nx, 0.0);
    std::vector<double> m1(grid.nx, 0.0);
    for (std::size_t k = 0; k < grid.nx; ++k) {
        double a = 0.0;
        double b = 0.0;
        for (std::size_t l = 0; l < grid.nxi; ++l) {
            a += f(k, l);
            b += grid.xi(l) * f(k, l);
        }
        m0[k] = a * grid.dxi;
        m1[k] = b * grid.dxi;
    }
    for (std::size_t i = 0; i < grid.nx; ++i) {
        double s0 = 0.0;
        double s1 = 0.0;
        for (std::size_t k = 0; k < grid.nx; ++k) {
            s0 += W(i, k) * m0[k];
            s1 += W(i, k) * m1[k];
        }
        s0 *= grid.dx;
        s1 *= grid.dx;
        double norm = 1.0;
        if (model == Model::mt) {
            if (!(s0 > 0.0)) detail::throw_mt_vacuum(i);
            norm = s0;
        }
        for (std::size_t j = 0; j < grid.nxi; ++j) D(i, j) = (s1 - grid.xi(j) * s0) / norm;
    }
    return D;
}

/// Plain quadruple loop over (i, j, k, l); O(Nx^2 Nv^2).
inline Field drift_field_naive(const Field& f, const InfluenceMatrix& W, Model model) {
    const auto& grid = f.grid;
    Field D(grid);
    if (model == Model::free_transport) return D;
    const double cell = grid.dx * grid.dxi;
    for (std::size_t i = 0; i < grid.nx; ++i) {
        for (std::size_t j = 0; j < grid.nxi; ++j) {
            const double vj = grid.xi(j);
            double q = 0.0;
            double norm = 0.0;
            for (std::size_t k = 0; k < grid.nx; ++k) {
                const double w = W(i, k);
                for (std::size_t l = 0; l < grid.nxi; ++l) {
                    q += w * (grid.xi(l) - vj) * f(k, l);
                    norm += w * f(k, l);
                }
            }
            q *= cell;
            norm *= cell;
            if (model == Model::mt) {
                if (!(norm > 0.0)) detail::throw_mt_vacuum(i);
                q /= norm;
            }
            D(i, j) = q;
        }
    }
    return D;
}

struct DirectOptions {
    bool transport = true;
    bool naive_drift = false;
    CflPolicy cfl_policy = CflPolicy::error;
};

/// Brute-force solver of d_t f + v d_x f + d_v(D f) = 0 on a periodic x-axis.
class DirectSolver {
public:
    DirectSolver(const PhaseGrid& grid, const InfluenceFunction& phi, DirectOptions opt = {})
        : grid_(grid), W_(phi, grid), opt_(opt) {}

    [[nodiscard]] const InfluenceMatrix& influence() const noexcept { return W_; }

    [[nodiscard]] DirectState step(const DirectState& s, double dt) const {
        if (!(dt > 0.0)) throw ConfigError("step_direct: dt must be positive");
        const auto& grid = grid_;
        const std::size_t nx = grid.nx;
        const std::size_t nv = grid.nxi;
        const Field D = opt_.naive_drift ? drift_field_naive(s.f, W_, s.model) : drift_field(s.f, W_, s.model);

        double vmax = 0.0;
        for (std::size_t j = 0; j < nv; ++j) vmax = std::max(vmax, std::abs(grid.xi(j)));
        double dmax = 0.0;
        for (double d : D.values) dmax = std::max(dmax, std::abs(d));
        const double courant = dt * ((opt_.transport ? vmax / grid.dx : 0.0) + dmax / grid.dxi);
        check_cfl(courant, 1.0, opt_.cfl_policy, "step_direct");

        DirectState out = s;
        out.t = s.t + dt;
        const double rx = dt / grid.dx;
        const double rv = dt / grid.dxi;
        std::vector<double> G(nv + 1);
        for (std::size_t i = 0; i < nx; ++i) {
            const auto i_ = static_cast<std::ptrdiff_t>(i);
            const std::size_t im = detail::ghost_index(i_ - 1, nx, grid.bc_x);
            const std::size_t ip = detail::ghost_index(i_ + 1, nx, grid.bc_x);
            // Flux-vector splitting in v: G_{j+1/2} = D+_j f_j + D-_{j+1} f_{j+1}.
            G[0] = G[nv] = 0.0;
            for (std::size_t j = 0; j + 1 < nv; ++j) {
                G[j + 1] = std::max(D(i, j), 0.0) * s.f(i, j) + std::min(D(i, j + 1), 0.0) * s.f(i, j + 1);
            }
            for (std::size_t j = 0; j < nv; ++j) {
                double val = s.f(i, j) - rv * (G[j + 1] - G[j]);
                if (opt_.transport) {
                    const double v = grid.xi(j);
                    const double right = v >= 0.0 ? v * s.f(i, j) : v * s.f(ip, j);
                    const double left = v >= 0.0 ? v * s.f(im, j) : v * s.f(i, j);
                    val -= rx * (right - left);
                }
                out.f(i, j) = val;
            }
        }
        return out;
    }

private:
    PhaseGrid grid_;
    InfluenceMatrix W_;
    DirectOptions opt_;
};

inline DirectState step_direct(const DirectState& s, double dt, const DirectOptions& opt = {}) {
    return DirectSolver(s.f.grid, s.phi, opt).step(s, dt);
}

} // namespace flockkit
