#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "flockkit/alignment.hpp"
#include "flockkit/errors.hpp"
#include "flockkit/grid.hpp"
#include "flockkit/influence.hpp"

namespace flockkit {

/// Transport-free dynamics: rho and A frozen, u' = B(u), f given in closed form.
struct HomogSolution {
    std::vector<double> A;
    std::vector<double> times;
    std::vector<std::vector<double>> u; ///< u[n][i] at times[n]
    std::function<double(double, double)> f0;

    /// u_i(t) by linear interpolation between stored times.
    [[nodiscard]] double u_at(std::size_t i, double t) const {
        if (times.empty()) throw ConfigError("homogeneous: empty trajectory");
        if (t <= times.front()) return u.front()[i];
        if (t >= times.back()) {
            if (t > times.back() * (1.0 + 1e-12) + 1e-14) throw ConfigError("homogeneous: t beyond trajectory");
            return u.back()[i];
        }
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        const auto n = static_cast<std::size_t>(it - times.begin());
        const double w = (t - times[n - 1]) / (times[n] - times[n - 1]);
        return (1.0 - w) * u[n - 1][i] + w * u[n][i];
    }
};

/// Classical RK4 for u' = B(u) with B recomputed at every stage.
inline HomogSolution propagate_u_homog(const std::vector<double>& u0, const std::vector<double>& rho,
                                       const InfluenceFunction& phi, Model model,
                                       const PhaseGrid& grid, double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end >= 0.0)) throw ConfigError("propagate_u_homog: need dt > 0 and t_end >= 0");
    const InfluenceMatrix W(phi, grid);
    const auto B = [&](const std::vector<double>& u) {
        return compute_alignment(model, W, rho, u, grid).B;
    };
    HomogSolution sol;
    sol.A = compute_alignment(model, W, rho, u0, grid).A;
    sol.times.push_back(0.0);
    sol.u.push_back(u0);
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    const double h = steps > 0 ? t_end / static_cast<double>(steps) : 0.0;
    std::vector<double> u = u0;
    std::vector<double> tmp(u.size());
    for (std::size_t n = 0; n < steps; ++n) {
        const auto k1 = B(u);
        for (std::size_t i = 0; i < u.size(); ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
        const auto k2 = B(tmp);
        for (std::size_t i = 0; i < u.size(); ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
        const auto k3 = B(tmp);
        for (std::size_t i = 0; i < u.size(); ++i) tmp[i] = u[i] + h * k3[i];
        const auto k4 = B(tmp);
        for (std::size_t i = 0; i < u.size(); ++i) {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        sol.times.push_back(static_cast<double>(n + 1) * h);
        sol.u.push_back(u);
    }
    return sol;
}

/// f(t, x, v) = e^{tA} f0(x, e^{tA} v + u(0, x) - e^{tA} u(t, x))  (d = 1).
inline double exact_f_homog(const std::function<double(double, double)>& f0, double A, double u0,
                            double ut, double t, double x, double v) {
    const double e = std::exp(t * A);
    return e * f0(x, e * v + u0 - e * ut);
}

inline double exact_f_homog(const HomogSolution& sol, double t, std::size_t i, double x, double v) {
    return exact_f_homog(sol.f0, sol.A[i], sol.u.front()[i], sol.u_at(i, t), t, x, v);
}

} // namespace flockkit
