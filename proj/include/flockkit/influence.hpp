#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "flockkit/errors.hpp"
#include "flockkit/grid.hpp"

namespace flockkit {

enum class InfluenceKind { indicator, inverse_sqrt, sqrt_growth, custom };

/// Pairwise weight phi(r). Construct through the factory functions below.
struct InfluenceFunction {
    InfluenceKind kind = InfluenceKind::inverse_sqrt;
    double r0 = 0.0;
    std::function<double(double)> table;

    static InfluenceFunction indicator(double radius) {
        if (!(radius >= 0.0)) throw ConfigError("influence: indicator radius must be >= 0");
        return {InfluenceKind::indicator, radius, {}};
    }
    static InfluenceFunction inverse_sqrt() { return {InfluenceKind::inverse_sqrt, 0.0, {}}; }
    /// (1 + r)^(1/2), the kernel exactly as printed for Test 3. Grows with distance.
    static InfluenceFunction sqrt_growth() { return {InfluenceKind::sqrt_growth, 0.0, {}}; }
    static InfluenceFunction custom(std::function<double(double)> fn) {
        if (!fn) throw ConfigError("influence: custom function is empty");
        return {InfluenceKind::custom, 0.0, std::move(fn)};
    }
};

inline double influence_eval(const InfluenceFunction& phi, double r) {
    if (!(r >= 0.0)) throw ConfigError("influence: distance must be >= 0");
    switch (phi.kind) {
    case InfluenceKind::indicator:
        return r <= phi.r0 ? 1.0 : 0.0;
    case InfluenceKind::inverse_sqrt:
        return 1.0 / std::sqrt(1.0 + r);
    case InfluenceKind::sqrt_growth:
        return std::sqrt(1.0 + r);
    case InfluenceKind::custom: {
        const double w = phi.table(r);
        if (!(w >= 0.0)) throw ConfigError("influence: custom function returned a negative weight");
        return w;
    }
    }
    return 0.0;
}

/// Minimal-image distance on the periodic x-axis; plain |xi - xj| otherwise.
inline double torus_distance(double xi, double xj, const PhaseGrid& grid) {
    const double d = std::abs(xi - xj);
    if (grid.bc_x != BoundaryKind::periodic) return d;
    const double L = grid.x_length();
    return std::min({d, std::abs(d - L), d + L});
}

/// Dense Nx x Nx table phi(d(x_i, x_k)), built once per grid.
class InfluenceMatrix {
public:
    InfluenceMatrix() = default;
    InfluenceMatrix(const InfluenceFunction& phi, const PhaseGrid& grid) : n_(grid.nx), w_(n_ * n_) {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t k = 0; k < n_; ++k) {
                w_[i * n_ + k] = influence_eval(phi, torus_distance(grid.x(i), grid.x(k), grid));
            }
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t k) const noexcept {
        return w_[i * n_ + k];
    }

private:
    std::size_t n_ = 0;
    std::vector<double> w_;
};

} // namespace flockkit
