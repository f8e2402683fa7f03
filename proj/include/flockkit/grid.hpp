#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "flockkit/errors.hpp"

namespace flockkit {

enum class BoundaryKind { periodic, outflow };

/// Uniform cell-centred 1D x 1D phase-space mesh.
///
/// The second axis is the rescaled velocity xi for the kinetic solver, or the
/// physical velocity v for the direct solver and reconstructions. Grids built by
/// make_grid() place a cell centre exactly at xi = 0 (index J) and compute
/// centres as (j - J) * dxi, so xi_J == 0.0 bit-for-bit.
struct PhaseGrid {
    std::size_t nx = 0;
    std::size_t nxi = 0;
    double x_min = 0.0;
    double x_max = 0.0;
    double xi_min = 0.0;
    double xi_max = 0.0;
    double dx = 0.0;
    double dxi = 0.0;
    std::size_t J = 0;
    bool zero_centred = false;
    BoundaryKind bc_x = BoundaryKind::periodic;

    [[nodiscard]] double x(std::size_t i) const noexcept {
        return x_min + (static_cast<double>(i) + 0.5) * dx;
    }

    [[nodiscard]] double xi(std::size_t j) const noexcept {
        if (zero_centred) {
            return (static_cast<double>(j) - static_cast<double>(J)) * dxi;
        }
        return xi_min + (static_cast<double>(j) + 0.5) * dxi;
    }

    /// Position of the xi-interface j - 1/2 (face index k = j, k in [0, nxi]).
    [[nodiscard]] double xi_face(std::size_t k) const noexcept {
        if (zero_centred) {
            return (static_cast<double>(k) - static_cast<double>(J) - 0.5) * dxi;
        }
        return xi_min + static_cast<double>(k) * dxi;
    }

    [[nodiscard]] double x_length() const noexcept { return x_max - x_min; }

    /// Half-width of the velocity box, max(|xi_min|, |xi_max|).
    [[nodiscard]] double xi_half_width() const noexcept {
        return std::max(std::abs(xi_min), std::abs(xi_max));
    }

    [[nodiscard]] std::size_t size() const noexcept { return nx * nxi; }
};

namespace detail {

inline void check_axis(std::size_t n, double lo, double hi, const char* name, std::size_t min_n) {
    if (n < min_n) {
        std::ostringstream os;
        os << "grid: " << name << " needs at least " << min_n << " cells (got " << n << ")";
        throw ConfigError(os.str());
    }
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
        std::ostringstream os;
        os << "grid: " << name << " bounds must be finite and ordered (got [" << lo << ", "
           << hi << "])";
        throw ConfigError(os.str());
    }
}

} // namespace detail

/// Builds a kinetic grid whose xi-axis has a cell centre at exactly 0.
///
/// The caller must supply compatible values: (0 - xi_min)/dxi - 1/2 has to be an
/// integer. Nothing is adjusted silently.
inline PhaseGrid make_grid(std::size_t nx, std::size_t nxi, double x_min, double x_max,
                           double xi_min, double xi_max,
                           BoundaryKind bc = BoundaryKind::periodic) {
    detail::check_axis(nx, x_min, x_max, "x", 1);
    detail::check_axis(nxi, xi_min, xi_max, "xi", 3);
    if (!(xi_min < 0.0 && xi_max > 0.0)) {
        throw ConfigError("grid: xi bounds must straddle 0 so that 0 can be a cell centre");
    }
    PhaseGrid g;
    g.nx = nx;
    g.nxi = nxi;
    g.x_min = x_min;
    g.x_max = x_max;
    g.xi_min = xi_min;
    g.xi_max = xi_max;
    g.dx = (x_max - x_min) / static_cast<double>(nx);
    g.dxi = (xi_max - xi_min) / static_cast<double>(nxi);
    g.bc_x = bc;

    const double s = -xi_min / g.dxi - 0.5;
    const double rounded = std::round(s);
    if (std::abs(s - rounded) > 1e-9 * std::max(1.0, std::abs(s)) || rounded < 0.0 ||
        rounded > static_cast<double>(nxi - 1)) {
        std::ostringstream os;
        os << "grid: no xi cell centre at 0 for nxi=" << nxi << " on [" << xi_min << ", "
           << xi_max << "]; need -xi_min/dxi - 1/2 to be an integer (e.g. odd nxi on a "
           << "symmetric box)";
        throw ConfigError(os.str());
    }
    g.J = static_cast<std::size_t>(rounded);
    g.zero_centred = true;
    return g;
}

/// Builds an (x, v) grid with no requirement on where 0 falls.
inline PhaseGrid make_velocity_grid(std::size_t nx, std::size_t nv, double x_min, double x_max,
                                    double v_min, double v_max,
                                    BoundaryKind bc = BoundaryKind::periodic) {
    detail::check_axis(nx, x_min, x_max, "x", 1);
    detail::check_axis(nv, v_min, v_max, "v", 3);
    PhaseGrid g;
    g.nx = nx;
    g.nxi = nv;
    g.x_min = x_min;
    g.x_max = x_max;
    g.xi_min = v_min;
    g.xi_max = v_max;
    g.dx = (x_max - x_min) / static_cast<double>(nx);
    g.dxi = (v_max - v_min) / static_cast<double>(nv);
    g.bc_x = bc;
    g.zero_centred = false;
    return g;
}

/// Cell averages on a PhaseGrid, stored row-major: values[i * nxi + j].
struct Field {
    PhaseGrid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const PhaseGrid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

    [[nodiscard]] double& operator()(std::size_t i, std::size_t j) noexcept {
        return values[i * grid.nxi + j];
    }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept {
        return values[i * grid.nxi + j];
    }

    [[nodiscard]] std::span<double> row(std::size_t i) noexcept {
        return {values.data() + i * grid.nxi, grid.nxi};
    }
    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
        return {values.data() + i * grid.nxi, grid.nxi};
    }

    [[nodiscard]] double max() const noexcept {
        double m = 0.0;
        for (double v : values) m = std::max(m, v);
        return m;
    }

    [[nodiscard]] double min() const noexcept {
        double m = std::numeric_limits<double>::infinity();
        for (double v : values) m = std::min(m, v);
        return values.empty() ? 0.0 : m;
    }

    /// dx * dxi * sum of all cells, summed in storage order.
    [[nodiscard]] double mass() const noexcept {
        double s = 0.0;
        for (double v : values) s += v;
        return s * grid.dx * grid.dxi;
    }
};

/// Per-x-cell velocity moments: rho, momentum M, second moment P.
struct MomentSet {
    std::vector<double> rho;
    std::vector<double> M;
    std::vector<double> P;
};

/// First-order quadrature of the moments of one row, ascending j.
struct RowMoments {
    double rho = 0.0;
    double M = 0.0;
    double P = 0.0;
};

inline RowMoments row_moments(std::span<const double> row, const PhaseGrid& grid) {
    double s0 = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        const double xi = grid.xi(j);
        s0 += row[j];
        s1 += xi * row[j];
        s2 += xi * xi * row[j];
    }
    return {grid.dxi * s0, grid.dxi * s1, grid.dxi * s2};
}

inline MomentSet moments(const Field& g) {
    const auto& grid = g.grid;
    MomentSet m;
    m.rho.resize(grid.nx);
    m.M.resize(grid.nx);
    m.P.resize(grid.nx);
    for (std::size_t i = 0; i < grid.nx; ++i) {
        const auto row = g.row(i);
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw NumericalError(NumericalFailure::non_finite,
                                     "moments: non-finite value in field");
            }
        }
        const RowMoments r = row_moments(row, grid);
        m.rho[i] = r.rho;
        m.M[i] = r.M;
        m.P[i] = r.P;
    }
    return m;
}

} // namespace flockkit
