#pragma once

#include <sstream>
#include <vector>

#include "flockkit/errors.hpp"
#include "flockkit/grid.hpp"
#include "flockkit/influence.hpp"

namespace flockkit {

/// free_transport switches the alignment off (A = B = 0); used for cross-checks.
enum class Model { mt, cs, free_transport };

inline const char* model_name(Model m) {
    switch (m) {
    case Model::mt: return "mt";
    case Model::cs: return "cs";
    case Model::free_transport: return "free";
    }
    return "?";
}

struct AlignmentFields {
    Model model = Model::cs;
    std::vector<double> A;
    std::vector<double> B;
};

/// A_i = dx * sum_k phi_ik rho_k,  B_i = dx * sum_k phi_ik (u_k - u_i) rho_k  (CS);
/// MT keeps A = 1 and divides B by the CS A.
inline AlignmentFields compute_alignment(Model model, const InfluenceMatrix& W,
                                         const std::vector<double>& rho,
                                         const std::vector<double>& u, const PhaseGrid& grid) {
    const std::size_t n = W.size();
    AlignmentFields out;
    out.model = model;
    out.A.assign(n, 0.0);
    out.B.assign(n, 0.0);
    if (model == Model::free_transport) return out;

    for (std::size_t i = 0; i < n; ++i) {
        double a = 0.0;
        double b = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double w = W(i, k) * rho[k];
            a += w;
            b += w * (u[k] - u[i]);
        }
        a *= grid.dx;
        b *= grid.dx;
        if (model == Model::cs) {
            out.A[i] = a;
            out.B[i] = b;
        } else {
            if (!(a > 0.0)) {
                std::ostringstream os;
                os << "alignment: vacuum in influence range of cell " << i
                   << " (Motsch-Tadmor normalization undefined)";
                throw NumericalError(NumericalFailure::vacuum, os.str());
            }
            out.A[i] = 1.0;
            out.B[i] = b / a;
        }
    }
    return out;
}

inline AlignmentFields compute_alignment(Model model, const InfluenceFunction& phi,
                                         const std::vector<double>& rho,
                                         const std::vector<double>& u, const PhaseGrid& grid) {
    return compute_alignment(model, InfluenceMatrix(phi, grid), rho, u, grid);
}

} // namespace flockkit
