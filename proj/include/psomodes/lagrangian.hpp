#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "psomodes/pso_model.hpp"

namespace psomodes {

/// Reduced flux quantum inverse, 2 pi / Phi_0 = 4 pi e / h, in 1/Wb (exact SI constants).
inline constexpr double kPhasePerWeber = 4.0 * std::numbers::pi * 1.602176634e-19 / 6.62607015e-34;

/// Josephson junction on a circuit edge: potential term Ej * cos(2 pi / Phi_0 * m . Phi + flux_offset).
struct JunctionTerm {
    std::vector<int> m;        ///< edge vector m(e) over the model coordinates
    double ej = 0.0;           ///< joules
    double flux_offset = 0.0;  ///< external flux phase, constant
    std::string label;
};

/// Lossless model plus junction cosines:
///   L = 1/2 Phi'^T C Phi' - 1/2 Phi^T K Phi + Phi^T P D + sum_j Ej cos(2 pi / Phi_0 * m_j . Phi + offset_j).
/// Fluxes stay in webers; the phase scale is written out in the expression and the JSON.
struct LagrangianDescription {
    Matrix C, K, P;
    std::vector<std::string> coord_labels, port_labels;
    std::vector<JunctionTerm> junctions;

    std::string expression() const {
        std::ostringstream out;
        out << "1/2 dPhi^T C dPhi - 1/2 Phi^T K Phi";
        if (P.cols() > 0) out << " + Phi^T P D";
        for (const auto& j : junctions) {
            out << " + " << j.ej << "*cos(2pi/Phi0*(";
            bool first = true;
            for (std::size_t i = 0; i < j.m.size(); ++i) {
                if (j.m[i] == 0) continue;
                const int c = j.m[i];
                if (!first || c < 0) out << (c < 0 ? (first ? "-" : " - ") : " + ");
                if (std::abs(c) != 1) out << std::abs(c) << "*";
                out << coord_labels[i];
                first = false;
            }
            if (first) out << "0";
            out << ")";
            if (j.flux_offset != 0.0) out << " + " << j.flux_offset;
            out << ")";
        }
        return out.str();
    }

    nlohmann::json to_json() const {
        auto rows = [](const Matrix& a) {
            nlohmann::json out = nlohmann::json::array();
            for (Eigen::Index i = 0; i < a.rows(); ++i) {
                nlohmann::json row = nlohmann::json::array();
                for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
                out.push_back(std::move(row));
            }
            return out;
        };
        nlohmann::json cos_terms = nlohmann::json::array();
        for (const auto& j : junctions) {
            cos_terms.push_back({{"label", j.label}, {"Ej_J", j.ej}, {"m", j.m}, {"flux_offset", j.flux_offset}});
        }
        return {{"format", "pso-lagrangian/1"},
                {"coordinates", coord_labels},
                {"ports", port_labels},
                {"kinetic_C_F", rows(C)},
                {"potential_K_per_H", rows(K)},
                {"drive_P", rows(P)},
                {"cosine_terms", cos_terms},
                {"phase_per_weber", kPhasePerWeber},
                {"expression", expression()}};
    }
};

inline LagrangianDescription export_lagrangian(const PsoModel& model, std::vector<JunctionTerm> junctions = {},
                                               double sym_tol = Tolerances{}.sym_tol) {
    const double gmax = model.G().size() ? model.G().cwiseAbs().maxCoeff() : 0.0;
    if (gmax > sym_tol) {
        throw Error(ErrorCode::LossyModel,
                    "a Lagrangian exists only for G = 0 (max |G| = " + std::to_string(gmax) + " S)");
    }
    for (const auto& j : junctions) {
        if (static_cast<Eigen::Index>(j.m.size()) != model.size()) {
            throw Error(ErrorCode::InvalidArgument, "junction edge vector has " + std::to_string(j.m.size()) +
                                                        " entries, model has " + std::to_string(model.size()));
        }
    }
    return {model.C(), model.K(), model.P(), model.coord_labels(), model.port_labels(), std::move(junctions)};
}

} // namespace psomodes
