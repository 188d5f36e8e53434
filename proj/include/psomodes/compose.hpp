#pragma once

#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "psomodes/pso_model.hpp"

namespace psomodes {

/// Coordinate change Phi' = U^-T Phi, giving (U K U^T, U G U^T, U C U^T, U P).
/// Eigenvectors map as v' = U^-T v. New coordinates are labelled y0..y(n-1) unless U is
/// diagonal (a pure rescaling), in which case the old labels are kept.
inline PsoModel transform(const PsoModel& model, const Matrix& U, std::vector<std::string> labels = {},
                          double cond_limit = Tolerances{}.cond_limit) {
    const Eigen::Index n = model.size();
    if (U.rows() != n || U.cols() != n) {
        throw Error(ErrorCode::NotInvertible, "U must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (n > 0) {
        Eigen::BDCSVD<Matrix> svd(U);
        const auto& sv = svd.singularValues();
        const double cond = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1) : INFINITY;
        if (!(cond < cond_limit)) {
            throw Error(ErrorCode::NotInvertible, "U has condition number " + std::to_string(cond));
        }
    }
    if (labels.empty()) {
        const bool diagonal = (U - Matrix(U.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0 || n == 0;
        if (diagonal) {
            labels = model.coord_labels();
        } else {
            for (Eigen::Index i = 0; i < n; ++i) labels.push_back("y" + std::to_string(i));
        }
    }
    return PsoModel(U * model.K() * U.transpose(), U * model.G() * U.transpose(), U * model.C() * U.transpose(),
                    U * model.P(), std::move(labels), model.port_labels());
}

/// Maps an eigenvector of `model` to the coordinates of transform(model, U).
inline CVector transform_mode(const Matrix& U, const CVector& v) {
    return U.transpose().cast<Complex>().partialPivLu().solve(v);
}

/// Block-diagonal union: the models evolve independently side by side.
inline PsoModel unite(const std::vector<PsoModel>& models) {
    Eigen::Index n = 0, m = 0;
    std::vector<std::string> coords, ports;
    std::set<std::string> seen_coords, seen_ports;
    for (const auto& model : models) {
        n += model.size();
        m += model.port_count();
        for (const auto& l : model.coord_labels()) {
            if (!seen_coords.insert(l).second) {
                throw Error(ErrorCode::DuplicateLabel, "coordinate label '" + l + "' appears in more than one model");
            }
            coords.push_back(l);
        }
        for (const auto& l : model.port_labels()) {
            if (!seen_ports.insert(l).second) {
                throw Error(ErrorCode::DuplicateLabel, "port label '" + l + "' appears in more than one model");
            }
            ports.push_back(l);
        }
    }
    Matrix K = Matrix::Zero(n, n), G = Matrix::Zero(n, n), C = Matrix::Zero(n, n), P = Matrix::Zero(n, m);
    Eigen::Index r = 0, c = 0;
    for (const auto& model : models) {
        const auto k = model.size(), q = model.port_count();
        K.block(r, r, k, k) = model.K();
        G.block(r, r, k, k) = model.G();
        C.block(r, r, k, k) = model.C();
        P.block(r, c, k, q) = model.P();
        r += k;
        c += q;
    }
    return PsoModel(std::move(K), std::move(G), std::move(C), std::move(P), std::move(coords), std::move(ports));
}

inline PsoModel unite(const PsoModel& a, const PsoModel& b) { return unite(std::vector<PsoModel>{a, b}); }

/// Linear holonomic constraints y_matrix^T Phi = 0 (one column per constraint).
struct ConstraintSet {
    Matrix y_matrix;
    double rank_tol = -1.0;  ///< negative: largest singular value times 1e-11
};

struct ReductionReport {
    Matrix null_basis;                   ///< Z with Y_c^T Z = 0, orthonormal columns
    Matrix drive_constraint;             ///< Y_c^T P; admissible drives satisfy Y_c^T P D = 0
    std::vector<Eigen::Index> kept_columns;  ///< columns of y_matrix retained after pruning
    double rank_tol = 0.0;
};

/// Restricts the model to the null space of Y^T: Phi = Z Phi', model' = (Z^T K Z, ..., Z^T P).
inline std::pair<PsoModel, ReductionReport> constrain(const PsoModel& model, const ConstraintSet& constraints) {
    const Eigen::Index n = model.size();
    const Matrix& Y = constraints.y_matrix;
    ReductionReport report;
    if (Y.cols() == 0) {
        report.null_basis = Matrix::Identity(n, n);
        report.drive_constraint = Matrix::Zero(0, model.port_count());
        return {model, report};
    }
    if (Y.rows() != n) {
        throw Error(ErrorCode::InvalidArgument,
                    "constraint matrix has " + std::to_string(Y.rows()) + " rows, model has " + std::to_string(n));
    }

    Eigen::BDCSVD<Matrix> svd(Y);
    const Vector sv = svd.singularValues();
    const double tol = constraints.rank_tol >= 0.0 ? constraints.rank_tol : sv(0) * 1e-11;
    report.rank_tol = tol;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > tol) ++rank;
        if (sv(i) > tol / 10.0 && sv(i) <= tol * 10.0) {
            throw Error(ErrorCode::RankAmbiguity, "singular value " + std::to_string(sv(i)) +
                                                       " lies within a factor 10 of rank_tol " + std::to_string(tol));
        }
    }
    if (rank >= n) throw Error(ErrorCode::OverConstrained, "constraints leave no free coordinates");
    if (rank == 0) throw Error(ErrorCode::InvalidArgument, "constraint matrix is zero");

    // Column-pivoted QR picks the independent constraint columns; its trailing Q columns
    // are an orthonormal basis of their orthogonal complement.
    Eigen::ColPivHouseholderQR<Matrix> qr(Y);
    const Matrix Q = qr.householderQ();
    const Matrix Z = Q.rightCols(n - rank);
    Matrix Yc(n, rank);
    for (Eigen::Index j = 0; j < rank; ++j) {
        const Eigen::Index col = qr.colsPermutation().indices()(j);
        report.kept_columns.push_back(col);
        Yc.col(j) = Y.col(col);
    }
    report.null_basis = Z;
    report.drive_constraint = Yc.transpose() * model.P();

    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < n - rank; ++i) labels.push_back("z" + std::to_string(i));
    PsoModel reduced(Z.transpose() * model.K() * Z, Z.transpose() * model.G() * Z, Z.transpose() * model.C() * Z,
                     Z.transpose() * model.P(), std::move(labels), model.port_labels());
    return {std::move(reduced), std::move(report)};
}

} // namespace psomodes
