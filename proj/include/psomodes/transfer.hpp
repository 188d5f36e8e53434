#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "psomodes/pso_model.hpp"

namespace psomodes {

enum class TransferKind { Impedance, Scattering, Admittance };

inline const char* to_string(TransferKind kind) {
    switch (kind) {
    case TransferKind::Impedance: return "impedance";
    case TransferKind::Scattering: return "scattering";
    case TransferKind::Admittance: return "admittance";
    }
    return "?";
}

/// A port matrix evaluated at one Laplace point s (rad/s).
struct TransferSample {
    Complex s;
    CMatrix matrix;
    TransferKind kind = TransferKind::Impedance;
};

namespace detail {

using SparseC = Eigen::SparseMatrix<Complex>;

/// Above this size the pencil is factored sparsely; circuit models are banded-ish.
inline constexpr Eigen::Index kSparseThreshold = 48;

inline SparseC pencil_sparse(const PsoModel& model, Complex s) {
    const Eigen::Index n = model.size();
    std::vector<Eigen::Triplet<Complex>> entries;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double k = model.K()(i, j), g = model.G()(i, j), c = model.C()(i, j);
            if (k != 0.0 || g != 0.0 || c != 0.0) entries.emplace_back(i, j, k / s + g + c * s);
        }
    }
    SparseC a(n, n);
    a.setFromTriplets(entries.begin(), entries.end());
    return a;
}

inline CMatrix pencil_dense(const PsoModel& model, Complex s) {
    return model.K().cast<Complex>() / s + model.G().cast<Complex>() + model.C().cast<Complex>() * s;
}

[[noreturn]] inline void throw_singular(const CMatrix& a, Complex s, const std::string& what) {
    Eigen::JacobiSVD<CMatrix> svd(a);
    const auto& sv = svd.singularValues();
    const double cond = sv.size() == 0 || sv(sv.size() - 1) == 0.0 ? INFINITY : sv(0) / sv(sv.size() - 1);
    throw Error(ErrorCode::SingularAtPoint,
                what + " is singular at s = " + std::to_string(s.real()) + (s.imag() < 0 ? "" : "+") +
                    std::to_string(s.imag()) + "i (condition number " + std::to_string(cond) + ")");
}

/// Pencil restricted to the coordinates `keep` (in that order), built in one pass over K, G, C.
inline SparseC pencil_sparse(const PsoModel& model, Complex s, const std::vector<Eigen::Index>& keep) {
    const Eigen::Index n = model.size();
    std::vector<Eigen::Index> pos(static_cast<std::size_t>(n), -1);
    for (std::size_t a = 0; a < keep.size(); ++a) pos[static_cast<std::size_t>(keep[a])] = static_cast<Eigen::Index>(a);
    std::vector<Eigen::Triplet<Complex>> entries;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (pos[j] < 0) continue;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (pos[i] < 0) continue;
            const double k = model.K()(i, j), g = model.G()(i, j), c = model.C()(i, j);
            if (k != 0.0 || g != 0.0 || c != 0.0) entries.emplace_back(pos[i], pos[j], k / s + g + c * s);
        }
    }
    const auto m = static_cast<Eigen::Index>(keep.size());
    SparseC a(m, m);
    a.setFromTriplets(entries.begin(), entries.end());
    return a;
}

inline CMatrix solve_sparse(const SparseC& a, Complex s, const CMatrix& rhs, const std::string& what) {
    Eigen::SparseLU<SparseC> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() == Eigen::Success) {
        CMatrix x = lu.solve(rhs);
        const double residual = (a * x - rhs).norm();
        if (x.allFinite() && residual <= 1e-8 * rhs.norm()) return x;
    }
    throw_singular(CMatrix(a), s, what);
}

/// Solves A X = B for the pencil A = K/s + G + Cs, rejecting near-singular points.
inline CMatrix solve_pencil(const PsoModel& model, Complex s, const CMatrix& rhs) {
    constexpr double rcond_floor = 1e-14;
    if (model.size() > kSparseThreshold) return solve_sparse(pencil_sparse(model, s), s, rhs, "K/s + G + Cs");
    const CMatrix a = pencil_dense(model, s);
    Eigen::PartialPivLU<CMatrix> lu(a);
    if (!(lu.rcond() > rcond_floor)) throw_singular(a, s, "K/s + G + Cs");
    return lu.solve(rhs);
}

inline void require_nonzero(Complex s) {
    if (s == Complex(0.0, 0.0)) {
        throw Error(ErrorCode::SingularAtPoint, "transfer functions are undefined at s = 0");
    }
}

} // namespace detail

/// Z(s) = P^T (K/s + G + Cs)^-1 P.
inline TransferSample impedance(const PsoModel& model, Complex s) {
    detail::require_nonzero(s);
    const CMatrix p = model.P().cast<Complex>();
    CMatrix z = p.transpose() * detail::solve_pencil(model, s, p);
    return {s, std::move(z), TransferKind::Impedance};
}

/// S = (Z + z0 I)^-1 (Z - z0 I), with every port referenced to z0.
inline TransferSample scattering(const PsoModel& model, Complex s, double z0) {
    if (!(z0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "reference impedance must be positive");
    const CMatrix z = impedance(model, s).matrix;
    const auto m = z.rows();
    const CMatrix id = CMatrix::Identity(m, m);
    const CMatrix plus = z + z0 * id;
    Eigen::PartialPivLU<CMatrix> lu(plus);
    if (!(lu.rcond() > 1e-14)) detail::throw_singular(plus, s, "Z + z0*I");
    return {s, lu.solve(z - z0 * id), TransferKind::Scattering};
}

/// Scattering matrix for a model whose ports already carry their matched z0 loads
/// (semi-infinite line terminations folded into G). Equals scattering() of the unloaded model.
inline TransferSample scattering_terminated(const PsoModel& model, Complex s, double z0) {
    if (!(z0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "reference impedance must be positive");
    CMatrix z = impedance(model, s).matrix;
    const auto m = z.rows();
    return {s, (2.0 / z0) * z - CMatrix::Identity(m, m), TransferKind::Scattering};
}

namespace detail {

/// If every column of P is +-e_k with distinct k, returns those rows and signs.
inline bool unit_port_rows(const Matrix& p, std::vector<Eigen::Index>& rows, std::vector<double>& signs) {
    rows.clear();
    signs.clear();
    std::vector<bool> used(static_cast<std::size_t>(p.rows()), false);
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
        Eigen::Index hit = -1;
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            if (p(i, j) == 0.0) continue;
            if (hit >= 0 || std::abs(p(i, j)) != 1.0) return false;
            hit = i;
        }
        if (hit < 0 || used[hit]) return false;
        used[hit] = true;
        rows.push_back(hit);
        signs.push_back(p(hit, j));
    }
    return true;
}

} // namespace detail

/// Port admittance by Schur complement: coordinates are changed so that P = [I; 0], then
/// Y = Y1 - Y2^T Y3^-1 Y2 for the blocks of K/s + G + Cs. Works where Z(s) is singular.
inline TransferSample admittance(const PsoModel& model, Complex s) {
    detail::require_nonzero(s);
    const Eigen::Index n = model.size(), m = model.port_count();
    if (m > n) throw Error(ErrorCode::RankDeficientPorts, "more ports than coordinates");

    std::vector<Eigen::Index> rows;
    std::vector<double> signs;
    if (detail::unit_port_rows(model.P(), rows, signs)) {
        // Signed permutation: port coordinates first, the rest keep their order.
        std::vector<Eigen::Index> order(rows);
        std::vector<bool> is_port(static_cast<std::size_t>(n), false);
        for (auto r : rows) is_port[r] = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!is_port[i]) order.push_back(i);
        }
        std::vector<double> sign(static_cast<std::size_t>(n), 1.0);
        for (std::size_t j = 0; j < rows.size(); ++j) sign[j] = signs[j];

        auto entry = [&](Eigen::Index a, Eigen::Index b) {
            const Eigen::Index i = order[a], j = order[b];
            const Complex v = model.K()(i, j) / s + model.G()(i, j) + model.C()(i, j) * s;
            return v * sign[a] * sign[b];
        };
        CMatrix y1(m, m), y2(n - m, m);
        for (Eigen::Index a = 0; a < m; ++a) {
            for (Eigen::Index b = 0; b < m; ++b) y1(a, b) = entry(a, b);
            for (Eigen::Index b = m; b < n; ++b) y2(b - m, a) = entry(b, a);
        }
        if (n == m) return {s, std::move(y1), TransferKind::Admittance};

        std::vector<Eigen::Index> inner(order.begin() + m, order.end());
        if (n - m > detail::kSparseThreshold) {
            const auto a3 = detail::pencil_sparse(model, s, inner);
            const CMatrix x = detail::solve_sparse(a3, s, y2, "internal block Y3: K/s + G + Cs");
            return {s, y1 - y2.transpose() * x, TransferKind::Admittance};
        }
        Matrix k3(n - m, n - m), g3(n - m, n - m), c3(n - m, n - m);
        for (Eigen::Index a = 0; a < n - m; ++a) {
            for (Eigen::Index b = 0; b < n - m; ++b) {
                k3(a, b) = model.K()(inner[a], inner[b]);
                g3(a, b) = model.G()(inner[a], inner[b]);
                c3(a, b) = model.C()(inner[a], inner[b]);
            }
        }
        const PsoModel internal(std::move(k3), std::move(g3), std::move(c3), Matrix::Zero(n - m, 0));
        CMatrix x;
        try {
            x = detail::solve_pencil(internal, s, y2);
        } catch (const Error& e) {
            throw Error(ErrorCode::SingularAtPoint, std::string("internal block Y3: ") + e.detail());
        }
        return {s, y1 - y2.transpose() * x, TransferKind::Admittance};
    }

    // General ports: QR of P gives U with U P = [I; 0].
    Eigen::HouseholderQR<Matrix> qr(model.P());
    const Matrix r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    const double rmax = m > 0 ? r.diagonal().cwiseAbs().maxCoeff() : 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        if (!(std::abs(r(j, j)) > 1e-12 * rmax)) {
            throw Error(ErrorCode::RankDeficientPorts, "port matrix P is not full column rank");
        }
    }
    const Matrix qt = qr.householderQ().transpose();
    Matrix u = qt;
    u.topRows(m) = r.triangularView<Eigen::Upper>().solve(qt.topRows(m));
    const CMatrix a = u.cast<Complex>() * detail::pencil_dense(model, s) * u.transpose().cast<Complex>();
    const CMatrix y1 = a.topLeftCorner(m, m);
    if (n == m) return {s, y1, TransferKind::Admittance};
    const CMatrix y2 = a.bottomLeftCorner(n - m, m);
    const CMatrix y3 = a.bottomRightCorner(n - m, n - m);
    Eigen::PartialPivLU<CMatrix> lu(y3);
    if (!(lu.rcond() > 1e-14)) detail::throw_singular(y3, s, "internal block Y3");
    return {s, y1 - y2.transpose() * lu.solve(y2), TransferKind::Admittance};
}

/// lim_{s->0} s*Y(s) (the inverse-inductance term of the port admittance), estimated on the
/// imaginary axis at f_low and 10*f_low with one Richardson step against the O(s) remainder.
inline Matrix low_frequency_stiffness(const PsoModel& model, double f_low = 1e3) {
    const double w1 = 2.0 * std::numbers::pi * f_low, w2 = 10.0 * w1;
    const Complex s1(0.0, w1), s2(0.0, w2);
    const CMatrix a1 = s1 * admittance(model, s1).matrix;
    const CMatrix a2 = s2 * admittance(model, s2).matrix;
    const CMatrix limit = (10.0 * a1 - a2) / 9.0;
    return limit.real();
}

} // namespace psomodes
