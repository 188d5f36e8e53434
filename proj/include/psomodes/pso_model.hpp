#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "psomodes/error.hpp"

namespace psomodes {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Numerical thresholds shared by the core operations. All are relative.
struct Tolerances {
    double sym_tol = 1e-12;       ///< max |A - A^T| / max |A|
    double psd_tol = 1e-10;       ///< lambda_min >= -psd_tol * max |lambda|
    double passivity_tol = 1e-9;  ///< Re(lambda) <= passivity_tol * max |lambda|
    double cond_limit = 1e12;     ///< mass matrix / transform conditioning
    double zero_tol = 1e-6;       ///< |lambda| below this fraction of the spectrum scale is a zero mode
    double pair_tol = 1e-8;       ///< |Im(lambda)| <= pair_tol * |lambda| counts as real
};

/// Second-order model K*phi + G*phi' + C*phi'' = P*d with output v = P^T * phi'.
///
/// K is inverse inductance (1/H), G conductance (S), C capacitance (F). Columns of P are
/// ports. Instances are immutable; the composition operations return new models.
class PsoModel {
public:
    PsoModel() = default;

    PsoModel(Matrix K, Matrix G, Matrix C, Matrix P,
             std::vector<std::string> coord_labels = {},
             std::vector<std::string> port_labels = {})
        : K_(std::move(K)), G_(std::move(G)), C_(std::move(C)), P_(std::move(P)),
          coord_labels_(std::move(coord_labels)), port_labels_(std::move(port_labels)) {
        const auto n = K_.rows();
        auto square = [n](const Matrix& m) { return m.rows() == n && m.cols() == n; };
        if (!square(K_) || !square(G_) || !square(C_)) {
            throw Error(ErrorCode::InvalidArgument, "K, G and C must be square with equal size");
        }
        if (P_.rows() != n) {
            throw Error(ErrorCode::InvalidArgument,
                        "P has " + std::to_string(P_.rows()) + " rows, expected " + std::to_string(n));
        }
        if (coord_labels_.empty()) {
            for (Eigen::Index i = 0; i < n; ++i) coord_labels_.push_back("x" + std::to_string(i));
        }
        if (port_labels_.empty()) {
            for (Eigen::Index j = 0; j < P_.cols(); ++j) port_labels_.push_back("p" + std::to_string(j));
        }
        if (static_cast<Eigen::Index>(coord_labels_.size()) != n ||
            static_cast<Eigen::Index>(port_labels_.size()) != P_.cols()) {
            throw Error(ErrorCode::InvalidArgument, "label count does not match matrix dimensions");
        }
    }

    const Matrix& K() const noexcept { return K_; }
    const Matrix& G() const noexcept { return G_; }
    const Matrix& C() const noexcept { return C_; }
    const Matrix& P() const noexcept { return P_; }
    const std::vector<std::string>& coord_labels() const noexcept { return coord_labels_; }
    const std::vector<std::string>& port_labels() const noexcept { return port_labels_; }

    Eigen::Index size() const noexcept { return K_.rows(); }
    Eigen::Index port_count() const noexcept { return P_.cols(); }

    /// Index of a port by label, or -1.
    Eigen::Index port_index(const std::string& label) const {
        auto it = std::find(port_labels_.begin(), port_labels_.end(), label);
        return it == port_labels_.end() ? -1 : static_cast<Eigen::Index>(it - port_labels_.begin());
    }

private:
    Matrix K_{0, 0}, G_{0, 0}, C_{0, 0}, P_{0, 0};
    std::vector<std::string> coord_labels_;
    std::vector<std::string> port_labels_;
};

enum class ViolationKind { Asymmetric, NotPsd };

struct Violation {
    std::string matrix;  ///< "K", "G" or "C"
    ViolationKind kind;
    double value;        ///< relative asymmetry, or the offending (most negative) eigenvalue
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const noexcept { return violations.empty(); }
};

/// Checks symmetry and positive semidefiniteness of K, G, C.
inline ValidationReport validate(const PsoModel& model, double sym_tol = Tolerances{}.sym_tol,
                                 double psd_tol = Tolerances{}.psd_tol) {
    ValidationReport report;
    auto check = [&](const char* name, const Matrix& a) {
        if (a.size() == 0) return;
        const double scale = a.cwiseAbs().maxCoeff();
        if (scale == 0.0) return;
        const double asym = (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
        if (asym > sym_tol) {
            report.violations.push_back({name, ViolationKind::Asymmetric, asym});
        }
        const Matrix sym = 0.5 * (a + a.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        const double largest = ev.cwiseAbs().maxCoeff();
        if (ev.minCoeff() < -psd_tol * largest) {
            report.violations.push_back({name, ViolationKind::NotPsd, ev.minCoeff()});
        }
    };
    check("K", model.K());
    check("G", model.G());
    check("C", model.C());
    return report;
}

/// Same dynamics, restricted to a subset of the ports (in the given order).
inline PsoModel select_ports(const PsoModel& model, const std::vector<std::string>& labels) {
    Matrix P(model.size(), static_cast<Eigen::Index>(labels.size()));
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const auto idx = model.port_index(labels[j]);
        if (idx < 0) throw Error(ErrorCode::InvalidArgument, "unknown port '" + labels[j] + "'");
        P.col(static_cast<Eigen::Index>(j)) = model.P().col(idx);
    }
    return PsoModel(model.K(), model.G(), model.C(), std::move(P), model.coord_labels(), labels);
}

/// Same matrices with G replaced; used to strip or add port terminations.
inline PsoModel with_conductance(const PsoModel& model, Matrix G) {
    return PsoModel(model.K(), std::move(G), model.C(), model.P(), model.coord_labels(),
                    model.port_labels());
}

} // namespace psomodes
