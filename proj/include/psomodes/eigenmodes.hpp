#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "psomodes/detail/lapack.hpp"
#include "psomodes/pso_model.hpp"

namespace psomodes {

enum class ModeKind { Oscillating, Overdamped, ZeroFrequency };

inline const char* to_string(ModeKind kind) {
    switch (kind) {
    case ModeKind::Oscillating: return "oscillating";
    case ModeKind::Overdamped: return "overdamped";
    case ModeKind::ZeroFrequency: return "zero_frequency";
    }
    return "?";
}

/// One eigenmode. For oscillating modes only the Im(lambda) > 0 member of the conjugate
/// pair is stored; multiplicity counts how many pencil eigenvalues the entry stands for.
struct EigenMode {
    Complex lambda;   ///< complex frequency, rad/s
    CVector phi;      ///< mode shape over the flux coordinates, unit norm
    ModeKind kind = ModeKind::Oscillating;
    int multiplicity = 2;

    double frequency_hz() const { return lambda.imag() / (2.0 * std::numbers::pi); }
    /// Energy decay rate in Hz, -2 Re(lambda) / 2pi.
    double decay_rate_hz() const { return -2.0 * lambda.real() / (2.0 * std::numbers::pi); }
    double t1_seconds() const {
        return lambda.real() < 0.0 ? -1.0 / (2.0 * lambda.real()) : std::numeric_limits<double>::infinity();
    }
};

struct EigenSolution {
    std::vector<EigenMode> modes;  ///< sorted by frequency, then decay rate
    std::vector<std::string> coord_labels;

    std::size_t size() const noexcept { return modes.size(); }
    const EigenMode& operator[](std::size_t i) const { return modes[i]; }

    /// Modes with a nonzero oscillation frequency, in frequency order.
    std::vector<const EigenMode*> oscillating() const {
        std::vector<const EigenMode*> out;
        for (const auto& m : modes) {
            if (m.kind == ModeKind::Oscillating) out.push_back(&m);
        }
        return out;
    }
};

enum class EigenMethod {
    Qz,               ///< real QZ on the 2n x 2n pencil (dggev)
    CholeskyReduced,  ///< congruence with the Cholesky factor of C, then dgeev
};

struct SolveOptions {
    Tolerances tol{};
    EigenMethod method = EigenMethod::Qz;
    bool refine = true;  ///< quadratic Rayleigh-quotient polish of each eigenvalue
};

namespace detail {

inline void normalize_mode(CVector& v) {
    const double norm = v.norm();
    if (norm == 0.0) return;
    v /= norm;
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const Complex phase = v(imax) / std::abs(v(imax));
    v /= phase;
    v(imax) = Complex(std::abs(v(imax)), 0.0);
}

/// Rows of C whose diagonal is negligible; reported when the mass matrix is rejected.
inline std::vector<std::string> weak_mass_coordinates(const PsoModel& model, const Matrix& scaled_c) {
    std::vector<std::string> out;
    const double cmax = model.C().diagonal().cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < model.size(); ++i) {
        if (!(model.C()(i, i) > 1e-12 * cmax)) out.push_back(model.coord_labels()[i]);
    }
    if (!out.empty() || scaled_c.size() == 0) return out;
    Eigen::SelfAdjointEigenSolver<Matrix> es(scaled_c);
    const Vector v = es.eigenvectors().col(0).cwiseAbs();
    const double vmax = v.maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v(i) > 0.3 * vmax) out.push_back(model.coord_labels()[i]);
    }
    return out;
}

inline std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
    return out;
}

} // namespace detail

/// Complex frequencies and mode shapes of a model.
///
/// C must be positive definite. Internally the pencil is diagonally equilibrated
/// (phi = D phi', D = diag(C)^-1/2) and time is rescaled so the largest stiffness entry is one;
/// both are undone on output.
inline EigenSolution eigenmodes(const PsoModel& model, const SolveOptions& options = {}) {
    const auto& tol = options.tol;
    const Eigen::Index n = model.size();
    EigenSolution solution;
    solution.coord_labels = model.coord_labels();
    if (n == 0) return solution;

    const Vector cdiag = model.C().diagonal();
    if ((cdiag.array() <= 0.0).any()) {
        throw Error(ErrorCode::SingularMassMatrix,
                    "no capacitance on coordinate(s): " + detail::join(detail::weak_mass_coordinates(model, {})));
    }
    const Vector d = cdiag.cwiseSqrt().cwiseInverse();
    const Matrix Cs = d.asDiagonal() * model.C() * d.asDiagonal();
    Eigen::LLT<Matrix> llt(Cs);
    if (llt.info() != Eigen::Success || llt.rcond() < 1.0 / tol.cond_limit) {
        throw Error(ErrorCode::SingularMassMatrix,
                    "capacitance matrix is singular or ill-conditioned (rcond " +
                        std::to_string(llt.info() == Eigen::Success ? llt.rcond() : 0.0) +
                        "); weakly held coordinates: " + detail::join(detail::weak_mass_coordinates(model, Cs)));
    }
    const Matrix Ks = d.asDiagonal() * model.K() * d.asDiagonal();
    const Matrix Gs = d.asDiagonal() * model.G() * d.asDiagonal();

    double tau = 1.0;
    const double kmax = Ks.diagonal().maxCoeff();
    const double gmax = Gs.diagonal().maxCoeff();
    if (kmax > 0.0) {
        tau = 1.0 / std::sqrt(kmax);
    } else if (gmax > 0.0) {
        tau = 1.0 / gmax;
    }
    const Matrix Kt = tau * tau * Ks;
    const Matrix Gt = tau * Gs;
    const bool lossless = (model.G().array() == 0.0).all();

    // Flux block of each eigenvector, in the equilibrated coordinates.
    detail::RealEigenOutput raw;
    Matrix flux_vectors;
    if (options.method == EigenMethod::Qz) {
        Matrix A = Matrix::Zero(2 * n, 2 * n), B = Matrix::Zero(2 * n, 2 * n);
        A.topLeftCorner(n, n) = -Gt;
        A.topRightCorner(n, n) = -Kt;
        A.bottomLeftCorner(n, n).setIdentity();
        B.topLeftCorner(n, n) = Cs;
        B.bottomRightCorner(n, n).setIdentity();
        raw = detail::ggev(std::move(A), std::move(B));
        flux_vectors = raw.vectors.bottomRows(n);
    } else {
        const Matrix L = llt.matrixL();
        auto congruence = [&](const Matrix& m) {
            Matrix x = llt.matrixL().solve(m);
            return Matrix(llt.matrixL().solve(x.transpose()).transpose());
        };
        Matrix A = Matrix::Zero(2 * n, 2 * n);
        A.topLeftCorner(n, n) = -congruence(Gt);
        A.topRightCorner(n, n) = -congruence(Kt);
        A.bottomLeftCorner(n, n).setIdentity();
        raw = detail::geev(std::move(A));
        flux_vectors = L.transpose().triangularView<Eigen::Upper>().solve(Matrix(raw.vectors.bottomRows(n)));
    }

    const Eigen::Index m = 2 * n;
    std::vector<Complex> mu(static_cast<std::size_t>(m));
    double scale = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        if (raw.beta(j) == 0.0 || !std::isfinite(raw.alphar(j) / raw.beta(j))) {
            throw Error(ErrorCode::SolverFailure, "infinite eigenvalue in pencil");
        }
        mu[j] = Complex(raw.alphar(j), raw.alphai(j)) / raw.beta(j);
        scale = std::max(scale, std::abs(mu[j]));
    }

    auto refine = [&](Complex guess, const CVector& phi) {
        if (!options.refine) return guess;
        const Complex a = phi.transpose() * Cs * phi;
        const Complex b = phi.transpose() * Gt * phi;
        const Complex c = phi.transpose() * Kt * phi;
        if (std::abs(a) < 1e-8 * phi.squaredNorm()) return guess;
        const Complex disc = std::sqrt(b * b - 4.0 * a * c);
        const Complex r1 = (-b + disc) / (2.0 * a), r2 = (-b - disc) / (2.0 * a);
        const Complex best = std::abs(r1 - guess) < std::abs(r2 - guess) ? r1 : r2;
        return std::abs(best - guess) <= 1e-6 * std::max(std::abs(guess), tol.zero_tol * scale) ? best : guess;
    };

    std::vector<EigenMode> modes;
    std::vector<CVector> zero_vectors;
    int zero_count = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
        const bool pair = raw.alphai(j) > 0.0 && j + 1 < m;
        CVector phi(n);
        if (pair) {
            phi.real() = flux_vectors.col(j);
            phi.imag() = flux_vectors.col(j + 1);
        } else {
            phi.real() = flux_vectors.col(j);
            phi.imag().setZero();
        }
        const Complex value = mu[j];
        const int count = pair ? 2 : 1;
        if (pair) ++j;

        if (std::abs(value) <= tol.zero_tol * scale || scale == 0.0) {
            zero_count += count;
            zero_vectors.push_back(phi);
            continue;
        }
        EigenMode mode;
        mode.multiplicity = count;
        Complex lam = refine(value, phi);
        if (pair && std::abs(lam.imag()) > tol.pair_tol * std::abs(lam)) {
            mode.kind = ModeKind::Oscillating;
            if (lossless) lam.real(0.0);
        } else {
            mode.kind = ModeKind::Overdamped;
            lam.imag(0.0);
        }
        if (lam.real() > tol.passivity_tol * scale) {
            throw Error(ErrorCode::SolverFailure,
                        "eigenvalue with positive real part " + std::to_string(lam.real() / tau) +
                            " rad/s; model is not passive");
        }
        if (lam.real() > 0.0) lam.real(0.0);
        mode.lambda = lam / tau;
        mode.phi = d.asDiagonal() * phi;
        detail::normalize_mode(mode.phi);
        modes.push_back(std::move(mode));
    }

    if (zero_count > 0) {
        // Zero eigenvalues of a singular K come in Jordan pairs whose computed vectors are nearly
        // parallel; keep one mode per independent direction.
        Matrix candidates(n, 2 * static_cast<Eigen::Index>(zero_vectors.size()));
        for (std::size_t k = 0; k < zero_vectors.size(); ++k) {
            candidates.col(2 * k) = d.asDiagonal() * zero_vectors[k].real();
            candidates.col(2 * k + 1) = d.asDiagonal() * zero_vectors[k].imag();
        }
        for (Eigen::Index c = 0; c < candidates.cols(); ++c) {
            const double nc = candidates.col(c).norm();
            if (nc > 0.0) candidates.col(c) /= nc;
        }
        Eigen::ColPivHouseholderQR<Matrix> qr(candidates);
        qr.setThreshold(1e-6);
        Eigen::Index rank = std::max<Eigen::Index>(1, qr.rank());
        rank = std::min<Eigen::Index>(rank, zero_count);
        const Matrix Q = qr.householderQ() * Matrix::Identity(n, rank);
        // Multiplicities sum to zero_count: one per direction, a second while any are left,
        // and any surplus on the first direction.
        const int extra = zero_count - static_cast<int>(rank);
        for (Eigen::Index k = 0; k < rank; ++k) {
            EigenMode mode;
            mode.kind = ModeKind::ZeroFrequency;
            mode.lambda = Complex(0.0, 0.0);
            mode.multiplicity = 1 + (k < extra ? 1 : 0);
            if (k == 0 && extra > rank) mode.multiplicity += extra - static_cast<int>(rank);
            mode.phi = Q.col(k).cast<Complex>();
            detail::normalize_mode(mode.phi);
            modes.push_back(std::move(mode));
        }
    }

    std::stable_sort(modes.begin(), modes.end(), [](const EigenMode& a, const EigenMode& b) {
        if (a.lambda.imag() != b.lambda.imag()) return a.lambda.imag() < b.lambda.imag();
        return a.lambda.real() > b.lambda.real();
    });
    solution.modes = std::move(modes);
    return solution;
}

} // namespace psomodes
