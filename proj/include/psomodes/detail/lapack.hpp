#pragma once

#include <vector>

#include <Eigen/Dense>

#include "psomodes/error.hpp"

extern "C" {
void dggev_(const char* jobvl, const char* jobvr, const int* n, double* a, const int* lda, double* b,
            const int* ldb, double* alphar, double* alphai, double* beta, double* vl, const int* ldvl,
            double* vr, const int* ldvr, double* work, const int* lwork, int* info);

void dgeev_(const char* jobvl, const char* jobvr, const int* n, double* a, const int* lda, double* wr,
            double* wi, double* vl, const int* ldvl, double* vr, const int* ldvr, double* work,
            const int* lwork, int* info);
}

namespace psomodes::detail {

/// Raw output of a real eigen-decomposition. Complex pairs follow LAPACK's packing:
/// for alphai[j] > 0, columns j and j+1 of vectors hold the real and imaginary parts.
struct RealEigenOutput {
    Eigen::VectorXd alphar, alphai, beta;
    Eigen::MatrixXd vectors;
};

/// Solves A v = lambda B v (QZ). A and B are consumed.
inline RealEigenOutput ggev(Eigen::MatrixXd A, Eigen::MatrixXd B) {
    const int n = static_cast<int>(A.rows());
    RealEigenOutput out{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
    if (n == 0) return out;
    const char no = 'N', yes = 'V';
    int ldvl = 1, info = 0, lwork = -1;
    double query = 0.0, dummy = 0.0;
    dggev_(&no, &yes, &n, A.data(), &n, B.data(), &n, out.alphar.data(), out.alphai.data(),
           out.beta.data(), &dummy, &ldvl, out.vectors.data(), &n, &query, &lwork, &info);
    lwork = static_cast<int>(query);
    std::vector<double> work(static_cast<std::size_t>(lwork));
    dggev_(&no, &yes, &n, A.data(), &n, B.data(), &n, out.alphar.data(), out.alphai.data(),
           out.beta.data(), &dummy, &ldvl, out.vectors.data(), &n, work.data(), &lwork, &info);
    if (info != 0) {
        throw Error(ErrorCode::SolverFailure, "dggev returned info=" + std::to_string(info));
    }
    return out;
}

/// Solves A v = lambda v. beta is filled with ones so callers can treat both uniformly.
inline RealEigenOutput geev(Eigen::MatrixXd A) {
    const int n = static_cast<int>(A.rows());
    RealEigenOutput out{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd::Ones(n), Eigen::MatrixXd(n, n)};
    if (n == 0) return out;
    const char no = 'N', yes = 'V';
    int ldvl = 1, info = 0, lwork = -1;
    double query = 0.0, dummy = 0.0;
    dgeev_(&no, &yes, &n, A.data(), &n, out.alphar.data(), out.alphai.data(), &dummy, &ldvl,
           out.vectors.data(), &n, &query, &lwork, &info);
    lwork = static_cast<int>(query);
    std::vector<double> work(static_cast<std::size_t>(lwork));
    dgeev_(&no, &yes, &n, A.data(), &n, out.alphar.data(), out.alphai.data(), &dummy, &ldvl,
           out.vectors.data(), &n, work.data(), &lwork, &info);
    if (info != 0) {
        throw Error(ErrorCode::SolverFailure, "dgeev returned info=" + std::to_string(info));
    }
    return out;
}

} // namespace psomodes::detail
