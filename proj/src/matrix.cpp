#include "bftest/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>

#include "bftest/error.hpp"

namespace bftest {

namespace {

void require_finite(const Matrix& M, const char* what) {
    if (!M.allFinite()) {
        throw DomainError(std::string(what) + " has non-finite entries");
    }
}

Eigen::LDLT<Matrix> factor_symmetric(const Matrix& A, double pivot_tolerance) {
    if (A.rows() != A.cols()) {
        throw DimensionMismatch("solve_symmetric: matrix is " + std::to_string(A.rows()) + "x" +
                                std::to_string(A.cols()));
    }
    require_finite(A, "solve_symmetric: matrix");
    Eigen::LDLT<Matrix> ldlt(A);
    if (ldlt.info() != Eigen::Success) {
        throw Singular("solve_symmetric: factorization failed");
    }
    const Vector d = ldlt.vectorD();
    const double largest = d.cwiseAbs().maxCoeff();
    const double smallest = d.cwiseAbs().minCoeff();
    if (!(largest > 0.0) || smallest <= pivot_tolerance * largest) {
        throw Singular("solve_symmetric: pivot below threshold");
    }
    return ldlt;
}

}  // namespace

double max_abs(const Matrix& M) { return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff(); }

double condition_number_symmetric(const Matrix& A) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(A, Eigen::EigenvaluesOnly);
    const Vector mags = eig.eigenvalues().cwiseAbs();
    const double lo = mags.minCoeff();
    if (lo == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return mags.maxCoeff() / lo;
}

bool full_row_rank(const Matrix& G, double condition_cap) {
    if (G.rows() == 0 || G.rows() > G.cols() || !G.allFinite()) {
        return false;
    }
    const Matrix GGt = G * G.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(GGt, Eigen::EigenvaluesOnly);
    const Vector ev = eig.eigenvalues();
    // eigenvalues are ascending; GG^T is positive semidefinite
    return ev(0) > 0.0 && ev(ev.size() - 1) / ev(0) <= condition_cap;
}

Matrix pinv_full_row_rank(const Matrix& G, double condition_cap) {
    require_finite(G, "pinv_full_row_rank: G");
    if (G.rows() == 0 || G.rows() > G.cols()) {
        throw RankDeficient("pinv_full_row_rank: G is " + std::to_string(G.rows()) + "x" +
                            std::to_string(G.cols()) + ", need 1 <= q <= p");
    }
    if (!full_row_rank(G, condition_cap)) {
        throw RankDeficient("pinv_full_row_rank: G G^T is numerically singular");
    }
    // G^T = QR gives G+ = Q R^{-T}.
    const Eigen::Index q = G.rows();
    const Eigen::HouseholderQR<Matrix> qr(G.transpose());
    const Matrix Q = qr.householderQ() * Matrix::Identity(G.cols(), q);
    const Matrix R = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
    const Matrix Rinv_t = R.transpose().triangularView<Eigen::Lower>().solve(Matrix::Identity(q, q));
    return Q * Rinv_t;
}

GrevilleCheck greville_identity_residual(const Matrix& G, const Matrix& K, double tolerance,
                                         double condition_cap) {
    if (K.rows() != K.cols() || K.rows() != G.cols()) {
        throw DimensionMismatch("greville_identity_residual: K must be p x p with p = cols(G)");
    }
    require_finite(K, "greville_identity_residual: K");
    const Matrix P = pinv_full_row_rank(G, condition_cap) * G;
    const Matrix KKt = K * K.transpose();
    const Matrix left = P * KKt;
    const Matrix right = KKt * P;

    GrevilleCheck out;
    out.residual = max_abs(left - right);
    out.scale = std::max(max_abs(left), max_abs(right));
    const double floor = std::numeric_limits<double>::min();
    out.holds = out.residual <= tolerance * std::max(out.scale, floor);
    return out;
}

Vector solve_symmetric(const Matrix& A, const Vector& b, double pivot_tolerance) {
    if (b.size() != A.rows()) {
        throw DimensionMismatch("solve_symmetric: right-hand side length mismatch");
    }
    return factor_symmetric(A, pivot_tolerance).solve(b);
}

Matrix solve_symmetric(const Matrix& A, const Matrix& B, double pivot_tolerance) {
    if (B.rows() != A.rows()) {
        throw DimensionMismatch("solve_symmetric: right-hand side row mismatch");
    }
    return factor_symmetric(A, pivot_tolerance).solve(B);
}

Matrix inverse_symmetric(const Matrix& A, double pivot_tolerance) {
    const Matrix I = Matrix::Identity(A.rows(), A.cols());
    Matrix inv = solve_symmetric(A, I, pivot_tolerance);
    return 0.5 * (inv + inv.transpose());
}

}  // namespace bftest
