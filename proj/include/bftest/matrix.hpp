#pragma once

#include <Eigen/Dense>

namespace bftest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultConditionCap = 1e12;
inline constexpr double kDefaultGrevilleTolerance = 1e-8;

/// Moore-Penrose inverse of a full-row-rank q x p matrix, G^T (G G^T)^{-1}.
/// Throws RankDeficient when q > p or cond(G G^T) exceeds `condition_cap`.
Matrix pinv_full_row_rank(const Matrix& G, double condition_cap = kDefaultConditionCap);

struct GrevilleCheck {
    bool holds = false;
    double residual = 0.0;  // max |G+G KK^T - KK^T G+G|
    double scale = 0.0;     // largest entry magnitude of the two products
};

/// Commutation check G+G KK^T = KK^T G+G, sufficient for (GK)+ = K+ G+.
/// `holds` compares the residual against `tolerance * scale`.
GrevilleCheck greville_identity_residual(const Matrix& G, const Matrix& K,
                                         double tolerance = kDefaultGrevilleTolerance,
                                         double condition_cap = kDefaultConditionCap);

/// Solves A x = b for symmetric (possibly indefinite) A with an LDL^T
/// factorization. Throws Singular when a pivot is negligible relative to the
/// largest one.
Vector solve_symmetric(const Matrix& A, const Vector& b, double pivot_tolerance = 1e-13);
Matrix solve_symmetric(const Matrix& A, const Matrix& B, double pivot_tolerance = 1e-13);

/// Inverse of a symmetric nonsingular matrix via solve_symmetric.
Matrix inverse_symmetric(const Matrix& A, double pivot_tolerance = 1e-13);

/// 2-norm condition number of a symmetric matrix (ratio of extreme
/// eigenvalue magnitudes). Returns +inf for singular input.
double condition_number_symmetric(const Matrix& A);

/// True when G G^T is invertible with condition number below the cap.
bool full_row_rank(const Matrix& G, double condition_cap = kDefaultConditionCap);

double max_abs(const Matrix& M);

}  // namespace bftest
