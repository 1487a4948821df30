#pragma once

#include <map>
#include <string>
#include <vector>

#include "bftest/matrix.hpp"
#include "bftest/model.hpp"
#include "bftest/restriction.hpp"

namespace bftest {

inline constexpr double kNegativeStatisticTolerance = 1e-10;

struct TestDiagnostics {
    std::string evaluated_at;  // "restricted", "unrestricted", "mixed"
    Vector point;              // parameter value the matrices were evaluated at
    std::string variant;       // BFc variant label, empty otherwise
    std::map<std::string, double> condition_numbers;
    bool negative = false;     // value below -1e-10; p-value computed at 0
    std::vector<std::string> notes;
};

struct TestReport {
    std::string name;
    double value = 0.0;
    int df = 0;
    double p_value = 1.0;
    TestDiagnostics diagnostics;
};

// G, G+, S = G(-A)^{-1}G^T and Omega = G A^{-1} B A^{-1} G^T at one point.
struct TestMatrices {
    Matrix G;
    Matrix Gplus;
    Matrix S;
    Matrix Omega;
};

TestMatrices test_matrices(const Matrix& G, const Matrix& A, const Matrix& B);
TestMatrices test_matrices(const ExtremumModel& model, const Restriction& restriction, const Vector& theta);

enum class JacobianPoint {
    restricted,    // G at the restricted estimate, like A and B
    unrestricted,  // G (hence G+, S, Omega) at the unrestricted estimate
};

struct BfOptions {
    JacobianPoint jacobian_at = JacobianPoint::restricted;
};

/// Bilinear form statistic n s(theta_r)^T G+ S Omega^{-1} g(theta_u), with
/// A and B at the restricted estimate theta_r. Under quasi-score S = Omega
/// and the statistic is n s^T G+ g(theta_u).
TestReport bf(const ExtremumModel& model, const Restriction& restriction, const Vector& theta_unrestricted,
              const Vector& theta_restricted, const BfOptions& options = {});

enum class CorrectionVariant {
    // Star-coordinate score, Hessian and B by pullback through K.
    transform,
    // Star-coordinate score and Hessian by finite differences of
    // theta* -> Q_n(phi^{-1}(theta*)); B* = K^T B K.
    direct,
};

const char* to_string(CorrectionVariant variant);

/// Corrected bilinear form statistic computed in the coordinates
/// theta* = phi(theta) for the restriction g*(theta*) = 0. Both estimates
/// are mapped through phi; throws DomainViolation if either falls outside
/// the domain of phi.
TestReport bf_corrected(const ExtremumModel& model, const Restriction& restriction_star,
                        const Reparametrization& reparam, const Vector& theta_unrestricted,
                        const Vector& theta_restricted, CorrectionVariant variant);

/// n g^T [G A^{-1} B A^{-1} G^T]^{-1} g, everything at the unrestricted estimate.
TestReport wald(const ExtremumModel& model, const Restriction& restriction, const Vector& theta_unrestricted);

/// n s^T A^{-1} G^T Omega^{-1} G A^{-1} s, everything at the restricted estimate.
TestReport lm(const ExtremumModel& model, const Restriction& restriction, const Vector& theta_restricted);

/// 2 n [Q_n(theta_u) - Q_n(theta_r)]. Requires a quasi-score model
/// (ConfigurationError otherwise).
TestReport distance(const ExtremumModel& model, const Vector& theta_unrestricted,
                    const Vector& theta_restricted, int df);

}  // namespace bftest
