#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bftest/matrix.hpp"
#include "bftest/model.hpp"

namespace bftest {

// H0: g(theta) = 0 with g: R^p -> R^q.
struct Restriction {
    // R theta = r. Lets the estimators use a closed form.
    struct Linear {
        Matrix R;
        Vector r;
    };
    // g(theta) = 0 iff theta[index] is one of `values` (the other
    // coordinates are unrestricted). Ordered by preference for ties.
    struct CoordinateRoots {
        std::size_t index = 0;
        std::vector<double> values;
    };

    std::string name;
    std::size_t q = 0;
    std::function<Vector(const Vector&)> g;
    std::function<Matrix(const Vector&)> analytic_jacobian;  // optional
    std::optional<Linear> linear;
    std::optional<CoordinateRoots> roots;

    Vector operator()(const Vector& theta) const;
};

/// G(theta) = dg/dtheta^T. Uses the analytic Jacobian when present, else
/// central differences with step 1e-6 (1 + |theta_i|). Rank is not checked
/// here; see full_row_rank().
Matrix jacobian(const Restriction& restriction, const Vector& theta);

Restriction linear_restriction(Matrix R, Vector r, std::string name = "linear");
// theta[index] - value = 0
Restriction coefficient_restriction(std::size_t p, std::size_t index, double value);
// theta[index]^k - 1 = 0, k a nonzero integer
Restriction power_restriction(std::size_t p, std::size_t index, int k);
// theta_1 - 1/theta_2 = 0
Restriction gregory_veall_restriction();
// theta*_1 theta*_2 - 1 = 0
Restriction gregory_veall_star_restriction();

// One-to-one map phi: Theta -> Theta* with inverse and inverse Jacobian.
struct Reparametrization {
    std::string name;
    std::function<Vector(const Vector&)> phi;
    std::function<Vector(const Vector&)> phi_inv;
    std::function<Matrix(const Vector&)> analytic_K;      // optional, d phi_inv / d theta*^T
    std::function<bool(const Vector&)> domain;            // where phi is defined
    std::function<bool(const Vector&)> image;             // where phi_inv is defined; empty = everywhere

    // Throw DomainViolation outside the respective domains.
    Vector forward(const Vector& theta) const;
    Vector inverse(const Vector& theta_star) const;
};

/// K(theta*) = d phi^{-1}(theta*) / d theta*^T. Throws DomainViolation when
/// phi^{-1} is undefined at theta* and SingularK when K is not invertible.
Matrix K_of(const Reparametrization& reparam, const Vector& theta_star);

Reparametrization identity_reparametrization(std::size_t p);
// phi^{-1} raises theta*[index] to the k-th power; phi takes the real k-th
// root (requires theta[index] > 0 for even k, sign preserving for odd k).
Reparametrization power_root_reparametrization(std::size_t p, std::size_t index, int k);
// phi^{-1}(t1, t2) = ((t1 + 1) t2 - 1, 1 / t2)
Reparametrization gregory_veall_reparametrization();

/// g* = g o phi^{-1} with Jacobian G(phi^{-1}(theta*)) K(theta*), so the
/// pair satisfies the equivalence and Jacobian-chain conditions exactly.
Restriction compose(const Restriction& restriction, const Reparametrization& reparam);

struct ConditionEntry {
    std::string condition;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    Vector point;  // theta* at which the condition was evaluated
    std::string note;
};

struct ConditionReport {
    Vector theta;
    Vector theta_star;
    std::vector<ConditionEntry> entries;

    bool all_pass() const;
    const ConditionEntry* find(const std::string& condition) const;
};

struct AuditOptions {
    double tolerance = 1e-7;
    double condition_cap = kDefaultConditionCap;
};

/// Numeric audit of the invariance conditions at theta:
///   B1  G*(theta*) = G(theta) K
///   B2  Greville commutation G+G KK^T = KK^T G+G (plus a direct
///       pseudoinverse comparison reported as "B2-pinv")
///   B3  gradient of theta* -> Q_n(phi^{-1}(theta*)) equals K^T score(theta)
///   B4  K^T A K against the FD Hessian of the composed objective; only when
///       the model is not quasi-score
///   B6  g*(theta*) = g(theta)
/// Residuals are max-norms; tolerances are scaled by the operand magnitudes.
ConditionReport audit_conditions(const ExtremumModel& model, const Restriction& g,
                                 const Restriction& g_star, const Reparametrization& reparam,
                                 const Vector& theta, const AuditOptions& options = {});

}  // namespace bftest
