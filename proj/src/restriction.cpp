#include "bftest/restriction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "bftest/error.hpp"
#include "bftest/numdiff.hpp"

namespace bftest {

namespace {

double scaled_tolerance(double tol, double magnitude) { return tol * (1.0 + magnitude); }

void require_index(std::size_t p, std::size_t index) {
    if (index >= p) {
        throw DimensionMismatch("coordinate index " + std::to_string(index) + " out of range for p = " +
                                std::to_string(p));
    }
}

void require_nonzero_k(int k) {
    if (k == 0) {
        throw DomainError("power exponent k must be nonzero");
    }
}

}  // namespace

// -------------------------------------------------------------------------
// Restrictions
// -------------------------------------------------------------------------

Vector Restriction::operator()(const Vector& theta) const {
    Vector v = g(theta);
    if (static_cast<std::size_t>(v.size()) != q) {
        throw DimensionMismatch("restriction '" + name + "' returned " + std::to_string(v.size()) +
                                " values, expected q = " + std::to_string(q));
    }
    return v;
}

Matrix jacobian(const Restriction& restriction, const Vector& theta) {
    Matrix G = restriction.analytic_jacobian
                   ? restriction.analytic_jacobian(theta)
                   : numdiff::jacobian([&](const Vector& t) { return restriction(t); }, theta, 1e-6);
    if (static_cast<std::size_t>(G.rows()) != restriction.q || G.cols() != theta.size()) {
        throw DimensionMismatch("Jacobian of '" + restriction.name + "' has wrong shape");
    }
    return G;
}

Restriction linear_restriction(Matrix R, Vector r, std::string name) {
    if (R.rows() != r.size() || R.rows() == 0 || R.rows() > R.cols()) {
        throw DimensionMismatch("linear restriction needs R: q x p, r: q, 1 <= q <= p");
    }
    Restriction out;
    out.name = std::move(name);
    out.q = static_cast<std::size_t>(R.rows());
    out.g = [R, r](const Vector& t) -> Vector { return R * t - r; };
    out.analytic_jacobian = [R](const Vector&) -> Matrix { return R; };
    out.linear = Restriction::Linear{R, r};
    return out;
}

Restriction coefficient_restriction(std::size_t p, std::size_t index, double value) {
    require_index(p, index);
    Matrix R = Matrix::Zero(1, static_cast<Eigen::Index>(p));
    R(0, static_cast<Eigen::Index>(index)) = 1.0;
    Restriction out = linear_restriction(R, Vector::Constant(1, value),
                                         "theta" + std::to_string(index + 1) + " = " + std::to_string(value));
    out.roots = Restriction::CoordinateRoots{index, {value}};
    return out;
}

Restriction power_restriction(std::size_t p, std::size_t index, int k) {
    require_index(p, index);
    require_nonzero_k(k);
    const auto j = static_cast<Eigen::Index>(index);
    const auto cols = static_cast<Eigen::Index>(p);
    Restriction out;
    out.name = "theta" + std::to_string(index + 1) + "^" + std::to_string(k) + " - 1";
    out.q = 1;
    out.g = [j, k](const Vector& t) -> Vector { return Vector::Constant(1, std::pow(t(j), k) - 1.0); };
    out.analytic_jacobian = [j, k, cols](const Vector& t) -> Matrix {
        Matrix G = Matrix::Zero(1, cols);
        G(0, j) = k * std::pow(t(j), k - 1);
        return G;
    };
    if (k % 2 == 0) {
        out.roots = Restriction::CoordinateRoots{index, {1.0, -1.0}};
    } else {
        out.roots = Restriction::CoordinateRoots{index, {1.0}};
    }
    return out;
}

Restriction gregory_veall_restriction() {
    Restriction out;
    out.name = "theta1 - 1/theta2";
    out.q = 1;
    out.g = [](const Vector& t) -> Vector { return Vector::Constant(1, t(0) - 1.0 / t(1)); };
    out.analytic_jacobian = [](const Vector& t) -> Matrix {
        Matrix G(1, 2);
        G << 1.0, 1.0 / (t(1) * t(1));
        return G;
    };
    return out;
}

Restriction gregory_veall_star_restriction() {
    Restriction out;
    out.name = "theta1* theta2* - 1";
    out.q = 1;
    out.g = [](const Vector& t) -> Vector { return Vector::Constant(1, t(0) * t(1) - 1.0); };
    out.analytic_jacobian = [](const Vector& t) -> Matrix {
        Matrix G(1, 2);
        G << t(1), t(0);
        return G;
    };
    return out;
}

// -------------------------------------------------------------------------
// Reparametrizations
// -------------------------------------------------------------------------

Vector Reparametrization::forward(const Vector& theta) const {
    if (domain && !domain(theta)) {
        throw DomainViolation("phi of '" + name + "' is undefined at the given theta");
    }
    return phi(theta);
}

Vector Reparametrization::inverse(const Vector& theta_star) const {
    if (image && !image(theta_star)) {
        throw DomainViolation("phi^-1 of '" + name + "' is undefined at the given theta*");
    }
    return phi_inv(theta_star);
}

Matrix K_of(const Reparametrization& reparam, const Vector& theta_star) {
    if (reparam.image && !reparam.image(theta_star)) {
        throw DomainViolation("phi^-1 of '" + reparam.name + "' is undefined at the given theta*");
    }
    Matrix K = reparam.analytic_K
                   ? reparam.analytic_K(theta_star)
                   : numdiff::jacobian(reparam.phi_inv, theta_star, 1e-6);
    if (K.rows() != theta_star.size() || K.cols() != theta_star.size()) {
        throw DimensionMismatch("K of '" + reparam.name + "' is not p x p");
    }
    if (!K.allFinite()) {
        throw SingularK("K has non-finite entries");
    }
    Eigen::FullPivLU<Matrix> lu(K);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
        throw SingularK("K(theta*) is not invertible");
    }
    return K;
}

Reparametrization identity_reparametrization(std::size_t p) {
    const auto n = static_cast<Eigen::Index>(p);
    Reparametrization out;
    out.name = "identity";
    out.phi = [](const Vector& t) -> Vector { return t; };
    out.phi_inv = [](const Vector& t) -> Vector { return t; };
    out.analytic_K = [n](const Vector&) -> Matrix { return Matrix::Identity(n, n); };
    return out;
}

Reparametrization power_root_reparametrization(std::size_t p, std::size_t index, int k) {
    require_index(p, index);
    require_nonzero_k(k);
    const auto j = static_cast<Eigen::Index>(index);
    const auto n = static_cast<Eigen::Index>(p);
    const bool even = k % 2 == 0;
    Reparametrization out;
    out.name = "power-root k=" + std::to_string(k);
    out.phi = [j, k, even](const Vector& t) -> Vector {
        Vector s = t;
        const double root = std::pow(std::abs(t(j)), 1.0 / k);
        s(j) = (!even && t(j) < 0.0) ? -root : root;
        return s;
    };
    out.phi_inv = [j, k](const Vector& s) -> Vector {
        Vector t = s;
        t(j) = std::pow(s(j), k);
        return t;
    };
    out.analytic_K = [j, k, n](const Vector& s) -> Matrix {
        Matrix K = Matrix::Identity(n, n);
        K(j, j) = k * std::pow(s(j), k - 1);
        return K;
    };
    out.domain = [j, k, even](const Vector& t) {
        if (even) {
            return t(j) > 0.0;
        }
        return k > 0 || t(j) != 0.0;
    };
    out.image = [j, k, even](const Vector& s) {
        if (even) {
            return s(j) > 0.0;
        }
        return k > 0 || s(j) != 0.0;
    };
    return out;
}

Reparametrization gregory_veall_reparametrization() {
    Reparametrization out;
    out.name = "gregory-veall";
    out.phi = [](const Vector& t) -> Vector {
        Vector s(2);
        s << (t(0) + 1.0) * t(1) - 1.0, 1.0 / t(1);
        return s;
    };
    out.phi_inv = [](const Vector& s) -> Vector {
        Vector t(2);
        t << (s(0) + 1.0) * s(1) - 1.0, 1.0 / s(1);
        return t;
    };
    out.analytic_K = [](const Vector& s) -> Matrix {
        Matrix K(2, 2);
        K << s(1), s(0) + 1.0, 0.0, -1.0 / (s(1) * s(1));
        return K;
    };
    out.domain = [](const Vector& t) { return t.size() == 2 && t(1) != 0.0; };
    out.image = [](const Vector& s) { return s.size() == 2 && s(1) != 0.0; };
    return out;
}

Restriction compose(const Restriction& restriction, const Reparametrization& reparam) {
    Restriction out;
    out.name = restriction.name + " o phi^-1[" + reparam.name + "]";
    out.q = restriction.q;
    out.g = [restriction, reparam](const Vector& s) -> Vector { return restriction(reparam.inverse(s)); };
    out.analytic_jacobian = [restriction, reparam](const Vector& s) -> Matrix {
        return jacobian(restriction, reparam.inverse(s)) * K_of(reparam, s);
    };
    return out;
}

// -------------------------------------------------------------------------
// Condition audit
// -------------------------------------------------------------------------

bool ConditionReport::all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const ConditionEntry& e) { return e.pass; });
}

const ConditionEntry* ConditionReport::find(const std::string& condition) const {
    for (const auto& e : entries) {
        if (e.condition == condition) {
            return &e;
        }
    }
    return nullptr;
}

ConditionReport audit_conditions(const ExtremumModel& model, const Restriction& g,
                                 const Restriction& g_star, const Reparametrization& reparam,
                                 const Vector& theta, const AuditOptions& options) {
    ConditionReport report;
    report.theta = theta;
    report.theta_star = reparam.forward(theta);
    const Vector& ts = report.theta_star;

    const Matrix K = K_of(reparam, ts);
    const Matrix G = jacobian(g, theta);
    const Matrix G_star = jacobian(g_star, ts);
    const Matrix GK = G * K;

    auto add = [&](std::string name, double residual, double tolerance, std::string note = {}) {
        ConditionEntry e;
        e.condition = std::move(name);
        e.residual = residual;
        e.tolerance = tolerance;
        e.pass = residual <= tolerance;
        e.point = ts;
        e.note = std::move(note);
        report.entries.push_back(std::move(e));
    };

    // B1
    add("B1", max_abs(G_star - GK),
        scaled_tolerance(options.tolerance, std::max(max_abs(G_star), max_abs(GK))));

    // B2 through the Greville commutation identity
    const GrevilleCheck greville = greville_identity_residual(G, K, options.tolerance, options.condition_cap);
    add("B2", greville.residual, options.tolerance * std::max(greville.scale, 1e-300), "Greville commutation");

    // B2, direct comparison of (GK)+ with K^{-1} G+
    {
        const Matrix lhs_inv_rhs = K.fullPivLu().solve(pinv_full_row_rank(G, options.condition_cap));
        double residual = std::numeric_limits<double>::infinity();
        double magnitude = max_abs(lhs_inv_rhs);
        if (full_row_rank(GK, options.condition_cap)) {
            const Matrix pinv_GK = pinv_full_row_rank(GK, options.condition_cap);
            residual = max_abs(pinv_GK - lhs_inv_rhs);
            magnitude = std::max(magnitude, max_abs(pinv_GK));
        }
        add("B2-pinv", residual, scaled_tolerance(options.tolerance, magnitude), "(GK)+ vs K^-1 G+");
    }

    // B3
    {
        auto composed = [&](const Vector& s) { return model.objective(reparam.inverse(s)); };
        const Vector fd = numdiff::gradient_ridders(composed, ts);
        const Vector pulled = K.transpose() * model.score(theta);
        add("B3", max_abs(fd - pulled),
            scaled_tolerance(options.tolerance, std::max(max_abs(fd), max_abs(pulled))),
            "finite-difference gradient of the composed objective");

        if (!model.quasi_score()) {
            const Matrix A_star = numdiff::hessian(composed, ts, 1e-4);
            const Matrix pulled_A = K.transpose() * model.hessian(theta) * K;
            add("B4", max_abs(A_star - pulled_A),
                scaled_tolerance(options.tolerance, std::max(max_abs(A_star), max_abs(pulled_A))),
                "finite-difference Hessian of the composed objective");
        }
    }

    // B6
    {
        const Vector lhs = g_star(ts);
        const Vector rhs = g(theta);
        add("B6", max_abs(lhs - rhs), scaled_tolerance(options.tolerance, std::max(max_abs(lhs), max_abs(rhs))));
    }
    return report;
}

}  // namespace bftest
