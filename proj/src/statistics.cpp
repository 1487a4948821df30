#include "bftest/statistics.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "bftest/chisq.hpp"
#include "bftest/error.hpp"
#include "bftest/numdiff.hpp"

namespace bftest {

namespace {

TestReport make_report(std::string name, double value, int df, TestDiagnostics diagnostics) {
    TestReport out;
    out.name = std::move(name);
    out.value = value;
    out.df = df;
    if (value < -kNegativeStatisticTolerance) {
        diagnostics.negative = true;
        diagnostics.notes.emplace_back("negative statistic; p-value evaluated at 0");
    }
    out.p_value = chisq_survival(std::max(value, 0.0), df);
    out.diagnostics = std::move(diagnostics);
    return out;
}

Vector solve_omega(const Matrix& Omega, const Vector& rhs) {
    try {
        return solve_symmetric(Omega, rhs);
    } catch (const Singular&) {
        throw RankDeficient("Omega is numerically singular");
    }
}

void record_conditions(TestDiagnostics& diag, const TestMatrices& m) {
    diag.condition_numbers["GGt"] = condition_number_symmetric(m.G * m.G.transpose());
    diag.condition_numbers["S"] = condition_number_symmetric(m.S);
    diag.condition_numbers["Omega"] = condition_number_symmetric(m.Omega);
}

// n s^T G+ S Omega^{-1} g given all ingredients at their evaluation points.
double bilinear_form(double n, const Vector& score, const TestMatrices& m, const Vector& g_value, bool quasi) {
    if (quasi) {
        return n * score.dot(m.Gplus * g_value);
    }
    const Vector weighted = m.S * solve_omega(m.Omega, g_value);
    return n * score.dot(m.Gplus * weighted);
}

int df_of(const Restriction& restriction) { return static_cast<int>(restriction.q); }

}  // namespace

const char* to_string(CorrectionVariant variant) {
    return variant == CorrectionVariant::transform ? "transform" : "direct";
}

TestMatrices test_matrices(const Matrix& G, const Matrix& A, const Matrix& B) {
    if (A.rows() != G.cols() || B.rows() != G.cols()) {
        throw DimensionMismatch("test_matrices: A, B must be p x p with p = cols(G)");
    }
    TestMatrices m;
    m.G = G;
    m.Gplus = pinv_full_row_rank(G);
    Matrix A_inv;
    try {
        A_inv = inverse_symmetric(A);
    } catch (const Singular&) {
        throw RankDeficient("A is numerically singular");
    }
    m.S = -(G * A_inv * G.transpose());
    m.Omega = G * A_inv * B * A_inv * G.transpose();
    m.S = 0.5 * (m.S + m.S.transpose());
    m.Omega = 0.5 * (m.Omega + m.Omega.transpose());
    return m;
}

TestMatrices test_matrices(const ExtremumModel& model, const Restriction& restriction, const Vector& theta) {
    return test_matrices(jacobian(restriction, theta), model.hessian(theta), model.score_variance(theta));
}

TestReport bf(const ExtremumModel& model, const Restriction& restriction, const Vector& theta_unrestricted,
              const Vector& theta_restricted, const BfOptions& options) {
    const bool mixed = options.jacobian_at == JacobianPoint::unrestricted;
    const Matrix G = jacobian(restriction, mixed ? theta_unrestricted : theta_restricted);
    const TestMatrices m =
        test_matrices(G, model.hessian(theta_restricted), model.score_variance(theta_restricted));
    const double n = static_cast<double>(model.sample_size());
    const double value = bilinear_form(n, model.score(theta_restricted), m, restriction(theta_unrestricted),
                                       model.quasi_score());

    TestDiagnostics diag;
    diag.evaluated_at = mixed ? "mixed" : "restricted";
    diag.point = theta_restricted;
    record_conditions(diag, m);
    if (mixed) {
        diag.notes.emplace_back("restriction Jacobian evaluated at the unrestricted estimate");
    }
    return make_report("BF", value, df_of(restriction), std::move(diag));
}

TestReport bf_corrected(const ExtremumModel& model, const Restriction& restriction_star,
                        const Reparametrization& reparam, const Vector& theta_unrestricted,
                        const Vector& theta_restricted, CorrectionVariant variant) {
    const Vector unrestricted_star = reparam.forward(theta_unrestricted);
    const Vector restricted_star = reparam.forward(theta_restricted);
    const Matrix K = K_of(reparam, restricted_star);
    const Matrix G_star = jacobian(restriction_star, restricted_star);
    const Matrix B_star = K.transpose() * model.score_variance(theta_restricted) * K;

    Vector score_star;
    Matrix A_star;
    bool quasi = false;
    if (variant == CorrectionVariant::transform) {
        score_star = K.transpose() * model.score(theta_restricted);
        A_star = K.transpose() * model.hessian(theta_restricted) * K;
        quasi = model.quasi_score();
    } else {
        auto composed = [&](const Vector& s) { return model.objective(reparam.inverse(s)); };
        score_star = numdiff::gradient_richardson(composed, restricted_star, 1e-3);
        A_star = numdiff::hessian(composed, restricted_star, 1e-4);
    }
    const TestMatrices m = test_matrices(G_star, A_star, B_star);
    const double n = static_cast<double>(model.sample_size());
    const double value = bilinear_form(n, score_star, m, restriction_star(unrestricted_star), quasi);

    TestDiagnostics diag;
    diag.evaluated_at = "restricted";
    diag.point = restricted_star;
    diag.variant = to_string(variant);
    record_conditions(diag, m);
    const Vector singular_values = K.jacobiSvd().singularValues();
    diag.condition_numbers["K"] = singular_values.maxCoeff() / singular_values.minCoeff();
    return make_report(std::string("BFc-") + to_string(variant), value, df_of(restriction_star),
                       std::move(diag));
}

TestReport wald(const ExtremumModel& model, const Restriction& restriction, const Vector& theta_unrestricted) {
    const TestMatrices m = test_matrices(model, restriction, theta_unrestricted);
    const Vector g_value = restriction(theta_unrestricted);
    const double n = static_cast<double>(model.sample_size());
    const double value = n * g_value.dot(solve_omega(m.Omega, g_value));

    TestDiagnostics diag;
    diag.evaluated_at = "unrestricted";
    diag.point = theta_unrestricted;
    record_conditions(diag, m);
    return make_report("W", value, df_of(restriction), std::move(diag));
}

TestReport lm(const ExtremumModel& model, const Restriction& restriction, const Vector& theta_restricted) {
    const Matrix G = jacobian(restriction, theta_restricted);
    const Matrix A = model.hessian(theta_restricted);
    const TestMatrices m = test_matrices(G, A, model.score_variance(theta_restricted));
    Vector direction;
    try {
        direction = G * solve_symmetric(A, model.score(theta_restricted));
    } catch (const Singular&) {
        throw RankDeficient("A is numerically singular");
    }
    const double n = static_cast<double>(model.sample_size());
    const double value = n * direction.dot(solve_omega(m.Omega, direction));

    TestDiagnostics diag;
    diag.evaluated_at = "restricted";
    diag.point = theta_restricted;
    record_conditions(diag, m);
    return make_report("LM", value, df_of(restriction), std::move(diag));
}

TestReport distance(const ExtremumModel& model, const Vector& theta_unrestricted,
                    const Vector& theta_restricted, int df) {
    if (!model.quasi_score()) {
        throw ConfigurationError("distance statistic needs a quasi-score objective (B = -A)");
    }
    const double n = static_cast<double>(model.sample_size());
    const double value = 2.0 * n * (model.objective(theta_unrestricted) - model.objective(theta_restricted));
    TestDiagnostics diag;
    diag.evaluated_at = "both";
    diag.point = theta_restricted;
    return make_report("D", value, df, std::move(diag));
}

}  // namespace bftest
