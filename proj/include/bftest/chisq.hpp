#pragma once

namespace bftest {

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double regularized_gamma_q(double a, double x);

/// P(chi2_df > x). Throws DomainError for x < 0 or df < 1.
double chisq_survival(double x, int df);

/// The x with P(chi2_df > x) = upper_tail; 0 when upper_tail = 1.
double chisq_critical_value(double upper_tail, int df);

}  // namespace bftest
