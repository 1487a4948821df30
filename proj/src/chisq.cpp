#include "bftest/chisq.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bftest/error.hpp"

namespace bftest {

namespace {

constexpr double kEps = 1e-17;
constexpr int kMaxTerms = 10000;

// Lower regularized gamma by its power series; converges fast for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < kMaxTerms; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma by the Legendre continued fraction (modified Lentz).
double gamma_q_continued_fraction(double a, double x) {
    constexpr double tiny = std::numeric_limits<double>::min() / kEps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxTerms; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) {
            d = tiny;
        }
        c = b + an / c;
        if (std::abs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) {
            break;
        }
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0)) {
        throw DomainError("regularized_gamma_q needs a > 0 and x >= 0");
    }
    if (x == 0.0) {
        return 1.0;
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    if (x < a + 1.0) {
        return 1.0 - gamma_p_series(a, x);
    }
    return gamma_q_continued_fraction(a, x);
}

double chisq_survival(double x, int df) {
    if (df < 1) {
        throw DomainError("chi-square degrees of freedom must be >= 1, got " + std::to_string(df));
    }
    if (!(x >= 0.0)) {
        throw DomainError("chi-square survival needs x >= 0");
    }
    return regularized_gamma_q(0.5 * df, 0.5 * x);
}

double chisq_critical_value(double upper_tail, int df) {
    if (!(upper_tail > 0.0) || upper_tail > 1.0) {
        throw DomainError("upper tail probability must lie in (0, 1]");
    }
    if (upper_tail == 1.0) {
        return 0.0;
    }
    double lo = 0.0;
    double hi = std::max(1.0, static_cast<double>(df));
    while (chisq_survival(hi, df) > upper_tail) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chisq_survival(mid, df) > upper_tail) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace bftest
