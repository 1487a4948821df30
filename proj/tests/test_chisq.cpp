#include <cmath>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "catch_amalgamated.hpp"

#include "bftest/chisq.hpp"
#include "bftest/error.hpp"

using namespace bftest;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Upper tail by integrating the density over [x, inf).
double survival_by_quadrature(double x, int df) {
    const double half = df / 2.0;
    const double log_norm = half * std::log(2.0) + std::lgamma(half);
    auto density = [&](double t) {
        const double u = x + t;
        return std::exp((half - 1.0) * std::log(u) - u / 2.0 - log_norm);
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(density);
}

}  // namespace

TEST_CASE("survival at zero is one") {
    for (int df = 1; df <= 10; ++df) {
        CHECK(chisq_survival(0.0, df) == 1.0);
    }
}

TEST_CASE("five percent points") {
    CHECK_THAT(chisq_survival(3.8414588, 1), WithinAbs(0.05, 1e-6));
    CHECK_THAT(chisq_survival(5.9914645, 2), WithinAbs(0.05, 1e-6));
    CHECK_THAT(chisq_critical_value(0.05, 1), WithinAbs(3.841458820694124, 1e-8));
    CHECK_THAT(chisq_critical_value(0.05, 2), WithinAbs(5.991464547107979, 1e-8));
}

TEST_CASE("closed forms for one and two degrees of freedom") {
    for (double x : {0.01, 0.5, 1.0, 2.5, 7.0, 20.0}) {
        CHECK_THAT(chisq_survival(x, 2), WithinRel(std::exp(-x / 2.0), 1e-12));
        CHECK_THAT(chisq_survival(x, 1), WithinRel(std::erfc(std::sqrt(x / 2.0)), 1e-11));
    }
}

TEST_CASE("survival agrees with quadrature") {
    for (int df : {1, 2, 3, 5, 8}) {
        for (double x : {0.05, 0.3, 1.0, 2.0, 3.84, 6.0, 10.0, 15.0, 25.0, 40.0}) {
            INFO("df " << df << " x " << x);
            CHECK_THAT(chisq_survival(x, df), WithinAbs(survival_by_quadrature(x, df), 1e-9));
        }
    }
}

TEST_CASE("critical value inverts survival") {
    for (int df : {1, 2, 4, 7}) {
        for (double a : {0.001, 0.01, 0.05, 0.1, 0.5, 0.9}) {
            CHECK_THAT(chisq_survival(chisq_critical_value(a, df), df), WithinRel(a, 1e-9));
        }
    }
    CHECK(chisq_critical_value(1.0, 1) == 0.0);
}

TEST_CASE("survival is monotone") {
    double previous = 1.0;
    for (double x = 0.0; x < 30.0; x += 0.25) {
        const double s = chisq_survival(x, 3);
        CHECK(s <= previous);
        previous = s;
    }
}

TEST_CASE("bad arguments") {
    CHECK_THROWS_AS(chisq_survival(-1.0, 1), DomainError);
    CHECK_THROWS_AS(chisq_survival(1.0, 0), DomainError);
    CHECK_THROWS_AS(chisq_survival(std::nan(""), 1), DomainError);
    CHECK_THROWS_AS(chisq_critical_value(0.0, 1), DomainError);
    CHECK_THROWS_AS(chisq_critical_value(1.5, 1), DomainError);
}
