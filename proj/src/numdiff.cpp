#include "bftest/numdiff.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace bftest::numdiff {

namespace {

double step_for(double xi, double step) { return step * (1.0 + std::abs(xi)); }

}  // namespace

Vector gradient(const ScalarFn& f, const Vector& x, double step) {
    Vector out(x.size());
    Vector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step_for(x(i), step);
        probe(i) = x(i) + h;
        const double up = f(probe);
        probe(i) = x(i) - h;
        const double down = f(probe);
        probe(i) = x(i);
        out(i) = (up - down) / (2.0 * h);
    }
    return out;
}

Vector gradient_richardson(const ScalarFn& f, const Vector& x, double step) {
    const Vector coarse = gradient(f, x, step);
    const Vector fine = gradient(f, x, 0.5 * step);
    return (4.0 * fine - coarse) / 3.0;
}

Vector gradient_ridders(const ScalarFn& f, const Vector& x, double step) {
    constexpr int kStages = 12;
    constexpr double kShrink = 1.4;
    constexpr double kShrink2 = kShrink * kShrink;
    Vector out(x.size());
    Vector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        auto central = [&](double h) {
            probe(i) = x(i) + h;
            const double up = f(probe);
            probe(i) = x(i) - h;
            const double down = f(probe);
            probe(i) = x(i);
            return (up - down) / (2.0 * h);
        };
        // Neville tableau over shrinking steps; keep the entry with the smallest error estimate.
        double h = step_for(x(i), step);
        std::array<std::array<double, kStages>, kStages> a{};
        a[0][0] = central(h);
        double best = a[0][0];
        double best_error = std::numeric_limits<double>::infinity();
        for (int stage = 1; stage < kStages; ++stage) {
            h /= kShrink;
            a[0][stage] = central(h);
            double factor = kShrink2;
            for (int j = 1; j <= stage; ++j) {
                a[j][stage] = (a[j - 1][stage] * factor - a[j - 1][stage - 1]) / (factor - 1.0);
                factor *= kShrink2;
                const double error = std::max(std::abs(a[j][stage] - a[j - 1][stage]),
                                              std::abs(a[j][stage] - a[j - 1][stage - 1]));
                if (error <= best_error) {
                    best_error = error;
                    best = a[j][stage];
                }
            }
            if (std::abs(a[stage][stage] - a[stage - 1][stage - 1]) >= 2.0 * best_error) {
                break;
            }
        }
        out(i) = best;
    }
    return out;
}

Matrix jacobian(const VectorFn& F, const Vector& x, double step) {
    Vector probe = x;
    Matrix out;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step_for(x(i), step);
        probe(i) = x(i) + h;
        const Vector up = F(probe);
        probe(i) = x(i) - h;
        const Vector down = F(probe);
        probe(i) = x(i);
        if (i == 0) {
            out.resize(up.size(), x.size());
        }
        out.col(i) = (up - down) / (2.0 * h);
    }
    return out;
}

Matrix hessian(const ScalarFn& f, const Vector& x, double step) {
    const Eigen::Index p = x.size();
    Matrix H(p, p);
    Vector probe = x;
    const double f0 = f(x);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double hi = step_for(x(i), step);
        probe(i) = x(i) + hi;
        const double up = f(probe);
        probe(i) = x(i) - hi;
        const double down = f(probe);
        probe(i) = x(i);
        H(i, i) = (up - 2.0 * f0 + down) / (hi * hi);
        for (Eigen::Index j = 0; j < i; ++j) {
            const double hj = step_for(x(j), step);
            auto eval = [&](double si, double sj) {
                probe(i) = x(i) + si * hi;
                probe(j) = x(j) + sj * hj;
                const double v = f(probe);
                probe(i) = x(i);
                probe(j) = x(j);
                return v;
            };
            const double v = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * hi * hj);
            H(i, j) = v;
            H(j, i) = v;
        }
    }
    return H;
}

}  // namespace bftest::numdiff
