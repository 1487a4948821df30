#pragma once

#include <cstdint>
#include <random>

#include "bftest/matrix.hpp"
#include "bftest/model.hpp"

namespace bftest::testing {

// Draws from std::mt19937_64 so fixtures never share code with the library generator.
inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Matrix M(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            M(i, j) = normal(rng);
        }
    }
    return M;
}

inline Matrix uniform_design(Eigen::Index n, Eigen::Index p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Matrix X(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            X(i, j) = uniform(rng);
        }
    }
    return X;
}

// y = gamma x1 + beta x2 + e with x ~ U(0,1), e ~ N(0, 1).
inline LinearGaussianModel dgp_model(Eigen::Index n, double gamma, double beta, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Matrix X = uniform_design(n, 2, rng);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = gamma * X(i, 0) + beta * X(i, 1) + normal(rng);
    }
    return LinearGaussianModel(X, y, 1.0);
}

inline double relative_gap(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace bftest::testing
