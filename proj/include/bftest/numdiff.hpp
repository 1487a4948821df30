#pragma once

#include <functional>

#include "bftest/matrix.hpp"

// Central finite differences. Every routine perturbs coordinate i by
// step * (1 + |x_i|).
namespace bftest::numdiff {

using ScalarFn = std::function<double(const Vector&)>;
using VectorFn = std::function<Vector(const Vector&)>;

Vector gradient(const ScalarFn& f, const Vector& x, double step = 1e-6);

// Two-level Richardson extrapolation of the central gradient; O(h^4) error.
Vector gradient_richardson(const ScalarFn& f, const Vector& x, double step = 1e-3);

// Ridders extrapolation of central differences, started at step (1+|x_i|) * step.
Vector gradient_ridders(const ScalarFn& f, const Vector& x, double step = 0.05);

// Rows are outputs, columns are inputs (m x p for F: R^p -> R^m).
Matrix jacobian(const VectorFn& F, const Vector& x, double step = 1e-6);

Matrix hessian(const ScalarFn& f, const Vector& x, double step = 1e-4);

}  // namespace bftest::numdiff
