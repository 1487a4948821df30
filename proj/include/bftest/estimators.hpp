#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "bftest/error.hpp"
#include "bftest/matrix.hpp"
#include "bftest/model.hpp"
#include "bftest/restriction.hpp"

namespace bftest {

struct FitResult {
    Vector theta;
    double objective = 0.0;
    std::optional<Vector> multiplier;  // lambda with score = G^T lambda (restricted fits)
    double feasibility = 0.0;          // max |g(theta)|
    double stationarity = 0.0;         // max |score - G^T lambda|
    bool converged = false;
    std::size_t iterations = 0;
    std::string path;                  // "normal-equations", "closed-form", "lagrange-newton"
    std::optional<double> branch;      // selected root for root-set restrictions
};

// Raised when the general path fails from every start; carries the best iterate.
class FitNotConverged : public NotConverged {
public:
    FitNotConverged(const std::string& what, FitResult best) : NotConverged(what), best_(std::move(best)) {}
    const char* kind() const noexcept override { return "NotConverged"; }
    const FitResult& best() const { return best_; }

private:
    FitResult best_;
};

/// OLS via the normal equations X^T X theta = X^T y.
FitResult fit_unrestricted(const LinearGaussianModel& model);

/// Newton ascent on Q_n from `start`, for models without a closed form.
FitResult fit_unrestricted(const ExtremumModel& model, const Vector& start,
                           std::size_t max_iterations = 100);

struct RestrictedFitOptions {
    std::optional<Vector> start;        // default: unrestricted fit projected onto g = 0
    std::size_t max_iterations = 100;
    std::size_t max_restarts = 8;
    double feasibility_tolerance = 1e-9;
    double stationarity_tolerance = 1e-8;
    bool allow_fast_path = true;
};

/// max Q_n(theta) subject to g(theta) = 0.
///
/// Linear restrictions and coordinate root sets on a LinearGaussianModel are
/// solved in closed form (one constrained least-squares problem per root,
/// keeping the root with the largest objective; ties go to the earlier
/// root). Everything else runs a Lagrangian-Newton iteration on the KKT
/// system with step halving on the merit -Q_n + mu |g|_1, restarting from a
/// fixed schedule of perturbed starts when it fails.
FitResult fit_restricted(const ExtremumModel& model, const Restriction& restriction,
                         const RestrictedFitOptions& options = {});

/// Fits the same problem with the general path only (no closed form).
FitResult fit_restricted_general(const ExtremumModel& model, const Restriction& restriction,
                                 const RestrictedFitOptions& options = {});

}  // namespace bftest
