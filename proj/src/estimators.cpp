#include "bftest/estimators.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "bftest/error.hpp"
#include "bftest/numdiff.hpp"

namespace bftest {

namespace {

// lambda minimizing |score - G^T lambda|, and the residual's max-norm.
std::pair<Vector, double> least_squares_multiplier(const Vector& score, const Matrix& G) {
    const Matrix GGt = G * G.transpose();
    const Vector lambda = GGt.ldlt().solve(G * score);
    return {lambda, max_abs(score - G.transpose() * lambda)};
}

FitResult finish_restricted(const ExtremumModel& model, const Restriction& restriction, Vector theta,
                            std::string path, std::size_t iterations,
                            const RestrictedFitOptions& options) {
    FitResult out;
    out.theta = std::move(theta);
    out.objective = model.objective(out.theta);
    out.feasibility = max_abs(restriction(out.theta));
    const Matrix G = jacobian(restriction, out.theta);
    if (!full_row_rank(G)) {
        throw RankDeficient("restriction Jacobian is rank deficient at the restricted estimate");
    }
    auto [lambda, stationarity] = least_squares_multiplier(model.score(out.theta), G);
    out.multiplier = std::move(lambda);
    out.stationarity = stationarity;
    out.iterations = iterations;
    out.path = std::move(path);
    out.converged = out.feasibility <= options.feasibility_tolerance &&
                    out.stationarity <= options.stationarity_tolerance;
    return out;
}

// Maximizer of the Gaussian objective with theta[index] held at value.
Vector profile_coordinate(const LinearGaussianModel& model, Eigen::Index index, double value) {
    const Matrix& gram = model.gram();
    const Vector& moment = model.moment();
    const Eigen::Index p = gram.rows();
    Vector theta(p);
    theta(index) = value;
    if (p == 1) {
        return theta;
    }
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < p; ++i) {
        if (i != index) {
            free.push_back(i);
        }
    }
    const auto m = static_cast<Eigen::Index>(free.size());
    Matrix sub(m, m);
    Vector rhs(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        rhs(a) = moment(free[a]) - gram(free[a], index) * value;
        for (Eigen::Index b = 0; b < m; ++b) {
            sub(a, b) = gram(free[a], free[b]);
        }
    }
    const Vector solution = solve_symmetric(sub, rhs);
    for (Eigen::Index a = 0; a < m; ++a) {
        theta(free[a]) = solution(a);
    }
    return theta;
}

// Constrained least squares for R theta = r.
Vector constrained_least_squares(const LinearGaussianModel& model, const Matrix& R, const Vector& r) {
    if (!full_row_rank(R)) {
        throw RankDeficient("linear restriction matrix R does not have full row rank");
    }
    const Vector unrestricted = solve_symmetric(model.gram(), model.moment());
    const Matrix W = solve_symmetric(model.gram(), Matrix(R.transpose()));
    const Matrix C = R * W;
    const Vector shift = solve_symmetric(C, Vector(R * unrestricted - r));
    return unrestricted - W * shift;
}

std::optional<FitResult> fast_path(const ExtremumModel& model, const Restriction& restriction,
                                   const RestrictedFitOptions& options) {
    const auto* gaussian = dynamic_cast<const LinearGaussianModel*>(&model);
    if (gaussian == nullptr) {
        return std::nullopt;
    }
    if (restriction.roots) {
        const auto& roots = *restriction.roots;
        const auto index = static_cast<Eigen::Index>(roots.index);
        if (roots.values.empty()) {
            throw NotConverged("restriction has an empty root set");
        }
        Vector best;
        double best_q = -std::numeric_limits<double>::infinity();
        double best_root = 0.0;
        for (double v : roots.values) {
            Vector candidate = profile_coordinate(*gaussian, index, v);
            const double q = model.objective(candidate);
            if (q > best_q) {
                best_q = q;
                best = std::move(candidate);
                best_root = v;
            }
        }
        FitResult out = finish_restricted(model, restriction, std::move(best), "closed-form", 1, options);
        out.branch = best_root;
        return out;
    }
    if (restriction.linear) {
        Vector theta = constrained_least_squares(*gaussian, restriction.linear->R, restriction.linear->r);
        return finish_restricted(model, restriction, std::move(theta), "closed-form", 1, options);
    }
    return std::nullopt;
}

// Gauss-Newton projection onto g = 0 with step halving on |g|; returns the
// least infeasible iterate found.
Vector project_to_feasible(const Restriction& restriction, Vector x) {
    double infeasibility = std::numeric_limits<double>::infinity();
    try {
        const Vector g0 = restriction(x);
        if (g0.allFinite()) {
            infeasibility = g0.norm();
        }
    } catch (const Error&) {
        return x;
    }
    for (int it = 0; it < 50 && infeasibility > 1e-12; ++it) {
        Vector dx;
        try {
            dx = -pinv_full_row_rank(jacobian(restriction, x)) * restriction(x);
        } catch (const Error&) {
            break;
        }
        if (!dx.allFinite()) {
            break;
        }
        bool improved = false;
        double t = 1.0;
        for (int halving = 0; halving < 30; ++halving, t *= 0.5) {
            const Vector trial = x + t * dx;
            try {
                const Vector gt = restriction(trial);
                if (gt.allFinite() && gt.norm() < infeasibility) {
                    x = trial;
                    infeasibility = gt.norm();
                    improved = true;
                    break;
                }
            } catch (const Error&) {
            }
        }
        if (!improved) {
            break;
        }
    }
    return x;
}

struct NewtonOutcome {
    Vector theta;
    double merit = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::size_t iterations = 0;
};

NewtonOutcome lagrange_newton(const ExtremumModel& model, const Restriction& restriction, Vector x,
                              const RestrictedFitOptions& options) {
    const Eigen::Index p = x.size();
    const auto q = static_cast<Eigen::Index>(restriction.q);
    NewtonOutcome out;
    out.theta = x;

    Vector lambda;
    {
        const Matrix G = jacobian(restriction, x);
        lambda = least_squares_multiplier(model.score(x), G).first;
    }
    double mu = 1.0;
    auto merit = [&](const Vector& t) {
        const Vector gt = restriction(t);
        return -model.objective(t) + mu * gt.cwiseAbs().sum();
    };

    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        out.iterations = it;
        const Vector s = model.score(x);
        const Matrix G = jacobian(restriction, x);
        const Vector gx = restriction(x);
        const Vector residual = s - G.transpose() * lambda;
        const double kkt = std::max(max_abs(residual), max_abs(gx));
        if (max_abs(gx) <= options.feasibility_tolerance &&
            least_squares_multiplier(s, G).second <= options.stationarity_tolerance) {
            out.converged = true;
            out.theta = x;
            out.merit = merit(x);
            return out;
        }

        // Hessian of the Lagrangian Q - lambda^T g, constraint curvature by FD.
        const Matrix curvature = numdiff::jacobian(
            [&](const Vector& t) -> Vector { return jacobian(restriction, t).transpose() * lambda; }, x, 1e-6);
        Matrix H = model.hessian(x) - 0.5 * (curvature + curvature.transpose());

        Matrix kkt_matrix = Matrix::Zero(p + q, p + q);
        kkt_matrix.topLeftCorner(p, p) = H;
        kkt_matrix.topRightCorner(p, q) = -G.transpose();
        kkt_matrix.bottomLeftCorner(q, p) = G;
        Vector rhs(p + q);
        rhs << -residual, -gx;
        Eigen::FullPivLU<Matrix> lu(kkt_matrix);
        if (!lu.isInvertible()) {
            break;
        }
        const Vector step = lu.solve(rhs);
        const Vector dx = step.head(p);
        const Vector dlambda = step.tail(q);
        if (!step.allFinite()) {
            break;
        }

        mu = std::max(mu, 2.0 * max_abs(lambda + dlambda) + 1.0);
        const double m0 = merit(x);
        double t = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
            const Vector trial = x + t * dx;
            double m1 = std::numeric_limits<double>::infinity();
            try {
                m1 = merit(trial);
            } catch (const Error&) {
            }
            if (std::isfinite(m1) && m1 <= m0 + 1e-12 * (1.0 + std::abs(m0))) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (kkt > 1e-6) {
                break;
            }
            t = 1.0;
        }
        x += t * dx;
        lambda += t * dlambda;
        out.theta = x;
    }
    try {
        out.merit = merit(out.theta);
    } catch (const Error&) {
    }
    return out;
}

}  // namespace

FitResult fit_unrestricted(const LinearGaussianModel& model) {
    FitResult out;
    out.theta = solve_symmetric(model.gram(), model.moment());
    out.objective = model.objective(out.theta);
    out.stationarity = max_abs(model.score(out.theta));
    out.converged = true;
    out.iterations = 1;
    out.path = "normal-equations";
    return out;
}

FitResult fit_unrestricted(const ExtremumModel& model, const Vector& start, std::size_t max_iterations) {
    Vector x = start;
    FitResult out;
    out.path = "newton";
    for (std::size_t it = 0; it < max_iterations; ++it) {
        out.iterations = it + 1;
        const Vector s = model.score(x);
        if (max_abs(s) <= 1e-10) {
            out.converged = true;
            break;
        }
        const Vector dx = -solve_symmetric(model.hessian(x), s);
        const double q0 = model.objective(x);
        double t = 1.0;
        for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
            const double q1 = model.objective(x + t * dx);
            if (std::isfinite(q1) && q1 >= q0 - 1e-12 * (1.0 + std::abs(q0))) {
                break;
            }
        }
        x += t * dx;
    }
    out.theta = x;
    out.objective = model.objective(x);
    out.stationarity = max_abs(model.score(x));
    out.converged = out.stationarity <= 1e-9;
    if (!out.converged) {
        throw FitNotConverged("unrestricted Newton iteration did not converge", out);
    }
    return out;
}

FitResult fit_restricted_general(const ExtremumModel& model, const Restriction& restriction,
                                 const RestrictedFitOptions& options) {
    const auto p = static_cast<Eigen::Index>(model.parameter_count());
    if (restriction.q == 0 || restriction.q > model.parameter_count()) {
        throw RankDeficient("restriction count must satisfy 1 <= q <= p");
    }

    Vector origin;
    if (options.start) {
        origin = *options.start;
    } else {
        origin = Vector::Zero(p);
        if (const auto* gaussian = dynamic_cast<const LinearGaussianModel*>(&model)) {
            origin = fit_unrestricted(*gaussian).theta;
        }
    }
    if (origin.size() != p) {
        throw DimensionMismatch("start point has the wrong length");
    }

    // Start 0 projects the origin; the rest project points from a fixed perturbation schedule.
    constexpr std::array<double, 8> kScales = {0.1, -0.1, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0};
    NewtonOutcome best;
    std::size_t total_iterations = 0;
    for (std::size_t attempt = 0; attempt <= options.max_restarts; ++attempt) {
        Vector start = origin;
        if (attempt > 0) {
            const double c = kScales[(attempt - 1) % kScales.size()];
            for (Eigen::Index i = 0; i < p; ++i) {
                const double sign = (i % 2 == 0) ? 1.0 : -1.0;
                start(i) += c * sign * (1.0 + std::abs(origin(i)));
            }
        }
        start = project_to_feasible(restriction, start);
        NewtonOutcome outcome;
        try {
            outcome = lagrange_newton(model, restriction, start, options);
        } catch (const Error&) {
            continue;
        }
        total_iterations += outcome.iterations;
        if (outcome.converged) {
            return finish_restricted(model, restriction, outcome.theta, "lagrange-newton", total_iterations,
                                     options);
        }
        if (outcome.merit < best.merit) {
            best = outcome;
        }
    }

    FitResult partial;
    partial.theta = best.theta.size() == p ? best.theta : project_to_feasible(restriction, origin);
    partial.iterations = total_iterations;
    partial.path = "lagrange-newton";
    try {
        partial.objective = model.objective(partial.theta);
        partial.feasibility = max_abs(restriction(partial.theta));
    } catch (const Error&) {
    }
    throw FitNotConverged("restricted fit did not converge from any start", partial);
}

FitResult fit_restricted(const ExtremumModel& model, const Restriction& restriction,
                         const RestrictedFitOptions& options) {
    if (options.allow_fast_path) {
        if (auto fit = fast_path(model, restriction, options)) {
            return *fit;
        }
    }
    return fit_restricted_general(model, restriction, options);
}

}  // namespace bftest
