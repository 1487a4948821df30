#include "bftest/model.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "bftest/error.hpp"
#include "bftest/numdiff.hpp"

namespace bftest {

// -------------------------------------------------------------------------
// ExtremumModel
// -------------------------------------------------------------------------

void ExtremumModel::check_length(const Vector& theta) const {
    if (static_cast<std::size_t>(theta.size()) != parameter_count()) {
        throw DimensionMismatch("parameter vector has length " + std::to_string(theta.size()) +
                                ", model expects " + std::to_string(parameter_count()));
    }
}

double ExtremumModel::objective(const Vector& theta) const {
    check_length(theta);
    return do_objective(theta);
}

Vector ExtremumModel::score(const Vector& theta) const {
    check_length(theta);
    return do_score(theta);
}

Matrix ExtremumModel::hessian(const Vector& theta) const {
    check_length(theta);
    return do_hessian(theta);
}

Matrix ExtremumModel::score_variance(const Vector& theta) const {
    check_length(theta);
    return do_score_variance(theta);
}

Vector ExtremumModel::do_score(const Vector& theta) const {
    return numdiff::gradient_richardson([this](const Vector& t) { return do_objective(t); }, theta);
}

Matrix ExtremumModel::do_hessian(const Vector& theta) const {
    return numdiff::hessian([this](const Vector& t) { return do_objective(t); }, theta);
}

Matrix ExtremumModel::do_score_variance(const Vector& theta) const {
    if (!quasi_score()) {
        throw ConfigurationError("model without quasi_score must provide B_n");
    }
    return -do_hessian(theta);
}

// -------------------------------------------------------------------------
// LinearGaussianModel
// -------------------------------------------------------------------------

LinearGaussianModel::LinearGaussianModel(Matrix X, Vector y, double sigma2,
                                         ScoreVarianceEstimator estimator)
    : X_(std::move(X)), y_(std::move(y)), sigma2_(sigma2), estimator_(estimator) {
    if (X_.rows() != y_.size()) {
        throw DimensionMismatch("design has " + std::to_string(X_.rows()) + " rows, response has " +
                                std::to_string(y_.size()) + " entries");
    }
    if (X_.cols() == 0 || X_.rows() < X_.cols()) {
        throw DimensionMismatch("need n >= p >= 1");
    }
    if (!(sigma2_ > 0.0) || !std::isfinite(sigma2_)) {
        throw DomainError("sigma2 must be positive and finite");
    }
    if (!X_.allFinite() || !y_.allFinite()) {
        throw DomainError("data contain non-finite values");
    }
    gram_ = X_.transpose() * X_;
    moment_ = X_.transpose() * y_;
    Eigen::LLT<Matrix> llt(gram_);
    if (llt.info() != Eigen::Success || condition_number_symmetric(gram_) > kDefaultConditionCap) {
        throw RankDeficient("design matrix is not of full column rank");
    }
}

LinearGaussianModel LinearGaussianModel::with_estimated_variance(Matrix X, Vector y,
                                                                 ScoreVarianceEstimator estimator) {
    if (X.rows() <= X.cols()) {
        throw DimensionMismatch("estimating sigma2 needs n > p");
    }
    const Matrix gram = X.transpose() * X;
    const Vector beta = solve_symmetric(gram, Vector(X.transpose() * y));
    const double rss = (y - X * beta).squaredNorm();
    const double sigma2 = rss / static_cast<double>(X.rows() - X.cols());
    return LinearGaussianModel(std::move(X), std::move(y), sigma2, estimator);
}

double LinearGaussianModel::do_objective(const Vector& theta) const {
    const double n = static_cast<double>(X_.rows());
    return -(y_ - X_ * theta).squaredNorm() / (2.0 * n * sigma2_);
}

Vector LinearGaussianModel::do_score(const Vector& theta) const {
    const double n = static_cast<double>(X_.rows());
    return X_.transpose() * (y_ - X_ * theta) / (n * sigma2_);
}

Matrix LinearGaussianModel::do_hessian(const Vector&) const {
    const double n = static_cast<double>(X_.rows());
    return -gram_ / (n * sigma2_);
}

Matrix LinearGaussianModel::do_score_variance(const Vector& theta) const {
    const double n = static_cast<double>(X_.rows());
    if (estimator_ == ScoreVarianceEstimator::model_implied) {
        return gram_ / (n * sigma2_);
    }
    const Vector resid = y_ - X_ * theta;
    const Matrix weighted = X_.array().colwise() * resid.array();
    return weighted.transpose() * weighted / (n * sigma2_ * sigma2_);
}

// -------------------------------------------------------------------------
// CallbackModel
// -------------------------------------------------------------------------

CallbackModel::CallbackModel(std::size_t n, std::size_t p, bool quasi_score, Callbacks callbacks)
    : n_(n), p_(p), quasi_(quasi_score), cb_(std::move(callbacks)) {
    if (!cb_.objective) {
        throw ConfigurationError("CallbackModel needs an objective");
    }
    if (!quasi_ && !cb_.score_variance) {
        throw ConfigurationError("CallbackModel without quasi_score needs score_variance");
    }
}

double CallbackModel::do_objective(const Vector& theta) const { return cb_.objective(theta); }

Vector CallbackModel::do_score(const Vector& theta) const {
    return cb_.score ? cb_.score(theta) : ExtremumModel::do_score(theta);
}

Matrix CallbackModel::do_hessian(const Vector& theta) const {
    return cb_.hessian ? cb_.hessian(theta) : ExtremumModel::do_hessian(theta);
}

Matrix CallbackModel::do_score_variance(const Vector& theta) const {
    return cb_.score_variance ? cb_.score_variance(theta) : ExtremumModel::do_score_variance(theta);
}

// -------------------------------------------------------------------------
// Finite-difference cross checks
// -------------------------------------------------------------------------

double fd_check_score(const ExtremumModel& model, const Vector& theta, double step) {
    const Vector analytic = model.score(theta);
    const Vector fd = numdiff::gradient([&](const Vector& t) { return model.objective(t); }, theta, step);
    return ((analytic - fd).array().abs() / (1.0 + analytic.array().abs())).maxCoeff();
}

double fd_check_hessian(const ExtremumModel& model, const Vector& theta, double step) {
    const Matrix analytic = model.hessian(theta);
    const Matrix fd = numdiff::hessian([&](const Vector& t) { return model.objective(t); }, theta, step);
    return ((analytic - fd).array().abs() / (1.0 + analytic.array().abs())).maxCoeff();
}

}  // namespace bftest
