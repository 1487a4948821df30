#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "bftest/matrix.hpp"

namespace bftest {

// Sample objective Q_n(theta) of an extremum estimator together with its
// derivatives. Public members validate the parameter length and then
// dispatch to the do_* hooks; the default score and Hessian hooks fall back
// to central finite differences of the objective.
class ExtremumModel {
public:
    virtual ~ExtremumModel() = default;

    virtual std::size_t sample_size() const = 0;
    virtual std::size_t parameter_count() const = 0;
    // Declares B_n = -A_n (quasi-score objective).
    virtual bool quasi_score() const = 0;

    double objective(const Vector& theta) const;
    Vector score(const Vector& theta) const;
    // A_n(theta), the Hessian of Q_n.
    Matrix hessian(const Vector& theta) const;
    // B_n(theta), the asymptotic covariance of sqrt(n) times the score.
    Matrix score_variance(const Vector& theta) const;

protected:
    virtual double do_objective(const Vector& theta) const = 0;
    virtual Vector do_score(const Vector& theta) const;
    virtual Matrix do_hessian(const Vector& theta) const;
    virtual Matrix do_score_variance(const Vector& theta) const;

private:
    void check_length(const Vector& theta) const;
};

enum class ScoreVarianceEstimator {
    model_implied,  // X^T X / (n sigma2), so B = -A
    outer_product,  // (1/n) sum_i s_i s_i^T from per-observation scores
};

// Gaussian linear regression with variance treated as known:
// Q_n(theta) = -|y - X theta|^2 / (2 n sigma2).
class LinearGaussianModel final : public ExtremumModel {
public:
    LinearGaussianModel(Matrix X, Vector y, double sigma2,
                        ScoreVarianceEstimator estimator = ScoreVarianceEstimator::model_implied);

    // Plugs in the unbiased residual variance RSS / (n - p) of the OLS fit.
    static LinearGaussianModel with_estimated_variance(
        Matrix X, Vector y, ScoreVarianceEstimator estimator = ScoreVarianceEstimator::model_implied);

    std::size_t sample_size() const override { return static_cast<std::size_t>(X_.rows()); }
    std::size_t parameter_count() const override { return static_cast<std::size_t>(X_.cols()); }
    bool quasi_score() const override { return estimator_ == ScoreVarianceEstimator::model_implied; }

    const Matrix& design() const { return X_; }
    const Vector& response() const { return y_; }
    double sigma2() const { return sigma2_; }
    const Matrix& gram() const { return gram_; }   // X^T X
    const Vector& moment() const { return moment_; }  // X^T y

protected:
    double do_objective(const Vector& theta) const override;
    Vector do_score(const Vector& theta) const override;
    Matrix do_hessian(const Vector& theta) const override;
    Matrix do_score_variance(const Vector& theta) const override;

private:
    Matrix X_;
    Vector y_;
    double sigma2_;
    ScoreVarianceEstimator estimator_;
    Matrix gram_;
    Vector moment_;
};

// Model assembled from callables. Missing derivatives use the finite
// difference fallbacks; a missing B_n requires quasi_score.
class CallbackModel final : public ExtremumModel {
public:
    struct Callbacks {
        std::function<double(const Vector&)> objective;
        std::function<Vector(const Vector&)> score;
        std::function<Matrix(const Vector&)> hessian;
        std::function<Matrix(const Vector&)> score_variance;
    };

    CallbackModel(std::size_t n, std::size_t p, bool quasi_score, Callbacks callbacks);

    std::size_t sample_size() const override { return n_; }
    std::size_t parameter_count() const override { return p_; }
    bool quasi_score() const override { return quasi_; }

protected:
    double do_objective(const Vector& theta) const override;
    Vector do_score(const Vector& theta) const override;
    Matrix do_hessian(const Vector& theta) const override;
    Matrix do_score_variance(const Vector& theta) const override;

private:
    std::size_t n_;
    std::size_t p_;
    bool quasi_;
    Callbacks cb_;
};

// Max over coordinates of |analytic - central difference| / (1 + |analytic|).
double fd_check_score(const ExtremumModel& model, const Vector& theta, double step = 1e-5);
// Same measure for the Hessian, entrywise.
double fd_check_hessian(const ExtremumModel& model, const Vector& theta, double step = 1e-4);

}  // namespace bftest
