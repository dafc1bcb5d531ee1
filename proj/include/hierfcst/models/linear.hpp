#pragma once

#include <vector>

#include <Eigen/Dense>

namespace hierfcst::models {

//! y = intercept + X coef, or exp of that when `log_link` is set.
struct LinearModel {
    Eigen::VectorXd coef;
    double intercept = 0.0;
    bool log_link = false;

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

//! Minimizes ||y - b - X beta||^2 + lambda ||beta||^2 (intercept unpenalized)
//! in closed form. With lambda = 0 a rank-deficient design throws
//! IllConditionedError.
LinearModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda);

//! Unregularized least squares with intercept. Rank-deficient designs get the
//! minimum-norm solution.
LinearModel fit_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct LassoFit {
    LinearModel model;
    std::vector<double> objective_trace; //!< objective after each sweep
    int sweeps = 0;
};

//! (1 / 2n) ||y - b - X beta||^2 + lambda ||beta||_1.
double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const LinearModel& model, double lambda);

//! Cyclic coordinate descent on centered data. Stops when the largest
//! coefficient change in a sweep is below `tol`.
LassoFit fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                   int max_sweeps, double tol);

struct PoissonFit {
    LinearModel model;
    std::vector<double> loglik_trace; //!< penalized quasi log-likelihood per iteration
    int iterations = 0;
};

//! Quasi log-likelihood sum(y * eta - exp(eta)) with eta = b + X beta.
double poisson_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const LinearModel& model);

//! Log-link Poisson regression by IRLS with step halving. Accepts
//! non-integer targets (quasi-Poisson). Columns are standardized internally
//! and `lambda` penalizes the standardized slopes. Throws DomainError on
//! negative y.
PoissonFit fit_poisson(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                       int max_iter, double tol);

//! RBF kernel ridge regression around the target mean.
struct KernelModel {
    Eigen::MatrixXd support;
    Eigen::VectorXd alpha;
    double bandwidth = 1.0;
    double offset = 0.0;

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

//! Median Euclidean distance over distinct row pairs (1 when all coincide).
double median_pairwise_distance(const Eigen::MatrixXd& X);

//! `bandwidth` <= 0 selects the median heuristic. More than `max_support`
//! rows are thinned to an evenly strided subset.
KernelModel fit_kernel_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                             double bandwidth, Eigen::Index max_support = 1500);

} // namespace hierfcst::models
