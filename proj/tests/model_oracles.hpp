#pragma once

// Reference computations for the model zoo checks.

#include <hierfcst/eval.hpp>

#include <cmath>
#include <span>

#include <Eigen/Dense>

namespace model_oracles {

// Ridge objective gradient in (intercept, coefficients).
inline Eigen::VectorXd ridge_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                                      const Eigen::VectorXd& w) {
    const Eigen::VectorXd r = (X * w.tail(X.cols())).array() + w(0) - y.array();
    Eigen::VectorXd g(w.size());
    g(0) = 2.0 * r.sum();
    g.tail(X.cols()) = 2.0 * X.transpose() * r + 2.0 * lambda * w.tail(X.cols());
    return g;
}

// Newton iterations on the Poisson log-likelihood without step control.
inline Eigen::VectorXd poisson_newton(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int iters) {
    Eigen::MatrixXd A(X.rows(), X.cols() + 1);
    A << Eigen::VectorXd::Ones(X.rows()), X;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(A.cols());
    beta(0) = std::log(y.mean());
    for (int it = 0; it < iters; ++it) {
        const Eigen::VectorXd mu = (A * beta).array().exp();
        const Eigen::VectorXd g = A.transpose() * (y - mu);
        const Eigen::MatrixXd H = A.transpose() * mu.asDiagonal() * A;
        beta += H.ldlt().solve(g);
    }
    return beta;
}

inline double training_smape(const Eigen::VectorXd& pred, const Eigen::VectorXd& y) {
    return hierfcst::eval::smape(std::span(pred.data(), static_cast<std::size_t>(pred.size())),
                                 std::span(y.data(), static_cast<std::size_t>(y.size())));
}

} // namespace model_oracles
