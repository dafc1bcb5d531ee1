#include <hierfcst/models/linear.hpp>

#include <hierfcst/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hierfcst::models {
namespace {

// eta beyond this overflows exp().
constexpr double kMaxEta = 700.0;

void check_shapes(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) {
        throw DimensionError("design has " + std::to_string(X.rows()) + " rows but target has " +
                             std::to_string(y.size()));
    }
    if (X.rows() < 1) {
        throw DimensionError("at least one sample is required");
    }
    if (!X.allFinite() || !y.allFinite()) {
        throw DomainError("non-finite entries in training data");
    }
}

double soft_threshold(double z, double gamma) {
    if (z > gamma) {
        return z - gamma;
    }
    if (z < -gamma) {
        return z + gamma;
    }
    return 0.0;
}

} // namespace

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& X) const {
    if (X.cols() != coef.size()) {
        throw DimensionError("model expects " + std::to_string(coef.size()) + " features, got " +
                             std::to_string(X.cols()));
    }
    Eigen::VectorXd eta = (X * coef).array() + intercept;
    if (log_link) {
        return eta.array().min(kMaxEta).exp();
    }
    return eta;
}

LinearModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
    check_shapes(X, y);
    if (lambda < 0.0) {
        throw DomainError("ridge lambda must be >= 0");
    }
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const double y_mean = y.mean();
    const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;

    LinearModel model;
    if (X.cols() == 0) {
        model.coef.resize(0);
        model.intercept = y_mean;
        return model;
    }
    Eigen::MatrixXd gram = Xc.transpose() * Xc;
    gram.diagonal().array() += lambda;
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
        throw IllConditionedError("normal equations are singular or ill-conditioned" +
                                  std::string(lambda == 0.0 ? "; use lambda > 0" : ""));
    }
    model.coef = llt.solve(Xc.transpose() * yc);
    model.intercept = y_mean - x_mean.dot(model.coef);
    return model;
}

LinearModel fit_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    check_shapes(X, y);
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const double y_mean = y.mean();
    LinearModel model;
    if (X.cols() == 0) {
        model.coef.resize(0);
        model.intercept = y_mean;
        return model;
    }
    const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Xc);
    cod.setThreshold(1e-12);
    model.coef = cod.solve(yc);
    model.intercept = y_mean - x_mean.dot(model.coef);
    return model;
}

double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const LinearModel& model, double lambda) {
    const Eigen::VectorXd r = y - model.predict(X);
    return r.squaredNorm() / (2.0 * static_cast<double>(y.size())) +
           lambda * model.coef.lpNorm<1>();
}

LassoFit fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                   int max_sweeps, double tol) {
    check_shapes(X, y);
    if (lambda < 0.0) {
        throw DomainError("lasso lambda must be >= 0");
    }
    const auto n = static_cast<double>(X.rows());
    const auto p = X.cols();
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const double y_mean = y.mean();
    const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
    const Eigen::VectorXd col_sq = Xc.colwise().squaredNorm().transpose() / n;

    LassoFit fit;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd residual = y.array() - y_mean;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (col_sq(j) <= 0.0) {
                continue;
            }
            const double rho = Xc.col(j).dot(residual) / n + beta(j) * col_sq(j);
            const double updated = soft_threshold(rho, lambda) / col_sq(j);
            const double change = updated - beta(j);
            if (change != 0.0) {
                residual -= change * Xc.col(j);
                beta(j) = updated;
                max_change = std::max(max_change, std::abs(change));
            }
        }
        fit.sweeps = sweep + 1;
        fit.objective_trace.push_back(residual.squaredNorm() / (2.0 * n) + lambda * beta.lpNorm<1>());
        if (max_change < tol) {
            break;
        }
    }
    fit.model.coef = beta;
    fit.model.intercept = y_mean - x_mean.dot(beta);
    return fit;
}

double poisson_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const LinearModel& model) {
    const Eigen::VectorXd eta = ((X * model.coef).array() + model.intercept).min(kMaxEta);
    return (y.array() * eta.array() - eta.array().exp()).sum();
}

PoissonFit fit_poisson(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                       int max_iter, double tol) {
    check_shapes(X, y);
    if ((y.array() < 0.0).any()) {
        throw DomainError("Poisson regression requires non-negative targets");
    }
    if (lambda < 0.0) {
        throw DomainError("Poisson lambda must be >= 0");
    }
    const auto n = X.rows();
    const auto p = X.cols();
    PoissonFit fit;
    fit.model.log_link = true;
    fit.model.coef = Eigen::VectorXd::Zero(p);
    const double y_mean = y.mean();
    if (y_mean <= 0.0) {
        // All-zero targets: the MLE intercept diverges; predict (numerically) zero.
        fit.model.intercept = -50.0;
        return fit;
    }

    // Standardized design with a leading intercept column.
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    Eigen::RowVectorXd x_scale(p);
    Eigen::MatrixXd A(n, p + 1);
    A.col(0).setOnes();
    for (Eigen::Index j = 0; j < p; ++j) {
        const Eigen::VectorXd centered = X.col(j).array() - x_mean(j);
        const double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(n));
        x_scale(j) = sd > 0.0 ? sd : 0.0;
        A.col(j + 1) = sd > 0.0 ? Eigen::VectorXd(centered / sd) : Eigen::VectorXd::Zero(n);
    }
    Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p + 1, lambda);
    penalty(0) = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (x_scale(j) == 0.0) {
            penalty(j + 1) = 1.0; // pins the coefficient of a constant column at 0
        }
    }

    auto objective = [&](const Eigen::VectorXd& theta) {
        const Eigen::ArrayXd eta = (A * theta).array().min(kMaxEta);
        return (y.array() * eta - eta.exp()).sum() -
               0.5 * (penalty.array() * theta.array().square()).sum();
    };

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
    theta(0) = std::log(y_mean);
    double current = objective(theta);
    fit.loglik_trace.push_back(current);
    for (int iter = 0; iter < max_iter; ++iter) {
        const Eigen::ArrayXd eta = (A * theta).array().min(kMaxEta);
        const Eigen::ArrayXd mu = eta.exp();
        const Eigen::VectorXd z = (eta + (y.array() - mu) / mu).matrix();
        const Eigen::MatrixXd Aw = A.array().colwise() * mu;
        Eigen::MatrixXd H = A.transpose() * Aw;
        H.diagonal() += penalty;
        const Eigen::VectorXd rhs = Aw.transpose() * z;
        Eigen::VectorXd target;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
            target = ldlt.solve(rhs);
        } else {
            target = H.completeOrthogonalDecomposition().solve(rhs);
        }
        const Eigen::VectorXd direction = target - theta;

        double step = 1.0;
        Eigen::VectorXd candidate = theta + direction;
        double value = objective(candidate);
        while (!(value >= current) && step > 1e-10) {
            step *= 0.5;
            candidate = theta + step * direction;
            value = objective(candidate);
        }
        fit.iterations = iter + 1;
        if (!(value >= current)) {
            break; // no ascent direction left at working precision
        }
        const double gain = value - current;
        theta = candidate;
        current = value;
        fit.loglik_trace.push_back(current);
        if (gain <= tol * (std::abs(current) + tol) &&
            step * direction.lpNorm<Eigen::Infinity>() <= std::sqrt(tol)) {
            break;
        }
    }

    fit.model.coef.resize(p);
    double intercept = theta(0);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double c = x_scale(j) > 0.0 ? theta(j + 1) / x_scale(j) : 0.0;
        fit.model.coef(j) = c;
        intercept -= c * x_mean(j);
    }
    fit.model.intercept = intercept;
    return fit;
}

Eigen::VectorXd KernelModel::predict(const Eigen::MatrixXd& X) const {
    if (X.cols() != support.cols()) {
        throw DimensionError("kernel model expects " + std::to_string(support.cols()) +
                             " features, got " + std::to_string(X.cols()));
    }
    const double scale = 1.0 / (2.0 * bandwidth * bandwidth);
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Eigen::VectorXd k =
            (-(support.rowwise() - X.row(i)).rowwise().squaredNorm() * scale).array().exp();
        out(i) = offset + k.dot(alpha);
    }
    return out;
}

double median_pairwise_distance(const Eigen::MatrixXd& X) {
    std::vector<double> d;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < X.rows(); ++j) {
            const double v = (X.row(i) - X.row(j)).norm();
            if (v > 0.0) {
                d.push_back(v);
            }
        }
    }
    if (d.empty()) {
        return 1.0;
    }
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    if (d.size() % 2 == 1) {
        return *mid;
    }
    const double upper = *mid;
    const double lower = *std::max_element(d.begin(), mid);
    return 0.5 * (lower + upper);
}

KernelModel fit_kernel_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                             double bandwidth, Eigen::Index max_support) {
    check_shapes(X, y);
    if (lambda < 0.0) {
        throw DomainError("kernel lambda must be >= 0");
    }
    Eigen::MatrixXd support = X;
    Eigen::VectorXd target = y;
    if (max_support > 0 && X.rows() > max_support) {
        support.resize(max_support, X.cols());
        target.resize(max_support);
        for (Eigen::Index k = 0; k < max_support; ++k) {
            const Eigen::Index row = k * X.rows() / max_support;
            support.row(k) = X.row(row);
            target(k) = y(row);
        }
    }
    KernelModel model;
    model.bandwidth = bandwidth > 0.0 ? bandwidth : median_pairwise_distance(support);
    model.offset = target.mean();
    const auto m = support.rows();
    const double scale = 1.0 / (2.0 * model.bandwidth * model.bandwidth);
    Eigen::MatrixXd K(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        K(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < m; ++j) {
            K(i, j) = K(j, i) = std::exp(-(support.row(i) - support.row(j)).squaredNorm() * scale);
        }
    }
    K.diagonal().array() += lambda;
    const Eigen::VectorXd rhs = target.array() - model.offset;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-15) {
        model.alpha = ldlt.solve(rhs);
    } else {
        model.alpha = K.completeOrthogonalDecomposition().solve(rhs);
    }
    model.support = std::move(support);
    return model;
}

} // namespace hierfcst::models
