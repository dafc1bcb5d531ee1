#include <hierfcst/trmf.hpp>

#include <hierfcst/error.hpp>
#include <hierfcst/rng.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hierfcst::trmf {
namespace {

//! Symmetric positive definite matrix stored by its lower band.
class BandedSpd {
public:
    BandedSpd(Eigen::Index n, Eigen::Index bandwidth)
        : n_(n), bw_(bandwidth), band_(Eigen::MatrixXd::Zero(bandwidth + 1, n)) {}

    //! Entry (i, j) with j <= i <= j + bandwidth.
    double& at(Eigen::Index i, Eigen::Index j) { return band_(i - j, i); }
    double at(Eigen::Index i, Eigen::Index j) const { return band_(i - j, i); }

    //! In-place Cholesky. Returns false when a pivot is not positive.
    bool factorize() {
        for (Eigen::Index i = 0; i < n_; ++i) {
            const Eigen::Index first = std::max<Eigen::Index>(0, i - bw_);
            for (Eigen::Index j = first; j <= i; ++j) {
                double s = at(i, j);
                for (Eigen::Index k = std::max(first, j - bw_); k < j; ++k) {
                    s -= at(i, k) * at(j, k);
                }
                if (i == j) {
                    if (!(s > 0.0)) {
                        return false;
                    }
                    at(i, i) = std::sqrt(s);
                } else {
                    at(i, j) = s / at(j, j);
                }
            }
        }
        return true;
    }

    Eigen::VectorXd solve(Eigen::VectorXd b) const {
        for (Eigen::Index i = 0; i < n_; ++i) {
            for (Eigen::Index k = std::max<Eigen::Index>(0, i - bw_); k < i; ++k) {
                b(i) -= at(i, k) * b(k);
            }
            b(i) /= at(i, i);
        }
        for (Eigen::Index i = n_ - 1; i >= 0; --i) {
            for (Eigen::Index k = i + 1; k <= std::min(n_ - 1, i + bw_); ++k) {
                b(i) -= at(k, i) * b(k);
            }
            b(i) /= at(i, i);
        }
        return b;
    }

    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, n_);
        for (Eigen::Index i = 0; i < n_; ++i) {
            for (Eigen::Index j = std::max<Eigen::Index>(0, i - bw_); j <= i; ++j) {
                out(i, j) = out(j, i) = at(i, j);
            }
        }
        return out;
    }

private:
    Eigen::Index n_;
    Eigen::Index bw_;
    Eigen::MatrixXd band_;
};

double observed_count(const Mask& mask) {
    return static_cast<double>(mask.count());
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-14) {
        return ldlt.solve(b);
    }
    return A.completeOrthogonalDecomposition().solve(b);
}

// Residuals of the AR recursion, (T - p) x d; row r belongs to t = r + p.
Eigen::MatrixXd ar_residuals(const FactorModel& m) {
    const auto T = m.periods();
    const auto p = m.ar_order();
    Eigen::MatrixXd e = m.Z.bottomRows(T - p);
    for (Eigen::Index i = 1; i <= p; ++i) {
        e -= m.Z.middleRows(p - i, T - p) * m.phi.col(i - 1).asDiagonal();
    }
    return e;
}

void check_inputs(const Eigen::MatrixXd& Y, const Mask& mask, const TrmfConfig& config,
                  std::vector<std::string>& warnings) {
    config.validate();
    if (mask.rows() != Y.rows() || mask.cols() != Y.cols()) {
        throw DimensionError("mask shape differs from data shape");
    }
    if (Y.rows() <= config.ar_order) {
        throw RangeError("TRMF needs more periods (" + std::to_string(Y.rows()) +
                         ") than the AR order (" + std::to_string(config.ar_order) + ")");
    }
    if (Y.cols() < 1) {
        throw DimensionError("TRMF needs at least one series");
    }
    for (Eigen::Index t = 0; t < Y.rows(); ++t) {
        for (Eigen::Index i = 0; i < Y.cols(); ++i) {
            if (mask(t, i) && !std::isfinite(Y(t, i))) {
                throw DomainError("non-finite observed entry at (" + std::to_string(t) + ", " +
                                  std::to_string(i) + ")");
            }
        }
    }
    const double density = observed_count(mask) / static_cast<double>(Y.size());
    if (mask.count() == 0) {
        throw DensityError("no observed entries");
    }
    if (density < config.density_floor) {
        const auto msg = "observed share " + std::to_string(density) + " is below the floor " +
                         std::to_string(config.density_floor);
        if (!config.allow_sparse) {
            throw DensityError(msg + "; set allow_sparse to proceed");
        }
        warnings.push_back(msg + "; reconstruction of missing dynamics may be inadequate");
    }
}

void run_sweeps(FactorModel& model, const Eigen::MatrixXd& Y, const TrmfConfig& config) {
    double current = objective(model, Y);
    model.objective_trace.assign(1, current);
    model.sweeps = 0;
    model.converged = false;
    for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
        update_loadings(model, Y);
        update_factors(model, Y);
        update_ar(model);
        const double next = objective(model, Y);
        if (!std::isfinite(next)) {
            throw DomainError("TRMF objective became non-finite");
        }
        model.objective_trace.push_back(next);
        model.sweeps = sweep + 1;
        const double decrease = (current - next) / std::max(std::abs(current), 1e-300);
        current = next;
        if (decrease < config.tol) {
            model.converged = true;
            break;
        }
    }
    if (has_explosive_factors(model)) {
        model.warnings.push_back("AR coefficients of some factor are non-stationary; "
                                 "dynamic forecasts may diverge");
    }
}

} // namespace

void TrmfConfig::validate() const {
    if (rank < 1 || ar_order < 1) {
        throw ConfigError("TRMF needs rank >= 1 and ar_order >= 1");
    }
    if (lambda_f < 0.0 || lambda_z < 0.0 || lambda_ar < 0.0) {
        throw ConfigError("TRMF regularization weights must be >= 0");
    }
    if (max_sweeps < 0 || !(tol >= 0.0)) {
        throw ConfigError("TRMF needs max_sweeps >= 0 and tol >= 0");
    }
}

Eigen::Index FactorModel::parameter_count() const {
    return Z.size() + F.size() + phi.size();
}

double objective(const FactorModel& m, const Eigen::MatrixXd& Y) {
    const double count = observed_count(m.observed);
    const Eigen::MatrixXd fitted = m.Z * m.F;
    double data = 0.0;
    for (Eigen::Index t = 0; t < Y.rows(); ++t) {
        for (Eigen::Index i = 0; i < Y.cols(); ++i) {
            if (m.observed(t, i)) {
                const double r = Y(t, i) - fitted(t, i);
                data += r * r;
            }
        }
    }
    return data / (2.0 * count) + 0.5 * m.lambda_f * m.F.squaredNorm() +
           0.5 * m.lambda_z * m.Z.squaredNorm() + 0.5 * m.lambda_ar * ar_residuals(m).squaredNorm();
}

Gradient gradient(const FactorModel& m, const Eigen::MatrixXd& Y) {
    const double count = observed_count(m.observed);
    Eigen::MatrixXd residual = Y - m.Z * m.F;
    for (Eigen::Index t = 0; t < Y.rows(); ++t) {
        for (Eigen::Index i = 0; i < Y.cols(); ++i) {
            if (!m.observed(t, i)) {
                residual(t, i) = 0.0;
            }
        }
    }
    Gradient g;
    g.F = -(m.Z.transpose() * residual) / count + m.lambda_f * m.F;
    g.Z = -(residual * m.F.transpose()) / count + m.lambda_z * m.Z;

    const auto T = m.periods();
    const auto p = m.ar_order();
    const Eigen::MatrixXd e = ar_residuals(m);
    g.Z.bottomRows(T - p) += m.lambda_ar * e;
    g.phi.resize(m.rank(), p);
    for (Eigen::Index i = 1; i <= p; ++i) {
        g.Z.middleRows(p - i, T - p) -= m.lambda_ar * e * m.phi.col(i - 1).asDiagonal();
        g.phi.col(i - 1) =
            -m.lambda_ar * (e.array() * m.Z.middleRows(p - i, T - p).array()).colwise().sum().transpose();
    }
    return g;
}

void update_loadings(FactorModel& m, const Eigen::MatrixXd& Y) {
    const double count = observed_count(m.observed);
    const auto d = m.rank();
    for (Eigen::Index i = 0; i < Y.cols(); ++i) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
        for (Eigen::Index t = 0; t < Y.rows(); ++t) {
            if (m.observed(t, i)) {
                A.selfadjointView<Eigen::Lower>().rankUpdate(m.Z.row(t).transpose());
                b += Y(t, i) * m.Z.row(t).transpose();
            }
        }
        A = A.selfadjointView<Eigen::Lower>();
        A /= count;
        b /= count;
        A.diagonal().array() += m.lambda_f;
        m.F.col(i) = solve_spd(A, b);
    }
}

void update_factors(FactorModel& m, const Eigen::MatrixXd& Y) {
    const double count = observed_count(m.observed);
    const auto T = m.periods();
    const auto d = m.rank();
    const auto p = m.ar_order();
    const auto N = T * d;
    const auto index = [d](Eigen::Index t, Eigen::Index j) { return t * d + j; };

    BandedSpd A(N, p * d);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(N);
    for (Eigen::Index t = 0; t < T; ++t) {
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(d, d);
        Eigen::VectorXd r = Eigen::VectorXd::Zero(d);
        for (Eigen::Index i = 0; i < Y.cols(); ++i) {
            if (m.observed(t, i)) {
                G.selfadjointView<Eigen::Lower>().rankUpdate(m.F.col(i));
                r += Y(t, i) * m.F.col(i);
            }
        }
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index k = 0; k <= j; ++k) {
                A.at(index(t, j), index(t, k)) += G(j, k) / count;
            }
            A.at(index(t, j), index(t, j)) += m.lambda_z;
            b(index(t, j)) = r(j) / count;
        }
    }
    if (m.lambda_ar > 0.0) {
        std::vector<double> c(static_cast<std::size_t>(p) + 1);
        for (Eigen::Index j = 0; j < d; ++j) {
            c[0] = 1.0;
            for (Eigen::Index i = 1; i <= p; ++i) {
                c[static_cast<std::size_t>(i)] = -m.phi(j, i - 1);
            }
            for (Eigen::Index t = p; t < T; ++t) {
                // Lag l lives at row t - l; the larger lag has the smaller index.
                for (Eigen::Index l = 0; l <= p; ++l) {
                    for (Eigen::Index k = l; k <= p; ++k) {
                        A.at(index(t - l, j), index(t - k, j)) +=
                            m.lambda_ar * c[static_cast<std::size_t>(l)] * c[static_cast<std::size_t>(k)];
                    }
                }
            }
        }
    }

    Eigen::VectorXd z;
    BandedSpd factor = A;
    if (factor.factorize()) {
        z = factor.solve(b);
    } else {
        z = A.dense().completeOrthogonalDecomposition().solve(b);
    }
    for (Eigen::Index t = 0; t < T; ++t) {
        for (Eigen::Index j = 0; j < d; ++j) {
            m.Z(t, j) = z(index(t, j));
        }
    }
}

void update_ar(FactorModel& m) {
    const auto T = m.periods();
    const auto p = m.ar_order();
    for (Eigen::Index j = 0; j < m.rank(); ++j) {
        Eigen::MatrixXd design(T - p, p);
        for (Eigen::Index i = 1; i <= p; ++i) {
            design.col(i - 1) = m.Z.col(j).segment(p - i, T - p);
        }
        const Eigen::VectorXd target = m.Z.col(j).tail(T - p);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
        cod.setThreshold(1e-12);
        m.phi.row(j) = cod.solve(target).transpose();
    }
}

FactorModel factorize(const Eigen::MatrixXd& Y, const Mask& mask, const TrmfConfig& config) {
    FactorModel model;
    check_inputs(Y, mask, config, model.warnings);
    const auto d = config.rank;
    const double bound = 0.5 / std::sqrt(static_cast<double>(d));
    Rng rng(config.seed);
    model.Z.resize(Y.rows(), d);
    for (Eigen::Index t = 0; t < Y.rows(); ++t) {
        for (Eigen::Index j = 0; j < d; ++j) {
            model.Z(t, j) = rng.uniform(-bound, bound);
        }
    }
    model.F.resize(d, Y.cols());
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < Y.cols(); ++i) {
            model.F(j, i) = rng.uniform(-bound, bound);
        }
    }
    model.phi = Eigen::MatrixXd::Zero(d, config.ar_order);
    model.lambda_f = config.lambda_f;
    model.lambda_z = config.lambda_z;
    model.lambda_ar = config.lambda_ar;
    model.observed = mask;
    run_sweeps(model, Y, config);
    return model;
}

FactorModel factorize(const Eigen::MatrixXd& Y, const Mask& mask, const TrmfConfig& config,
                      const FactorModel& warm) {
    FactorModel model;
    check_inputs(Y, mask, config, model.warnings);
    if (warm.Z.rows() != Y.rows() || warm.Z.cols() != config.rank || warm.F.cols() != Y.cols() ||
        warm.F.rows() != config.rank || warm.phi.rows() != config.rank ||
        warm.phi.cols() != config.ar_order) {
        throw DimensionError("warm start does not match the data and configuration");
    }
    model.Z = warm.Z;
    model.F = warm.F;
    model.phi = warm.phi;
    model.lambda_f = config.lambda_f;
    model.lambda_z = config.lambda_z;
    model.lambda_ar = config.lambda_ar;
    model.observed = mask;
    run_sweeps(model, Y, config);
    return model;
}

Eigen::MatrixXd forecast_factors(const FactorModel& m, int horizon) {
    if (horizon < 1) {
        throw RangeError("forecast horizon must be >= 1");
    }
    const auto T = m.periods();
    const auto p = m.ar_order();
    // Rows [0, p) hold the last p observed factor rows, then the forecasts.
    Eigen::MatrixXd path(p + horizon, m.rank());
    path.topRows(p) = m.Z.bottomRows(p);
    for (int h = 0; h < horizon; ++h) {
        const auto row = p + h;
        for (Eigen::Index j = 0; j < m.rank(); ++j) {
            double v = 0.0;
            for (Eigen::Index i = 1; i <= p; ++i) {
                v += m.phi(j, i - 1) * path(row - i, j);
            }
            path(row, j) = v;
        }
    }
    (void)T;
    return path.bottomRows(horizon);
}

Eigen::MatrixXd forecast(const FactorModel& m, int horizon) {
    return forecast_factors(m, horizon) * m.F;
}

bool has_explosive_factors(const FactorModel& m) {
    const auto p = m.ar_order();
    for (Eigen::Index j = 0; j < m.rank(); ++j) {
        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
        companion.row(0) = m.phi.row(j);
        if (p > 1) {
            companion.bottomLeftCorner(p - 1, p - 1).setIdentity();
        }
        const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
        if ((solver.eigenvalues().array().abs() >= 1.0).any()) {
            return true;
        }
    }
    return false;
}

RollingResult rolling_refit(const Eigen::MatrixXd& initial, const Mask& initial_mask,
                            const Eigen::MatrixXd& stream, const Mask& stream_mask,
                            const TrmfConfig& config, WindowPolicy policy) {
    if (stream.cols() != initial.cols() && stream.rows() > 0) {
        throw DimensionError("stream rows must have as many series as the initial matrix");
    }
    if (stream_mask.rows() != stream.rows() || (stream.rows() > 0 && stream_mask.cols() != stream.cols())) {
        throw DimensionError("stream mask shape differs from stream shape");
    }
    if (policy.kind == WindowPolicy::Kind::sliding && policy.width <= config.ar_order) {
        throw ConfigError("sliding window must be wider than the AR order");
    }
    RollingResult result;
    Eigen::MatrixXd Y = initial;
    Mask mask = initial_mask;
    result.last = factorize(Y, mask, config);
    result.objectives.push_back(result.last.objective_trace.back());
    result.forecasts.resize(stream.rows(), initial.cols());

    for (Eigen::Index k = 0; k < stream.rows(); ++k) {
        result.forecasts.row(k) = forecast(result.last, 1).row(0);

        FactorModel warm = result.last;
        const Eigen::RowVectorXd next_factor = forecast_factors(result.last, 1).row(0);
        Eigen::MatrixXd Z(warm.Z.rows() + 1, warm.Z.cols());
        Z << warm.Z, next_factor;
        Eigen::MatrixXd grown(Y.rows() + 1, Y.cols());
        grown << Y, stream.row(k);
        Mask grown_mask(mask.rows() + 1, mask.cols());
        grown_mask << mask, stream_mask.row(k);

        if (policy.kind == WindowPolicy::Kind::sliding && grown.rows() > policy.width) {
            const auto drop = grown.rows() - policy.width;
            Y = grown.bottomRows(policy.width);
            mask = grown_mask.bottomRows(policy.width);
            warm.Z = Z.bottomRows(Z.rows() - drop);
        } else {
            Y = std::move(grown);
            mask = std::move(grown_mask);
            warm.Z = std::move(Z);
        }
        result.last = factorize(Y, mask, config, warm);
        result.objectives.push_back(result.last.objective_trace.back());
    }
    return result;
}

} // namespace hierfcst::trmf
