#include <hierfcst/models/model.hpp>

#include <hierfcst/error.hpp>

namespace hierfcst::models {

FittedModel fit_arx(std::span<const double> series, const Eigen::MatrixXd& exog, int order) {
    if (order < 1) {
        throw ConfigError("AR order must be >= 1");
    }
    const auto n = static_cast<Eigen::Index>(series.size());
    const auto k = exog.cols();
    if (k > 0 && exog.rows() != n) {
        throw DimensionError("exogenous matrix needs one row per series entry");
    }
    if (n <= order + k + 1) {
        throw RangeError("series of length " + std::to_string(n) + " is too short for AR(" +
                         std::to_string(order) + ") with " + std::to_string(k) +
                         " exogenous inputs");
    }
    const auto rows = n - order;
    Eigen::MatrixXd design(rows, order + k);
    Eigen::VectorXd target(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto t = r + order;
        for (int i = 1; i <= order; ++i) {
            design(r, i - 1) = series[static_cast<std::size_t>(t - i)];
        }
        if (k > 0) {
            design.row(r).tail(k) = exog.row(t);
        }
        target(r) = series[static_cast<std::size_t>(t)];
    }

    FittedModel model;
    model.spec = ModelSpec("arx", Family::arx, {{"order", order}});
    model.learners.emplace_back(fit_least_squares(design, target));
    model.n_features = order + k;
    model.info = {static_cast<std::size_t>(rows), static_cast<int>(n)};
    model.arx = ArxLayout{order, static_cast<int>(k)};
    return model;
}

double arx_one_step(const FittedModel& model, std::span<const double> history,
                    std::span<const double> exog_row) {
    if (!model.arx) {
        throw StateError("model was not fitted as ARX");
    }
    const auto [order, k] = *model.arx;
    if (history.size() < static_cast<std::size_t>(order)) {
        throw RangeError("ARX needs at least " + std::to_string(order) + " history values");
    }
    if (exog_row.size() != static_cast<std::size_t>(k)) {
        throw DimensionError("ARX expects " + std::to_string(k) + " exogenous values");
    }
    const auto& lm = std::get<LinearModel>(model.learners.front());
    double out = lm.intercept;
    for (int i = 1; i <= order; ++i) {
        out += lm.coef(i - 1) * history[history.size() - static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < k; ++j) {
        out += lm.coef(order + j) * exog_row[static_cast<std::size_t>(j)];
    }
    return out;
}

std::vector<double> arx_forecast(const FittedModel& model, std::span<const double> history,
                                 int steps, const Eigen::MatrixXd& future_exog) {
    if (!model.arx) {
        throw StateError("model was not fitted as ARX");
    }
    const int k = model.arx->exog;
    if (k > 0 && (future_exog.rows() < steps || future_exog.cols() != k)) {
        throw DimensionError("ARX forecast needs " + std::to_string(steps) + " rows of " +
                             std::to_string(k) + " exogenous values");
    }
    std::vector<double> path(history.begin(), history.end());
    std::vector<double> out;
    for (int s = 0; s < steps; ++s) {
        std::vector<double> exog_row(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) {
            exog_row[static_cast<std::size_t>(j)] = future_exog(s, j);
        }
        const double next = arx_one_step(model, path, exog_row);
        out.push_back(next);
        path.push_back(next);
    }
    return out;
}

} // namespace hierfcst::models
