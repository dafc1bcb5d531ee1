#pragma once

#include <hierfcst/models/linear.hpp>
#include <hierfcst/models/spec.hpp>
#include <hierfcst/models/tree.hpp>
#include <hierfcst/preprocess.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace hierfcst::models {

//! Learned parameters for one target column.
using Regressor = std::variant<LinearModel, KernelModel, TreeModel, ForestModel, BoostModel,
                               BaggedBoostModel>;

struct TrainingInfo {
    std::size_t samples = 0;
    int periods = 0;
};

//! Autoregressive layout of an ARX fit: regressors are
//! [y_{t-1}, ..., y_{t-order}, exog_t].
struct ArxLayout {
    int order = 0;
    int exog = 0;
};

//! A fitted model: one independent regressor per target column. Immutable
//! after fit.
struct FittedModel {
    ModelSpec spec;
    std::vector<Regressor> learners;
    Eigen::Index n_features = 0;
    //! Inverse-applied by predict(); unset means identity.
    std::optional<preprocess::TargetTransform> transform;
    TrainingInfo info;
    std::optional<ArxLayout> arx;

    Eigen::Index n_targets() const { return static_cast<Eigen::Index>(learners.size()); }
};

//! Fits `spec` on X -> Y (model space). Stochastic families draw from the
//! spec's `seed`. The trmf family is a panel model and is rejected here.
FittedModel fit(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

//! Outputs in model space, without inverse transform or clipping.
Eigen::MatrixXd predict_raw(const FittedModel& model, const Eigen::MatrixXd& X);

//! Outputs in quantity units: the model's transform is inverted and negative
//! values are clipped to 0.
Eigen::MatrixXd predict(const FittedModel& model, const Eigen::MatrixXd& X);

//! As predict(), inverting row i with `row_transforms[i]` (stacked items).
Eigen::MatrixXd predict(const FittedModel& model, const Eigen::MatrixXd& X,
                        std::span<const preprocess::TargetTransform> row_transforms);

//! Least-squares AR(order) with exogenous regressors and intercept.
//! `exog` has one row per series entry (or zero columns). Requires
//! series length > order + exog columns + 1.
FittedModel fit_arx(std::span<const double> series, const Eigen::MatrixXd& exog, int order);

//! One-step prediction from the last `order` values of `history` and the
//! exogenous row of the target period (model space).
double arx_one_step(const FittedModel& model, std::span<const double> history,
                    std::span<const double> exog_row = {});

//! Recursive multi-step forecast feeding predictions back as lags. `future_exog`
//! needs `steps` rows when the model has exogenous inputs (model space).
std::vector<double> arx_forecast(const FittedModel& model, std::span<const double> history,
                                 int steps, const Eigen::MatrixXd& future_exog = {});

//! AdaBoost.R2 as a fitted model on a single target column.
FittedModel fit_adaboost_r2(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, int rounds,
                            int base_depth, std::uint64_t seed);

void save_model(const std::filesystem::path& path, const FittedModel& model);
FittedModel load_model(const std::filesystem::path& path);

} // namespace hierfcst::models
