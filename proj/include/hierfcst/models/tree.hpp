#pragma once

#include <hierfcst/rng.hpp>

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace hierfcst::models {

struct TreeNode {
    int feature = -1; //!< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

//! CART regression tree. Rows with x[feature] <= threshold go left.
struct TreeModel {
    std::vector<TreeNode> nodes;

    double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
    int depth() const;

    friend bool operator==(const TreeModel& a, const TreeModel& b);
};

struct TreeParams {
    int max_depth = 8;
    int min_leaf = 2;
    //! Share of features examined at each split; 1 examines all of them.
    double feature_fraction = 1.0;
};

//! Grows a tree on the listed rows (duplicates allowed) with sample weights,
//! maximizing weighted variance reduction. `rng` is only consulted when
//! feature_fraction < 1.
TreeModel fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& weights, const std::vector<Eigen::Index>& rows,
                   const TreeParams& params, Rng* rng = nullptr);

//! Unweighted tree over all rows.
TreeModel fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeParams& params);

struct ForestParams {
    int trees = 100;
    TreeParams tree;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

struct ForestModel {
    std::vector<TreeModel> trees;
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

//! Random forest. `resample` fixes the per-tree row lists instead of drawing
//! bootstrap samples.
ForestModel fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const ForestParams& params,
                       const std::optional<std::vector<std::vector<Eigen::Index>>>& resample = {});

struct BoostParams {
    int rounds = 50;
    TreeParams tree{3, 2, 1.0};
    double learning_rate = 1.0;
    std::uint64_t seed = 0;
};

//! AdaBoost.R2 ensemble combined by weighted median.
struct BoostModel {
    std::vector<TreeModel> trees;
    std::vector<double> weights;

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
    //! Prediction of the first `rounds` learners.
    Eigen::VectorXd staged_predict(const Eigen::MatrixXd& X, std::size_t rounds) const;
};

//! AdaBoost.R2 with linear loss, fitting each learner on the current sample
//! weights. `initial_weights` (non-negative) defaults to uniform; rows with
//! zero initial weight take no part.
BoostModel fit_adaboost_r2(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const BoostParams& params,
                           const std::optional<Eigen::VectorXd>& initial_weights = {});

struct BaggedBoostModel {
    std::vector<BoostModel> members;
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

//! Bagged AdaBoost.R2: each member boosts on a bootstrap resample.
BaggedBoostModel fit_bagged_boost(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int members,
                                  const BoostParams& params);

} // namespace hierfcst::models
