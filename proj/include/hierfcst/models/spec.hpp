#pragma once

#include <hierfcst/preprocess.hpp>

#include <map>
#include <string>
#include <string_view>

namespace hierfcst::models {

enum class Family { ridge, lasso, poisson, kernel, rforest, adaboost, ensemble, arx, trmf };

enum class FeedingMode { none, df_one_by_one, df_all_items };

//! Throws OutOfScopeError for benchmark families that are not implemented
//! (bsts, bsts_classifier, nn, svr, arima, arimax) and ConfigError for
//! unknown names.
Family parse_family(std::string_view name);
std::string_view to_string(Family family);

//! Label used in reports; the ARX baseline is tagged as a surrogate.
std::string display_name(Family family);

FeedingMode parse_feeding(std::string_view name);
std::string_view to_string(FeedingMode mode);

//! A named model configuration. Hyperparameters are resolved against the
//! family defaults and validated at construction.
class ModelSpec {
public:
    ModelSpec() = default;
    ModelSpec(std::string name, Family family, std::map<std::string, double> params = {},
              preprocess::TransformKind transform = preprocess::TransformKind::identity,
              FeedingMode feeding = FeedingMode::none);

    const std::string& name() const { return name_; }
    Family family() const { return family_; }
    preprocess::TransformKind transform() const { return transform_; }
    FeedingMode feeding() const { return feeding_; }
    const std::map<std::string, double>& params() const { return params_; }

    bool has(const std::string& key) const { return params_.count(key) != 0; }
    //! Resolved hyperparameter; throws ConfigError when absent.
    double param(const std::string& key) const;
    int int_param(const std::string& key) const;

    bool uses_diagonal_feeding() const { return feeding_ != FeedingMode::none; }

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

private:
    std::string name_;
    Family family_ = Family::ridge;
    std::map<std::string, double> params_;
    preprocess::TransformKind transform_ = preprocess::TransformKind::identity;
    FeedingMode feeding_ = FeedingMode::none;
};

//! Default hyperparameters of a family.
std::map<std::string, double> default_params(Family family);

} // namespace hierfcst::models
