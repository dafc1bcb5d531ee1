#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hierfcst::tda {

using FeatureVector = std::vector<double>;

//! mean, variance, skewness, kurtosis, acf1, zero_fraction, max_mean_ratio
const std::vector<std::string>& default_feature_names();

//! Every feature known to FeatureSet.
const std::vector<std::string>& available_feature_names();

//! Single named feature. Throws ConfigError for unknown names and RangeError
//! for series shorter than 2.
double feature_value(std::string_view name, std::span<const double> series);

//! The default seven features. Constant series yield variance, skewness,
//! kurtosis and autocorrelation 0 and a max/mean ratio of 1 (0 when the mean
//! is 0).
FeatureVector extract_features(std::span<const double> series);

//! Ordered selection of named features.
class FeatureSet {
public:
    FeatureSet() : FeatureSet(default_feature_names()) {}
    explicit FeatureSet(std::vector<std::string> names);

    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return names_.size(); }

    FeatureVector extract(std::span<const double> series) const;

    //! One row per series.
    Eigen::MatrixXd matrix(const std::vector<std::vector<double>>& series) const;

    friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

private:
    std::vector<std::string> names_;
};

//! sum_k |u_k - v_k| / (|u_k| + |v_k|); 0/0 terms contribute 0.
double canberra(std::span<const double> u, std::span<const double> v);
double canberra(const Eigen::Ref<const Eigen::RowVectorXd>& u,
                const Eigen::Ref<const Eigen::RowVectorXd>& v);

//! First principal component of column-standardized features.
struct PcaLens {
    Eigen::VectorXd projection;   //!< one value per row
    std::vector<int> kept;        //!< columns with nonzero variance
    Eigen::VectorXd mean;         //!< of kept columns
    Eigen::VectorXd scale;        //!< population sd of kept columns
    Eigen::VectorXd loadings;     //!< unit PC1 over kept columns
    double eigenvalue = 0.0;
    double explained = 0.0;       //!< eigenvalue share of the total variance
    int iterations = 0;

    //! Projects a new raw feature row.
    double project(std::span<const double> features) const;
};

//! Power iteration to a residual of 1e-10. The sign is fixed so the loading
//! of largest magnitude is positive. Throws DomainError when every column is
//! constant and RangeError for fewer than 2 rows.
PcaLens pca_lens(const Eigen::MatrixXd& features);

} // namespace hierfcst::tda
