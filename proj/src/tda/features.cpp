#include <hierfcst/tda/features.hpp>

#include <hierfcst/error.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

namespace hierfcst::tda {
namespace {

struct Moments {
    double mean = 0.0;
    double m2 = 0.0; // central moments, population normalization
    double m3 = 0.0;
    double m4 = 0.0;
};

Moments moments(std::span<const double> x) {
    Moments m;
    const double n = static_cast<double>(x.size());
    m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    for (const double v : x) {
        const double d = v - m.mean;
        m.m2 += d * d;
        m.m3 += d * d * d;
        m.m4 += d * d * d * d;
    }
    m.m2 /= n;
    m.m3 /= n;
    m.m4 /= n;
    return m;
}

bool is_constant(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

double mean_of(std::span<const double> x) {
    return moments(x).mean;
}

double variance_of(std::span<const double> x) {
    return is_constant(x) ? 0.0 : moments(x).m2;
}

double skewness_of(std::span<const double> x) {
    if (is_constant(x)) {
        return 0.0;
    }
    const auto m = moments(x);
    return m.m3 / std::pow(m.m2, 1.5);
}

double kurtosis_of(std::span<const double> x) {
    if (is_constant(x)) {
        return 0.0;
    }
    const auto m = moments(x);
    return m.m4 / (m.m2 * m.m2) - 3.0;
}

double acf_of(std::span<const double> x, std::size_t lag) {
    if (is_constant(x) || lag >= x.size()) {
        return 0.0;
    }
    const double mean = mean_of(x);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double d = x[t] - mean;
        den += d * d;
        if (t + lag < x.size()) {
            num += d * (x[t + lag] - mean);
        }
    }
    return num / den;
}

double zero_fraction_of(std::span<const double> x) {
    const auto zeros = std::count(x.begin(), x.end(), 0.0);
    return static_cast<double>(zeros) / static_cast<double>(x.size());
}

double max_mean_ratio_of(std::span<const double> x) {
    const double mean = mean_of(x);
    if (mean == 0.0) {
        return 0.0;
    }
    if (is_constant(x)) {
        return 1.0;
    }
    return *std::max_element(x.begin(), x.end()) / mean;
}

double cv_of(std::span<const double> x) {
    const double mean = mean_of(x);
    return mean == 0.0 ? 0.0 : std::sqrt(variance_of(x)) / std::abs(mean);
}

double trend_of(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double tbar = (n - 1.0) / 2.0;
    const double mean = mean_of(x);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double dt = static_cast<double>(t) - tbar;
        num += dt * (x[t] - mean);
        den += dt * dt;
    }
    return num / den;
}

using FeatureFn = std::function<double(std::span<const double>)>;

const std::map<std::string, FeatureFn, std::less<>>& registry() {
    static const std::map<std::string, FeatureFn, std::less<>> table = {
        {"mean", mean_of},
        {"variance", variance_of},
        {"skewness", skewness_of},
        {"kurtosis", kurtosis_of},
        {"acf1", [](std::span<const double> x) { return acf_of(x, 1); }},
        {"acf2", [](std::span<const double> x) { return acf_of(x, 2); }},
        {"zero_fraction", zero_fraction_of},
        {"max_mean_ratio", max_mean_ratio_of},
        {"cv", cv_of},
        {"trend", trend_of},
        {"last", [](std::span<const double> x) { return x.back(); }},
    };
    return table;
}

} // namespace

const std::vector<std::string>& default_feature_names() {
    static const std::vector<std::string> names = {"mean",  "variance",      "skewness",
                                                   "kurtosis", "acf1", "zero_fraction",
                                                   "max_mean_ratio"};
    return names;
}

const std::vector<std::string>& available_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, fn] : registry()) {
            out.push_back(name);
        }
        return out;
    }();
    return names;
}

double feature_value(std::string_view name, std::span<const double> series) {
    const auto it = registry().find(name);
    if (it == registry().end()) {
        throw ConfigError("unknown feature '" + std::string(name) + "'");
    }
    if (series.size() < 2) {
        throw RangeError("features need a series of length >= 2");
    }
    return it->second(series);
}

FeatureVector extract_features(std::span<const double> series) {
    static const FeatureSet defaults;
    return defaults.extract(series);
}

FeatureSet::FeatureSet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) {
        throw ConfigError("feature set is empty");
    }
    for (const auto& name : names_) {
        if (registry().find(name) == registry().end()) {
            throw ConfigError("unknown feature '" + name + "'");
        }
    }
}

FeatureVector FeatureSet::extract(std::span<const double> series) const {
    if (series.size() < 2) {
        throw RangeError("features need a series of length >= 2");
    }
    FeatureVector out;
    out.reserve(names_.size());
    for (const auto& name : names_) {
        out.push_back(registry().find(name)->second(series));
    }
    return out;
}

Eigen::MatrixXd FeatureSet::matrix(const std::vector<std::vector<double>>& series) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(series.size()), static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto f = extract(series[i]);
        for (std::size_t k = 0; k < f.size(); ++k) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = f[k];
        }
    }
    return out;
}

double canberra(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw DimensionError("canberra: lengths " + std::to_string(u.size()) + " and " +
                             std::to_string(v.size()) + " differ");
    }
    double d = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double den = std::abs(u[k]) + std::abs(v[k]);
        if (den > 0.0) {
            d += std::abs(u[k] - v[k]) / den;
        }
    }
    return d;
}

double canberra(const Eigen::Ref<const Eigen::RowVectorXd>& u,
                const Eigen::Ref<const Eigen::RowVectorXd>& v) {
    return canberra(std::span<const double>(u.data(), static_cast<std::size_t>(u.size())),
                    std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

double PcaLens::project(std::span<const double> features) const {
    double out = 0.0;
    for (std::size_t k = 0; k < kept.size(); ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        out += loadings(c) * (features[static_cast<std::size_t>(kept[k])] - mean(c)) / scale(c);
    }
    return out;
}

PcaLens pca_lens(const Eigen::MatrixXd& features) {
    if (features.rows() < 2) {
        throw RangeError("PCA lens needs at least 2 rows");
    }
    PcaLens lens;
    const double n = static_cast<double>(features.rows());
    std::vector<double> means;
    std::vector<double> scales;
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
        const double mean = features.col(c).mean();
        const double sd = std::sqrt((features.col(c).array() - mean).square().sum() / n);
        if (sd > 1e-12 * std::max(1.0, std::abs(mean))) {
            lens.kept.push_back(static_cast<int>(c));
            means.push_back(mean);
            scales.push_back(sd);
        }
    }
    if (lens.kept.empty()) {
        throw DomainError("every feature column is constant; PCA lens is undefined");
    }
    const auto k = static_cast<Eigen::Index>(lens.kept.size());
    lens.mean = Eigen::Map<Eigen::VectorXd>(means.data(), k);
    lens.scale = Eigen::Map<Eigen::VectorXd>(scales.data(), k);
    Eigen::MatrixXd Xs(features.rows(), k);
    for (Eigen::Index c = 0; c < k; ++c) {
        Xs.col(c) = (features.col(lens.kept[static_cast<std::size_t>(c)]).array() - lens.mean(c)) /
                    lens.scale(c);
    }
    const Eigen::MatrixXd C = Xs.transpose() * Xs / n;

    Eigen::VectorXd v(k);
    for (Eigen::Index c = 0; c < k; ++c) {
        v(c) = 1.0 + static_cast<double>(c) / static_cast<double>(k);
    }
    v.normalize();
    double lambda = v.dot(C * v);
    constexpr int max_iterations = 1000000;
    for (lens.iterations = 0; lens.iterations < max_iterations; ++lens.iterations) {
        Eigen::VectorXd w = C * v;
        lambda = v.dot(w);
        if ((w - lambda * v).norm() <= 1e-10 * std::max(1.0, lambda)) {
            break;
        }
        v = w / w.norm();
    }
    Eigen::Index largest = 0;
    v.cwiseAbs().maxCoeff(&largest);
    if (v(largest) < 0.0) {
        v = -v;
    }
    lens.loadings = v;
    lens.eigenvalue = lambda;
    lens.explained = lambda / C.trace();
    lens.projection = Xs * v;
    return lens;
}

} // namespace hierfcst::tda
