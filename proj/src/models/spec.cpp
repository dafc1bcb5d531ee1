#include <hierfcst/models/spec.hpp>

#include <hierfcst/error.hpp>

#include <cmath>
#include <set>

namespace hierfcst::models {
namespace {

const std::set<std::string, std::less<>> kOutOfScope = {
    "bsts", "bsts_classifier", "bsts-classifier", "nn", "neural_network", "svr", "arima", "arimax"};

// Keys accepted in addition to the family defaults.
std::set<std::string> optional_keys(Family family) {
    std::set<std::string> keys = {"feature_window"};
    if (family == Family::kernel) {
        keys.insert("bandwidth");
    }
    return keys;
}

void require(bool ok, const std::string& spec, const std::string& what) {
    if (!ok) {
        throw ConfigError("spec '" + spec + "': " + what);
    }
}

bool is_integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

} // namespace

Family parse_family(std::string_view name) {
    static const std::map<std::string, Family, std::less<>> known = {
        {"ridge", Family::ridge},       {"lasso", Family::lasso},
        {"poisson", Family::poisson},   {"kernel", Family::kernel},
        {"rforest", Family::rforest},   {"rf", Family::rforest},
        {"adaboost", Family::adaboost}, {"ensemble", Family::ensemble},
        {"arx", Family::arx},           {"trmf", Family::trmf},
        {"mf", Family::trmf},
    };
    if (const auto it = known.find(name); it != known.end()) {
        return it->second;
    }
    if (kOutOfScope.count(name) != 0) {
        throw OutOfScopeError(
            "model family '" + std::string(name) +
            "' appears in the benchmark's Models list but is out of scope here "
            "(out of scope: BSTS, BSTS classifier, neural networks, SVR, full ARIMA/ARIMAX; "
            "use 'arx' for the ARIMAX surrogate)");
    }
    throw ConfigError("unknown model family '" + std::string(name) + "'");
}

std::string_view to_string(Family family) {
    switch (family) {
    case Family::ridge:
        return "ridge";
    case Family::lasso:
        return "lasso";
    case Family::poisson:
        return "poisson";
    case Family::kernel:
        return "kernel";
    case Family::rforest:
        return "rforest";
    case Family::adaboost:
        return "adaboost";
    case Family::ensemble:
        return "ensemble";
    case Family::arx:
        return "arx";
    case Family::trmf:
        return "trmf";
    }
    return "unknown";
}

std::string display_name(Family family) {
    switch (family) {
    case Family::ridge:
        return "Ridge";
    case Family::lasso:
        return "Lasso";
    case Family::poisson:
        return "Poisson";
    case Family::kernel:
        return "Kernel";
    case Family::rforest:
        return "RF";
    case Family::adaboost:
        return "Adaboost";
    case Family::ensemble:
        return "Ensemble (bagged boosted trees)";
    case Family::arx:
        return "ARX (ARIMAX surrogate)";
    case Family::trmf:
        return "MF";
    }
    return "unknown";
}

FeedingMode parse_feeding(std::string_view name) {
    if (name == "none") {
        return FeedingMode::none;
    }
    if (name == "df_one_by_one" || name == "one_by_one" || name == "1:1") {
        return FeedingMode::df_one_by_one;
    }
    if (name == "df_all_items" || name == "all_items" || name == "ai") {
        return FeedingMode::df_all_items;
    }
    throw ConfigError("unknown feeding mode '" + std::string(name) +
                      "' (expected none, df_one_by_one or df_all_items)");
}

std::string_view to_string(FeedingMode mode) {
    switch (mode) {
    case FeedingMode::none:
        return "none";
    case FeedingMode::df_one_by_one:
        return "df_one_by_one";
    case FeedingMode::df_all_items:
        return "df_all_items";
    }
    return "unknown";
}

std::map<std::string, double> default_params(Family family) {
    switch (family) {
    case Family::ridge:
        return {{"lambda", 1.0}};
    case Family::lasso:
        return {{"lambda", 0.1}, {"max_sweeps", 1000}, {"tol", 1e-10}};
    case Family::poisson:
        return {{"lambda", 1e-4}, {"max_iter", 100}, {"tol", 1e-10}};
    case Family::kernel:
        return {{"lambda", 1e-3}, {"max_support", 1500}};
    case Family::rforest:
        return {{"trees", 100},  {"max_depth", 8},  {"min_leaf", 2},
                {"feature_fraction", 1.0}, {"bootstrap", 1}, {"seed", 0}};
    case Family::adaboost:
        return {{"rounds", 50}, {"base_depth", 3}, {"learning_rate", 1.0}, {"min_leaf", 2},
                {"seed", 0}};
    case Family::ensemble:
        return {{"members", 10}, {"rounds", 20},         {"base_depth", 3},
                {"learning_rate", 1.0}, {"min_leaf", 2}, {"seed", 0}};
    case Family::arx:
        return {{"order", 1}};
    case Family::trmf:
        return {{"rank", 4},       {"ar_order", 2},  {"lambda_f", 1e-3},    {"lambda_z", 1e-3},
                {"lambda_ar", 1.0}, {"sweeps", 200}, {"tol", 1e-7},         {"seed", 0},
                {"density_floor", 0.25}, {"density_override", 0}};
    }
    return {};
}

ModelSpec::ModelSpec(std::string name, Family family, std::map<std::string, double> params,
                     preprocess::TransformKind transform, FeedingMode feeding)
    : name_(std::move(name)), family_(family), params_(default_params(family)),
      transform_(transform), feeding_(feeding) {
    require(!name_.empty(), "<unnamed>", "spec name must not be empty");
    const auto optional = optional_keys(family);
    for (const auto& [key, value] : params) {
        require(params_.count(key) != 0 || optional.count(key) != 0, name_,
                "unknown hyperparameter '" + key + "' for family " + std::string(to_string(family)));
        require(std::isfinite(value), name_, "hyperparameter '" + key + "' must be finite");
        params_[key] = value;
    }

    for (const char* key : {"lambda", "lambda_f", "lambda_z", "lambda_ar"}) {
        if (has(key)) {
            require(param(key) >= 0.0, name_, std::string(key) + " must be >= 0");
        }
    }
    for (const char* key : {"order", "ar_order", "rank", "trees", "rounds", "members", "min_leaf",
                            "max_sweeps", "max_iter", "sweeps", "max_support"}) {
        if (has(key)) {
            require(is_integral(param(key)) && param(key) >= 1.0, name_,
                    std::string(key) + " must be an integer >= 1");
        }
    }
    for (const char* key : {"max_depth", "base_depth", "seed", "bootstrap", "feature_window",
                            "density_override"}) {
        if (has(key)) {
            require(is_integral(param(key)) && param(key) >= 0.0, name_,
                    std::string(key) + " must be a non-negative integer");
        }
    }
    if (has("bandwidth")) {
        require(param("bandwidth") > 0.0, name_, "bandwidth must be > 0");
    }
    if (has("feature_fraction")) {
        require(param("feature_fraction") > 0.0 && param("feature_fraction") <= 1.0, name_,
                "feature_fraction must lie in (0, 1]");
    }
    if (has("learning_rate")) {
        require(param("learning_rate") > 0.0, name_, "learning_rate must be > 0");
    }
    if (has("tol")) {
        require(param("tol") > 0.0, name_, "tol must be > 0");
    }
    if (has("density_floor")) {
        require(param("density_floor") >= 0.0 && param("density_floor") <= 1.0, name_,
                "density_floor must lie in [0, 1]");
    }
    if (has("feature_window")) {
        require(param("feature_window") >= 2.0, name_, "feature_window must be >= 2");
    }
    require(family_ != Family::trmf || feeding_ == FeedingMode::none, name_,
            "trmf factorizes the item panel directly and takes no Diagonal Feeding");
}

double ModelSpec::param(const std::string& key) const {
    const auto it = params_.find(key);
    if (it == params_.end()) {
        throw ConfigError("spec '" + name_ + "' has no hyperparameter '" + key + "'");
    }
    return it->second;
}

int ModelSpec::int_param(const std::string& key) const { return static_cast<int>(param(key)); }

} // namespace hierfcst::models
