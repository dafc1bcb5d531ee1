#include <hierfcst/models/model.hpp>

#include <hierfcst/binary_io.hpp>
#include <hierfcst/error.hpp>
#include <hierfcst/rng.hpp>

#include <algorithm>

namespace hierfcst::models {
namespace {

template<typename... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template<typename... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

TreeParams tree_params(const ModelSpec& spec, const char* depth_key) {
    TreeParams p;
    p.max_depth = spec.int_param(depth_key);
    p.min_leaf = spec.int_param("min_leaf");
    p.feature_fraction = spec.has("feature_fraction") ? spec.param("feature_fraction") : 1.0;
    return p;
}

BoostParams boost_params(const ModelSpec& spec, std::uint64_t seed) {
    BoostParams p;
    p.rounds = spec.int_param("rounds");
    p.tree = tree_params(spec, "base_depth");
    p.learning_rate = spec.param("learning_rate");
    p.seed = seed;
    return p;
}

Regressor fit_column(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     std::size_t column) {
    const auto seed = [&] {
        const auto base = spec.has("seed") ? static_cast<std::uint64_t>(spec.param("seed")) : 0;
        return derive_seed(base, "target" + std::to_string(column));
    };
    switch (spec.family()) {
    case Family::ridge:
        return fit_ridge(X, y, spec.param("lambda"));
    case Family::lasso:
        return fit_lasso(X, y, spec.param("lambda"), spec.int_param("max_sweeps"), spec.param("tol"))
            .model;
    case Family::poisson:
        return fit_poisson(X, y, spec.param("lambda"), spec.int_param("max_iter"), spec.param("tol"))
            .model;
    case Family::kernel:
        return fit_kernel_ridge(X, y, spec.param("lambda"),
                                spec.has("bandwidth") ? spec.param("bandwidth") : 0.0,
                                spec.int_param("max_support"));
    case Family::rforest: {
        ForestParams p;
        p.trees = spec.int_param("trees");
        p.tree = tree_params(spec, "max_depth");
        p.bootstrap = spec.int_param("bootstrap") != 0;
        p.seed = seed();
        return fit_forest(X, y, p);
    }
    case Family::adaboost:
        return fit_adaboost_r2(X, y, boost_params(spec, seed()));
    case Family::ensemble:
        return fit_bagged_boost(X, y, spec.int_param("members"), boost_params(spec, seed()));
    case Family::arx:
        return fit_least_squares(X, y);
    case Family::trmf:
        break;
    }
    throw ConfigError("trmf is a panel model; fit it with trmf::factorize");
}

Eigen::VectorXd predict_column(const Regressor& learner, const Eigen::MatrixXd& X) {
    return std::visit([&](const auto& m) -> Eigen::VectorXd { return m.predict(X); }, learner);
}

} // namespace

FittedModel fit(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    if (X.rows() != Y.rows()) {
        throw DimensionError("X has " + std::to_string(X.rows()) + " rows but Y has " +
                             std::to_string(Y.rows()));
    }
    if (X.rows() < 1 || Y.cols() < 1) {
        throw DimensionError("fit needs at least one sample and one target");
    }
    if (!X.allFinite() || !Y.allFinite()) {
        throw DomainError("non-finite entries in training data");
    }
    FittedModel model;
    model.spec = spec;
    model.n_features = X.cols();
    model.info.samples = static_cast<std::size_t>(X.rows());
    for (Eigen::Index k = 0; k < Y.cols(); ++k) {
        model.learners.push_back(fit_column(spec, X, Y.col(k), static_cast<std::size_t>(k)));
    }
    return model;
}

Eigen::MatrixXd predict_raw(const FittedModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.n_features) {
        throw DimensionError("model expects " + std::to_string(model.n_features) +
                             " features, got " + std::to_string(X.cols()));
    }
    Eigen::MatrixXd out(X.rows(), model.n_targets());
    for (Eigen::Index k = 0; k < model.n_targets(); ++k) {
        out.col(k) = predict_column(model.learners[static_cast<std::size_t>(k)], X);
    }
    return out;
}

Eigen::MatrixXd predict(const FittedModel& model, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd out = predict_raw(model, X);
    if (model.transform) {
        out = out.unaryExpr([&](double v) { return model.transform->inverse(v); });
    }
    return out.cwiseMax(0.0);
}

Eigen::MatrixXd predict(const FittedModel& model, const Eigen::MatrixXd& X,
                        std::span<const preprocess::TargetTransform> row_transforms) {
    if (row_transforms.size() != static_cast<std::size_t>(X.rows())) {
        throw DimensionError("one transform per row is required");
    }
    Eigen::MatrixXd out = predict_raw(model, X);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const auto& t = row_transforms[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < out.cols(); ++k) {
            out(i, k) = t.inverse(out(i, k));
        }
    }
    return out.cwiseMax(0.0);
}

FittedModel fit_adaboost_r2(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, int rounds,
                            int base_depth, std::uint64_t seed) {
    const ModelSpec spec("adaboost", Family::adaboost,
                         {{"rounds", rounds},
                          {"base_depth", base_depth},
                          {"seed", static_cast<double>(seed)}});
    return fit(spec, X, Y);
}

// ---------------------------------------------------------------------------
// Model store serialization.

namespace {

void write_tree(BinaryWriter& w, const TreeModel& tree) {
    w.u64(tree.nodes.size());
    for (const auto& n : tree.nodes) {
        w.u32(static_cast<std::uint32_t>(n.feature));
        w.f64(n.threshold);
        w.u32(static_cast<std::uint32_t>(n.left));
        w.u32(static_cast<std::uint32_t>(n.right));
        w.f64(n.value);
    }
}

TreeModel read_tree(BinaryReader& r) {
    TreeModel tree;
    tree.nodes.resize(r.u64());
    for (auto& n : tree.nodes) {
        n.feature = static_cast<int>(r.u32());
        n.threshold = r.f64();
        n.left = static_cast<int>(r.u32());
        n.right = static_cast<int>(r.u32());
        n.value = r.f64();
    }
    return tree;
}

void write_boost(BinaryWriter& w, const BoostModel& m) {
    w.u64(m.trees.size());
    for (std::size_t k = 0; k < m.trees.size(); ++k) {
        write_tree(w, m.trees[k]);
        w.f64(m.weights[k]);
    }
}

BoostModel read_boost(BinaryReader& r) {
    BoostModel m;
    const auto n = r.u64();
    for (std::uint64_t k = 0; k < n; ++k) {
        m.trees.push_back(read_tree(r));
        m.weights.push_back(r.f64());
    }
    return m;
}

void write_learner(BinaryWriter& w, const Regressor& learner) {
    w.u32(static_cast<std::uint32_t>(learner.index()));
    std::visit(Overloaded{
                   [&](const LinearModel& m) {
                       w.vector(m.coef);
                       w.f64(m.intercept);
                       w.u8(m.log_link ? 1 : 0);
                   },
                   [&](const KernelModel& m) {
                       w.matrix(m.support);
                       w.vector(m.alpha);
                       w.f64(m.bandwidth);
                       w.f64(m.offset);
                   },
                   [&](const TreeModel& m) { write_tree(w, m); },
                   [&](const ForestModel& m) {
                       w.u64(m.trees.size());
                       for (const auto& t : m.trees) {
                           write_tree(w, t);
                       }
                   },
                   [&](const BoostModel& m) { write_boost(w, m); },
                   [&](const BaggedBoostModel& m) {
                       w.u64(m.members.size());
                       for (const auto& b : m.members) {
                           write_boost(w, b);
                       }
                   },
               },
               learner);
}

Regressor read_learner(BinaryReader& r) {
    switch (r.u32()) {
    case 0: {
        LinearModel m;
        m.coef = r.vector();
        m.intercept = r.f64();
        m.log_link = r.u8() != 0;
        return m;
    }
    case 1: {
        KernelModel m;
        m.support = r.matrix();
        m.alpha = r.vector();
        m.bandwidth = r.f64();
        m.offset = r.f64();
        return m;
    }
    case 2:
        return read_tree(r);
    case 3: {
        ForestModel m;
        const auto n = r.u64();
        for (std::uint64_t k = 0; k < n; ++k) {
            m.trees.push_back(read_tree(r));
        }
        return m;
    }
    case 4:
        return read_boost(r);
    case 5: {
        BaggedBoostModel m;
        const auto n = r.u64();
        for (std::uint64_t k = 0; k < n; ++k) {
            m.members.push_back(read_boost(r));
        }
        return m;
    }
    default:
        throw FormatError("unknown learner tag in model file");
    }
}

} // namespace

void save_model(const std::filesystem::path& path, const FittedModel& model) {
    BinaryWriter w;
    w.str(model.spec.name());
    w.str(std::string(to_string(model.spec.family())));
    w.str(std::string(preprocess::to_string(model.spec.transform())));
    w.str(std::string(to_string(model.spec.feeding())));
    w.u64(model.spec.params().size());
    for (const auto& [key, value] : model.spec.params()) {
        w.str(key);
        w.f64(value);
    }
    w.u64(static_cast<std::uint64_t>(model.n_features));
    w.u8(model.transform ? 1 : 0);
    if (model.transform) {
        w.u32(static_cast<std::uint32_t>(model.transform->kind()));
        w.f64(model.transform->min());
        w.f64(model.transform->max());
    }
    w.u64(model.info.samples);
    w.u32(static_cast<std::uint32_t>(model.info.periods));
    w.u8(model.arx ? 1 : 0);
    if (model.arx) {
        w.u32(static_cast<std::uint32_t>(model.arx->order));
        w.u32(static_cast<std::uint32_t>(model.arx->exog));
    }
    w.u64(model.learners.size());
    for (const auto& learner : model.learners) {
        write_learner(w, learner);
    }
    write_container(path, ContainerKind::model, w);
}

FittedModel load_model(const std::filesystem::path& path) {
    auto r = read_container(path, ContainerKind::model);
    const auto name = r.str();
    const auto family = parse_family(r.str());
    const auto transform = preprocess::parse_transform_kind(r.str());
    const auto feeding = parse_feeding(r.str());
    std::map<std::string, double> params;
    const auto n_params = r.u64();
    for (std::uint64_t k = 0; k < n_params; ++k) {
        auto key = r.str();
        params[key] = r.f64();
    }
    FittedModel model;
    model.spec = ModelSpec(name, family, params, transform, feeding);
    model.n_features = static_cast<Eigen::Index>(r.u64());
    if (r.u8() != 0) {
        const auto kind = static_cast<preprocess::TransformKind>(r.u32());
        const double lo = r.f64();
        const double hi = r.f64();
        model.transform = kind == preprocess::TransformKind::minmax
                              ? preprocess::TargetTransform::minmax(lo, hi)
                              : preprocess::TargetTransform(kind);
    }
    model.info.samples = r.u64();
    model.info.periods = static_cast<int>(r.u32());
    if (r.u8() != 0) {
        ArxLayout layout;
        layout.order = static_cast<int>(r.u32());
        layout.exog = static_cast<int>(r.u32());
        model.arx = layout;
    }
    const auto n_learners = r.u64();
    for (std::uint64_t k = 0; k < n_learners; ++k) {
        model.learners.push_back(read_learner(r));
    }
    if (!r.done()) {
        throw FormatError("trailing bytes in model file");
    }
    return model;
}

} // namespace hierfcst::models
