#include <hierfcst/models/tree.hpp>

#include <hierfcst/error.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hierfcst::models {
namespace {

struct Sample {
    double x;
    double y;
    double w;
    Eigen::Index row;
};

struct Stats {
    double weight = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;
    bool constant = true; //!< every target in the node is equal
};

// Accumulates in (y, w) order so the result does not depend on row order.
Stats node_stats(const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                 const std::vector<Eigen::Index>& rows) {
    std::vector<std::pair<double, double>> yw;
    yw.reserve(rows.size());
    for (const auto r : rows) {
        yw.emplace_back(y(r), w(r));
    }
    std::sort(yw.begin(), yw.end());
    Stats s;
    for (const auto& [yy, ww] : yw) {
        s.weight += ww;
        s.sum += ww * yy;
        s.sum_sq += ww * yy * yy;
    }
    s.constant = yw.empty() || yw.front().first == yw.back().first;
    return s;
}

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                const TreeParams& params, Rng* rng)
        : X_(X), y_(y), w_(w), params_(params), rng_(rng) {}

    TreeModel build(std::vector<Eigen::Index> rows) {
        grow(std::move(rows), 0);
        return std::move(tree_);
    }

private:
    std::vector<Eigen::Index> candidate_features() {
        std::vector<Eigen::Index> features(static_cast<std::size_t>(X_.cols()));
        std::iota(features.begin(), features.end(), 0);
        if (params_.feature_fraction >= 1.0 || features.size() <= 1) {
            return features;
        }
        if (rng_ == nullptr) {
            throw StateError("feature subsampling requires a random source");
        }
        const auto k = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::lround(params_.feature_fraction *
                                                    static_cast<double>(features.size()))));
        for (std::size_t i = 0; i < k; ++i) {
            const auto j = i + rng_->below(features.size() - i);
            std::swap(features[i], features[j]);
        }
        features.resize(k);
        std::sort(features.begin(), features.end());
        return features;
    }

    int grow(std::vector<Eigen::Index> rows, int depth) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        const Stats stats = node_stats(y_, w_, rows);
        // A pure node keeps its target exactly instead of a rounded weighted mean.
        tree_.nodes[static_cast<std::size_t>(id)].value =
            stats.constant && !rows.empty() ? y_(rows.front())
            : stats.weight > 0.0            ? stats.sum / stats.weight
                                            : 0.0;

        const auto count = static_cast<int>(rows.size());
        if (depth >= params_.max_depth || count < 2 * params_.min_leaf || stats.weight <= 0.0) {
            return id;
        }
        const double parent_sse = stats.sum_sq - stats.sum * stats.sum / stats.weight;
        if (stats.constant || !(parent_sse > 1e-14 * stats.sum_sq)) {
            return id;
        }
        const double parent_score = stats.sum * stats.sum / stats.weight;

        double best_score = parent_score + 1e-12 * parent_sse;
        Eigen::Index best_feature = -1;
        double best_threshold = 0.0;
        std::vector<Sample> samples(rows.size());
        for (const auto f : candidate_features()) {
            for (std::size_t k = 0; k < rows.size(); ++k) {
                const auto r = rows[k];
                samples[k] = {X_(r, f), y_(r), w_(r), r};
            }
            std::sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) {
                if (a.x != b.x) {
                    return a.x < b.x;
                }
                if (a.y != b.y) {
                    return a.y < b.y;
                }
                return a.w < b.w;
            });
            double left_w = 0.0;
            double left_s = 0.0;
            for (int i = 0; i + 1 < count; ++i) {
                const auto& s = samples[static_cast<std::size_t>(i)];
                left_w += s.w;
                left_s += s.w * s.y;
                const auto& next = samples[static_cast<std::size_t>(i) + 1];
                if (!(s.x < next.x) || i + 1 < params_.min_leaf || count - i - 1 < params_.min_leaf) {
                    continue;
                }
                const double right_w = stats.weight - left_w;
                if (left_w <= 0.0 || right_w <= 0.0) {
                    continue;
                }
                const double right_s = stats.sum - left_s;
                const double score = left_s * left_s / left_w + right_s * right_s / right_w;
                if (score > best_score) {
                    best_score = score;
                    best_feature = f;
                    best_threshold = s.x + 0.5 * (next.x - s.x);
                    if (!(best_threshold < next.x)) {
                        best_threshold = s.x;
                    }
                }
            }
        }
        if (best_feature < 0) {
            return id;
        }
        std::vector<Eigen::Index> left;
        std::vector<Eigen::Index> right;
        for (const auto r : rows) {
            (X_(r, best_feature) <= best_threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.feature = static_cast<int>(best_feature);
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    const Eigen::MatrixXd& X_;
    const Eigen::VectorXd& y_;
    const Eigen::VectorXd& w_;
    TreeParams params_;
    Rng* rng_;
    TreeModel tree_;
};

void check_training(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size() || X.rows() < 1) {
        throw DimensionError("tree training needs matching, non-empty X and y");
    }
    if (!X.allFinite() || !y.allFinite()) {
        throw DomainError("non-finite entries in training data");
    }
}

double weighted_median(std::vector<std::pair<double, double>>& values) {
    std::stable_sort(values.begin(), values.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    double total = 0.0;
    for (const auto& v : values) {
        total += v.second;
    }
    double cumulative = 0.0;
    for (const auto& v : values) {
        cumulative += v.second;
        if (cumulative >= 0.5 * total) {
            return v.first;
        }
    }
    return values.back().first;
}

} // namespace

double TreeModel::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
        const auto& node = nodes[static_cast<std::size_t>(id)];
        id = x(node.feature) <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(id)].value;
}

Eigen::VectorXd TreeModel::predict(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        out(i) = predict_row(X.row(i));
    }
    return out;
}

int TreeModel::depth() const {
    std::vector<int> level(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, level[i]);
        if (nodes[i].feature >= 0) {
            level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
            level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
        }
    }
    return deepest;
}

bool operator==(const TreeModel& a, const TreeModel& b) {
    if (a.nodes.size() != b.nodes.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        const auto& p = a.nodes[i];
        const auto& q = b.nodes[i];
        if (p.feature != q.feature || p.threshold != q.threshold || p.left != q.left ||
            p.right != q.right || p.value != q.value) {
            return false;
        }
    }
    return true;
}

TreeModel fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& weights, const std::vector<Eigen::Index>& rows,
                   const TreeParams& params, Rng* rng) {
    check_training(X, y);
    if (weights.size() != y.size()) {
        throw DimensionError("one weight per row is required");
    }
    if (rows.empty()) {
        throw DimensionError("tree needs at least one training row");
    }
    if (params.max_depth < 0 || params.min_leaf < 1) {
        throw ConfigError("tree needs max_depth >= 0 and min_leaf >= 1");
    }
    return TreeBuilder(X, y, weights, params, rng).build(rows);
}

TreeModel fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeParams& params) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(X.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    Rng rng(0);
    return fit_tree(X, y, Eigen::VectorXd::Ones(y.size()), rows, params, &rng);
}

Eigen::VectorXd ForestModel::predict(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
    for (const auto& tree : trees) {
        out += tree.predict(X);
    }
    return out / static_cast<double>(trees.size());
}

ForestModel fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const ForestParams& params,
                       const std::optional<std::vector<std::vector<Eigen::Index>>>& resample) {
    check_training(X, y);
    if (params.trees < 1) {
        throw ConfigError("forest needs at least one tree");
    }
    if (resample && resample->size() != static_cast<std::size_t>(params.trees)) {
        throw DimensionError("one resample row list per tree is required");
    }
    const auto n = static_cast<std::size_t>(X.rows());
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(y.size());
    ForestModel forest;
    for (int t = 0; t < params.trees; ++t) {
        Rng rng(derive_seed(params.seed, "tree" + std::to_string(t)));
        std::vector<Eigen::Index> rows;
        if (resample) {
            rows = (*resample)[static_cast<std::size_t>(t)];
        } else if (params.bootstrap) {
            rows.resize(n);
            for (auto& r : rows) {
                r = static_cast<Eigen::Index>(rng.below(n));
            }
        } else {
            rows.resize(n);
            std::iota(rows.begin(), rows.end(), 0);
        }
        forest.trees.push_back(fit_tree(X, y, ones, rows, params.tree, &rng));
    }
    return forest;
}

Eigen::VectorXd BoostModel::staged_predict(const Eigen::MatrixXd& X, std::size_t rounds) const {
    rounds = std::min(rounds, trees.size());
    if (rounds == 0) {
        throw StateError("empty boosting ensemble");
    }
    std::vector<Eigen::VectorXd> per_tree;
    per_tree.reserve(rounds);
    for (std::size_t m = 0; m < rounds; ++m) {
        per_tree.push_back(trees[m].predict(X));
    }
    Eigen::VectorXd out(X.rows());
    std::vector<std::pair<double, double>> values(rounds);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (std::size_t m = 0; m < rounds; ++m) {
            values[m] = {per_tree[m](i), weights[m]};
        }
        out(i) = weighted_median(values);
    }
    return out;
}

Eigen::VectorXd BoostModel::predict(const Eigen::MatrixXd& X) const {
    return staged_predict(X, trees.size());
}

BoostModel fit_adaboost_r2(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const BoostParams& params,
                           const std::optional<Eigen::VectorXd>& initial_weights) {
    check_training(X, y);
    if (params.rounds < 1) {
        throw ConfigError("AdaBoost.R2 needs at least one round");
    }
    if (params.learning_rate <= 0.0) {
        throw ConfigError("AdaBoost.R2 learning rate must be > 0");
    }
    Eigen::VectorXd w = initial_weights ? *initial_weights : Eigen::VectorXd::Ones(y.size());
    if (w.size() != y.size() || (w.array() < 0.0).any() || w.sum() <= 0.0) {
        throw DomainError("initial weights must be non-negative with positive total");
    }
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (w(i) > 0.0) {
            rows.push_back(i);
        }
    }
    w /= w.sum();

    Rng rng(derive_seed(params.seed, "adaboost"));
    BoostModel model;
    for (int m = 0; m < params.rounds; ++m) {
        auto tree = fit_tree(X, y, w, rows, params.tree, &rng);
        double max_error = 0.0;
        Eigen::VectorXd error = Eigen::VectorXd::Zero(y.size());
        for (const auto r : rows) {
            error(r) = std::abs(tree.predict_row(X.row(r)) - y(r));
            max_error = std::max(max_error, error(r));
        }
        if (max_error <= 0.0) {
            model.trees.push_back(std::move(tree));
            model.weights.push_back(1.0);
            break;
        }
        double average_loss = 0.0;
        for (const auto r : rows) {
            average_loss += w(r) * error(r) / max_error;
        }
        if (average_loss <= 0.0) {
            model.trees.push_back(std::move(tree));
            model.weights.push_back(1.0);
            break;
        }
        if (average_loss >= 0.5) {
            if (model.trees.empty()) {
                model.trees.push_back(std::move(tree));
                model.weights.push_back(1.0);
            }
            break;
        }
        const double beta = average_loss / (1.0 - average_loss);
        model.trees.push_back(std::move(tree));
        model.weights.push_back(params.learning_rate * std::log(1.0 / beta));
        if (m + 1 == params.rounds) {
            break;
        }
        for (const auto r : rows) {
            w(r) *= std::pow(beta, (1.0 - error(r) / max_error) * params.learning_rate);
        }
        const double total = w.sum();
        if (!(total > 0.0) || !std::isfinite(total)) {
            break;
        }
        w /= total;
    }
    return model;
}

Eigen::VectorXd BaggedBoostModel::predict(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
    for (const auto& m : members) {
        out += m.predict(X);
    }
    return out / static_cast<double>(members.size());
}

BaggedBoostModel fit_bagged_boost(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int members,
                                  const BoostParams& params) {
    check_training(X, y);
    if (members < 1) {
        throw ConfigError("bagged ensemble needs at least one member");
    }
    const auto n = static_cast<std::uint64_t>(y.size());
    BaggedBoostModel model;
    for (int k = 0; k < members; ++k) {
        Rng rng(derive_seed(params.seed, "bag" + std::to_string(k)));
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(y.size());
        for (std::uint64_t i = 0; i < n; ++i) {
            counts(static_cast<Eigen::Index>(rng.below(n))) += 1.0;
        }
        BoostParams member = params;
        member.seed = derive_seed(params.seed, "member" + std::to_string(k));
        model.members.push_back(fit_adaboost_r2(X, y, member, counts));
    }
    return model;
}

} // namespace hierfcst::models
