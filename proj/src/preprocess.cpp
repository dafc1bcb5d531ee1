#include <hierfcst/preprocess.hpp>

#include <hierfcst/binary_io.hpp>
#include <hierfcst/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hierfcst::preprocess {

std::vector<CellIndex> known_layout(int leads) {
    std::vector<CellIndex> out;
    for (int s = 0; s <= leads; ++s) {
        for (int h = 0; h < leads; ++h) {
            if (s <= h) {
                out.push_back({s, h});
            }
        }
    }
    return out;
}

std::vector<CellIndex> target_layout(int leads) {
    std::vector<CellIndex> out;
    for (int s = 0; s <= leads; ++s) {
        for (int h = 0; h < leads; ++h) {
            if (s > h) {
                out.push_back({s, h});
            }
        }
    }
    return out;
}

std::vector<std::size_t> diagonal_target_positions(int leads) {
    const auto layout = target_layout(leads);
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < layout.size(); ++k) {
        if (layout[k].row == layout[k].lead + 1) {
            out.push_back(k);
        }
    }
    return out;
}

void validate_window(int window, int leads) {
    if (leads < 1) {
        throw ConfigError("Diagonal Feeding needs at least one lead time");
    }
    if (window != leads + 1) {
        throw ConfigError("window must equal leads + 1 (got window " + std::to_string(window) +
                          ", leads " + std::to_string(leads) + ")");
    }
}

SupervisedFrame diagonal_feed(const dataset::PreorderTensor& tensor, std::size_t item, int anchor,
                              int window, int leads) {
    validate_window(window, leads);
    if (leads > tensor.max_lead()) {
        throw RangeError("window uses " + std::to_string(leads) + " leads but tensor has " +
                         std::to_string(tensor.max_lead()));
    }
    if (anchor < 0 || anchor + window - 1 >= tensor.periods()) {
        throw RangeError("window at anchor " + std::to_string(anchor) + " exceeds " +
                         std::to_string(tensor.periods()) + " periods");
    }
    tensor.check_cell(item, anchor, 0);

    SupervisedFrame frame;
    frame.item = item;
    frame.anchor = anchor;
    frame.x_index = known_layout(leads);
    frame.y_index = target_layout(leads);
    frame.x.reserve(frame.x_index.size());
    frame.y.reserve(frame.y_index.size());
    for (const auto& c : frame.x_index) {
        frame.x.push_back(tensor.value(item, anchor + c.row, c.lead));
    }
    for (const auto& c : frame.y_index) {
        frame.y.push_back(tensor.value(item, anchor + c.row, c.lead));
    }
    return frame;
}

std::vector<double> known_inputs(const dataset::PreorderTensor& tensor, std::size_t item,
                                 int anchor, int leads) {
    if (leads < 1 || leads > tensor.max_lead()) {
        throw RangeError("invalid lead count " + std::to_string(leads));
    }
    if (anchor < 0 || anchor >= tensor.periods()) {
        throw RangeError("anchor " + std::to_string(anchor) + " outside tensor");
    }
    tensor.check_cell(item, anchor, 0);
    std::vector<double> x;
    for (const auto& c : known_layout(leads)) {
        const int t = anchor + c.row;
        x.push_back(t < tensor.periods() ? tensor.value(item, t, c.lead) : 0.0);
    }
    return x;
}

TransformKind parse_transform_kind(std::string_view name) {
    if (name == "none" || name == "identity") {
        return TransformKind::identity;
    }
    if (name == "log" || name == "log1p") {
        return TransformKind::log1p;
    }
    if (name == "minmax") {
        return TransformKind::minmax;
    }
    throw ConfigError("unknown transform '" + std::string(name) + "' (expected none, log or minmax)");
}

std::string_view to_string(TransformKind kind) {
    switch (kind) {
    case TransformKind::identity:
        return "none";
    case TransformKind::log1p:
        return "log";
    case TransformKind::minmax:
        return "minmax";
    }
    return "unknown";
}

TargetTransform TargetTransform::minmax(double min, double max) {
    if (!(max >= min)) {
        throw DomainError("minmax requires max >= min");
    }
    TargetTransform t(TransformKind::minmax);
    t.min_ = min;
    t.max_ = max;
    t.fitted_ = true;
    return t;
}

void TargetTransform::fit(std::span<const double> values) {
    if (kind_ != TransformKind::minmax) {
        return;
    }
    if (values.empty()) {
        throw DomainError("cannot fit minmax on an empty sample");
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    min_ = *lo;
    max_ = *hi;
    fitted_ = true;
}

double TargetTransform::forward(double v) const {
    switch (kind_) {
    case TransformKind::identity:
        return v;
    case TransformKind::log1p:
        if (!(v > -1.0 + std::numeric_limits<double>::epsilon())) {
            throw DomainError("log transform undefined for " + std::to_string(v));
        }
        return std::log1p(v);
    case TransformKind::minmax:
        if (!fitted_) {
            throw StateError("minmax transform used before fit");
        }
        if (max_ == min_) {
            return 0.0;
        }
        return (v - min_) / (max_ - min_);
    }
    return v;
}

double TargetTransform::inverse(double v) const {
    switch (kind_) {
    case TransformKind::identity:
        return v;
    case TransformKind::log1p:
        return std::expm1(v);
    case TransformKind::minmax:
        if (!fitted_) {
            throw StateError("minmax transform inverted before fit");
        }
        return min_ + v * (max_ - min_);
    }
    return v;
}

TargetTransform fit_item_transform(const dataset::PreorderTensor& tensor, std::size_t item,
                                   TransformKind kind, int periods) {
    TargetTransform transform(kind);
    if (kind == TransformKind::minmax) {
        std::vector<double> cells;
        for (int t = 0; t < periods; ++t) {
            for (int h = 0; h < tensor.max_lead(); ++h) {
                cells.push_back(tensor.value(item, t, h));
            }
        }
        transform.fit(cells);
    }
    return transform;
}

const TargetTransform& TrainingSet::transform_for(std::size_t item) const {
    const auto it = std::find(items.begin(), items.end(), item);
    if (it == items.end()) {
        throw RangeError("item " + std::to_string(item) + " not in training scope");
    }
    return transforms[static_cast<std::size_t>(it - items.begin())];
}

TrainingSet build_training_set(const dataset::PreorderTensor& tensor, ItemScope scope, int window,
                               int leads, TransformKind kind, int periods) {
    validate_window(window, leads);
    if (periods < 0) {
        periods = tensor.periods();
    }
    if (periods > tensor.periods()) {
        throw RangeError("training periods exceed tensor length");
    }
    TrainingSet set;
    set.window = window;
    set.leads = leads;
    set.periods = periods;
    if (scope.all) {
        for (std::size_t i = 0; i < tensor.n_items(); ++i) {
            set.items.push_back(i);
        }
    } else {
        tensor.check_cell(scope.item, 0, 0);
        set.items.push_back(scope.item);
    }
    if (set.items.empty()) {
        throw RangeError("empty item scope");
    }
    const int anchors = periods - window + 1;
    if (anchors < 1) {
        throw RangeError("need at least " + std::to_string(window) + " periods for one window, got " +
                         std::to_string(periods));
    }
    const auto n_x = known_layout(leads).size();
    const auto n_y = target_layout(leads).size();
    const auto rows = static_cast<Eigen::Index>(set.items.size() * static_cast<std::size_t>(anchors));
    set.X.resize(rows, static_cast<Eigen::Index>(n_x));
    set.Y.resize(rows, static_cast<Eigen::Index>(n_y));
    set.index.reserve(static_cast<std::size_t>(rows));

    Eigen::Index row = 0;
    for (const auto item : set.items) {
        const auto transform = fit_item_transform(tensor, item, kind, periods);
        set.transforms.push_back(transform);
        for (int anchor = 0; anchor < anchors; ++anchor) {
            const auto frame = diagonal_feed(tensor, item, anchor, window, leads);
            for (std::size_t k = 0; k < n_x; ++k) {
                set.X(row, static_cast<Eigen::Index>(k)) = transform.forward(frame.x[k]);
            }
            for (std::size_t k = 0; k < n_y; ++k) {
                set.Y(row, static_cast<Eigen::Index>(k)) = transform.forward(frame.y[k]);
            }
            set.index.push_back({item, anchor});
            ++row;
        }
    }
    return set;
}

void save_training_set(const std::filesystem::path& path, const TrainingSet& set,
                       const std::vector<std::string>& item_ids) {
    BinaryWriter w;
    w.u32(static_cast<std::uint32_t>(set.window));
    w.u32(static_cast<std::uint32_t>(set.leads));
    w.u32(static_cast<std::uint32_t>(set.periods));
    w.u64(set.items.size());
    for (std::size_t k = 0; k < set.items.size(); ++k) {
        w.u64(set.items[k]);
        w.str(set.items[k] < item_ids.size() ? item_ids[set.items[k]] : std::string());
        const auto& t = set.transforms[k];
        w.u32(static_cast<std::uint32_t>(t.kind()));
        w.u8(t.fitted() ? 1 : 0);
        w.f64(t.min());
        w.f64(t.max());
    }
    w.matrix(set.X);
    w.matrix(set.Y);
    w.u64(set.index.size());
    for (const auto& m : set.index) {
        w.u64(m.item);
        w.u32(static_cast<std::uint32_t>(m.anchor));
    }
    write_container(path, ContainerKind::supervised, w);
}

TrainingSet load_training_set(const std::filesystem::path& path,
                              std::vector<std::string>* item_ids) {
    auto r = read_container(path, ContainerKind::supervised);
    TrainingSet set;
    set.window = static_cast<int>(r.u32());
    set.leads = static_cast<int>(r.u32());
    set.periods = static_cast<int>(r.u32());
    const auto n = r.u64();
    std::vector<std::string> ids;
    for (std::uint64_t k = 0; k < n; ++k) {
        set.items.push_back(r.u64());
        ids.push_back(r.str());
        const auto kind = static_cast<TransformKind>(r.u32());
        const bool fitted = r.u8() != 0;
        const double lo = r.f64();
        const double hi = r.f64();
        if (kind == TransformKind::minmax && fitted) {
            set.transforms.push_back(TargetTransform::minmax(lo, hi));
        } else {
            set.transforms.emplace_back(kind);
        }
    }
    set.X = r.matrix();
    set.Y = r.matrix();
    const auto rows = r.u64();
    for (std::uint64_t k = 0; k < rows; ++k) {
        SampleMeta m;
        m.item = r.u64();
        m.anchor = static_cast<int>(r.u32());
        set.index.push_back(m);
    }
    if (!r.done()) {
        throw FormatError("trailing bytes in supervised cache");
    }
    if (item_ids != nullptr) {
        *item_ids = std::move(ids);
    }
    return set;
}

} // namespace hierfcst::preprocess
