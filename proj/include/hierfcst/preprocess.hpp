#pragma once

#include <hierfcst/dataset.hpp>

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hierfcst::preprocess {

//! Position (s, h) inside a Diagonal Feeding window: row offset s from the
//! anchor period and lead time h.
struct CellIndex {
    int row = 0;
    int lead = 0;
    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

//! One Diagonal Feeding sample. Cells with s <= h are known at the end of the
//! anchor period and form x; cells with s > h are future and form y. Both are
//! enumerated row-major.
struct SupervisedFrame {
    std::size_t item = 0;
    int anchor = 0;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<CellIndex> x_index;
    std::vector<CellIndex> y_index;
};

//! x positions for a (leads + 1) x leads window.
std::vector<CellIndex> known_layout(int leads);
//! y positions for a (leads + 1) x leads window.
std::vector<CellIndex> target_layout(int leads);
//! y positions of the earliest future volumes q_{t+1}^0, q_{t+2}^1, ...
std::vector<std::size_t> diagonal_target_positions(int leads);

//! Throws ConfigError unless window == leads + 1 and leads >= 1.
void validate_window(int window, int leads);

//! Reshapes the window anchored at `anchor`. Requires anchor + window - 1 < T.
SupervisedFrame diagonal_feed(const dataset::PreorderTensor& tensor, std::size_t item, int anchor,
                              int window, int leads);

//! The x part alone, for forecasting from the anchor period. Cells whose
//! delivery period lies beyond the tensor are not recorded yet and read as 0.
std::vector<double> known_inputs(const dataset::PreorderTensor& tensor, std::size_t item,
                                 int anchor, int leads);

enum class TransformKind { identity, log1p, minmax };

TransformKind parse_transform_kind(std::string_view name);
std::string_view to_string(TransformKind kind);

//! Invertible elementwise target transform.
class TargetTransform {
public:
    TargetTransform() = default;
    explicit TargetTransform(TransformKind kind) : kind_(kind) {}

    static TargetTransform minmax(double min, double max);

    //! Fits min/max on the given values (no-op for identity and log1p).
    void fit(std::span<const double> values);

    double forward(double v) const;
    double inverse(double v) const;

    TransformKind kind() const { return kind_; }
    bool fitted() const { return kind_ != TransformKind::minmax || fitted_; }
    double min() const { return min_; }
    double max() const { return max_; }

    friend bool operator==(const TargetTransform&, const TargetTransform&) = default;

private:
    TransformKind kind_ = TransformKind::identity;
    double min_ = 0.0;
    double max_ = 0.0;
    bool fitted_ = false;
};

//! Fits a transform of the given kind on every cell of periods [0, periods).
TargetTransform fit_item_transform(const dataset::PreorderTensor& tensor, std::size_t item,
                                   TransformKind kind, int periods);

struct ItemScope {
    bool all = true;
    std::size_t item = 0;

    static ItemScope one_item(std::size_t i) { return {false, i}; }
    static ItemScope all_items() { return {true, 0}; }
};

struct SampleMeta {
    std::size_t item = 0;
    int anchor = 0;
};

//! Stacked Diagonal Feeding samples in transformed space.
struct TrainingSet {
    Eigen::MatrixXd X;
    Eigen::MatrixXd Y;
    std::vector<SampleMeta> index;
    std::vector<std::size_t> items;            //!< items in scope
    std::vector<TargetTransform> transforms;   //!< parallel to items
    int window = 0;
    int leads = 0;
    int periods = 0; //!< periods the samples (and minmax fits) were drawn from

    //! Transform fitted for the given tensor item index.
    const TargetTransform& transform_for(std::size_t item) const;
};

//! One row per (item in scope, anchor) with anchor + window - 1 < periods.
//! `periods` < 0 means all tensor periods.
TrainingSet build_training_set(const dataset::PreorderTensor& tensor, ItemScope scope, int window,
                               int leads, TransformKind kind, int periods = -1);

void save_training_set(const std::filesystem::path& path, const TrainingSet& set,
                       const std::vector<std::string>& item_ids);
TrainingSet load_training_set(const std::filesystem::path& path,
                              std::vector<std::string>* item_ids = nullptr);

} // namespace hierfcst::preprocess
