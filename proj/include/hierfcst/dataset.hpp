#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hierfcst::dataset {

//! One CSV row: quantity ordered `lead_time` periods ahead for delivery by
//! the end of `delivery_period`.
struct PreorderRecord {
    std::string item_id;
    int delivery_period = 0;
    int lead_time = 0;
    double quantity = 0.0;
};

//! Dense item x delivery-period x lead-time cube of pre-order quantities.
//!
//! Cells without a record hold 0 and are not marked as observed. The cell
//! (i, t, h) becomes known at the end of period t - h.
class PreorderTensor {
public:
    PreorderTensor() = default;
    PreorderTensor(std::vector<std::string> items, int periods, int max_lead);

    std::size_t n_items() const { return items_.size(); }
    int periods() const { return periods_; }
    int max_lead() const { return max_lead_; }
    const std::vector<std::string>& items() const { return items_; }

    double value(std::size_t item, int t, int h) const { return values_[offset(item, t, h)]; }
    bool observed(std::size_t item, int t, int h) const { return mask_[offset(item, t, h)] != 0; }

    //! Stores a quantity and marks the cell observed. Throws DomainError for
    //! negative or non-finite quantities.
    void set(std::size_t item, int t, int h, double quantity);

    //! Overwrites the quantity keeping the observed flag.
    void assign(std::size_t item, int t, int h, double quantity);

    //! q_t^h for t = 0..T-1.
    std::vector<double> series(std::size_t item, int h) const;
    std::vector<bool> observed_series(std::size_t item, int h) const;

    std::optional<std::size_t> find_item(std::string_view id) const;

    //! Throws RangeError unless the indices address a cell.
    void check_cell(std::size_t item, int t, int h) const;

    //! Copy restricted to the given items (in the given order).
    PreorderTensor subset(const std::vector<std::size_t>& items) const;

    //! Copy restricted to periods [0, periods).
    PreorderTensor truncate(int periods) const;

    std::size_t observed_count() const;

    friend bool operator==(const PreorderTensor&, const PreorderTensor&) = default;

private:
    std::size_t offset(std::size_t item, int t, int h) const {
        return (item * static_cast<std::size_t>(periods_) + static_cast<std::size_t>(t)) *
                   static_cast<std::size_t>(max_lead_) +
               static_cast<std::size_t>(h);
    }

    std::vector<std::string> items_;
    int periods_ = 0;
    int max_lead_ = 0;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
};

inline constexpr int kDefaultMaxLead = 4;

struct LoadOptions {
    //! When false every (item, t, h) cell must have a record.
    bool missing_as_zero = true;
    //! Records with lead_time >= max_lead are dropped and counted.
    int max_lead = kDefaultMaxLead;
};

struct LoadStats {
    std::size_t records = 0; //!< data rows read, including dropped ones
    std::size_t dropped_records = 0;
};

//! Parses `item_id,delivery_period,lead_time,quantity` CSV. Items keep the
//! order of first appearance; extents are the data maxima plus one.
PreorderTensor parse_csv(std::istream& in, const LoadOptions& options = {},
                         LoadStats* stats = nullptr);

PreorderTensor load_csv(const std::filesystem::path& path, const LoadOptions& options = {},
                        LoadStats* stats = nullptr);

//! Writes every observed cell, item-major, with shortest round-trip decimals.
void write_csv(std::ostream& out, const PreorderTensor& tensor);
void save_csv(const std::filesystem::path& path, const PreorderTensor& tensor);

//! Binary cache of a tensor (versioned container).
void save_cache(const std::filesystem::path& path, const PreorderTensor& tensor);
PreorderTensor load_cache(const std::filesystem::path& path);

//! True iff q_t^h is available by the end of period `now`, i.e. t - h <= now.
bool is_known_at(const PreorderTensor& tensor, std::size_t item, int t, int h, int now);

enum class Regime { smooth, sparse_spiky, anticipatory };

Regime parse_regime(std::string_view name);
std::string_view to_string(Regime regime);

//! Deterministic synthetic tensor. `sparse_spiky` has at least half of its
//! cells zero; `anticipatory` has corr(q^0, q^1) >= 0.9 for every item.
PreorderTensor synthesize(std::uint64_t seed, std::size_t n_items, int periods, int max_lead,
                          Regime regime);

//! Pearson correlation; 0 when either side has zero variance.
double correlation(const std::vector<double>& a, const std::vector<double>& b);

} // namespace hierfcst::dataset
