#pragma once

#include <hierfcst/dataset.hpp>
#include <hierfcst/models/model.hpp>
#include <hierfcst/models/spec.hpp>

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hierfcst::eval {

//! Symmetric MAPE in percent, in [0, 200]. Terms with F_t = A_t = 0
//! contribute 0. Throws DimensionError on length mismatch or empty input and
//! DomainError on non-finite entries.
double smape(std::span<const double> forecast, std::span<const double> actual);

//! Train on periods [0, train_periods), test on the following test_periods.
struct BacktestSplit {
    int train_periods = 37;
    int test_periods = 8;

    int first_test() const { return train_periods; }
    int end() const { return train_periods + test_periods; }

    //! Throws ConfigError unless both parts are nonempty and end() <= periods.
    void validate(int periods) const;
};

struct BacktestOptions {
    int jobs = 1;
    //! Trailing q^0 window summarized by the no-feeding regression features.
    int feature_window = 8;
};

inline constexpr double kNotApplicable = std::numeric_limits<double>::quiet_NaN();

//! Result of one (item, spec) cell.
struct CellResult {
    bool ok = false;
    std::string error;
    std::vector<double> forecast; //!< q^0 per test period, original units
    double smape = kNotApplicable;
    //! SMAPE over the earliest-future diagonal targets; Diagonal Feeding only.
    double diag_smape = kNotApplicable;
};

struct LeaderboardRow {
    std::string spec;
    std::string family;
    std::string feeding;
    std::string transform;
    double mean_smape = kNotApplicable;
    double median_smape = kNotApplicable;
    double diag_mean_smape = kNotApplicable;
    std::size_t items = 0;    //!< items in the common scored set
    std::size_t failures = 0; //!< failed cells of this spec
    std::size_t best_count = 0;
};

//! Mean and median over the items where every spec succeeded; best counts
//! over items with at least one success, ties to the lexicographically
//! smallest spec name.
struct Leaderboard {
    std::vector<models::ModelSpec> specs;
    std::vector<std::string> items;
    std::vector<int> test_periods;
    std::vector<std::vector<double>> actuals; //!< per item, q^0 over test periods
    std::vector<CellResult> cells;            //!< item-major: item * specs + spec
    std::vector<std::optional<std::size_t>> best; //!< per item
    std::vector<LeaderboardRow> rows;             //!< per spec, in spec order

    const CellResult& cell(std::size_t item, std::size_t spec) const {
        return cells[item * specs.size() + spec];
    }
};

//! Rolling one-step forecasts of q^0 over the test periods: the forecast of
//! period t only uses cells known by the end of t - 1. Model parameters are
//! fitted on the training periods. Cell failures are recorded, not thrown.
Leaderboard backtest(const dataset::PreorderTensor& tensor,
                     const std::vector<models::ModelSpec>& specs, const BacktestSplit& split,
                     const BacktestOptions& options = {});

//! The per-item model backtest() fits on periods [0, periods), with the
//! item's transform attached. Rejects TRMF and all-items feeding.
models::FittedModel fit_item_model(const dataset::PreorderTensor& tensor,
                                   const models::ModelSpec& spec, std::size_t item, int periods,
                                   const BacktestOptions& options = {});

//! The shared all-items Diagonal Feeding model. Items keep their own
//! transforms, so none is attached.
models::FittedModel fit_panel_model(const dataset::PreorderTensor& tensor,
                                    const models::ModelSpec& spec, int periods);

struct MimicryDiagnostic {
    double corr_lagged = 0.0;  //!< corr(F_t, A_{t-1})
    double corr_aligned = 0.0; //!< corr(F_t, A_t)
    bool flagged = false;      //!< corr_lagged > corr_aligned + 0.1
};

//! `lagged_actual[t]` is the actual one period before `actual[t]`.
MimicryDiagnostic mimicry(std::span<const double> forecast, std::span<const double> actual,
                          std::span<const double> lagged_actual);

//! Uses pairs t = 1..n-1 of the given series.
MimicryDiagnostic mimicry(std::span<const double> forecast, std::span<const double> actual);

struct ForecastReport {
    std::string item;
    std::string spec; //!< best spec, empty when every spec failed
    std::vector<int> periods;
    std::vector<double> actual;
    std::vector<double> forecast;
    MimicryDiagnostic diagnostic;
};

//! Best-spec forecasts for one item plus the lag-1 mimicry diagnostic. The
//! lagged actual of the first test period is the last training value.
ForecastReport best_forecast_report(const Leaderboard& board, const dataset::PreorderTensor& tensor,
                                    std::size_t item);

void write_leaderboard_csv(std::ostream& out, const Leaderboard& board);
//! item,best_spec,smape
void write_assignments_csv(std::ostream& out, const Leaderboard& board);
//! item,spec,period,actual,forecast,is_best (successful cells only)
void write_forecasts_csv(std::ostream& out, const Leaderboard& board);
//! item,spec,status,smape,diag_smape,error
void write_cells_csv(std::ostream& out, const Leaderboard& board);
//! period,actual,forecast
void write_report_csv(std::ostream& out, const ForecastReport& report);

//! Shortest round-trip decimal, or empty for NaN.
std::string format_number(double v);

} // namespace hierfcst::eval
