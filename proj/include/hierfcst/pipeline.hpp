#pragma once

#include <hierfcst/config.hpp>
#include <hierfcst/dataset.hpp>
#include <hierfcst/error.hpp>
#include <hierfcst/eval.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

namespace hierfcst::pipeline {

//! Process exit code of a failure in each stage.
enum class Stage : int {
    config = 2,
    ingest = 10,
    synth = 11,
    transform = 12,
    train = 13,
    trmf = 14,
    backtest = 15,
    select = 16,
    report = 17,
};

std::string_view to_string(Stage stage);

class StageError : public Error {
public:
    StageError(Stage stage, const std::string& what)
        : Error(std::string(to_string(stage)) + ": " + what), stage_(stage) {}
    Stage stage() const { return stage_; }

private:
    Stage stage_;
};

//! Writes `path` through `<path>.incomplete`, renamed once `fill` returns.
//! A failure leaves the `.incomplete` file behind.
void write_artifact(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fill);

//! Tensor from `data.cache` when it exists, else from the `data.input` CSV.
dataset::PreorderTensor load_data(const config::RunConfig& cfg);

void ingest(const config::RunConfig& cfg, std::ostream& log);
void synth(const config::RunConfig& cfg, std::ostream& log);
void transform(const config::RunConfig& cfg, std::ostream& log);
void train(const config::RunConfig& cfg, std::ostream& log);
void trmf(const config::RunConfig& cfg, std::ostream& log);
void backtest(const config::RunConfig& cfg, std::ostream& log);
void select(const config::RunConfig& cfg, std::ostream& log);
//! Per-item `period,actual,forecast` CSVs. With `report.item` set and
//! `report.out` empty the single report goes to `out`.
void report(const config::RunConfig& cfg, std::ostream& out, std::ostream& log);

//! Data (ingest or synth), transform, train, backtest, select, report, with
//! the resolved config written to `<run.out>/resolved_config.ini`.
void run_all(const config::RunConfig& cfg, std::ostream& log);

//! Runs `fn` as `stage`: returns 0, or prints the error to `err` and returns
//! the stage exit code (2 for configuration errors).
int execute(Stage stage, const std::function<void()>& fn, std::ostream& err);

//! Best-spec report rebuilt from a forecasts CSV written by backtest.
eval::ForecastReport report_from_forecasts(const std::filesystem::path& forecasts,
                                           const dataset::PreorderTensor& tensor,
                                           const std::string& item);

} // namespace hierfcst::pipeline
