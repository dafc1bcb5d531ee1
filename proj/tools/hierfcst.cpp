// Batch command-line entry point.
//
// Precedence of settings: built-in defaults < --config file < flags.

#include <hierfcst/config.hpp>
#include <hierfcst/pipeline.hpp>

#include <CLI11.hpp>

#include <deque>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using hierfcst::pipeline::Stage;

struct Command {
    CLI::App* app = nullptr;
    Stage stage = Stage::config;
    std::map<std::string, std::optional<std::string>> overrides;
};

class Cli {
public:
    Cli() : app_("hierfcst: hierarchical pre-order demand forecasting toolkit") {
        app_.require_subcommand(1);
        app_.set_version_flag("--version", hierfcst::config::kVersion);
    }

    Command& command(const std::string& name, const std::string& help, Stage stage) {
        auto& cmd = commands_[name];
        cmd.app = app_.add_subcommand(name, help);
        cmd.stage = stage;
        cmd.app->add_option("--config", config_path_, "INI config file (flags override it)")
            ->check(CLI::ExistingFile);
        return cmd;
    }

    void flag(Command& cmd, const std::string& name, const std::string& key, const std::string& help) {
        cmd.app->add_option(name, cmd.overrides[key], help + " [" + key + "]");
    }

    void toggle(Command& cmd, const std::string& name, const std::string& key, const std::string& help,
                const std::string& on_value) {
        auto* state = &toggles_.emplace_back(false);
        cmd.app->add_flag(name, *state, help + " [" + key + "=" + on_value + "]");
        toggle_keys_.push_back({&cmd, key, on_value, state});
    }

    int run(int argc, char** argv) {
        try {
            app_.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            return app_.exit(e) == 0 ? 0 : static_cast<int>(Stage::config);
        }
        for (auto& [name, cmd] : commands_) {
            if (cmd.app->parsed()) {
                return execute(name, cmd);
            }
        }
        return static_cast<int>(Stage::config);
    }

private:
    int execute(const std::string& name, Command& cmd) {
        hierfcst::config::RunConfig cfg;
        const int status = hierfcst::pipeline::execute(Stage::config, [&] {
            if (!config_path_.empty()) {
                cfg.merge_file(config_path_);
            }
            for (const auto& [key, value] : cmd.overrides) {
                if (value) {
                    cfg.set(key, *value);
                }
            }
            for (const auto& t : toggle_keys_) {
                if (t.cmd == &cmd && *t.state) {
                    cfg.set(t.key, t.value);
                }
            }
        }, std::cerr);
        if (status != 0) {
            return status;
        }
        return hierfcst::pipeline::execute(cmd.stage, [&] { dispatch(name, cfg); }, std::cerr);
    }

    static void dispatch(const std::string& name, const hierfcst::config::RunConfig& cfg) {
        namespace p = hierfcst::pipeline;
        if (name == "ingest") {
            p::ingest(cfg, std::cerr);
        } else if (name == "synth") {
            p::synth(cfg, std::cerr);
        } else if (name == "transform") {
            p::transform(cfg, std::cerr);
        } else if (name == "train") {
            p::train(cfg, std::cerr);
        } else if (name == "trmf") {
            p::trmf(cfg, std::cerr);
        } else if (name == "backtest") {
            p::backtest(cfg, std::cerr);
        } else if (name == "select") {
            p::select(cfg, std::cerr);
        } else if (name == "report") {
            p::report(cfg, std::cout, std::cerr);
        } else if (name == "run") {
            p::run_all(cfg, std::cerr);
        }
    }

    struct Toggle {
        Command* cmd;
        std::string key;
        std::string value;
        bool* state;
    };

    CLI::App app_;
    std::string config_path_;
    std::map<std::string, Command> commands_;
    std::deque<bool> toggles_;
    std::vector<Toggle> toggle_keys_;
};

} // namespace

int main(int argc, char** argv) {
    Cli cli;

    auto& ingest = cli.command("ingest", "Load a pre-order CSV into a binary tensor cache", Stage::ingest);
    cli.flag(ingest, "--input", "data.input", "CSV with item_id,delivery_period,lead_time,quantity");
    cli.flag(ingest, "--output", "data.cache", "Tensor cache to write");
    cli.flag(ingest, "--max-lead", "data.max_lead", "Lead-time slots kept");
    cli.toggle(ingest, "--strict", "data.missing_as_zero", "Reject missing (item, period, lead) cells",
               "false");

    auto& synth = cli.command("synth", "Generate a synthetic tensor cache", Stage::synth);
    cli.flag(synth, "--seed", "run.seed", "Top-level seed");
    cli.flag(synth, "--regime", "synth.regime", "smooth, sparse_spiky or anticipatory");
    cli.flag(synth, "--items", "synth.items", "Number of items");
    cli.flag(synth, "--periods", "synth.periods", "Delivery periods T");
    cli.flag(synth, "--leads", "synth.leads", "Lead-time slots H");
    cli.flag(synth, "--output", "data.cache", "Tensor cache to write");
    cli.flag(synth, "--csv", "synth.csv", "Also write the records as CSV");
    cli.flag(synth, "--out", "run.out", "Run output directory");

    auto& transform = cli.command("transform", "Build a Diagonal Feeding supervised cache", Stage::transform);
    cli.flag(transform, "--data", "data.cache", "Tensor cache");
    cli.flag(transform, "--input", "data.input", "CSV used when the cache is missing");
    cli.flag(transform, "--kind", "transform.kind", "none, log or minmax");
    cli.flag(transform, "--window", "transform.window", "Window rows W (must be leads + 1)");
    cli.flag(transform, "--leads", "transform.leads", "Lead-time columns H");
    cli.flag(transform, "--scope", "transform.scope", "one or all");
    cli.flag(transform, "--item", "transform.item", "Item id for --scope one");
    cli.flag(transform, "--periods", "transform.periods", "Periods used: a count, train or all");
    cli.flag(transform, "--output", "transform.output", "Supervised cache to write");
    cli.flag(transform, "--out", "run.out", "Run output directory");

    auto& train = cli.command("train", "Fit every spec per item into a model store", Stage::train);
    cli.flag(train, "--data", "data.cache", "Tensor cache");
    cli.flag(train, "--specs", "backtest.specs", "Model spec INI file");
    cli.flag(train, "--periods", "train.periods", "Training periods: a count, train or all");
    cli.flag(train, "--out", "train.out", "Model store directory");
    cli.flag(train, "--jobs", "run.jobs", "Worker threads");
    cli.flag(train, "--seed", "run.seed", "Top-level seed");

    auto& trmf = cli.command("trmf", "Temporal-regularized matrix factorization of q^0", Stage::trmf);
    cli.flag(trmf, "--data", "data.cache", "Tensor cache");
    cli.flag(trmf, "--rank", "trmf.rank", "Factor count d");
    cli.flag(trmf, "--ar-order", "trmf.ar_order", "AR order p");
    cli.flag(trmf, "--lambda-f", "trmf.lambda_f", "Loading ridge weight");
    cli.flag(trmf, "--lambda-z", "trmf.lambda_z", "Factor ridge weight");
    cli.flag(trmf, "--lambda-ar", "trmf.lambda_ar", "AR regularizer weight");
    cli.flag(trmf, "--sweeps", "trmf.sweeps", "Maximum alternating sweeps");
    cli.flag(trmf, "--tol", "trmf.tol", "Relative objective decrease to stop at");
    cli.flag(trmf, "--seed", "run.seed", "Top-level seed");
    cli.flag(trmf, "--density-floor", "trmf.density_floor", "Minimum observed share");
    cli.toggle(trmf, "--allow-sparse", "trmf.allow_sparse", "Proceed below the density floor", "true");
    cli.flag(trmf, "--transform", "trmf.transform", "none, log or minmax");
    cli.flag(trmf, "--periods", "trmf.periods", "Periods used: a count, train or all");
    cli.flag(trmf, "--horizon", "trmf.horizon", "Forecast steps");
    cli.flag(trmf, "--out", "trmf.out", "Output directory");

    auto& backtest = cli.command("backtest", "Score specs with rolling one-step SMAPE", Stage::backtest);
    cli.flag(backtest, "--specs", "backtest.specs", "Model spec INI file");
    cli.flag(backtest, "--data", "data.cache", "Tensor cache");
    cli.flag(backtest, "--train-periods", "backtest.train_periods", "Training periods");
    cli.flag(backtest, "--test-periods", "backtest.test_periods", "Test periods");
    cli.flag(backtest, "--feature-window", "backtest.feature_window", "Window of the no-feeding features");
    cli.flag(backtest, "--out", "backtest.out", "Leaderboard CSV (siblings hold forecasts and assignments)");
    cli.flag(backtest, "--jobs", "run.jobs", "Worker threads");
    cli.flag(backtest, "--seed", "run.seed", "Top-level seed");

    auto& select = cli.command("select", "Fit the Mapper model selector", Stage::select);
    cli.flag(select, "--data", "data.cache", "Tensor cache");
    cli.flag(select, "--assignments", "select.assignments", "Best-spec CSV from backtest");
    cli.flag(select, "--subset", "select.subset", "Training series");
    cli.flag(select, "--models", "select.models", "Comma-separated candidate specs (default all)");
    cli.flag(select, "--intervals", "select.intervals", "Mapper cover intervals");
    cli.flag(select, "--overlap", "select.overlap", "Mapper interval overlap");
    cli.flag(select, "--k", "select.k", "Routing neighbors");
    cli.flag(select, "--min-cluster-size", "select.min_cluster_size", "Partition floor (0 = 5%)");
    cli.flag(select, "--features", "select.features", "Comma-separated feature names");
    cli.flag(select, "--out", "select.out", "Selector file");
    cli.flag(select, "--graph", "select.graph", "Mapper graph JSON (DOT written alongside)");

    auto& report = cli.command("report", "Best-spec forecast reports with the mimicry check", Stage::report);
    cli.flag(report, "--data", "data.cache", "Tensor cache");
    cli.flag(report, "--forecasts", "report.forecasts", "Forecasts CSV from backtest");
    cli.flag(report, "--item", "report.item", "Single item (CSV to stdout unless --out)");
    cli.flag(report, "--out", "report.out", "Report directory");

    auto& run = cli.command("run", "Full pipeline: data, transform, train, backtest, select, report",
                            Stage::config);
    cli.flag(run, "--seed", "run.seed", "Top-level seed");
    cli.flag(run, "--jobs", "run.jobs", "Worker threads");
    cli.flag(run, "--out", "run.out", "Run output directory");
    cli.flag(run, "--input", "data.input", "CSV input (synthetic data when empty)");
    cli.flag(run, "--specs", "backtest.specs", "Model spec INI file");

    return cli.run(argc, argv);
}
