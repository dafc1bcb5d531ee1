#include <hierfcst/eval.hpp>

#include <hierfcst/error.hpp>
#include <hierfcst/models/model.hpp>
#include <hierfcst/parallel.hpp>
#include <hierfcst/preprocess.hpp>
#include <hierfcst/tda/features.hpp>
#include <hierfcst/trmf.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>

namespace hierfcst::eval {

using dataset::PreorderTensor;
using models::Family;
using models::FeedingMode;
using models::ModelSpec;
using preprocess::TargetTransform;

double smape(std::span<const double> forecast, std::span<const double> actual) {
    if (forecast.size() != actual.size()) {
        throw DimensionError("smape: forecast has " + std::to_string(forecast.size()) +
                             " values, actual has " + std::to_string(actual.size()));
    }
    if (forecast.empty()) {
        throw DimensionError("smape of an empty series");
    }
    double sum = 0.0;
    for (std::size_t t = 0; t < forecast.size(); ++t) {
        if (!std::isfinite(forecast[t]) || !std::isfinite(actual[t])) {
            throw DomainError("smape: non-finite entry at position " + std::to_string(t));
        }
        const double den = std::abs(forecast[t]) + std::abs(actual[t]);
        if (den > 0.0) {
            sum += std::abs(forecast[t] - actual[t]) / den;
        }
    }
    return 200.0 * sum / static_cast<double>(forecast.size());
}

void BacktestSplit::validate(int periods) const {
    if (train_periods < 1 || test_periods < 1) {
        throw ConfigError("backtest split needs at least one training and one test period");
    }
    if (end() > periods) {
        throw ConfigError("backtest split needs " + std::to_string(end()) +
                          " periods but the data has " + std::to_string(periods));
    }
}

namespace {

struct Context {
    const PreorderTensor& tensor;
    const BacktestSplit& split;
    const BacktestOptions& options;
};

std::vector<double> transformed(std::span<const double> v, const TargetTransform& tr) {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [&](double x) { return tr.forward(x); });
    return out;
}

double to_quantity(double v, const TargetTransform& tr) {
    return std::max(0.0, tr.inverse(v));
}

// Regression features of the no-feeding mode for target period t: the
// summary features of z[t - window, t) followed by the last two lags.
std::vector<double> lag_features(const std::vector<double>& z, int t, int window) {
    const std::span<const double> past(z.data() + (t - window), static_cast<std::size_t>(window));
    auto f = tda::extract_features(past);
    f.push_back(z[static_cast<std::size_t>(t - 1)]);
    f.push_back(z[static_cast<std::size_t>(t - 2)]);
    return f;
}

Eigen::MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

int feature_window(const ModelSpec& spec, const Context& ctx) {
    return spec.has("feature_window") ? spec.int_param("feature_window") : ctx.options.feature_window;
}

std::vector<double> arx_exog_row(const PreorderTensor& T, std::size_t item, int t,
                                 const TargetTransform& tr) {
    return transformed(preprocess::known_inputs(T, item, t - 1, T.max_lead()), tr);
}

models::FittedModel fit_arx_model(const PreorderTensor& T, const ModelSpec& spec, std::size_t item,
                                  int periods) {
    const auto tr = preprocess::fit_item_transform(T, item, spec.transform(), periods);
    const auto z = transformed(T.series(item, 0), tr);
    const std::span<const double> train(z.data(), static_cast<std::size_t>(periods));
    Eigen::MatrixXd exog;
    if (spec.uses_diagonal_feeding()) {
        const auto k = static_cast<Eigen::Index>(preprocess::known_layout(T.max_lead()).size());
        exog = Eigen::MatrixXd::Zero(periods, k);
        for (int t = 1; t < periods; ++t) {
            const auto row = arx_exog_row(T, item, t, tr);
            for (Eigen::Index c = 0; c < k; ++c) {
                exog(t, c) = row[static_cast<std::size_t>(c)];
            }
        }
    }
    auto model = models::fit_arx(train, exog, spec.int_param("order"));
    model.spec = spec;
    model.transform = tr;
    return model;
}

CellResult run_arx(const Context& ctx, const ModelSpec& spec, std::size_t item) {
    const auto& T = ctx.tensor;
    const auto model = fit_arx_model(T, spec, item, ctx.split.train_periods);
    const auto& tr = *model.transform;
    const auto z = transformed(T.series(item, 0), tr);
    CellResult cell;
    for (int t = ctx.split.first_test(); t < ctx.split.end(); ++t) {
        const std::span<const double> history(z.data(), static_cast<std::size_t>(t));
        const double v = spec.uses_diagonal_feeding()
                             ? models::arx_one_step(model, history, arx_exog_row(T, item, t, tr))
                             : models::arx_one_step(model, history);
        cell.forecast.push_back(to_quantity(v, tr));
    }
    return cell;
}

models::FittedModel fit_lag_model(const PreorderTensor& T, const ModelSpec& spec, std::size_t item,
                                  int periods, int window) {
    if (periods - window < 1) {
        throw RangeError("feature window " + std::to_string(window) + " leaves no training rows in " +
                         std::to_string(periods) + " periods");
    }
    const auto tr = preprocess::fit_item_transform(T, item, spec.transform(), periods);
    const auto z = transformed(T.series(item, 0), tr);
    std::vector<std::vector<double>> rows;
    Eigen::MatrixXd Y(periods - window, 1);
    for (int t = window; t < periods; ++t) {
        rows.push_back(lag_features(z, t, window));
        Y(t - window, 0) = z[static_cast<std::size_t>(t)];
    }
    auto model = models::fit(spec, rows_to_matrix(rows), Y);
    model.transform = tr;
    model.info.periods = periods;
    return model;
}

CellResult run_lag_regression(const Context& ctx, const ModelSpec& spec, std::size_t item) {
    const int window = feature_window(spec, ctx);
    const auto model = fit_lag_model(ctx.tensor, spec, item, ctx.split.train_periods, window);
    const auto& tr = *model.transform;
    const auto z = transformed(ctx.tensor.series(item, 0), tr);
    CellResult cell;
    for (int t = ctx.split.first_test(); t < ctx.split.end(); ++t) {
        const auto f = lag_features(z, t, window);
        const Eigen::RowVectorXd x =
            Eigen::Map<const Eigen::RowVectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
        cell.forecast.push_back(to_quantity(models::predict_raw(model, x)(0, 0), tr));
    }
    return cell;
}

// Fits only the earliest-future diagonal targets of each Diagonal Feeding sample.
models::FittedModel fit_diagonal(const ModelSpec& spec, const preprocess::TrainingSet& set) {
    if (set.X.rows() == 0) {
        throw RangeError("no Diagonal Feeding window fits in the training periods");
    }
    const auto diag = preprocess::diagonal_target_positions(set.leads);
    Eigen::MatrixXd Y(set.Y.rows(), static_cast<Eigen::Index>(diag.size()));
    for (std::size_t k = 0; k < diag.size(); ++k) {
        Y.col(static_cast<Eigen::Index>(k)) = set.Y.col(static_cast<Eigen::Index>(diag[k]));
    }
    return models::fit(spec, set.X, Y);
}

CellResult forecast_diagonal(const Context& ctx, const models::FittedModel& model,
                             const TargetTransform& tr, std::size_t item) {
    const auto& T = ctx.tensor;
    const int leads = T.max_lead();
    CellResult cell;
    std::vector<double> diag_forecast;
    std::vector<double> diag_actual;
    for (int t = ctx.split.first_test(); t < ctx.split.end(); ++t) {
        const auto x = transformed(preprocess::known_inputs(T, item, t - 1, leads), tr);
        const Eigen::RowVectorXd row =
            Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
        const Eigen::RowVectorXd out = models::predict_raw(model, row).row(0);
        cell.forecast.push_back(to_quantity(out(0), tr));
        // Column k targets q_{t+k}^k.
        for (int k = 0; k < out.size(); ++k) {
            if (t + k < ctx.split.end()) {
                diag_forecast.push_back(to_quantity(out(k), tr));
                diag_actual.push_back(T.value(item, t + k, k));
            }
        }
    }
    cell.diag_smape = smape(diag_forecast, diag_actual);
    return cell;
}

void validate_spec(const ModelSpec& spec, const PreorderTensor& tensor) {
    if (spec.family() == Family::arx && spec.feeding() == FeedingMode::df_all_items) {
        throw ConfigError("spec '" + spec.name() +
                          "': the ARX surrogate is fitted per item; use df_one_by_one");
    }
    if (spec.uses_diagonal_feeding() && tensor.max_lead() < 1) {
        throw ConfigError("Diagonal Feeding needs at least one lead time");
    }
}

trmf::TrmfConfig trmf_config(const ModelSpec& spec) {
    trmf::TrmfConfig cfg;
    cfg.rank = spec.int_param("rank");
    cfg.ar_order = spec.int_param("ar_order");
    cfg.lambda_f = spec.param("lambda_f");
    cfg.lambda_z = spec.param("lambda_z");
    cfg.lambda_ar = spec.param("lambda_ar");
    cfg.max_sweeps = spec.int_param("sweeps");
    cfg.tol = spec.param("tol");
    cfg.seed = static_cast<std::uint64_t>(spec.param("seed"));
    cfg.density_floor = spec.param("density_floor");
    cfg.allow_sparse = spec.int_param("density_override") != 0;
    return cfg;
}

// Panel fit over all items; fills one cell per item.
void run_trmf(const Context& ctx, const ModelSpec& spec, std::vector<CellResult*> cells) {
    const auto& T = ctx.tensor;
    const int cut = ctx.split.train_periods;
    const auto n = static_cast<Eigen::Index>(T.n_items());
    std::vector<TargetTransform> transforms;
    Eigen::MatrixXd Y(ctx.split.end(), n);
    trmf::Mask mask(ctx.split.end(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto item = static_cast<std::size_t>(i);
        transforms.push_back(preprocess::fit_item_transform(T, item, spec.transform(), cut));
        for (int t = 0; t < ctx.split.end(); ++t) {
            Y(t, i) = transforms.back().forward(T.value(item, t, 0));
            mask(t, i) = T.observed(item, t, 0);
        }
    }
    const auto result = trmf::rolling_refit(Y.topRows(cut), mask.topRows(cut),
                                            Y.bottomRows(ctx.split.test_periods),
                                            mask.bottomRows(ctx.split.test_periods), trmf_config(spec));
    for (Eigen::Index i = 0; i < n; ++i) {
        auto& cell = *cells[static_cast<std::size_t>(i)];
        cell.forecast.clear();
        for (Eigen::Index k = 0; k < result.forecasts.rows(); ++k) {
            cell.forecast.push_back(to_quantity(result.forecasts(k, i), transforms[static_cast<std::size_t>(i)]));
        }
        cell.ok = true;
    }
}

std::string failure_message(const std::exception& e) {
    return e.what();
}

template<typename Fn>
void guarded(CellResult& cell, Fn&& fn) {
    try {
        cell = fn();
        cell.ok = true;
    } catch (const std::exception& e) {
        cell = CellResult{};
        cell.error = failure_message(e);
    }
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void aggregate(Leaderboard& board) {
    const auto n_specs = board.specs.size();
    const auto n_items = board.items.size();
    std::vector<std::size_t> common;
    for (std::size_t i = 0; i < n_items; ++i) {
        bool all = true;
        for (std::size_t s = 0; s < n_specs; ++s) {
            all = all && board.cell(i, s).ok;
        }
        if (all) {
            common.push_back(i);
        }
    }

    board.best.assign(n_items, std::nullopt);
    for (std::size_t i = 0; i < n_items; ++i) {
        for (std::size_t s = 0; s < n_specs; ++s) {
            const auto& c = board.cell(i, s);
            if (!c.ok) {
                continue;
            }
            const auto& b = board.best[i];
            if (!b || c.smape < board.cell(i, *b).smape ||
                (c.smape == board.cell(i, *b).smape && board.specs[s].name() < board.specs[*b].name())) {
                board.best[i] = s;
            }
        }
    }

    board.rows.clear();
    for (std::size_t s = 0; s < n_specs; ++s) {
        const auto& spec = board.specs[s];
        LeaderboardRow row;
        row.spec = spec.name();
        row.family = std::string(models::to_string(spec.family()));
        row.feeding = std::string(models::to_string(spec.feeding()));
        row.transform = std::string(preprocess::to_string(spec.transform()));
        row.items = common.size();
        std::vector<double> scores;
        std::vector<double> diag;
        for (const auto i : common) {
            scores.push_back(board.cell(i, s).smape);
            if (!std::isnan(board.cell(i, s).diag_smape)) {
                diag.push_back(board.cell(i, s).diag_smape);
            }
        }
        if (!scores.empty()) {
            row.mean_smape = std::accumulate(scores.begin(), scores.end(), 0.0) /
                             static_cast<double>(scores.size());
            row.median_smape = median(scores);
        }
        if (!diag.empty() && diag.size() == scores.size()) {
            row.diag_mean_smape =
                std::accumulate(diag.begin(), diag.end(), 0.0) / static_cast<double>(diag.size());
        }
        for (std::size_t i = 0; i < n_items; ++i) {
            row.failures += board.cell(i, s).ok ? 0 : 1;
            row.best_count += board.best[i] == s ? 1 : 0;
        }
        board.rows.push_back(std::move(row));
    }
}

} // namespace

Leaderboard backtest(const PreorderTensor& tensor, const std::vector<ModelSpec>& specs,
                     const BacktestSplit& split, const BacktestOptions& options) {
    split.validate(tensor.periods());
    if (specs.empty()) {
        throw ConfigError("backtest needs at least one model spec");
    }
    if (tensor.n_items() == 0) {
        throw ConfigError("backtest needs at least one item");
    }
    for (std::size_t a = 0; a < specs.size(); ++a) {
        validate_spec(specs[a], tensor);
        for (std::size_t b = a + 1; b < specs.size(); ++b) {
            if (specs[a].name() == specs[b].name()) {
                throw ConfigError("duplicate spec name '" + specs[a].name() + "'");
            }
        }
    }

    Leaderboard board;
    board.specs = specs;
    board.items = tensor.items();
    for (int t = split.first_test(); t < split.end(); ++t) {
        board.test_periods.push_back(t);
    }
    for (std::size_t i = 0; i < tensor.n_items(); ++i) {
        const auto q0 = tensor.series(i, 0);
        board.actuals.emplace_back(q0.begin() + split.first_test(), q0.begin() + split.end());
    }
    const auto n_specs = specs.size();
    board.cells.assign(tensor.n_items() * n_specs, CellResult{});
    const Context ctx{tensor, split, options};

    // Panel fits (all-items feeding, TRMF) are single tasks covering every item.
    std::vector<std::function<void()>> tasks;
    for (std::size_t s = 0; s < n_specs; ++s) {
        const auto& spec = specs[s];
        std::vector<CellResult*> column;
        for (std::size_t i = 0; i < tensor.n_items(); ++i) {
            column.push_back(&board.cells[i * n_specs + s]);
        }
        if (spec.family() == Family::trmf) {
            tasks.emplace_back([&ctx, &spec, column] {
                try {
                    run_trmf(ctx, spec, column);
                } catch (const std::exception& e) {
                    for (auto* cell : column) {
                        *cell = CellResult{};
                        cell->error = failure_message(e);
                    }
                }
            });
        } else if (spec.feeding() == FeedingMode::df_all_items) {
            tasks.emplace_back([&ctx, &spec, column] {
                std::optional<preprocess::TrainingSet> set;
                std::optional<models::FittedModel> model;
                std::string error;
                try {
                    set = preprocess::build_training_set(ctx.tensor, preprocess::ItemScope::all_items(),
                                                         ctx.tensor.max_lead() + 1, ctx.tensor.max_lead(),
                                                         spec.transform(), ctx.split.train_periods);
                    model = fit_diagonal(spec, *set);
                } catch (const std::exception& e) {
                    error = failure_message(e);
                }
                for (std::size_t i = 0; i < column.size(); ++i) {
                    if (!model) {
                        *column[i] = CellResult{};
                        column[i]->error = error;
                        continue;
                    }
                    guarded(*column[i],
                            [&] { return forecast_diagonal(ctx, *model, set->transform_for(i), i); });
                }
            });
        } else {
            for (std::size_t i = 0; i < tensor.n_items(); ++i) {
                tasks.emplace_back([&ctx, &spec, cell = column[i], i] {
                    guarded(*cell, [&] {
                        if (spec.family() == Family::arx) {
                            return run_arx(ctx, spec, i);
                        }
                        if (spec.feeding() == FeedingMode::df_one_by_one) {
                            const auto set = preprocess::build_training_set(
                                ctx.tensor, preprocess::ItemScope::one_item(i),
                                ctx.tensor.max_lead() + 1, ctx.tensor.max_lead(), spec.transform(),
                                ctx.split.train_periods);
                            return forecast_diagonal(ctx, fit_diagonal(spec, set), set.transform_for(i), i);
                        }
                        return run_lag_regression(ctx, spec, i);
                    });
                });
            }
        }
    }
    parallel_for(tasks.size(), options.jobs, [&](std::size_t k) { tasks[k](); });

    for (std::size_t i = 0; i < tensor.n_items(); ++i) {
        for (std::size_t s = 0; s < n_specs; ++s) {
            auto& cell = board.cells[i * n_specs + s];
            if (!cell.ok) {
                continue;
            }
            try {
                cell.smape = smape(cell.forecast, board.actuals[i]);
            } catch (const std::exception& e) {
                cell = CellResult{};
                cell.error = failure_message(e);
            }
        }
    }
    aggregate(board);
    return board;
}

models::FittedModel fit_item_model(const PreorderTensor& tensor, const ModelSpec& spec,
                                   std::size_t item, int periods, const BacktestOptions& options) {
    validate_spec(spec, tensor);
    if (spec.family() == Family::trmf || spec.feeding() == FeedingMode::df_all_items) {
        throw ConfigError("spec '" + spec.name() + "' is a panel model, not a per-item model");
    }
    tensor.check_cell(item, periods - 1, 0);
    if (spec.family() == Family::arx) {
        return fit_arx_model(tensor, spec, item, periods);
    }
    if (spec.feeding() == FeedingMode::df_one_by_one) {
        const auto set = preprocess::build_training_set(tensor, preprocess::ItemScope::one_item(item),
                                                        tensor.max_lead() + 1, tensor.max_lead(),
                                                        spec.transform(), periods);
        auto model = fit_diagonal(spec, set);
        model.transform = set.transform_for(item);
        model.info.periods = periods;
        return model;
    }
    const int window = spec.has("feature_window") ? spec.int_param("feature_window") : options.feature_window;
    return fit_lag_model(tensor, spec, item, periods, window);
}

models::FittedModel fit_panel_model(const PreorderTensor& tensor, const ModelSpec& spec, int periods) {
    validate_spec(spec, tensor);
    if (spec.feeding() != FeedingMode::df_all_items || spec.family() == Family::trmf) {
        throw ConfigError("spec '" + spec.name() + "' is not an all-items Diagonal Feeding model");
    }
    const auto set = preprocess::build_training_set(tensor, preprocess::ItemScope::all_items(),
                                                    tensor.max_lead() + 1, tensor.max_lead(),
                                                    spec.transform(), periods);
    auto model = fit_diagonal(spec, set);
    model.info.periods = periods;
    return model;
}

MimicryDiagnostic mimicry(std::span<const double> forecast, std::span<const double> actual,
                          std::span<const double> lagged_actual) {
    if (forecast.size() != actual.size() || forecast.size() != lagged_actual.size()) {
        throw DimensionError("mimicry: series lengths differ");
    }
    const std::vector<double> f(forecast.begin(), forecast.end());
    MimicryDiagnostic d;
    d.corr_lagged = dataset::correlation(f, {lagged_actual.begin(), lagged_actual.end()});
    d.corr_aligned = dataset::correlation(f, {actual.begin(), actual.end()});
    d.flagged = d.corr_lagged > d.corr_aligned + 0.1;
    return d;
}

MimicryDiagnostic mimicry(std::span<const double> forecast, std::span<const double> actual) {
    if (forecast.size() != actual.size()) {
        throw DimensionError("mimicry: series lengths differ");
    }
    if (forecast.size() < 2) {
        return {};
    }
    return mimicry(forecast.subspan(1), actual.subspan(1), actual.first(actual.size() - 1));
}

ForecastReport best_forecast_report(const Leaderboard& board, const PreorderTensor& tensor,
                                    std::size_t item) {
    if (item >= board.items.size()) {
        throw RangeError("item index " + std::to_string(item) + " is not in the leaderboard");
    }
    ForecastReport report;
    report.item = board.items[item];
    report.periods = board.test_periods;
    report.actual = board.actuals[item];
    if (!board.best[item]) {
        return report;
    }
    const auto s = *board.best[item];
    report.spec = board.specs[s].name();
    report.forecast = board.cell(item, s).forecast;
    std::vector<double> lagged;
    for (const int t : report.periods) {
        lagged.push_back(tensor.value(item, t - 1, 0));
    }
    report.diagnostic = mimicry(report.forecast, report.actual, lagged);
    return report;
}

std::string format_number(double v) {
    if (std::isnan(v)) {
        return {};
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_leaderboard_csv(std::ostream& out, const Leaderboard& board) {
    out << "spec,family,feeding,transform,mean_smape,median_smape,diag_mean_smape,items,failures,"
           "best_count\n";
    for (const auto& r : board.rows) {
        out << r.spec << ',' << r.family << ',' << r.feeding << ',' << r.transform << ','
            << format_number(r.mean_smape) << ',' << format_number(r.median_smape) << ','
            << format_number(r.diag_mean_smape) << ',' << r.items << ',' << r.failures << ','
            << r.best_count << '\n';
    }
}

void write_assignments_csv(std::ostream& out, const Leaderboard& board) {
    out << "item,best_spec,smape\n";
    for (std::size_t i = 0; i < board.items.size(); ++i) {
        out << board.items[i] << ',';
        if (board.best[i]) {
            out << board.specs[*board.best[i]].name() << ','
                << format_number(board.cell(i, *board.best[i]).smape);
        } else {
            out << ',';
        }
        out << '\n';
    }
}

void write_forecasts_csv(std::ostream& out, const Leaderboard& board) {
    out << "item,spec,period,actual,forecast,is_best\n";
    for (std::size_t i = 0; i < board.items.size(); ++i) {
        for (std::size_t s = 0; s < board.specs.size(); ++s) {
            const auto& c = board.cell(i, s);
            if (!c.ok) {
                continue;
            }
            for (std::size_t k = 0; k < c.forecast.size(); ++k) {
                out << board.items[i] << ',' << board.specs[s].name() << ',' << board.test_periods[k]
                    << ',' << format_number(board.actuals[i][k]) << ',' << format_number(c.forecast[k])
                    << ',' << (board.best[i] == s ? 1 : 0) << '\n';
            }
        }
    }
}

void write_cells_csv(std::ostream& out, const Leaderboard& board) {
    out << "item,spec,status,smape,diag_smape,error\n";
    for (std::size_t i = 0; i < board.items.size(); ++i) {
        for (std::size_t s = 0; s < board.specs.size(); ++s) {
            const auto& c = board.cell(i, s);
            std::string error = c.error;
            std::replace(error.begin(), error.end(), '"', '\'');
            out << board.items[i] << ',' << board.specs[s].name() << ',' << (c.ok ? "ok" : "failed")
                << ',' << format_number(c.smape) << ',' << format_number(c.diag_smape) << ",\""
                << error << "\"\n";
        }
    }
}

void write_report_csv(std::ostream& out, const ForecastReport& report) {
    out << "period,actual,forecast\n";
    for (std::size_t k = 0; k < report.periods.size(); ++k) {
        out << report.periods[k] << ',' << format_number(report.actual[k]) << ','
            << (k < report.forecast.size() ? format_number(report.forecast[k]) : std::string()) << '\n';
    }
}

} // namespace hierfcst::eval
