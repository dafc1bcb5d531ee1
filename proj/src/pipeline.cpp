#include <hierfcst/pipeline.hpp>

#include <hierfcst/models/model.hpp>
#include <hierfcst/parallel.hpp>
#include <hierfcst/preprocess.hpp>
#include <hierfcst/tda/selector.hpp>
#include <hierfcst/trmf.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

namespace hierfcst::pipeline {
namespace fs = std::filesystem;

std::string_view to_string(Stage stage) {
    switch (stage) {
    case Stage::config:
        return "config";
    case Stage::ingest:
        return "ingest";
    case Stage::synth:
        return "synth";
    case Stage::transform:
        return "transform";
    case Stage::train:
        return "train";
    case Stage::trmf:
        return "trmf";
    case Stage::backtest:
        return "backtest";
    case Stage::select:
        return "select";
    case Stage::report:
        return "report";
    }
    return "unknown";
}

namespace {

fs::path incomplete_path(const fs::path& path) {
    return fs::path(path.string() + ".incomplete");
}

void ensure_parent(const fs::path& path) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
}

// Produces `path` through its `.incomplete` twin.
void commit_with(const fs::path& path, const std::function<void(const fs::path&)>& produce) {
    ensure_parent(path);
    const auto tmp = incomplete_path(path);
    produce(tmp);
    fs::rename(tmp, path);
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
    return path.parent_path() / (path.stem().string() + suffix);
}

void write_resolved_config(const config::RunConfig& cfg, const fs::path& dir) {
    write_artifact(dir / "resolved_config.ini", [&](std::ostream& out) {
        out << "; hierfcst " << config::kVersion << " resolved configuration\n";
        cfg.write(out);
    });
}

fs::path dir_of(const fs::path& file) {
    return file.has_parent_path() ? file.parent_path() : fs::path(".");
}

int periods_value(const config::RunConfig& cfg, const std::string& key, int total) {
    const auto& v = cfg.get(key);
    if (v == "all") {
        return total;
    }
    if (v == "train") {
        return static_cast<int>(cfg.get_int("backtest.train_periods"));
    }
    const auto p = static_cast<int>(cfg.get_int(key));
    if (p < 1 || p > total) {
        throw ConfigError("'" + key + "' = " + v + " is outside [1, " + std::to_string(total) + "]");
    }
    return p;
}

int leads_value(const config::RunConfig& cfg, const std::string& key, int fallback) {
    return cfg.get(key) == "auto" ? fallback : static_cast<int>(cfg.get_int(key));
}

std::string file_name_for(std::string id) {
    for (auto& c : id) {
        if (c == '/' || c == '\\' || c == ':' || c == '\0') {
            c = '_';
        }
    }
    return id.empty() || id == "." || id == ".." ? "_" + id : id;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream in(line);
    std::string part;
    while (std::getline(in, part, ',')) {
        out.push_back(part);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

eval::BacktestSplit split_of(const config::RunConfig& cfg) {
    eval::BacktestSplit split;
    split.train_periods = static_cast<int>(cfg.get_int("backtest.train_periods"));
    split.test_periods = static_cast<int>(cfg.get_int("backtest.test_periods"));
    return split;
}

eval::BacktestOptions options_of(const config::RunConfig& cfg) {
    eval::BacktestOptions options;
    options.jobs = static_cast<int>(cfg.get_int("run.jobs"));
    options.feature_window = static_cast<int>(cfg.get_int("backtest.feature_window"));
    if (options.jobs < 1) {
        throw ConfigError("run.jobs must be >= 1");
    }
    return options;
}

fs::path cache_path(const config::RunConfig& cfg) {
    return cfg.output_path("data.cache", "tensor.bin");
}

void save_tensor(const fs::path& path, const dataset::PreorderTensor& tensor) {
    commit_with(path, [&](const fs::path& tmp) {
        dataset::save_cache(tmp, tensor);
        if (!(dataset::load_cache(tmp) == tensor)) {
            throw FormatError("tensor cache does not round-trip");
        }
    });
}

} // namespace

void write_artifact(const fs::path& path, const std::function<void(std::ostream&)>& fill) {
    commit_with(path, [&](const fs::path& tmp) {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw Error("cannot write '" + tmp.string() + "'");
        }
        fill(out);
        out.close();
        if (!out) {
            throw Error("write to '" + tmp.string() + "' failed");
        }
    });
}

dataset::PreorderTensor load_data(const config::RunConfig& cfg) {
    const auto cache = cache_path(cfg);
    if (fs::exists(cache)) {
        return dataset::load_cache(cache);
    }
    const auto& input = cfg.get("data.input");
    if (input.empty()) {
        throw ConfigError("no data: '" + cache.string() +
                          "' does not exist and data.input is not set");
    }
    dataset::LoadOptions options;
    options.missing_as_zero = cfg.get_bool("data.missing_as_zero");
    options.max_lead = static_cast<int>(cfg.get_int("data.max_lead"));
    return dataset::load_csv(input, options);
}

void ingest(const config::RunConfig& cfg, std::ostream& log) {
    const auto& input = cfg.get("data.input");
    if (input.empty()) {
        throw ConfigError("ingest needs data.input (--input)");
    }
    dataset::LoadOptions options;
    options.missing_as_zero = cfg.get_bool("data.missing_as_zero");
    options.max_lead = static_cast<int>(cfg.get_int("data.max_lead"));
    dataset::LoadStats stats;
    const auto tensor = dataset::load_csv(input, options, &stats);
    const auto out = cache_path(cfg);
    save_tensor(out, tensor);
    write_resolved_config(cfg, dir_of(out));
    log << "ingest: " << stats.records << " records, " << stats.dropped_records
        << " dropped beyond lead " << options.max_lead << "; " << tensor.n_items() << " items x "
        << tensor.periods() << " periods x " << tensor.max_lead() << " leads -> " << out.string()
        << '\n';
}

void synth(const config::RunConfig& cfg, std::ostream& log) {
    const auto regime = dataset::parse_regime(cfg.get("synth.regime"));
    const auto items = cfg.get_int("synth.items");
    const auto periods = cfg.get_int("synth.periods");
    const auto leads = cfg.get_int("synth.leads");
    if (items < 1 || periods < 1 || leads < 1) {
        throw ConfigError("synth needs items, periods and leads >= 1");
    }
    const auto tensor = dataset::synthesize(cfg.stage_seed("synth"), static_cast<std::size_t>(items),
                                            static_cast<int>(periods), static_cast<int>(leads), regime);
    const auto out = cache_path(cfg);
    save_tensor(out, tensor);
    if (!cfg.get("synth.csv").empty()) {
        write_artifact(cfg.get("synth.csv"), [&](std::ostream& os) { dataset::write_csv(os, tensor); });
    }
    write_resolved_config(cfg, dir_of(out));
    log << "synth: " << dataset::to_string(regime) << ' ' << items << " items x " << periods
        << " periods x " << leads << " leads -> " << out.string() << '\n';
}

void transform(const config::RunConfig& cfg, std::ostream& log) {
    const auto tensor = load_data(cfg);
    const int leads = leads_value(cfg, "transform.leads", tensor.max_lead());
    const int window = leads_value(cfg, "transform.window", leads + 1);
    preprocess::validate_window(window, leads);
    if (leads > tensor.max_lead()) {
        throw ConfigError("transform.leads = " + std::to_string(leads) + " exceeds the data's " +
                          std::to_string(tensor.max_lead()) + " lead slots");
    }
    const int periods = periods_value(cfg, "transform.periods", tensor.periods());
    const auto kind = preprocess::parse_transform_kind(cfg.get("transform.kind"));
    auto scope = preprocess::ItemScope::all_items();
    const auto& scope_name = cfg.get("transform.scope");
    if (scope_name == "one") {
        const auto item = tensor.find_item(cfg.get("transform.item"));
        if (!item) {
            throw ConfigError("transform.item '" + cfg.get("transform.item") + "' is not in the data");
        }
        scope = preprocess::ItemScope::one_item(*item);
    } else if (scope_name != "all") {
        throw ConfigError("transform.scope must be 'one' or 'all'");
    }
    const auto set = preprocess::build_training_set(tensor, scope, window, leads, kind, periods);
    const auto out = cfg.output_path("transform.output", "supervised.bin");
    commit_with(out, [&](const fs::path& tmp) { preprocess::save_training_set(tmp, set, tensor.items()); });
    write_resolved_config(cfg, dir_of(out));
    log << "transform: " << set.X.rows() << " samples, " << set.X.cols() << " inputs, "
        << set.Y.cols() << " targets (" << preprocess::to_string(kind) << ") -> " << out.string()
        << '\n';
}

void train(const config::RunConfig& cfg, std::ostream& log) {
    const auto tensor = load_data(cfg);
    const auto specs = cfg.specs();
    const int periods = periods_value(cfg, "train.periods", tensor.periods());
    const auto options = options_of(cfg);
    const auto dir = cfg.output_path("train.out", "models");
    fs::create_directories(dir);

    std::vector<std::string> failures;
    std::mutex failures_mutex;
    std::size_t written = 0;
    for (const auto& spec : specs) {
        const auto spec_dir = dir / file_name_for(spec.name());
        if (spec.family() == models::Family::trmf) {
            log << "train: " << spec.name() << " is a panel factorization; see the trmf stage\n";
            continue;
        }
        if (spec.feeding() == models::FeedingMode::df_all_items) {
            const auto model = eval::fit_panel_model(tensor, spec, periods);
            const auto path = spec_dir / "all_items.model";
            commit_with(path, [&](const fs::path& tmp) { models::save_model(tmp, model); });
            ++written;
            continue;
        }
        fs::create_directories(spec_dir);
        std::vector<int> ok(tensor.n_items(), 0);
        parallel_for(tensor.n_items(), options.jobs, [&](std::size_t i) {
            try {
                const auto model = eval::fit_item_model(tensor, spec, i, periods, options);
                const auto path = spec_dir / (file_name_for(tensor.items()[i]) + ".model");
                commit_with(path, [&](const fs::path& tmp) { models::save_model(tmp, model); });
                ok[i] = 1;
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                const std::lock_guard lock(failures_mutex);
                failures.push_back(spec.name() + ',' + tensor.items()[i] + ",\"" + e.what() + '"');
            }
        });
        written += static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
    }
    std::sort(failures.begin(), failures.end());
    write_artifact(dir / "train_failures.csv", [&](std::ostream& out) {
        out << "spec,item,error\n";
        for (const auto& f : failures) {
            out << f << '\n';
        }
    });
    write_resolved_config(cfg, dir);
    log << "train: " << written << " models, " << failures.size() << " failures -> " << dir.string()
        << '\n';
}

void trmf(const config::RunConfig& cfg, std::ostream& log) {
    const auto tensor = load_data(cfg);
    const int periods = periods_value(cfg, "trmf.periods", tensor.periods());
    const auto kind = preprocess::parse_transform_kind(cfg.get("trmf.transform"));
    trmf::TrmfConfig tc;
    tc.rank = static_cast<int>(cfg.get_int("trmf.rank"));
    tc.ar_order = static_cast<int>(cfg.get_int("trmf.ar_order"));
    tc.lambda_f = cfg.get_double("trmf.lambda_f");
    tc.lambda_z = cfg.get_double("trmf.lambda_z");
    tc.lambda_ar = cfg.get_double("trmf.lambda_ar");
    tc.max_sweeps = static_cast<int>(cfg.get_int("trmf.sweeps"));
    tc.tol = cfg.get_double("trmf.tol");
    tc.seed = cfg.stage_seed("trmf");
    tc.density_floor = cfg.get_double("trmf.density_floor");
    tc.allow_sparse = cfg.get_bool("trmf.allow_sparse");
    const int horizon = static_cast<int>(cfg.get_int("trmf.horizon"));
    if (horizon < 1) {
        throw ConfigError("trmf.horizon must be >= 1");
    }

    const auto n = static_cast<Eigen::Index>(tensor.n_items());
    std::vector<preprocess::TargetTransform> transforms;
    Eigen::MatrixXd Y(periods, n);
    trmf::Mask mask(periods, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto item = static_cast<std::size_t>(i);
        transforms.push_back(preprocess::fit_item_transform(tensor, item, kind, periods));
        for (int t = 0; t < periods; ++t) {
            Y(t, i) = transforms.back().forward(tensor.value(item, t, 0));
            mask(t, i) = tensor.observed(item, t, 0);
        }
    }
    const auto model = trmf::factorize(Y, mask, tc);
    for (const auto& w : model.warnings) {
        log << "trmf: warning: " << w << '\n';
    }
    const Eigen::MatrixXd fc = trmf::forecast(model, horizon);

    const auto dir = cfg.output_path("trmf.out", "trmf");
    fs::create_directories(dir);
    write_artifact(dir / "Z.csv", [&](std::ostream& out) {
        out << "period";
        for (Eigen::Index j = 0; j < model.rank(); ++j) {
            out << ",z" << j;
        }
        out << '\n';
        for (Eigen::Index t = 0; t < model.periods(); ++t) {
            out << t;
            for (Eigen::Index j = 0; j < model.rank(); ++j) {
                out << ',' << eval::format_number(model.Z(t, j));
            }
            out << '\n';
        }
    });
    write_artifact(dir / "F.csv", [&](std::ostream& out) {
        out << "item";
        for (Eigen::Index j = 0; j < model.rank(); ++j) {
            out << ",f" << j;
        }
        out << '\n';
        for (Eigen::Index i = 0; i < n; ++i) {
            out << tensor.items()[static_cast<std::size_t>(i)];
            for (Eigen::Index j = 0; j < model.rank(); ++j) {
                out << ',' << eval::format_number(model.F(j, i));
            }
            out << '\n';
        }
    });
    write_artifact(dir / "phi.csv", [&](std::ostream& out) {
        out << "factor";
        for (Eigen::Index l = 0; l < model.ar_order(); ++l) {
            out << ",lag" << l + 1;
        }
        out << '\n';
        for (Eigen::Index j = 0; j < model.rank(); ++j) {
            out << j;
            for (Eigen::Index l = 0; l < model.ar_order(); ++l) {
                out << ',' << eval::format_number(model.phi(j, l));
            }
            out << '\n';
        }
    });
    write_artifact(dir / "objective.csv", [&](std::ostream& out) {
        out << "sweep,objective\n";
        for (std::size_t s = 0; s < model.objective_trace.size(); ++s) {
            out << s << ',' << eval::format_number(model.objective_trace[s]) << '\n';
        }
    });
    write_artifact(dir / "forecast.csv", [&](std::ostream& out) {
        out << "item,period,forecast\n";
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& tr = transforms[static_cast<std::size_t>(i)];
            for (int h = 0; h < horizon; ++h) {
                out << tensor.items()[static_cast<std::size_t>(i)] << ',' << periods + h << ','
                    << eval::format_number(std::max(0.0, tr.inverse(fc(h, i)))) << '\n';
            }
        }
    });
    write_resolved_config(cfg, dir);
    log << "trmf: rank " << tc.rank << ", AR(" << tc.ar_order << "), " << model.sweeps << " sweeps"
        << (model.converged ? " (converged)" : "") << ", objective "
        << eval::format_number(model.objective_trace.back()) << " -> " << dir.string() << '\n';
}

void backtest(const config::RunConfig& cfg, std::ostream& log) {
    const auto tensor = load_data(cfg);
    const auto specs = cfg.specs();
    const auto board = eval::backtest(tensor, specs, split_of(cfg), options_of(cfg));
    const auto out = cfg.output_path("backtest.out", "leaderboard.csv");
    write_artifact(out, [&](std::ostream& os) { eval::write_leaderboard_csv(os, board); });
    write_artifact(sibling(out, "_assignments.csv"),
                   [&](std::ostream& os) { eval::write_assignments_csv(os, board); });
    write_artifact(sibling(out, "_forecasts.csv"),
                   [&](std::ostream& os) { eval::write_forecasts_csv(os, board); });
    write_artifact(sibling(out, "_cells.csv"), [&](std::ostream& os) { eval::write_cells_csv(os, board); });
    write_resolved_config(cfg, dir_of(out));
    for (const auto& row : board.rows) {
        log << "backtest: " << row.spec << " mean " << eval::format_number(row.mean_smape)
            << " median " << eval::format_number(row.median_smape) << " best " << row.best_count
            << " failures " << row.failures << '\n';
    }
}

void select(const config::RunConfig& cfg, std::ostream& log) {
    const auto tensor = load_data(cfg);
    auto assignments = cfg.get("select.assignments");
    if (assignments.empty()) {
        assignments = sibling(cfg.output_path("backtest.out", "leaderboard.csv"), "_assignments.csv").string();
    }
    std::ifstream in(assignments);
    if (!in) {
        throw ConfigError("cannot open assignments '" + assignments + "'");
    }
    const auto allowed_list = cfg.get_list("select.models");
    const std::set<std::string> allowed(allowed_list.begin(), allowed_list.end());
    std::map<std::string, std::string> best;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto fields = split_csv_line(line);
        if (fields.size() >= 2 && !fields[1].empty() && (allowed.empty() || allowed.count(fields[1]))) {
            best[fields[0]] = fields[1];
        }
    }

    const auto subset = static_cast<std::size_t>(cfg.get_int("select.subset"));
    std::vector<std::vector<double>> series;
    std::vector<std::string> ids;
    std::vector<std::string> labels;
    std::vector<bool> in_training(tensor.n_items(), false);
    for (std::size_t i = 0; i < tensor.n_items() && ids.size() < subset; ++i) {
        const auto it = best.find(tensor.items()[i]);
        if (it != best.end()) {
            series.push_back(tensor.series(i, 0));
            ids.push_back(it->first);
            labels.push_back(it->second);
            in_training[i] = true;
        }
    }
    tda::SelectorParams params;
    params.mapper.intervals = static_cast<int>(cfg.get_int("select.intervals"));
    params.mapper.overlap = cfg.get_double("select.overlap");
    params.k = static_cast<int>(cfg.get_int("select.k"));
    params.min_cluster_size = static_cast<std::size_t>(cfg.get_int("select.min_cluster_size"));
    params.features = cfg.get_list("select.features");
    const auto result = tda::fit_selector(series, ids, labels, params);

    const auto out = cfg.output_path("select.out", "selector.bin");
    const auto graph = cfg.output_path("select.graph", "graph.json");
    commit_with(out, [&](const fs::path& tmp) {
        tda::save_selector(tmp, result.selector);
        if (!(tda::load_selector(tmp) == result.selector)) {
            throw FormatError("selector file does not round-trip");
        }
    });
    write_artifact(graph, [&](std::ostream& os) { tda::write_graph_json(os, result.graph, ids); });
    write_artifact(sibling(graph, ".dot"), [&](std::ostream& os) { tda::write_graph_dot(os, result.graph); });
    write_artifact(sibling(out, "_clusters.csv"),
                   [&](std::ostream& os) { tda::write_cluster_csv(os, result.selector); });

    std::size_t held_out = 0;
    std::size_t wrong = 0;
    write_artifact(sibling(out, "_routes.csv"), [&](std::ostream& os) {
        os << "item,routed_spec,best_spec,training\n";
        for (std::size_t i = 0; i < tensor.n_items(); ++i) {
            const auto& id = tensor.items()[i];
            const auto routed = result.selector.route(tensor.series(i, 0));
            const auto it = best.find(id);
            const std::string known = it == best.end() ? "" : it->second;
            if (!in_training[i] && !known.empty()) {
                ++held_out;
                wrong += routed != known ? 1 : 0;
            }
            os << id << ',' << routed << ',' << known << ',' << (in_training[i] ? 1 : 0) << '\n';
        }
    });
    write_resolved_config(cfg, dir_of(out));
    log << "select: " << ids.size() << " training series, " << result.graph.nodes.size() << " nodes, "
        << result.graph.edges.size() << " edges, " << result.selector.clusters.size() << " clusters";
    if (held_out > 0) {
        log << ", held-out selection error " << eval::format_number(static_cast<double>(wrong) / held_out)
            << " over " << held_out << " items";
    }
    log << '\n';
}

eval::ForecastReport report_from_forecasts(const fs::path& forecasts,
                                           const dataset::PreorderTensor& tensor,
                                           const std::string& item) {
    const auto index = tensor.find_item(item);
    if (!index) {
        throw ConfigError("item '" + item + "' is not in the data");
    }
    std::ifstream in(forecasts);
    if (!in) {
        throw ConfigError("cannot open forecasts '" + forecasts.string() + "'");
    }
    eval::ForecastReport report;
    report.item = item;
    std::string line;
    std::getline(in, line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto f = split_csv_line(line);
        if (f.size() != 6) {
            throw ParseError("expected 6 fields in forecasts CSV", line_no);
        }
        if (f[0] != item || f[5] != "1") {
            continue;
        }
        report.spec = f[1];
        report.periods.push_back(std::stoi(f[2]));
        report.actual.push_back(std::stod(f[3]));
        report.forecast.push_back(std::stod(f[4]));
    }
    if (!report.periods.empty()) {
        std::vector<double> lagged;
        for (const int t : report.periods) {
            lagged.push_back(t >= 1 ? tensor.value(*index, t - 1, 0) : 0.0);
        }
        report.diagnostic = eval::mimicry(report.forecast, report.actual, lagged);
    }
    return report;
}

void report(const config::RunConfig& cfg, std::ostream& out, std::ostream& log) {
    const auto tensor = load_data(cfg);
    auto forecasts = cfg.get("report.forecasts");
    if (forecasts.empty()) {
        forecasts = sibling(cfg.output_path("backtest.out", "leaderboard.csv"), "_forecasts.csv").string();
    }
    const auto& single = cfg.get("report.item");
    if (!single.empty() && cfg.get("report.out").empty()) {
        const auto r = report_from_forecasts(forecasts, tensor, single);
        eval::write_report_csv(out, r);
        log << "report: " << single << " best " << (r.spec.empty() ? "-" : r.spec)
            << " mimicry corr_lagged " << eval::format_number(r.diagnostic.corr_lagged)
            << " corr_aligned " << eval::format_number(r.diagnostic.corr_aligned)
            << (r.diagnostic.flagged ? " FLAGGED" : "") << '\n';
        return;
    }
    const auto dir = cfg.output_path("report.out", "reports");
    fs::create_directories(dir);
    std::vector<std::string> items = single.empty() ? tensor.items() : std::vector<std::string>{single};
    std::size_t flagged = 0;
    std::vector<eval::ForecastReport> reports;
    for (const auto& id : items) {
        reports.push_back(report_from_forecasts(forecasts, tensor, id));
    }
    for (const auto& r : reports) {
        write_artifact(dir / (file_name_for(r.item) + ".csv"),
                       [&](std::ostream& os) { eval::write_report_csv(os, r); });
        flagged += r.diagnostic.flagged ? 1 : 0;
    }
    write_artifact(dir / "mimicry.csv", [&](std::ostream& os) {
        os << "item,spec,corr_lagged,corr_aligned,flagged\n";
        for (const auto& r : reports) {
            os << r.item << ',' << r.spec << ',' << eval::format_number(r.diagnostic.corr_lagged) << ','
               << eval::format_number(r.diagnostic.corr_aligned) << ',' << (r.diagnostic.flagged ? 1 : 0)
               << '\n';
        }
    });
    write_resolved_config(cfg, dir);
    log << "report: " << reports.size() << " items, " << flagged << " flagged for lag-1 mimicry -> "
        << dir.string() << '\n';
}

void run_all(const config::RunConfig& cfg, std::ostream& log) {
    const auto stage = [&](Stage s, const std::function<void()>& fn) {
        try {
            fn();
        } catch (const StageError&) {
            throw;
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(s, e.what());
        }
    };
    // Validate everything the later stages need before producing anything.
    const auto specs = cfg.specs();
    options_of(cfg);
    fs::create_directories(cfg.get("run.out"));
    write_resolved_config(cfg, cfg.get("run.out"));

    if (!cfg.get("data.cache").empty() && fs::exists(cfg.get("data.cache")) &&
        cfg.get("data.input").empty()) {
        log << "data: using existing cache " << cfg.get("data.cache") << '\n';
    } else if (cfg.get("data.input").empty()) {
        stage(Stage::synth, [&] { synth(cfg, log); });
    } else {
        stage(Stage::ingest, [&] { ingest(cfg, log); });
    }
    stage(Stage::transform, [&] { transform(cfg, log); });
    stage(Stage::train, [&] { train(cfg, log); });
    stage(Stage::backtest, [&] { backtest(cfg, log); });
    stage(Stage::select, [&] { select(cfg, log); });
    stage(Stage::report, [&] {
        std::ostringstream unused;
        report(cfg, unused, log);
    });
}

int execute(Stage stage, const std::function<void()>& fn, std::ostream& err) {
    try {
        fn();
        return 0;
    } catch (const StageError& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(e.stage());
    } catch (const ConfigError& e) {
        err << "error: config: " << e.what() << '\n';
        return static_cast<int>(Stage::config);
    } catch (const std::exception& e) {
        err << "error: " << to_string(stage) << ": " << e.what() << '\n';
        return static_cast<int>(stage);
    }
}

} // namespace hierfcst::pipeline
